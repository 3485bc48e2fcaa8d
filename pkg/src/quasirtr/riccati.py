"""Riccati pencil eigenpairs, winding numbers, flux densities and the fundamental pair.

Eigenpairs of ``MM v = lambda NN v`` come in lattices ``lambda_0 * exp(-2 i pi k delta)``
with eigenfunctions ``exp(2 i pi k s) * phi_0``.  Truncation to finitely many
Fourier modes adds eigenpairs whose eigenvectors sit in the highest retained
modes; they approximate nothing and are flagged as unresolved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cell_solver import RtRSymbols
from .shift_ops import FourierFn, Pencil, op_modes, to_fourier

_TWO_PI = 2.0 * np.pi


class WindingError(ValueError):
    """Winding number undefined (the function comes too close to zero)."""


class ExtractionError(RuntimeError):
    def __init__(self, message: str, candidates=None):
        super().__init__(message)
        self.candidates = candidates or []


class ZeroFluxError(ExtractionError):
    """The fundamental pair cannot be identified from the pencil (zero-flux frequency)."""


# ---------------------------------------------------------------- winding numbers

def _refine_samples(samples: np.ndarray, factor: int) -> np.ndarray:
    n = samples.size
    c = np.fft.fft(samples)
    m = n * factor
    padded = np.zeros(m, dtype=complex)
    half = n // 2
    padded[:half] = c[:half]
    padded[m - half + 1:] = c[half + 1:]
    padded[half] += 0.5 * c[half]
    padded[m - half] += 0.5 * c[half]
    return np.fft.ifft(padded) * factor


def winding_number(samples, floor_tol: float = 1e-8, max_refine: int = 8) -> tuple[int, float]:
    """Winding number of a periodic function given by equispaced samples over one period.

    Returns the integer and the distance of the accumulated turn count to it.
    Argument increments above pi/2 trigger trigonometric refinement (power of
    two sample counts only), up to ``max_refine`` times more points.
    """
    f = np.asarray(samples, dtype=complex)
    scale = np.abs(f).max()
    if scale == 0 or np.abs(f).min() < floor_tol * scale:
        raise WindingError("function vanishes (relative to floor tolerance) on the grid")
    factor = 1
    while True:
        steps = np.angle(np.roll(f, -1) / f)
        if np.abs(steps).max() < np.pi / 2 or factor >= max_refine or f.size & (f.size - 1):
            break
        factor *= 2
        f = _refine_samples(np.asarray(samples, dtype=complex), factor)
        if np.abs(f).min() < floor_tol * scale:
            raise WindingError("function vanishes on the refined grid")
    if np.abs(steps).max() >= np.pi / 2:
        raise WindingError("argument increments too large even after refinement")
    turns = steps.sum() / _TWO_PI
    w = int(np.rint(turns))
    return w, float(abs(turns - w))


def fourier_winding(f: FourierFn, refine: int = 8, floor_tol: float = 1e-8) -> int:
    return winding_number(f.refine(refine), floor_tol=floor_tol)[0]


# ---------------------------------------------------------------- flux density

def _side_delta(side: str, delta: float) -> float:
    return delta if side == "right" else -delta


def flux_density(phi: FourierFn, psi: FourierFn, symbols: RtRSymbols, delta: float):
    """Flux density ``Q_s`` on the symbol grid with its mean and standard deviation.

    ``Q_s = Re[((1 - t00) phi - t10 psi(s+d)) * conj((1 + t00) phi + t10 psi(s+d))]``
    with ``d = delta`` on the right and ``-delta`` on the left.
    """
    d = _side_delta(symbols.side, delta)
    s = symbols.s_grid
    ph = phi(s)
    ps = psi(s + d)
    a = (1.0 - symbols.t00) * ph - symbols.t10 * ps
    b = (1.0 + symbols.t00) * ph + symbols.t10 * ps
    q = np.real(a * np.conj(b))
    return q, float(q.mean()), float(q.std())


def polarized_flux(pair1, pair2, symbols: RtRSymbols, delta: float) -> complex:
    """``int_0^1 q_s(Phi1, Phi2) ds`` for the sesquilinear form polarizing ``Q_s``."""
    d = _side_delta(symbols.side, delta)
    s = symbols.s_grid

    def parts(pair):
        phi, psi = pair
        ph, ps = phi(s), psi(s + d)
        return ((1.0 - symbols.t00) * ph - symbols.t10 * ps,
                (1.0 + symbols.t00) * ph + symbols.t10 * ps)

    a1, b1 = parts(pair1)
    a2, b2 = parts(pair2)
    q = 0.5 * (a1 * np.conj(b2) + np.conj(a2 * np.conj(b1)))
    return complex(q.mean())


# ---------------------------------------------------------------- pencil eigenpairs

@dataclass
class RiccatiEigenpair:
    lam: complex
    phi: FourierFn
    psi: FourierFn
    winding_phi: int | None
    winding_psi: int | None
    flux: float
    flux_std: float
    modulus_class: str
    tail: float
    residual: float

    @property
    def resolved(self) -> bool:
        return self.tail < RESOLVED_TAIL


RESOLVED_TAIL = 1e-3


@dataclass
class PencilSpectrum:
    pairs: list[RiccatiEigenpair]
    infinite: list[complex] = field(default_factory=list)
    side: str = "right"

    def resolved(self) -> list[RiccatiEigenpair]:
        return [p for p in self.pairs if p.resolved]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])


def _safe_winding(f: FourierFn) -> int | None:
    try:
        return fourier_winding(f)
    except WindingError:
        return None


def solve_pencil(pencil: Pencil, symbols: RtRSymbols | None = None, delta: float = 0.0,
                 tol_circle: float = 1e-3) -> PencilSpectrum:
    """All finite generalized eigenpairs of the pencil, with winding, flux and resolution data."""
    MM, NN = pencil.MM, pencil.NN
    if not (np.all(np.isfinite(MM)) and np.all(np.isfinite(NN))):
        raise ValueError("pencil contains non-finite entries")
    try:
        ab, V = scipy.linalg.eig(MM, NN, homogeneous_eigvals=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(NN)
        raise RuntimeError(f"generalized eigensolver failed ({exc}); cond(NN)={cond:.3e}") from exc
    alpha, beta = ab
    n = pencil.n
    K = n + 1
    km = np.abs(op_modes(K))
    big = km >= K // 4
    normM = np.linalg.norm(MM, 2)
    normN = np.linalg.norm(NN, 2)
    pairs, infinite = [], []
    for j in range(2 * n):
        if abs(beta[j]) <= 1e-13 * max(abs(alpha[j]), 1.0) * normN:
            infinite.append(complex(alpha[j]) / complex(beta[j]) if beta[j] != 0 else complex(np.inf))
            continue
        lam = complex(alpha[j] / beta[j])
        v = V[:, j] / np.linalg.norm(V[:, j])
        res = np.linalg.norm(MM @ v - lam * (NN @ v)) / (normM + abs(lam) * normN)
        e = np.abs(v[:n]) ** 2 + np.abs(v[n:]) ** 2
        tail = float(e[big].sum() / e.sum())
        phi = FourierFn.from_op(v[:n])
        psi = FourierFn.from_op(v[n:])
        if symbols is not None:
            _, qm, qs = flux_density(phi, psi, symbols, delta)
        else:
            qm, qs = float("nan"), float("nan")
        r = abs(lam)
        cls = "on_circle" if abs(r - 1.0) < tol_circle else ("inside" if r < 1.0 else "outside")
        pairs.append(RiccatiEigenpair(lam, phi, psi, _safe_winding(phi), _safe_winding(psi), qm, qs, cls,
                                      tail, float(res)))
    return PencilSpectrum(pairs, infinite, pencil.side)


# ---------------------------------------------------------------- classification

@dataclass
class FrequencyClass:
    omega: float
    cls: str
    lambda0_right: complex | None = None
    lambda0_left: complex | None = None
    n_resolved: int = 0
    n_on_circle: int = 0
    max_flux: float = float("nan")


def classify_frequency(spectrum: PencilSpectrum, omega: float = float("nan"), tol_circle: float = 1e-3,
                       tol_flux: float | None = None) -> FrequencyClass:
    """Evanescent, propagative or zero-flux, from the resolved eigenvalues of the limit pencil."""
    pairs = spectrum.resolved()
    if not pairs:
        raise ExtractionError("no resolved eigenpair in the pencil spectrum")
    on = [p for p in pairs if abs(abs(p.lam) - 1.0) < tol_circle]
    fluxes = np.array([abs(p.flux) for p in pairs])
    qmax = float(np.nanmax(fluxes)) if fluxes.size else float("nan")
    if not on:
        cls = "evanescent"
    elif len(on) == len(pairs):
        # flux tolerance relative to the flux scale of unit-normalized eigenvectors
        limit = 1e-6 * max(qmax, 1e-300) if tol_flux is None else tol_flux
        cls = "propagative" if qmax > limit and qmax > 1e-10 else "zero_flux"
    else:
        cls = "zero_flux"
    return FrequencyClass(omega, cls, n_resolved=len(pairs), n_on_circle=len(on), max_flux=qmax)


# ---------------------------------------------------------------- fundamental pair

@dataclass
class FundamentalPair:
    side: str
    lambda0: complex
    phi0: FourierFn
    psi0: FourierFn
    Q0: float
    regime: str
    omega: float
    epsilon: float
    z: complex
    delta: float = float("nan")

    @property
    def nu(self) -> int:
        return 1 if self.side == "right" else -1


def _value_at_zero(f: FourierFn) -> complex:
    return complex(f(0.0))


def _candidates_right(pairs, regime, cls, tol):
    out = []
    for p in pairs:
        if p.winding_phi != 0:
            continue
        if regime == "limit" and cls == "propagative":
            if p.flux > 0:
                out.append(p)
        elif abs(p.lam) < 1.0 - tol:
            out.append(p)
    return out


def _candidates_left(pairs, regime, cls, tol):
    out = []
    for p in pairs:
        if p.winding_psi != 0:
            continue
        if regime == "limit" and cls == "propagative":
            if p.flux < 0:
                out.append(p)
        elif abs(p.lam) > 1.0 + tol:
            out.append(p)
    return out


def extract_fundamental(spectrum: PencilSpectrum, side: str, regime: str, symbols_right: RtRSymbols,
                        delta: float, tol: float = 1e-3, cls: str | None = None,
                        symbols_left: RtRSymbols | None = None) -> FundamentalPair:
    """Select the fundamental pair of the requested side from the right pencil spectrum.

    Right: eigenvalue inside the unit circle (or positive flux at a propagative
    limit frequency) with ``winding(phi) = 0``; normalized by ``phi(0) = 1``.
    Left: eigenvalue outside (or negative flux) with ``winding(psi) = 0``; the
    left pair is ``(1 / lambda, psi / psi(0), phi / psi(0))``.
    """
    if regime not in ("absorbing", "limit"):
        raise ValueError(f"bad regime {regime!r}")
    if cls is None:
        cls = classify_frequency(spectrum, tol_circle=tol).cls if regime == "limit" else "evanescent"
    if regime == "limit" and cls == "zero_flux":
        raise ZeroFluxError("zero-flux frequency: the fundamental pair cannot be identified")
    pairs = [p for p in spectrum.resolved() if p.residual < 1e-8]
    if side == "right":
        cands = _candidates_right(pairs, regime, cls, tol)
    elif side == "left":
        cands = _candidates_left(pairs, regime, cls, tol)
    else:
        raise ValueError(f"bad side {side!r}")
    if len(cands) != 1:
        raise ExtractionError(f"{len(cands)} candidates for the {side} fundamental pair "
                              f"(regime {regime}, class {cls})", [p.lam for p in cands])
    p = cands[0]
    if side == "right":
        c = _value_at_zero(p.phi)
        lam, phi0, psi0 = p.lam, p.phi.scaled(1 / c), p.psi.scaled(1 / c)
        syms = symbols_right
    else:
        c = _value_at_zero(p.psi)
        lam, phi0, psi0 = 1.0 / p.lam, p.psi.scaled(1 / c), p.phi.scaled(1 / c)
        syms = symbols_left if symbols_left is not None else left_symbols_from_right(symbols_right, delta)
    _, q0, _ = flux_density(phi0, psi0, syms, delta)
    return FundamentalPair(side, complex(lam), phi0, psi0, q0, regime, symbols_right.omega,
                           symbols_right.epsilon, symbols_right.z, delta)


def left_symbols_from_right(right: RtRSymbols, delta: float) -> RtRSymbols:
    """Left symbols by exact Fourier translation of the right ones (no new cell solves)."""
    def back(v):
        return to_fourier(v).shifted(-delta).samples()

    return RtRSymbols("left", right.omega, right.epsilon, right.z, right.s_grid.copy(),
                      back(right.t11), back(right.t10), back(right.t01), back(right.t00))


def reconstruct_spectrum(lambda0: complex, side: str, delta: float, count: int) -> np.ndarray:
    k = np.arange(-count, count + 1)
    sign = -1 if side == "right" else 1
    return lambda0 * np.exp(sign * _TWO_PI * 1j * k * delta)


# ---------------------------------------------------------------- small divisors

@dataclass
class DifferenceCheck:
    phi_residual: float
    lambda_residual: float
    lambda_from_log: complex
    phi_from_log: FourierFn


def continuous_log(samples: np.ndarray) -> np.ndarray:
    """Logarithm with a continuous argument along the closed sample path."""
    f = np.asarray(samples, dtype=complex)
    steps = np.angle(np.roll(f, -1) / f)
    arg = np.angle(f[0]) + np.concatenate(([0.0], np.cumsum(steps[:-1])))
    return np.log(np.abs(f)) + 1j * arg


def difference_equation_check(fund: FundamentalPair, delta: float, refine: int = 1) -> DifferenceCheck:
    """Rebuild the fundamental pair from the log of its propagation symbol.

    ``p(s) = lambda0 phi0(s + nu delta) / phi0(s)``; with ``g = log p`` on a
    continuous branch, ``v_k = g_k / (exp(2 i pi k nu delta) - 1)`` for ``k != 0``
    solves ``v(s + nu delta) - v(s) = g(s) - g_0``, so ``exp(v)`` should match
    ``phi0`` and ``exp(g_0)`` should match ``lambda0``.
    """
    K = fund.phi0.K * refine
    s = np.arange(K) / K
    d = fund.nu * delta
    phi = fund.phi0(s)
    if np.abs(phi).min() < 1e-12 * np.abs(phi).max():
        raise WindingError("phi0 vanishes on the grid")
    p = fund.lambda0 * fund.phi0(s + d) / phi
    w, _ = winding_number(p)
    if w != 0:
        raise WindingError(f"propagation symbol has winding number {w}")
    g = continuous_log(p)
    gk = np.fft.fft(g) / K
    k = np.fft.fftfreq(K, 1.0 / K)
    vk = np.zeros(K, dtype=complex)
    nz = k != 0
    vk[nz] = gk[nz] / (np.exp(_TWO_PI * 1j * k[nz] * d) - 1.0)
    # the unpaired top mode is dropped, consistently with the operator discretization
    vk[K // 2] = 0.0
    v = np.fft.ifft(vk) * K
    ev = np.exp(v - v[0])
    lam_log = complex(np.exp(gk[0]))
    err_phi = float(np.abs(ev - phi).max() / np.abs(phi).max())
    return DifferenceCheck(err_phi, abs(lam_log - fund.lambda0), lam_log, to_fourier(ev))
