"""Half-line solutions from the fundamental pair: propagation/scattering symbols,
RtR and DtN coefficients, cell-by-cell reconstruction and the lifted half-guide.

On the right half-line attached at ``a`` the fiber offset is ``s* = a * theta1``;
cell ``n`` covers ``(a + nL, a + (n+1)L)`` with ``L = 1 / theta2``.  The left
half-line is handled in the reflected variable ``x = a - position``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cell_solver import RtRSymbols, SegmentMesh, rtr_symbols, solve_right_pair
from .medium import MediumSpec
from .riccati import (ExtractionError, FrequencyClass, FundamentalPair, PencilSpectrum, WindingError,
                      classify_frequency, extract_fundamental, left_symbols_from_right, solve_pencil,
                      winding_number)
from .shift_ops import FourierFn, Pencil, local_operators, op_modes, pencil_from_symbols, tail_energy_fraction, \
    to_fourier, weighted_shift_op


ABSORBING_SEPARATION = 1e-9


class SingularImpedanceError(ZeroDivisionError):
    """The RtR coefficient sits at the pole ``Lambda = -1`` of the DtN conversion."""


# ---------------------------------------------------------------- symbols

@dataclass
class PropScatterSymbols:
    side: str
    p: FourierFn
    s_sym: FourierFn
    delta: float

    @property
    def nu(self) -> int:
        return 1 if self.side == "right" else -1


def build_symbols(fund: FundamentalPair, K: int | None = None) -> PropScatterSymbols:
    """``p(s) = lambda0 phi0(s + nu delta) / phi0(s)`` and ``s(s) = psi0(s + nu delta) / phi0(s)``.

    ``p`` and ``s`` are the outgoing and ingoing traces, at the end of the first
    cell, of the unit half-line solution at offset ``s``.
    """
    K = K or fund.phi0.K
    grid = np.arange(K) / K
    d = fund.nu * fund.delta
    phi = fund.phi0(grid)
    if np.abs(phi).min() <= 1e-12 * np.abs(phi).max():
        raise WindingError("phi0 vanishes on the grid")
    p = fund.lambda0 * fund.phi0(grid + d) / phi
    s = fund.psi0(grid + d) / phi
    return PropScatterSymbols(fund.side, to_fourier(p), to_fourier(s), fund.delta)


def propagation_operators(ps: PropScatterSymbols) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of ``P phi(s) = p(s - nu delta) phi(s - nu delta)`` and of ``S`` likewise."""
    d = ps.nu * ps.delta
    return weighted_shift_op(ps.p, d), weighted_shift_op(ps.s_sym, d)


def riccati_residuals(symbols: RtRSymbols, ps: PropScatterSymbols) -> tuple[float, float]:
    """Relative residuals of ``P = T01 + T11 S`` and ``S = T00 P + T10 S P``.

    Products of truncated multiplication matrices differ from the matrix of the
    product symbol near the highest retained modes, so the residuals are
    measured on the block of modes ``|k| < K/4``.
    """
    T = {k: v.matrix for k, v in local_operators(symbols, ps.delta).items()}
    P, S = propagation_operators(ps)
    K = P.shape[0] + 1
    lo = np.abs(op_modes(K)) < K // 4
    blk = np.ix_(lo, lo)
    scale = max(np.linalg.norm(P[blk], 2), np.linalg.norm(S[blk], 2))
    r1 = np.linalg.norm((P - (T["01"] + T["11"] @ S))[blk], 2) / scale
    r2 = np.linalg.norm((S - (T["00"] @ P + T["10"] @ S @ P))[blk], 2) / scale
    return float(r1), float(r2)


# ---------------------------------------------------------------- RtR / DtN

def fiber_offset(a: float, medium: MediumSpec) -> float:
    return a * medium.cut.theta1


def rtr_coefficient(fund: FundamentalPair, symbols: RtRSymbols, a: float, theta1: float) -> complex:
    """``Lambda = t00(s*) + psi0(s* + nu delta) t10(s*) / phi0(s*)`` with ``s* = a theta1``."""
    if symbols.side != fund.side:
        raise ValueError("symbols and fundamental pair belong to different sides")
    s = a * theta1
    phi_s = complex(fund.phi0(s))
    if abs(phi_s) < 1e-14:
        raise ZeroDivisionError("phi0 vanishes at the fiber offset")
    t00 = complex(to_fourier(symbols.t00)(s))
    t10 = complex(to_fourier(symbols.t10)(s))
    return t00 + complex(fund.psi0(s + fund.nu * fund.delta)) * t10 / phi_s


def dtn_from_rtr(Lambda: complex, z: complex) -> complex:
    """``i z (Lambda - 1) / (Lambda + 1)``: the value of ``-mu du/dx / u`` along the outgoing direction."""
    if abs(Lambda + 1.0) <= 1e-12:
        raise SingularImpedanceError("Lambda = -1: the DtN coefficient is infinite")
    return 1j * z * (Lambda - 1.0) / (Lambda + 1.0)


def flux_from_rtr(Lambda: complex) -> float:
    """``Re[(1 - Lambda) conj(1 + Lambda)]``, equal to ``4 z Im(mu u' conj(u))`` at the interface."""
    return float(np.real((1.0 - Lambda) * np.conj(1.0 + Lambda)))


# ---------------------------------------------------------------- cells of either side

def side_cells(medium: MediumSpec, side: str, s: float, omega: float, epsilon: float, z: complex,
               mesh: SegmentMesh):
    """``(e0, e1)`` nodal values of the cell problems of one side, in the local variable.

    The local variable runs away from the interface the half-line is attached
    to.  Left cells at ``s`` are right cells at ``s - delta`` read backwards with
    the kinds exchanged.
    """
    if side == "right":
        _, e0, e1, _ = solve_right_pair(medium, s, omega, epsilon, z, mesh)
        return e0, e1
    _, e0, e1, _ = solve_right_pair(medium, s - medium.cut.delta, omega, epsilon, z, mesh)
    return e1[::-1].copy(), e0[::-1].copy()


# ---------------------------------------------------------------- half-line fields

@dataclass
class HalflineField:
    side: str
    a: float
    cell_length: float
    nodes: np.ndarray
    values: np.ndarray
    lambda0: complex
    amplitude: complex = 1.0

    @property
    def n_cells(self) -> int:
        return self.values.shape[0]

    def positions(self) -> np.ndarray:
        """Physical coordinates of every value, shape ``(n_cells, M)``."""
        local = self.nodes[None, :] + self.cell_length * np.arange(self.n_cells)[:, None]
        return self.a + local if self.side == "right" else self.a - local

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """Increasing coordinates and values with duplicated junction nodes removed."""
        x = self.positions()
        u = self.values * self.amplitude
        xs = np.concatenate([x[0]] + [row[1:] for row in x[1:]])
        us = np.concatenate([u[0]] + [row[1:] for row in u[1:]])
        order = np.argsort(xs, kind="stable")
        return xs[order], us[order]

    def scaled(self, c: complex) -> "HalflineField":
        return HalflineField(self.side, self.a, self.cell_length, self.nodes, self.values, self.lambda0,
                             self.amplitude * c)

    def junction_mismatch(self) -> float:
        if self.n_cells < 2:
            return 0.0
        jumps = np.abs(self.values[1:, 0] - self.values[:-1, -1])
        return float(jumps.max() / np.abs(self.values).max())

    def cell_norms(self, kind: str = "L2") -> np.ndarray:
        """Per-cell ``L2`` or ``H1`` norms (P1 exact integrals of the nodal interpolant)."""
        u = self.values * self.amplitude
        h = np.diff(self.nodes)
        a, b = u[:, :-1], u[:, 1:]
        l2 = (h * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.real(a * np.conj(b))) / 3.0).sum(axis=1)
        if kind == "L2":
            return np.sqrt(l2)
        if kind == "H1":
            du = (b - a) / h
            return np.sqrt(l2 + (h * np.abs(du) ** 2).sum(axis=1))
        raise ValueError(f"bad norm kind {kind!r}")


def reconstruct_halfline(fund: FundamentalPair, medium: MediumSpec, a: float, n_cells: int,
                         mesh: SegmentMesh) -> HalflineField:
    """Unit half-line solution (``R_plus u(a) = 1``) assembled cell by cell.

    ``u(cell n, x) = lambda0^n / phi0(s*) [phi0(s* + n d) e0_{s*+nd}(x) + psi0(s* + (n+1) d) e1_{s*+nd}(x)]``
    with ``d = nu delta``; every cell problem is solved afresh at its own offset.
    """
    if n_cells < 1:
        raise ValueError("n_cells must be positive")
    if abs(mesh.length - medium.cut.cell_length) > 1e-12:
        raise ValueError("the cell mesh must span one cell length")
    s0 = a * medium.cut.theta1
    d = fund.nu * fund.delta
    phi_s = complex(fund.phi0(s0))
    if abs(phi_s) < 1e-14:
        raise ZeroDivisionError("phi0 vanishes at the fiber offset")
    vals = np.empty((n_cells, mesh.M), dtype=complex)
    for n in range(n_cells):
        s = s0 + n * d
        e0, e1 = side_cells(medium, fund.side, s, fund.omega, fund.epsilon, fund.z, mesh)
        c0 = complex(fund.phi0(s))
        c1 = complex(fund.psi0(s + d))
        vals[n] = fund.lambda0 ** n / phi_s * (c0 * e0 + c1 * e1)
    return HalflineField(fund.side, a, medium.cut.cell_length, mesh.nodes, vals, fund.lambda0)


def reconstruct_halfguide(fund: FundamentalPair, medium: MediumSpec, boundary_data: FourierFn, n_cells: int,
                          resolution: int, mesh: SegmentMesh):
    """Samples of the lifted half-guide solution on a regular grid of ``(0,1) x (0, n_cells)``.

    ``U(y + n e2) = E0(P^n phi)(y) + E1(S P^n phi)(y)``.  A point at height
    ``t`` inside level ``n`` lies on the fiber ``sigma = y1 - theta1 t / theta2``
    at distance ``x = t / theta2`` from the level's base line; cell solutions at
    ``sigma`` do not depend on ``n``, so they are computed once per (row, column).
    The left half-guide is returned in the reflected variable (height measured
    downwards from the interface).
    Returns ``(y1, y2, U)`` with ``U`` of shape ``(n_cells * resolution, resolution)``.
    """
    ps = build_symbols(fund)
    P, S = propagation_operators(ps)
    d = ps.nu * ps.delta
    theta1, theta2 = medium.cut.theta1, medium.cut.theta2
    sign = 1.0 if fund.side == "right" else -1.0
    y1 = np.arange(resolution) / resolution
    t = np.arange(resolution) / resolution
    coeff_phi = []
    v = boundary_data.to_op()
    for _ in range(n_cells):
        coeff_phi.append((FourierFn.from_op(v), FourierFn.from_op(S @ v)))
        v = P @ v
    U = np.empty((n_cells * resolution, resolution), dtype=complex)
    nodes = mesh.nodes
    for i, ti in enumerate(t):
        x = ti / theta2
        sig = y1 - sign * theta1 * x
        e0x = np.empty(resolution, dtype=complex)
        e1x = np.empty(resolution, dtype=complex)
        for j, sj in enumerate(sig):
            e0, e1 = side_cells(medium, fund.side, sj, fund.omega, fund.epsilon, fund.z, mesh)
            e0x[j] = np.interp(x, nodes, e0.real) + 1j * np.interp(x, nodes, e0.imag)
            e1x[j] = np.interp(x, nodes, e1.real) + 1j * np.interp(x, nodes, e1.imag)
        for n, (pn, spn) in enumerate(coeff_phi):
            U[n * resolution + i] = pn(sig) * e0x + spn(sig + d) * e1x
    y2 = (np.arange(n_cells)[:, None] + t[None, :]).ravel()
    return y1, y2, U


def halfguide_trace(fund: FundamentalPair, medium: MediumSpec, boundary_data: FourierFn, a: float,
                    n_cells: int, mesh: SegmentMesh) -> np.ndarray:
    """Trace of the half-guide solution along the line through ``(a theta1, 0)`` with direction theta.

    Uses the same fibered formula as ``reconstruct_halfguide`` with the operator
    powers applied in Fourier space; returns nodal values of shape ``(n_cells, M)``.
    """
    ps = build_symbols(fund)
    P, S = propagation_operators(ps)
    d = ps.nu * ps.delta
    s0 = a * medium.cut.theta1
    out = np.empty((n_cells, mesh.M), dtype=complex)
    v = boundary_data.to_op()
    for n in range(n_cells):
        sig = s0 + n * d
        e0, e1 = side_cells(medium, fund.side, sig, fund.omega, fund.epsilon, fund.z, mesh)
        out[n] = complex(FourierFn.from_op(v)(sig)) * e0 + complex(FourierFn.from_op(S @ v)(sig + d)) * e1
        v = P @ v
    return out


@dataclass
class DecayFit:
    rate: float
    slope: float
    residual: float
    monotone: bool


def decay_rate_fit(halfline: HalflineField, kind: str = "L2", min_cells: int = 8) -> DecayFit:
    """Least-squares per-cell decay factor of the cell norms (``exp`` of the log-slope)."""
    if halfline.n_cells < min_cells:
        raise ValueError(f"need at least {min_cells} cells for a decay fit")
    norms = halfline.cell_norms(kind)
    n = np.arange(norms.size)
    logs = np.log(norms)
    slope, icpt = np.polyfit(n, logs, 1)
    resid = float(np.abs(logs - (slope * n + icpt)).max())
    monotone = bool(np.all(np.diff(norms) <= 1e-9 * norms[:-1])) or abs(slope) < 1e-6
    if not monotone and slope < 0:
        warnings.warn("cell norms are not monotone; decay fit is only indicative", stacklevel=2)
    return DecayFit(float(np.exp(slope)), float(slope), resid, monotone)


# ---------------------------------------------------------------- pipeline glue

@dataclass
class SidePipeline:
    """Everything computed for the two half-lines at one (omega, epsilon)."""

    omega: float
    epsilon: float
    z: complex
    K: int
    mesh: SegmentMesh
    regime: str
    symbols_right: RtRSymbols
    symbols_left: RtRSymbols
    pencil: Pencil
    spectrum: PencilSpectrum
    klass: FrequencyClass | None
    fund: dict[str, FundamentalPair] = field(default_factory=dict)
    attempts: list[str] = field(default_factory=list)

    def symbols(self, side: str) -> RtRSymbols:
        return self.symbols_right if side == "right" else self.symbols_left


def _symbols_resolved(sy: RtRSymbols, tol: float) -> bool:
    return all(tail_energy_fraction(to_fourier(v)) < tol for v in sy.as_dict().values())


def fundamental_pipeline(medium: MediumSpec, omega: float, epsilon: float, K: int = 64, M: int = 400,
                         K_max: int = 256, tol_circle: float = 1e-3, symbol_tail: float = 1e-10,
                         sides=("right", "left")) -> SidePipeline:
    """Symbols, pencil, classification and fundamental pairs, doubling K when under-resolved.

    Resolution is judged from the symbol spectra and from the success of the
    extraction; a zero-flux frequency is never retried.
    """
    from .riccati import ZeroFluxError

    z = medium.impedance(omega)
    mesh = SegmentMesh(M, medium.cut.cell_length)
    regime = "absorbing" if epsilon > 0 else "limit"
    attempts = []
    while True:
        sy_r = rtr_symbols(medium, "right", omega, epsilon, z, K, mesh)
        if not _symbols_resolved(sy_r, symbol_tail) and 2 * K <= K_max:
            attempts.append(f"K={K}: symbol tail above {symbol_tail:g}")
            K *= 2
            continue
        sy_l = left_symbols_from_right(sy_r, medium.cut.delta)
        pencil = pencil_from_symbols(sy_r, medium.cut.delta)
        spectrum = solve_pencil(pencil, sy_r, medium.cut.delta, tol_circle)
        klass = classify_frequency(spectrum, omega, tol_circle) if regime == "limit" else None
        cls = klass.cls if klass else "evanescent"
        fund = {}
        try:
            for side in sides:
                # with absorption the two circles are strictly separated, however small epsilon is
                tol = tol_circle if regime == "limit" else ABSORBING_SEPARATION
                fund[side] = extract_fundamental(spectrum, side, regime, sy_r, medium.cut.delta, tol, cls,
                                                 symbols_left=sy_l)
        except ZeroFluxError:
            raise
        except ExtractionError as exc:
            if 2 * K <= K_max:
                attempts.append(f"K={K}: {exc}")
                K *= 2
                continue
            raise
        if klass is not None:
            klass.lambda0_right = fund["right"].lambda0 if "right" in fund else None
            klass.lambda0_left = fund["left"].lambda0 if "left" in fund else None
        return SidePipeline(omega, epsilon, z, K, mesh, regime, sy_r, sy_l, pencil, spectrum, klass, fund, attempts)


def symbol_winding(ps: PropScatterSymbols) -> int:
    return winding_number(ps.p.refine(8))[0]
