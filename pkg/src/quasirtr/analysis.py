"""Frequency sweeps: classification, dispersion curves, the group-velocity/flux identity
and Dirichlet fiber bands of one cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cell_solver import SegmentMesh, element_matrices, gauss_points, solve_right_pair
from .halfline import fundamental_pipeline
from .medium import MediumSpec, trace_at
from .riccati import ExtractionError, FrequencyClass, ZeroFluxError

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------- classification sweeps

@dataclass
class SweepEntry:
    omega: float
    cls: str
    lambda0: complex | None = None
    error: str | None = None


@dataclass
class ClassifySweep:
    entries: list[SweepEntry]

    def intervals(self) -> list[tuple[str, float, float]]:
        """Run-length encoding of consecutive equal classes as ``(class, omega_first, omega_last)``."""
        runs: list[tuple[str, float, float]] = []
        for e in self.entries:
            if runs and runs[-1][0] == e.cls:
                runs[-1] = (e.cls, runs[-1][1], e.omega)
            else:
                runs.append((e.cls, e.omega, e.omega))
        return runs


def classify_omega(medium: MediumSpec, omega: float, K: int = 64, M: int = 400, tol_circle: float = 1e-3
                   ) -> FrequencyClass:
    try:
        pl = fundamental_pipeline(medium, omega, 0.0, K=K, M=M, tol_circle=tol_circle, sides=("right",))
    except ZeroFluxError:
        return FrequencyClass(omega, "zero_flux")
    return pl.klass


def classify_sweep(medium: MediumSpec, omega_grid, K: int = 64, M: int = 400, tol_circle: float = 1e-3
                   ) -> ClassifySweep:
    """Limit-regime classification at every frequency; failures are recorded and the sweep goes on."""
    out = []
    for om in omega_grid:
        om = float(om)
        try:
            fc = classify_omega(medium, om, K, M, tol_circle)
            out.append(SweepEntry(om, fc.cls, fc.lambda0_right))
        except (ExtractionError, np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
            out.append(SweepEntry(om, "failed", None, str(exc)))
    return ClassifySweep(out)


# ---------------------------------------------------------------- dispersion

@dataclass
class DispersionPoint:
    omega: float
    lambda0: complex | None
    k0: float
    Q0: float
    cls: str
    k0_unwrapped: float = float("nan")
    branch: int = 0


def wrap_k(k: float) -> float:
    return float((k + 0.5) % 1.0 - 0.5)


def _fundamental_at(medium, omega, K, M, tol_circle):
    pl = fundamental_pipeline(medium, omega, 0.0, K=K, M=M, tol_circle=tol_circle, sides=("right",))
    f = pl.fund["right"]
    return f.lambda0, f.Q0, pl.klass.cls, f


def dispersion_curve(medium: MediumSpec, omega_range: tuple[float, float], steps: int, K: int = 64, M: int = 400,
                     tol_circle: float = 1e-3, max_jump: float = 0.2, refinements: int = 2) -> list[DispersionPoint]:
    """Right fundamental eigenvalue along a frequency grid, with ``k0`` unwrapped by phase continuation.

    A step whose phase change exceeds ``max_jump`` (in turns) is bisected up to
    ``refinements`` times; if the continuation stays ambiguous, a new branch
    starts.  Zero-flux or failed frequencies also break the branch.
    """
    if steps < 2:
        raise ValueError("steps must be at least 2")
    omegas = np.linspace(omega_range[0], omega_range[1], steps)
    pts: list[DispersionPoint] = []
    branch = 0
    prev: tuple[float, complex] | None = None
    unwrapped = float("nan")
    for om in omegas:
        om = float(om)
        try:
            lam, q0, cls, _ = _fundamental_at(medium, om, K, M, tol_circle)
        except ZeroFluxError:
            pts.append(DispersionPoint(om, None, float("nan"), float("nan"), "zero_flux", float("nan"), branch))
            prev = None
            branch += 1
            continue
        except (ExtractionError, np.linalg.LinAlgError, ValueError):
            pts.append(DispersionPoint(om, None, float("nan"), float("nan"), "failed", float("nan"), branch))
            prev = None
            branch += 1
            continue
        k = float(np.angle(lam) / _TWO_PI)
        if prev is None:
            unwrapped = k
        else:
            dk = _continued_phase_step(medium, prev, (om, lam), K, M, tol_circle, max_jump, refinements)
            if dk is None:
                branch += 1
                unwrapped = k
            else:
                unwrapped += dk
        pts.append(DispersionPoint(om, lam, wrap_k(k), q0, cls, unwrapped, branch))
        prev = (om, lam)
    return pts


def _continued_phase_step(medium, a, b, K, M, tol_circle, max_jump, refinements):
    """Phase increment (turns) from ``a`` to ``b``, refining the step when it looks too large."""
    (om_a, lam_a), (om_b, lam_b) = a, b
    dk = float(np.angle(lam_b / lam_a) / _TWO_PI)
    if abs(dk) <= max_jump:
        return dk
    if refinements == 0:
        return None
    mid = 0.5 * (om_a + om_b)
    try:
        lam_m = _fundamental_at(medium, mid, K, M, tol_circle)[0]
    except (ExtractionError, np.linalg.LinAlgError, ValueError):
        return None
    d1 = _continued_phase_step(medium, a, (mid, lam_m), K, M, tol_circle, max_jump, refinements - 1)
    d2 = _continued_phase_step(medium, (mid, lam_m), b, K, M, tol_circle, max_jump, refinements - 1)
    if d1 is None or d2 is None:
        return None
    return d1 + d2


# ---------------------------------------------------------------- group velocity

@dataclass
class GroupVelocityCheck:
    omega: float
    dk0: float
    Q0: float
    mode_energy: float
    lhs: float
    rhs: float
    rel_error: float
    literal_ratio: float


def mode_energy(medium: MediumSpec, fund, n_s: int = 64, M: int = 400) -> float:
    """``int_cell rho_p |U0|^2`` for the lifted mode ``U0 = E0(phi0) + E1(psi0)`` on one periodicity cell.

    The cell is parametrized by ``y = (s, 0) + x theta`` with ``s`` in [0, 1) and
    ``x`` in [0, L); the Jacobian is ``theta2``.
    """
    if fund.side != "right":
        raise ValueError("the mode energy is implemented for the right fundamental pair")
    mesh = SegmentMesh(M, medium.cut.cell_length)
    nodes = mesh.nodes
    xq = gauss_points(nodes)
    h = np.diff(nodes)
    total = 0.0
    for s in np.arange(n_s) / n_s:
        _, e0, e1, _ = solve_right_pair(medium, s, fund.omega, fund.epsilon, fund.z, mesh)
        u = complex(fund.phi0(s)) * e0 + complex(fund.psi0(s + fund.delta)) * e1
        rho = trace_at(medium.rho_p, s, xq, medium.cut)
        # P1 interpolant at the two Gauss points of every element
        g = 1.0 / np.sqrt(3.0)
        ua = u[:-1] * (1 + g) / 2 + u[1:] * (1 - g) / 2
        ub = u[:-1] * (1 - g) / 2 + u[1:] * (1 + g) / 2
        total += float(np.sum(h / 2 * (rho[:, 0] * np.abs(ua) ** 2 + rho[:, 1] * np.abs(ub) ** 2)))
    return medium.cut.theta2 * total / n_s


def group_velocity_check(medium: MediumSpec, omega: float, d_omega: float = 1e-3, K: int = 64, M: int = 400,
                         n_s: int = 64) -> GroupVelocityCheck:
    """Compare ``2 pi theta2 k0'(omega) Q0 / (4 z)`` with ``omega int_cell rho_p |U0|^2``.

    ``Q0`` is four times the impedance times the physical flux ``Im(mu u' conj u)``
    and ``2 pi theta2 k0`` is the wavenumber per unit length, so the left side is
    the product of the physical wavenumber derivative and the physical flux.
    ``literal_ratio`` reports ``k0' Q0 / (omega int rho |U0|^2)`` without the unit factor.
    """
    lam_m = _fundamental_at(medium, omega - d_omega, K, M, 1e-3)
    lam_p = _fundamental_at(medium, omega + d_omega, K, M, 1e-3)
    lam_0, q0, cls, fund = _fundamental_at(medium, omega, K, M, 1e-3)
    if not (lam_m[2] == lam_p[2] == cls == "propagative"):
        raise ExtractionError("group velocity check needs propagative frequencies on the whole stencil")
    dk = float(np.angle(lam_p[0] / lam_m[0]) / _TWO_PI) / (2.0 * d_omega)
    energy = mode_energy(medium, fund, n_s, M)
    z = fund.z
    lhs = _TWO_PI * medium.cut.theta2 * dk * q0 / (4.0 * np.real(z))
    rhs = omega * energy
    return GroupVelocityCheck(omega, dk, q0, energy, lhs, rhs, abs(lhs - rhs) / abs(rhs), dk * q0 / rhs)


# ---------------------------------------------------------------- Dirichlet bands

@dataclass
class BandCurve:
    n: int
    s: np.ndarray
    values: np.ndarray

    @property
    def a(self) -> float:
        return float(self.values.min())

    @property
    def b(self) -> float:
        return float(self.values.max())


@dataclass
class BandResult:
    bands: list[BandCurve]
    omega_star: float | None
    overlap_from: int | None
    n_max: int
    notes: list[str] = field(default_factory=list)


def dirichlet_eigenvalues(medium: MediumSpec, s: float, n_max: int, M: int = 400) -> np.ndarray:
    """First ``n_max`` Dirichlet eigenvalues of ``-(mu u')' = lambda rho u`` on one cell at offset ``s``.

    The weight ``rho`` may change sign, so the definite pencil is inverted:
    ``Mass u = nu Stiff u`` with ``nu = 1 / lambda`` and the stiffness positive
    definite; the largest positive ``nu`` give the smallest positive ``lambda``.
    """
    nodes = SegmentMesh(M, medium.cut.cell_length).nodes
    xq = gauss_points(nodes)
    mu_q = trace_at(medium.mu_p, s, xq, medium.cut)
    rho_q = trace_at(medium.rho_p, s, xq, medium.cut)
    s_d, s_o, m_d, m_o = element_matrices(nodes, mu_q, rho_q)
    inner = slice(1, -1)
    n = nodes.size - 2
    stiff = np.diag(s_d[inner]) + np.diag(s_o[1:-1], 1) + np.diag(s_o[1:-1], -1)
    mass = np.diag(m_d[inner]) + np.diag(m_o[1:-1], 1) + np.diag(m_o[1:-1], -1)
    nu = scipy.linalg.eigh(mass, stiff, eigvals_only=True, subset_by_index=[max(0, n - 2 * n_max - 4), n - 1])
    pos = np.sort(nu[nu > 0])[::-1][:n_max]
    if pos.size < n_max:
        raise ValueError("fewer positive eigenvalues than requested")
    return 1.0 / pos


def dirichlet_bands(medium: MediumSpec, s_grid, n_max: int, M: int = 400) -> BandResult:
    """Band curves ``s -> lambda_n(s)`` and the estimate ``omega_*^2 = a_N``.

    ``N`` is the smallest index such that ``b_k >= a_{k+1}`` for every ``k``
    from ``N`` up to ``n_max - 1``; the estimate only covers the computed bands.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    s_grid = np.asarray(s_grid, dtype=float)
    vals = np.array([dirichlet_eigenvalues(medium, s, n_max, M) for s in s_grid])
    bands = [BandCurve(n + 1, s_grid, vals[:, n]) for n in range(n_max)]
    overlaps = [bands[k].b >= bands[k + 1].a for k in range(n_max - 1)]
    N = None
    for k in range(n_max - 1, 0, -1):
        if overlaps[k - 1]:
            N = k
        else:
            break
    notes = [f"overlap checked up to n={n_max}"]
    omega_star = float(np.sqrt(bands[N - 1].a)) if N is not None else None
    if N is None:
        notes.append("no overlapping tail of bands up to n_max")
    return BandResult(bands, omega_star, N, n_max, notes)
