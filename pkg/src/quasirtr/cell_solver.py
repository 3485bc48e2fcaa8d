"""Complex P1 finite elements in 1D and the Robin cell problems on one period.

The operator is ``-(mu u')' - rho * kappa2 * u`` with ``kappa2 = omega**2 + 1j*eps``.
Element mass matrices average the consistent and the lumped matrix; for constant
coefficients this cancels the leading dispersion error of P1 elements, so the
discrete wavenumber is fourth order accurate.  For variable coefficients the
scheme stays second order.

Robin operators on the right (propagation towards +x) read
``R_plus u = -mu u' - i z u`` and ``R_minus u = mu u' - i z u``.  Cell problems
prescribe the outgoing trace at both ends of the segment: ``R_plus`` at 0 and
``R_minus`` at ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .medium import MediumSpec, trace_at

_G = 1.0 / np.sqrt(3.0)
# P1 shape functions (left, right) at the two Gauss points
_NL = np.array([(1 + _G) / 2, (1 - _G) / 2])
_NR = 1.0 - _NL


class CellSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SegmentMesh:
    M: int
    length: float

    def __post_init__(self):
        if self.M < 3:
            raise ValueError("a segment mesh needs at least 3 nodes")

    @property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, self.length, self.M)
        x[-1] = self.length
        return x

    @property
    def h(self) -> float:
        return self.length / (self.M - 1)


@dataclass
class P1System:
    """Tridiagonal symmetric (not Hermitian) matrix ``S - kappa2 * Mass``."""

    nodes: np.ndarray
    diag: np.ndarray
    off: np.ndarray

    def add_boundary(self, left: complex = 0.0, right: complex = 0.0) -> "P1System":
        d = self.diag.copy()
        d[0] += left
        d[-1] += right
        return P1System(self.nodes, d, self.off)

    def banded(self) -> np.ndarray:
        n = self.diag.size
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = self.off
        ab[1] = self.diag
        ab[2, :-1] = self.off
        return ab

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        ab = self.banded()
        try:
            sol = solve_banded((1, 1), ab, rhs)
        except np.linalg.LinAlgError as exc:
            raise CellSolverError(f"singular P1 system: {exc}") from exc
        if not np.all(np.isfinite(sol)):
            raise CellSolverError("non-finite values in the P1 solution")
        return sol

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[:-1] += self.off * u[1:]
        out[1:] += self.off * u[:-1]
        return out

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def gauss_points(nodes: np.ndarray) -> np.ndarray:
    """Two Gauss points per element, shape (n_elements, 2)."""
    h = np.diff(nodes)
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    return mid[:, None] + np.outer(h / 2, [-_G, _G])


def element_matrices(nodes: np.ndarray, mu_q: np.ndarray, rho_q: np.ndarray):
    """Stiffness and blended mass diagonals from coefficient values at Gauss points."""
    h = np.diff(nodes)
    n = nodes.size
    k_el = mu_q.mean(axis=1) / h
    w = h / 2
    m_ll = w * (rho_q @ (_NL * _NL))
    m_rr = w * (rho_q @ (_NR * _NR))
    m_lr = w * (rho_q @ (_NL * _NR))
    lump_l = w * rho_q[:, 0]
    lump_r = w * rho_q[:, 1]
    m_ll = 0.5 * (m_ll + lump_l)
    m_rr = 0.5 * (m_rr + lump_r)
    m_lr = 0.5 * m_lr

    s_diag = np.zeros(n)
    s_diag[:-1] += k_el
    s_diag[1:] += k_el
    s_off = -k_el
    m_diag = np.zeros(n)
    m_diag[:-1] += m_ll
    m_diag[1:] += m_rr
    return s_diag, s_off, m_diag, m_lr


def assemble(nodes: np.ndarray, mu_q: np.ndarray, rho_q: np.ndarray, kappa2: complex) -> P1System:
    s_diag, s_off, m_diag, m_off = element_matrices(nodes, mu_q, rho_q)
    return P1System(nodes, s_diag - kappa2 * m_diag, s_off - kappa2 * m_off)


def load_vector(nodes: np.ndarray, f) -> np.ndarray:
    """Consistent load vector with three-point Gauss quadrature per element."""
    gp = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
    gw = np.array([5.0, 8.0, 5.0]) / 9.0
    h = np.diff(nodes)
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    xq = mid[:, None] + np.outer(h / 2, gp)
    fq = f(xq) * (gw * 0.5)[None, :] * h[:, None]
    nl = (1 - gp) / 2
    b = np.zeros(nodes.size, dtype=complex)
    b[:-1] += fq @ nl
    b[1:] += fq @ (1 - nl)
    return b


def endpoint_fluxes(system: P1System, u: np.ndarray, rhs: np.ndarray | None = None) -> tuple[complex, complex]:
    """``mu u'`` at both ends recovered from the weak residual of the interior operator.

    Testing the equation with the end hat functions gives
    ``(A u)_0 - b_0 = -mu u'(x_0)`` and ``(A u)_end - b_end = mu u'(x_end)``.
    """
    r = system.apply(u)
    if rhs is not None:
        r = r - rhs
    return complex(-r[0]), complex(r[-1])


def kappa_squared(omega: float, epsilon: float) -> complex:
    return complex(omega * omega, epsilon)


@dataclass
class CellSolution:
    side: str
    kind: str
    s: float
    omega: float
    epsilon: float
    z: complex
    nodes: np.ndarray
    values: np.ndarray
    robin_out_0: complex
    robin_in_0: complex
    robin_out_L: complex
    robin_in_L: complex


def _fiber_system(medium: MediumSpec, s: float, mesh: SegmentMesh, kappa2: complex) -> P1System:
    nodes = mesh.nodes
    xq = gauss_points(nodes)
    mu_q = trace_at(medium.mu_p, s, xq, medium.cut)
    rho_q = trace_at(medium.rho_p, s, xq, medium.cut)
    return assemble(nodes, mu_q, rho_q, kappa2)


def solve_right_pair(medium: MediumSpec, s: float, omega: float, epsilon: float, z: complex,
                     mesh: SegmentMesh):
    """Both right cell solutions at offset ``s`` with one factorization.

    Returns (nodes, e0, e1, traces) where traces holds, for each kind, the tuple
    (R_plus at 0, R_minus at 0, R_minus at L, R_plus at L).
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not np.real(z) > 0:
        raise ValueError("impedance must have a positive real part")
    base = _fiber_system(medium, s, mesh, kappa_squared(omega, epsilon))
    # natural boundary terms of the outgoing Robin conditions: -i z u v at both ends
    system = base.add_boundary(-1j * z, -1j * z)
    n = mesh.M
    rhs = np.zeros((n, 2), dtype=complex)
    rhs[0, 0] = 1.0
    rhs[-1, 1] = 1.0
    sol = system.solve(rhs)
    traces = []
    for j in range(2):
        u = sol[:, j]
        flux0, fluxL = endpoint_fluxes(base, u)
        r_plus_0 = -flux0 - 1j * z * u[0]
        r_minus_0 = flux0 - 1j * z * u[0]
        r_minus_L = fluxL - 1j * z * u[-1]
        r_plus_L = -fluxL - 1j * z * u[-1]
        traces.append((r_plus_0, r_minus_0, r_minus_L, r_plus_L))
    return mesh.nodes, sol[:, 0], sol[:, 1], traces


def solve_cell(medium: MediumSpec, side: str, kind: str, s: float, omega: float, epsilon: float,
               z: complex, mesh: SegmentMesh) -> CellSolution:
    """Solve one cell problem; ``x`` is the distance from the interface the half-line is attached to.

    Left cells are mirror images of right cells: the left fiber at ``s`` traversed
    away from its interface is the right fiber at ``s - delta`` traversed backwards,
    with the two kinds exchanged.
    """
    if side not in ("left", "right") or kind not in ("e0", "e1"):
        raise ValueError(f"bad side/kind {side!r}/{kind!r}")
    if side == "right":
        nodes, e0, e1, tr = solve_right_pair(medium, s, omega, epsilon, z, mesh)
        j = 0 if kind == "e0" else 1
        vals = (e0, e1)[j]
        out0, in0, outL, inL = tr[j]
    else:
        nodes, e0, e1, tr = solve_right_pair(medium, s - medium.cut.delta, omega, epsilon, z, mesh)
        j = 1 if kind == "e0" else 0
        vals = (e0, e1)[j][::-1].copy()
        r_plus_0, r_minus_0, r_minus_L, r_plus_L = tr[j]
        out0, in0, outL, inL = r_minus_L, r_plus_L, r_plus_0, r_minus_0
    return CellSolution(side, kind, float(s), omega, epsilon, z, nodes, vals, out0, in0, outL, inL)


@dataclass
class RtRSymbols:
    side: str
    omega: float
    epsilon: float
    z: complex
    s_grid: np.ndarray
    t00: np.ndarray
    t01: np.ndarray
    t10: np.ndarray
    t11: np.ndarray

    @property
    def K(self) -> int:
        return self.s_grid.size

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"00": self.t00, "01": self.t01, "10": self.t10, "11": self.t11}


def right_symbol_values(medium: MediumSpec, s_values, omega: float, epsilon: float, z: complex,
                        mesh: SegmentMesh) -> np.ndarray:
    """Array of shape (4, len(s)) holding t00, t01, t10, t11 of the right cell."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    out = np.empty((4, s_values.size), dtype=complex)
    for i, s in enumerate(s_values):
        _, _, _, tr = solve_right_pair(medium, s, omega, epsilon, z, mesh)
        # t00 = R_minus e0 (0), t01 = R_plus e0 (L), t10 = R_minus e1 (0), t11 = R_plus e1 (L)
        out[:, i] = (tr[0][1], tr[0][3], tr[1][1], tr[1][3])
    return out


def rtr_symbols(medium: MediumSpec, side: str, omega: float, epsilon: float, z: complex, K: int,
                mesh: SegmentMesh) -> RtRSymbols:
    """Local RtR symbols on the grid ``s_j = j / K``.

    Left symbols are obtained from right ones (only right cells are solved):
    ``t00_l(s) = t11_r(s - d)``, ``t01_l(s) = t10_r(s - d)``, ``t10_l(s) = t01_r(s - d)``,
    ``t11_l(s) = t00_r(s - d)``.  These are the symbol forms of the operator
    identities between left and right local RtR operators.
    """
    if K < 8 or K & (K - 1):
        raise ValueError("K must be a power of two, at least 8")
    grid = np.arange(K) / K
    if side == "right":
        t = right_symbol_values(medium, grid, omega, epsilon, z, mesh)
        return RtRSymbols("right", omega, epsilon, z, grid, *t)
    if side != "left":
        raise ValueError(f"bad side {side!r}")
    t = right_symbol_values(medium, grid - medium.cut.delta, omega, epsilon, z, mesh)
    return RtRSymbols("left", omega, epsilon, z, grid, t[3], t[2], t[1], t[0])
