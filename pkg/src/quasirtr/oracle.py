"""Brute-force references: truncated-domain direct solves and closed forms for homogeneous media.

Truncated solves only make sense with absorption: the field decays like
``exp(-kappa x)`` with ``kappa = Im sqrt(omega^2 + i eps)`` and a homogeneous
Dirichlet condition is imposed where that bound drops below the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cell_solver import P1System, assemble, endpoint_fluxes, gauss_points, kappa_squared, load_vector
from .interior import DEFAULT_H, interior_mesh
from .medium import MediumSpec, SourceSpec, effective_coefficient, trace_at

MIN_EPSILON = 0.05
MAX_CELLS = 10_000


class OracleRefused(ValueError):
    """The truncated domain needed for the requested tolerance is unreasonably long."""


def decay_rate(omega: float, epsilon: float) -> float:
    return float(np.imag(np.sqrt(complex(omega * omega, epsilon))))


def truncation_cells(medium: MediumSpec, omega: float, epsilon: float, tol: float) -> tuple[int, float]:
    """Number of cells after which ``exp(-kappa x)`` falls below ``tol``, and the resulting bound."""
    if epsilon < MIN_EPSILON:
        raise OracleRefused(f"epsilon={epsilon} is below {MIN_EPSILON}: the decay length is too long")
    kappa = decay_rate(omega, epsilon)
    L = medium.cut.cell_length
    n = int(np.ceil(np.log(1.0 / tol) / (kappa * L)))
    if n > MAX_CELLS:
        raise OracleRefused(f"{n} cells needed for tol={tol:g}")
    return n, float(np.exp(-kappa * n * L))


@dataclass
class HalflineOracle:
    rtr: complex
    p_value: complex
    s_value: complex
    cells: int
    truncation_bound: float
    nodes: np.ndarray
    values: np.ndarray


def _fiber_coefficients(medium: MediumSpec, side: str, s: float, x):
    # the left half-line is parametrized by the distance to its interface
    sign = 1.0 if side == "right" else -1.0
    return trace_at(medium.mu_p, s, sign * x, medium.cut), trace_at(medium.rho_p, s, sign * x, medium.cut)


def truncated_halfline(medium: MediumSpec, side: str, s: float, omega: float, epsilon: float, z: complex,
                       tol: float = 1e-6, nodes_per_cell: int = 400) -> HalflineOracle:
    """Half-line problem at offset ``s`` with ``R_plus u(0) = 1``, solved on a long truncated segment.

    Returns the ingoing trace at 0 (the RtR coefficient), and the outgoing and
    ingoing traces at the end of the first cell (the propagation and scattering
    symbol values at ``s``).
    """
    if side not in ("left", "right"):
        raise ValueError(f"bad side {side!r}")
    n_cells, bound = truncation_cells(medium, omega, epsilon, tol)
    L = medium.cut.cell_length
    m = nodes_per_cell - 1
    nodes = np.linspace(0.0, n_cells * L, n_cells * m + 1)
    xq = gauss_points(nodes)
    mu_q, rho_q = _fiber_coefficients(medium, side, s, xq)
    base = assemble(nodes, mu_q, rho_q, kappa_squared(omega, epsilon))
    system = base.add_boundary(-1j * z, 0.0)
    # homogeneous Dirichlet at the far end: drop the last node
    red = P1System(nodes[:-1], system.diag[:-1], system.off[:-1])
    rhs = np.zeros(nodes.size - 1, dtype=complex)
    rhs[0] = 1.0
    u = np.concatenate([red.solve(rhs), [0.0]])
    u0 = u[0]
    # flux at the end of the first cell from the weak residual of the first cell alone
    first = assemble(nodes[:m + 1], mu_q[:m], rho_q[:m], kappa_squared(omega, epsilon))
    _, flux_L = endpoint_fluxes(first, u[:m + 1])
    uL = u[m]
    return HalflineOracle(-1.0 - 2j * z * u0, -flux_L - 1j * z * uL, flux_L - 1j * z * uL, n_cells, bound,
                          nodes, u)


def homogeneous_rtr(omega: float, epsilon: float, z: complex, mu: float = 1.0, rho: float = 1.0) -> complex:
    """RtR coefficient of a constant half-line: ``-(k mu - z) / (k mu + z)``, ``k = sqrt(rho kappa2 / mu)``."""
    k = np.sqrt(rho * complex(omega * omega, epsilon) / mu)
    return complex(-(k * mu - z) / (k * mu + z))


@dataclass
class WholelineOracle:
    nodes: np.ndarray
    values: np.ndarray
    cells: int
    truncation_bound: float

    def sample(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.nodes, self.values.real) + 1j * np.interp(x, self.nodes, self.values.imag)


def truncated_wholeline(medium: MediumSpec, omega: float, epsilon: float, source: SourceSpec, tol: float = 1e-6,
                        nodes_per_cell: int = 400, h: float = DEFAULT_H) -> WholelineOracle:
    """Whole-line problem with absorption on a symmetric truncated domain with Dirichlet ends."""
    n_cells, bound = truncation_cells(medium, omega, epsilon, tol)
    L = medium.cut.cell_length
    m = nodes_per_cell - 1
    inner = interior_mesh(medium, source, h)
    right = medium.a_right + np.linspace(0.0, n_cells * L, n_cells * m + 1)[1:]
    left = medium.a_left - np.linspace(0.0, n_cells * L, n_cells * m + 1)[1:][::-1]
    nodes = np.concatenate([left, inner, right])
    xq = gauss_points(nodes)
    mu_q, rho_q = effective_coefficient(medium, xq)
    system = assemble(nodes, mu_q, rho_q, kappa_squared(omega, epsilon))
    rhs = load_vector(nodes, source)
    red = P1System(nodes[1:-1], system.diag[1:-1], system.off[1:-1])
    u = np.concatenate([[0.0], red.solve(rhs[1:-1]), [0.0]])
    return WholelineOracle(nodes, u, n_cells, bound)


def green_solution(source: SourceSpec, omega: float, x, epsilon: float = 0.0, mu: float = 1.0, rho: float = 1.0,
                   panels: int = 200, order: int = 8) -> np.ndarray:
    """Outgoing solution of ``-(mu u')' - rho (omega^2 + i eps) u = f`` in a constant medium.

    ``u(x) = i / (2 k mu) * int f(y) exp(i k |x - y|) dy`` with
    ``k = sqrt(rho (omega^2 + i eps) / mu)``, integrated by composite Gauss-Legendre
    rules on each side of the kink at ``y = x``.
    """
    k = np.sqrt(rho * complex(omega * omega, epsilon) / mu)
    lo, hi = source.support
    gx, gw = np.polynomial.legendre.leggauss(order)
    out = []
    for xi in np.atleast_1d(np.asarray(x, dtype=float)):
        total = 0.0j
        for a, b in ((lo, min(max(xi, lo), hi)), (min(max(xi, lo), hi), hi)):
            if b <= a:
                continue
            edges = np.linspace(a, b, panels + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * np.diff(edges)
            y = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
            w = (half[:, None] * gw[None, :]).ravel()
            total += np.sum(w * source(y) * np.exp(1j * k * np.abs(xi - y)))
        out.append(1j / (2.0 * k * mu) * total)
    return np.array(out)


@dataclass
class ValidationCase:
    name: str
    method: complex
    oracle: complex
    discrepancy: float
    truncation_bound: float

    def as_dict(self) -> dict:
        return {"name": self.name, "method": {"re": self.method.real, "im": self.method.imag},
                "oracle": {"re": self.oracle.real, "im": self.oracle.imag},
                "discrepancy": self.discrepancy, "truncation_bound": self.truncation_bound}


def validation_report(medium: MediumSpec, omega: float, epsilon: float, source: SourceSpec | None = None,
                      tol: float = 1e-6, K: int = 64, M: int = 400, h: float = DEFAULT_H) -> list[ValidationCase]:
    """Compare the RtR pipeline with truncated direct solves at one absorbing frequency.

    Cases: the RtR coefficient and the propagation symbol at the fiber offset of
    each interface, and, when a source is given, the interior field (relative L2
    over the interior nodes, reported as a real discrepancy).
    """
    from .halfline import build_symbols, fundamental_pipeline, rtr_coefficient
    from .interior import solve_field

    pl = fundamental_pipeline(medium, omega, epsilon, K=K, M=M)
    th1 = medium.cut.theta1
    cases = []
    for side in ("left", "right"):
        a = medium.a_right if side == "right" else medium.a_left
        ref = truncated_halfline(medium, side, a * th1, omega, epsilon, pl.z, tol, nodes_per_cell=M)
        lam = rtr_coefficient(pl.fund[side], pl.symbols(side), a, th1)
        p = complex(build_symbols(pl.fund[side]).p(a * th1))
        for name, mine, theirs in ((f"Lambda_{side}", lam, ref.rtr), (f"p_{side}", p, ref.p_value)):
            cases.append(ValidationCase(name, complex(mine), complex(theirs), abs(mine - theirs) / abs(theirs),
                                        ref.truncation_bound))
    if source is not None:
        fs = solve_field(medium, omega, epsilon, source, n_cells=1, K=pl.K, M=M, h=h)
        ref = truncated_wholeline(medium, omega, epsilon, source, tol, nodes_per_cell=M, h=h)
        x, u = fs.interior.nodes, fs.interior.values
        err = float(np.linalg.norm(ref.sample(x) - u) / np.linalg.norm(u))
        cases.append(ValidationCase("interior_field", complex(np.linalg.norm(u)),
                                    complex(np.linalg.norm(ref.sample(x))), err, ref.truncation_bound))
    return cases
