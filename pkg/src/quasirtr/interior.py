"""Interior problem with transparent RtR conditions, full-line assembly and epsilon sweeps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cell_solver import assemble, gauss_points, kappa_squared, load_vector
from .halfline import (HalflineField, SidePipeline, dtn_from_rtr, fundamental_pipeline, reconstruct_halfline,
                       rtr_coefficient)
from .medium import MediumSpec, SourceSpec, effective_coefficient
from .riccati import FundamentalPair

DEFAULT_H = 5e-3


class ClassificationChangeError(RuntimeError):
    pass


def interior_mesh(medium: MediumSpec, source: SourceSpec | None = None, h: float = DEFAULT_H) -> np.ndarray:
    """Nodes on ``[a_left, a_right]`` containing every coefficient and source breakpoint."""
    pts = {medium.a_left, medium.a_right}
    pts.update(medium.breakpoints)
    if source is not None:
        pts.update(b for b in source.breakpoints + source.support if medium.a_left < b < medium.a_right)
    pts = sorted(pts)
    pieces = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil((hi - lo) / h - 1e-9)))
        pieces.append(np.linspace(lo, hi, n + 1)[:-1])
    pieces.append([pts[-1]])
    return np.concatenate(pieces)


@dataclass
class InteriorSolution:
    nodes: np.ndarray
    values: np.ndarray
    robin_out_left: complex
    robin_out_right: complex
    omega: float
    epsilon: float
    z: complex
    Lambda_left: complex
    Lambda_right: complex
    dtn_left: complex
    dtn_right: complex
    residual: float


def _interior_system(medium: MediumSpec, nodes: np.ndarray, omega: float, epsilon: float):
    xq = gauss_points(nodes)
    mu_q, rho_q = effective_coefficient(medium, xq)
    return assemble(nodes, mu_q, rho_q, kappa_squared(omega, epsilon))


def solve_interior(medium: MediumSpec, omega: float, epsilon: float, Lambda_left: complex, Lambda_right: complex,
                   source: SourceSpec, nodes: np.ndarray | None = None) -> InteriorSolution:
    """P1 solution of ``-(mu u')' - rho (omega^2 + i eps) u = f`` on the interior interval.

    The transparent conditions enter through the natural boundary terms
    ``lambda_j u(a_j) v(a_j)``, where ``lambda_j = dtn_from_rtr(Lambda_j, z)`` is
    ``-mu du/dx / u`` along the outgoing direction of side ``j``.
    The outgoing traces are ``R_plus u(a_j) = (lambda_j - i z) u(a_j)``.
    """
    z = medium.impedance(omega)
    if nodes is None:
        nodes = interior_mesh(medium, source)
    dl = dtn_from_rtr(Lambda_left, z)
    dr = dtn_from_rtr(Lambda_right, z)
    base = _interior_system(medium, nodes, omega, epsilon)
    system = base.add_boundary(dl, dr)
    rhs = load_vector(nodes, source)
    if nodes.size <= 4000:
        cond = np.linalg.cond(system.dense())
        if cond > 1e10:
            warnings.warn(f"interior system is nearly singular (condition {cond:.2e}); "
                          "omega may be close to a trapped mode", stacklevel=2)
    u = system.solve(rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    res = float(np.linalg.norm(system.apply(u) - rhs) / scale) if np.any(rhs) else float(np.linalg.norm(u))
    return InteriorSolution(nodes, u, (dl - 1j * z) * u[0], (dr - 1j * z) * u[-1], omega, epsilon, z,
                            Lambda_left, Lambda_right, dl, dr, res)


@dataclass
class FieldSolution:
    interior: InteriorSolution
    left: HalflineField
    right: HalflineField
    pipeline: SidePipeline | None = None

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        xl, ul = self.left.flat()
        xr, ur = self.right.flat()
        xi, ui = self.interior.nodes, self.interior.values
        x = np.concatenate([xl[:-1], xi, xr[1:]])
        u = np.concatenate([ul[:-1], ui, ur[1:]])
        return x, u

    def continuity(self) -> tuple[float, float]:
        """Relative jumps of ``u`` at ``a_left`` and ``a_right`` between the two representations."""
        ui = self.interior.values
        scale = np.abs(ui).max() or 1.0
        jl = abs(self.left.values[0, 0] * self.left.amplitude - ui[0]) / scale
        jr = abs(self.right.values[0, 0] * self.right.amplitude - ui[-1]) / scale
        return float(jl), float(jr)

    def sample(self, x) -> np.ndarray:
        """Piecewise linear evaluation of the assembled field."""
        xs, us = self.flat()
        x = np.asarray(x, dtype=float)
        if x.min() < xs[0] - 1e-12 or x.max() > xs[-1] + 1e-12:
            raise ValueError("sample points outside the reconstructed range")
        return np.interp(x, xs, us.real) + 1j * np.interp(x, xs, us.imag)


def assemble_full(interior: InteriorSolution, fund_left: FundamentalPair, fund_right: FundamentalPair,
                  medium: MediumSpec, n_cells: int, cell_mesh) -> FieldSolution:
    """Glue the unit half-line solutions, scaled by the interior outgoing traces, to the interior field."""
    for f in (fund_left, fund_right):
        if abs(f.omega - interior.omega) > 1e-14 or abs(f.epsilon - interior.epsilon) > 1e-14:
            raise ValueError("fundamental pairs and interior solution use different (omega, epsilon)")
    left = reconstruct_halfline(fund_left, medium, medium.a_left, n_cells, cell_mesh).scaled(interior.robin_out_left)
    right = reconstruct_halfline(fund_right, medium, medium.a_right, n_cells, cell_mesh).scaled(
        interior.robin_out_right)
    return FieldSolution(interior, left, right)


def solve_field(medium: MediumSpec, omega: float, epsilon: float, source: SourceSpec, n_cells: int = 12,
                K: int = 64, M: int = 400, h: float = DEFAULT_H, pipeline: SidePipeline | None = None
                ) -> FieldSolution:
    """Whole pipeline: fundamental pairs, RtR coefficients, interior solve and half-line reconstruction."""
    pl = pipeline or fundamental_pipeline(medium, omega, epsilon, K=K, M=M)
    th1 = medium.cut.theta1
    lam_l = rtr_coefficient(pl.fund["left"], pl.symbols_left, medium.a_left, th1)
    lam_r = rtr_coefficient(pl.fund["right"], pl.symbols_right, medium.a_right, th1)
    inter = solve_interior(medium, omega, epsilon, lam_l, lam_r, source, interior_mesh(medium, source, h))
    fs = assemble_full(inter, pl.fund["left"], pl.fund["right"], medium, n_cells, pl.mesh)
    fs.pipeline = pl
    return fs


def h1_norm(nodes: np.ndarray, u: np.ndarray) -> float:
    """Exact H1 norm of the P1 interpolant of nodal values."""
    h = np.diff(nodes)
    a, b = u[:-1], u[1:]
    l2 = (h * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.real(a * np.conj(b))) / 3.0).sum()
    grad = (np.abs(b - a) ** 2 / h).sum()
    return float(np.sqrt(l2 + grad))


@dataclass
class SweepResult:
    omega: float
    eps: np.ndarray
    errors: np.ndarray
    slope: float
    lambda0_limit: dict[str, complex]
    lambda0_eps: list[dict[str, complex]] = field(default_factory=list)
    cls: str = ""

    @property
    def monotone(self) -> bool:
        order = np.argsort(self.eps)
        return bool(np.all(np.diff(self.errors[order]) > 0))

    def rows(self):
        return [(float(e), float(r)) for e, r in zip(self.eps, self.errors)]


def epsilon_sweep(medium: MediumSpec, omega: float, eps_list, source: SourceSpec | None = None, K: int = 64,
                  M: int = 400, h: float = DEFAULT_H, max_jump: float = 0.5) -> SweepResult:
    """Relative interior H1 distance between absorbing solutions and the limit solution.

    Aborts if the fundamental eigenvalue of some epsilon is not the continuation
    of the limit one (a jump larger than ``max_jump``), which signals that the
    classification changed along the sweep.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("an epsilon sweep needs at least three values")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])) or eps_list[-1] <= 0:
        raise ValueError("epsilon values must be positive and decreasing")
    source = source or SourceSpec()
    ref = solve_field(medium, omega, 0.0, source, n_cells=1, K=K, M=M, h=h)
    pl0 = ref.pipeline
    lam0 = {s: f.lambda0 for s, f in pl0.fund.items()}
    u0 = ref.interior.values
    nodes = ref.interior.nodes
    n0 = h1_norm(nodes, u0)
    errs, lam_eps = [], []
    for e in eps_list:
        fs = solve_field(medium, omega, e, source, n_cells=1, K=pl0.K, M=M, h=h)
        le = {s: f.lambda0 for s, f in fs.pipeline.fund.items()}
        jump = max(abs(le[s] - lam0[s]) for s in le)
        if jump > max_jump:
            raise ClassificationChangeError(f"fundamental eigenvalue jumps by {jump:.3g} at epsilon={e:g}")
        lam_eps.append(le)
        errs.append(h1_norm(nodes, fs.interior.values - u0) / n0)
    errs = np.array(errs)
    eps = np.array(eps_list)
    slope = float(np.polyfit(np.log(eps), np.log(errs), 1)[0])
    return SweepResult(omega, eps, errs, slope, lam0, lam_eps, pl0.klass.cls if pl0.klass else "")
