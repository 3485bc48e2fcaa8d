"""Quasiperiodic media: periodic lifts, cut geometry, local perturbation and source.

A quasiperiodic coefficient on the line is the trace of a 1-periodic function of
two variables along the direction ``theta``.  The fiber with offset ``s`` is
``x -> F(s + theta1 * x, theta2 * x)``; shifting ``x`` by one cell length
``1 / theta2`` moves the offset by ``delta = theta1 / theta2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

TRIG_KINDS = ("cos*cos", "cos*sin", "sin*cos", "sin*sin")
_TWO_PI = 2.0 * np.pi


class MediumValidationError(ValueError):
    """Raised when a medium violates a structural hypothesis."""


def continued_fraction_convergents(x: float, count: int = 12) -> list[tuple[int, int]]:
    """First convergents p/q of the continued fraction expansion of ``x``."""
    convergents = []
    h_prev, h = 1, int(math.floor(x))
    k_prev, k = 0, 1
    convergents.append((h, k))
    frac = x - math.floor(x)
    for _ in range(count - 1):
        if frac < 1e-15:
            break
        x_inv = 1.0 / frac
        a = int(math.floor(x_inv))
        frac = x_inv - a
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        convergents.append((h, k))
    return convergents


@dataclass(frozen=True)
class CutVector:
    theta1: float
    theta2: float

    def __post_init__(self):
        if not self.theta2 > 0:
            raise MediumValidationError("theta2 must be positive")
        if not math.isfinite(self.theta1 / self.theta2):
            raise MediumValidationError("delta must be finite")

    @property
    def delta(self) -> float:
        return self.theta1 / self.theta2

    @property
    def cell_length(self) -> float:
        return 1.0 / self.theta2

    @property
    def convergents(self) -> list[tuple[int, int]]:
        return continued_fraction_convergents(self.delta)

    @classmethod
    def from_angle(cls, angle: float) -> "CutVector":
        return cls(math.cos(angle), math.sin(angle))


@dataclass(frozen=True)
class TrigTerm:
    m: int
    n: int
    kind: str
    amplitude: float

    def __post_init__(self):
        if self.kind not in TRIG_KINDS:
            raise ValueError(f"unknown trig kind {self.kind!r}, expected one of {TRIG_KINDS}")
        if self.m < 0 or self.n < 0:
            raise ValueError("trig term frequencies must be non-negative")


@dataclass(frozen=True)
class TrigPoly2D:
    """Real trigonometric polynomial ``c + sum a * trig(2 pi m y1) * trig(2 pi n y2)``."""

    constant: float
    terms: tuple[TrigTerm, ...] = ()

    @classmethod
    def const(cls, value: float) -> "TrigPoly2D":
        return cls(float(value), ())

    @classmethod
    def from_terms(cls, constant: float, terms: Sequence[tuple]) -> "TrigPoly2D":
        return cls(float(constant), tuple(TrigTerm(int(m), int(n), k, float(a)) for m, n, k, a in terms))

    def __call__(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        out = np.full(np.broadcast(y1, y2).shape, self.constant, dtype=float)
        for t in self.terms:
            f1 = np.cos if t.kind.startswith("cos") else np.sin
            f2 = np.cos if t.kind.endswith("cos") else np.sin
            out = out + t.amplitude * f1(_TWO_PI * t.m * y1) * f2(_TWO_PI * t.n * y2)
        return out

    def amplitude_bounds(self) -> tuple[float, float]:
        total = sum(abs(t.amplitude) for t in self.terms)
        return self.constant - total, self.constant + total

    def sampled_bounds(self, n: int = 256) -> tuple[float, float]:
        g = np.arange(n) / n
        vals = self(g[:, None], g[None, :])
        return float(vals.min()), float(vals.max())

    def is_constant(self) -> bool:
        return all(t.amplitude == 0.0 or (t.m == 0 and t.n == 0 and t.kind == "cos*cos") for t in self.terms)


def trace_at(coef: TrigPoly2D, s, x, cut: CutVector):
    """Value of the lifted coefficient on the fiber with offset ``s`` at abscissa ``x``."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    return coef(s + cut.theta1 * x, cut.theta2 * x)


@dataclass(frozen=True)
class Perturbation:
    x_lo: float
    x_hi: float
    mu_value: float
    rho_value: float


@dataclass(frozen=True)
class SourceSpec:
    """Compactly supported right-hand side.

    ``bump``: amplitude * exp(sharpness * (1 - 1 / (1 - r^2))) for r = (x - center) / width in (-1, 1).
    ``gaussian``: amplitude * exp(-r^2 / 2), truncated to |r| < cutoff.
    ``indicator``: amplitude on (center - width, center + width).
    """

    kind: str = "bump"
    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0
    sharpness: float = 100.0
    cutoff: float = 6.0

    def __post_init__(self):
        if self.kind not in ("bump", "gaussian", "indicator"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.width <= 0:
            raise ValueError("source width must be positive")

    @property
    def support(self) -> tuple[float, float]:
        half = self.width * (self.cutoff if self.kind == "gaussian" else 1.0)
        return self.center - half, self.center + half

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.support if self.kind == "indicator" else ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = (x - self.center) / self.width
        out = np.zeros_like(x)
        if self.kind == "bump":
            inside = np.abs(r) < 1.0
            ri = r[inside]
            out[inside] = self.amplitude * np.exp(self.sharpness * (1.0 - 1.0 / (1.0 - ri * ri)))
        elif self.kind == "gaussian":
            inside = np.abs(r) < self.cutoff
            out[inside] = self.amplitude * np.exp(-0.5 * r[inside] ** 2)
        else:
            out[np.abs(r) < 1.0] = self.amplitude
        return out


@dataclass(frozen=True)
class ImpedanceRule:
    """Either ``z = omega`` (``fixed is None``) or a fixed positive impedance."""

    fixed: float | None = None

    def __call__(self, omega: float) -> float:
        return float(omega) if self.fixed is None else float(self.fixed)


@dataclass(frozen=True)
class MediumSpec:
    mu_p: TrigPoly2D
    rho_p: TrigPoly2D
    cut: CutVector
    a_left: float
    a_right: float
    perturbation: tuple[Perturbation, ...] = ()
    impedance: ImpedanceRule = field(default_factory=ImpedanceRule)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = set()
        for p in self.perturbation:
            pts.update((p.x_lo, p.x_hi))
        return tuple(sorted(pts))

    def side_offset(self, side: str) -> float:
        """Fiber offset ``a * theta1`` of the half-line attached at the given endpoint."""
        a = self.a_right if side == "right" else self.a_left
        return a * self.cut.theta1

    def fiber(self, s: float) -> tuple[Callable, Callable]:
        return (lambda x: trace_at(self.mu_p, s, x, self.cut),
                lambda x: trace_at(self.rho_p, s, x, self.cut))


def effective_coefficient(medium: MediumSpec, x):
    """(mu, rho) of the locally perturbed medium at ``x``; vectorized."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(trace_at(medium.mu_p, 0.0, x, medium.cut), dtype=float).copy()
    rho = np.asarray(trace_at(medium.rho_p, 0.0, x, medium.cut), dtype=float).copy()
    for p in medium.perturbation:
        inside = (x >= p.x_lo) & (x < p.x_hi)
        mu = np.where(inside, p.mu_value, mu)
        rho = np.where(inside, p.rho_value, rho)
    return mu, rho


@dataclass
class ValidationReport:
    mu_bounds: tuple[float, float]
    rho_bounds: tuple[float, float]
    endpoint_residuals: dict[str, float]
    convergents: list[tuple[int, int]]
    near_rational: tuple[int, int] | None
    warnings: list[str]
    medium: MediumSpec


def _snap_tolerance(value: float) -> float:
    return 1e-9 * max(1.0, abs(value))


def validate(medium: MediumSpec, tol: float | None = None, snap: bool = True,
             require_positive: bool = True) -> ValidationReport:
    """Check ellipticity and endpoint compatibility; return a report holding the (possibly snapped) medium.

    Endpoints must satisfy ``a * theta2`` integer.  When ``snap`` is true an
    endpoint violating this is moved to the nearest multiple of the cell length
    and a warning is recorded; otherwise a residual above ``tol`` is an error.
    """
    notes: list[str] = []
    mu_b = medium.mu_p.sampled_bounds()
    rho_b = medium.rho_p.sampled_bounds()
    if require_positive:
        for name, (lo, _), poly in (("mu_p", mu_b, medium.mu_p), ("rho_p", rho_b, medium.rho_p)):
            if lo <= 0.0:
                raise MediumValidationError(f"{name} is not positive: sampled minimum {lo:.6g}")
            if poly.amplitude_bounds()[0] <= 0.0:
                notes.append(f"{name} amplitude bound does not certify positivity; sampled minimum {lo:.6g}")
    for p in medium.perturbation:
        if p.mu_value <= 0 or p.rho_value <= 0:
            raise MediumValidationError("perturbed coefficient values must be positive")
        if not (medium.a_left <= p.x_lo < p.x_hi <= medium.a_right):
            raise MediumValidationError(f"perturbation ({p.x_lo}, {p.x_hi}) is not inside the interior interval")
    spans = sorted((p.x_lo, p.x_hi) for p in medium.perturbation)
    for (_, hi), (lo, _) in zip(spans, spans[1:]):
        if lo < hi:
            raise MediumValidationError("perturbation intervals overlap")

    theta2 = medium.cut.theta2
    residuals = {}
    snapped = {}
    for name in ("a_left", "a_right"):
        a = getattr(medium, name)
        k = round(a * theta2)
        res = abs(a * theta2 - k)
        residuals[name] = res
        limit = _snap_tolerance(a * theta2) if tol is None else tol
        if res > limit:
            if not snap:
                raise MediumValidationError(f"{name}={a} gives a*theta2={a * theta2:.12g}, not an integer")
            new = k / theta2
            notes.append(f"{name} moved from {a:.12g} to {new:.12g} so that a*theta2 = {k}")
            snapped[name] = new
        elif res > 0:
            snapped[name] = k / theta2
    if snapped:
        medium = replace(medium, **snapped)
    if not medium.a_left < medium.a_right:
        raise MediumValidationError("a_left must be smaller than a_right")
    for p in medium.perturbation:
        if not (medium.a_left <= p.x_lo and p.x_hi <= medium.a_right):
            raise MediumValidationError("perturbation leaves the interior interval after endpoint snapping")

    delta = medium.cut.delta
    near = None
    frac = Fraction(delta).limit_denominator(10**6)
    if abs(delta - frac.numerator / frac.denominator) < 1e-12:
        near = (frac.numerator, frac.denominator)
        if frac.denominator < 1000:
            notes.append(f"delta={delta:.15g} is within 1e-12 of {frac}; the medium is close to periodic")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return ValidationReport(mu_b, rho_b, residuals, medium.cut.convergents, near, notes, medium)


def homogeneous_medium(mu: float = 1.0, rho: float = 1.0, cut: CutVector | None = None,
                       cells: int = 1, fixed_impedance: float | None = None) -> MediumSpec:
    """Constant medium with interior ``(-cells/theta2, cells/theta2)``."""
    cut = cut or CutVector.from_angle(np.pi / 3)
    a = cells / cut.theta2
    return MediumSpec(TrigPoly2D.const(mu), TrigPoly2D.const(rho), cut, -a, a,
                      impedance=ImpedanceRule(fixed_impedance))
