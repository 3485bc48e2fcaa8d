"""INI configuration files describing a medium, a source and solver settings.

Sections and keys::

    [cut]          angle_deg = 60        (or theta1 = ..., theta2 = ...)
    [mu], [rho]    constant = 1.5
                   terms = m n kind amplitude    (one term per line, kind like cos*sin)
    [interior]     a_left, a_right
    [perturbation] intervals = x_lo x_hi mu rho  (one interval per line, optional section)
    [source]       kind, center, width, amplitude, sharpness, cutoff
    [impedance]    rule = omega | fixed ; value = z (for fixed)
    [solver]       k_modes, mesh_nodes, interior_h, tol_circle, cells, snap_endpoints
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

from .medium import (CutVector, ImpedanceRule, MediumSpec, MediumValidationError, Perturbation, SourceSpec,
                     TrigPoly2D)


class ConfigError(MediumValidationError):
    pass


@dataclass
class SolverSettings:
    k_modes: int = 64
    mesh_nodes: int = 400
    interior_h: float = 5e-3
    tol_circle: float = 1e-3
    cells: int = 12
    snap_endpoints: bool = True


@dataclass
class RunConfig:
    medium: MediumSpec
    source: SourceSpec
    solver: SolverSettings
    raw: dict[str, dict[str, str]]


def _lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.strip().splitlines() if ln.strip() and not ln.strip().startswith("#")]


def _poly(sec) -> TrigPoly2D:
    terms = []
    for ln in _lines(sec.get("terms", "")):
        parts = ln.split()
        if len(parts) != 4:
            raise ConfigError(f"bad term line {ln!r}: expected 'm n kind amplitude'")
        terms.append((int(parts[0]), int(parts[1]), parts[2], float(parts[3])))
    try:
        return TrigPoly2D.from_terms(sec.getfloat("constant", 0.0), terms)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cut(sec) -> CutVector:
    if "angle_deg" in sec:
        return CutVector.from_angle(math.radians(sec.getfloat("angle_deg")))
    if "theta1" in sec and "theta2" in sec:
        try:
            return CutVector(sec.getfloat("theta1"), sec.getfloat("theta2"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("[cut] needs angle_deg or theta1/theta2")


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable configuration: {exc}") from exc
    for name in ("cut", "mu", "rho", "interior"):
        if not cp.has_section(name):
            raise ConfigError(f"missing section [{name}]")
    try:
        cut = _cut(cp["cut"])
        pert = []
        if cp.has_section("perturbation"):
            for ln in _lines(cp["perturbation"].get("intervals", "")):
                parts = ln.split()
                if len(parts) != 4:
                    raise ConfigError(f"bad perturbation line {ln!r}")
                pert.append(Perturbation(*map(float, parts)))
        imp = ImpedanceRule()
        if cp.has_section("impedance"):
            rule = cp["impedance"].get("rule", "omega").strip()
            if rule == "fixed":
                value = cp["impedance"].getfloat("value")
                if value is None or value <= 0:
                    raise ConfigError("a fixed impedance needs a positive value")
                imp = ImpedanceRule(value)
            elif rule != "omega":
                raise ConfigError(f"unknown impedance rule {rule!r}")
        medium = MediumSpec(_poly(cp["mu"]), _poly(cp["rho"]), cut, cp["interior"].getfloat("a_left"),
                            cp["interior"].getfloat("a_right"), tuple(pert), imp)
        src = cp["source"] if cp.has_section("source") else {}
        source = SourceSpec(kind=src.get("kind", "bump").strip(), center=float(src.get("center", 0.0)),
                            width=float(src.get("width", 1.0)), amplitude=float(src.get("amplitude", 1.0)),
                            sharpness=float(src.get("sharpness", 100.0)), cutoff=float(src.get("cutoff", 6.0)))
        sv = cp["solver"] if cp.has_section("solver") else None
        solver = SolverSettings()
        if sv is not None:
            solver = SolverSettings(sv.getint("k_modes", 64), sv.getint("mesh_nodes", 400),
                                    sv.getfloat("interior_h", 5e-3), sv.getfloat("tol_circle", 1e-3),
                                    sv.getint("cells", 12), sv.getboolean("snap_endpoints", True))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid value: {exc}") from exc
    raw = {s: dict(cp[s]) for s in cp.sections()}
    return RunConfig(medium, source, solver, raw)


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"configuration file {p} not found")
    return parse_config(p.read_text())
