"""Command-line front end: ``quasirtr {solve, sweep-eps, dispersion, bands, classify, validate}``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 zero-flux
frequency, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import classify_sweep, dirichlet_bands, dispersion_curve
from .cell_solver import CellSolverError
from .config import ConfigError, RunConfig, load_config
from .halfline import SingularImpedanceError
from .interior import ClassificationChangeError, epsilon_sweep, solve_field
from .medium import MediumSpec, MediumValidationError, TrigPoly2D, validate
from .oracle import validation_report
from .riccati import ExtractionError, WindingError, ZeroFluxError
from .svg import plot

log = logging.getLogger("quasirtr")

EXIT_OK, EXIT_INVALID, EXIT_ZERO_FLUX, EXIT_NUMERICAL = 0, 2, 3, 4


class Outputs:
    """Collects written files for the run record."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.dir / name

    def csv(self, name: str, header, rows) -> Path:
        p = self.path(name)
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        return p

    def record(self, payload: dict) -> Path:
        payload = dict(payload, files=self.files + ["run.json"])
        p = self.dir / "run.json"
        p.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
        return p


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _json_default(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


def _cplx(v):
    return None if v is None else {"re": float(np.real(v)), "im": float(np.imag(v))}


def _load(args) -> tuple[RunConfig, MediumSpec]:
    cfg = load_config(args.config)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = validate(cfg.medium, snap=cfg.solver.snap_endpoints, require_positive=True)
    for w in caught:
        log.warning("%s", w.message)
    return cfg, report.medium


def _settings(args, cfg):
    K = args.k_modes or cfg.solver.k_modes
    M = args.mesh_nodes or cfg.solver.mesh_nodes
    return K, M


def _base_record(args, cfg, command):
    return {"command": command, "tool_version": __version__, "config": cfg.raw,
            "arguments": {k: v for k, v in vars(args).items() if k != "func"}}


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    cfg, medium = _load(args)
    K, M = _settings(args, cfg)
    cells = args.cells if args.cells is not None else cfg.solver.cells
    t0 = time.perf_counter()
    fs = solve_field(medium, args.omega, args.epsilon, cfg.source, n_cells=cells, K=K, M=M, h=cfg.solver.interior_h)
    elapsed = time.perf_counter() - t0
    pl = fs.pipeline
    out = Outputs(args.out)
    x, u = fs.flat()
    out.csv("field.csv", ["x", "re_u", "im_u", "abs_u"], zip(x, u.real, u.imag, np.abs(u)))
    chosen = {id(_source_pair(pl, s)): s for s in ("right", "left")}
    rows = []
    for p in pl.spectrum.pairs:
        side = _pair_side(p, pl)
        rows.append([args.omega, args.epsilon, side, p.lam.real, p.lam.imag, abs(p.lam),
                     "" if p.winding_phi is None else p.winding_phi, "" if p.winding_psi is None else p.winding_psi,
                     p.flux, p.flux_std, int(id(p) in chosen), int(p.resolved)])
    out.csv("riccati_spectrum.csv", ["omega", "epsilon", "side", "re_lambda", "im_lambda", "abs_lambda",
                                     "winding_phi", "winding_psi", "Q_mean", "Q_std", "is_fundamental", "resolved"],
            rows)
    plot(out.path("field.svg"), [{"x": x, "y": u.real, "label": "Re u"}, {"x": x, "y": np.abs(u), "label": "|u|"}],
         title=f"omega={args.omega:g}, epsilon={args.epsilon:g}", xlabel="x", ylabel="u")
    rec = _base_record(args, cfg, "solve")
    rec.update(omega=args.omega, epsilon=args.epsilon, K=pl.K, M=M,
               classification=pl.klass.cls if pl.klass else "absorbing",
               lambda0={s: _cplx(f.lambda0) for s, f in pl.fund.items()},
               Lambda={"left": _cplx(fs.interior.Lambda_left), "right": _cplx(fs.interior.Lambda_right)},
               Q0={s: f.Q0 for s, f in pl.fund.items()}, continuity=list(fs.continuity()),
               K_attempts=pl.attempts, timings={"solve_s": elapsed})
    out.record(rec)
    print(f"{rec['classification']}: lambda0_right={pl.fund['right'].lambda0:.6f} "
          f"Lambda_right={fs.interior.Lambda_right:.6f} -> {out.dir}")
    return EXIT_OK


def _source_pair(pl, side):
    """The pencil eigenpair the fundamental pair of ``side`` was taken from."""
    f = pl.fund[side]
    target = f.lambda0 if side == "right" else 1.0 / f.lambda0
    best = min(pl.spectrum.resolved(), key=lambda p: abs(p.lam - target))
    return best


def _pair_side(p, pl) -> str:
    if pl.klass is not None and pl.klass.cls == "propagative":
        return "right" if p.flux > 0 else "left"
    return "right" if abs(p.lam) < 1.0 else "left"


def cmd_sweep_eps(args) -> int:
    cfg, medium = _load(args)
    K, M = _settings(args, cfg)
    eps = [float(e) for e in args.eps_list.split(",") if e.strip()]
    t0 = time.perf_counter()
    res = epsilon_sweep(medium, args.omega, eps, cfg.source, K=K, M=M, h=cfg.solver.interior_h)
    out = Outputs(args.out)
    out.csv("sweep.csv", ["epsilon", "rel_H1_error"], res.rows())
    plot(out.path("sweep.svg"), [{"x": np.log10(res.eps), "y": np.log10(res.errors), "style": "points"},
                                 {"x": np.log10(res.eps), "y": np.log10(res.errors)}],
         title=f"omega={args.omega:g}, slope={res.slope:.3f}", xlabel="log10 epsilon", ylabel="log10 rel. H1 error")
    rec = _base_record(args, cfg, "sweep-eps")
    rec.update(omega=args.omega, classification=res.cls, slope=res.slope, monotone=res.monotone,
               lambda0={s: _cplx(v) for s, v in res.lambda0_limit.items()},
               timings={"sweep_s": time.perf_counter() - t0})
    out.record(rec)
    print(f"slope={res.slope:.4f} monotone={res.monotone}")
    return EXIT_OK


def cmd_dispersion(args) -> int:
    cfg, medium = _load(args)
    K, M = _settings(args, cfg)
    t0 = time.perf_counter()
    pts = dispersion_curve(medium, (args.omega_min, args.omega_max), args.steps, K=K, M=M,
                           tol_circle=cfg.solver.tol_circle)
    out = Outputs(args.out)
    rows = [[p.omega, np.nan if p.lambda0 is None else p.lambda0.real,
             np.nan if p.lambda0 is None else p.lambda0.imag, p.k0, p.Q0, p.cls] for p in pts]
    out.csv("dispersion.csv", ["omega", "re_lambda0", "im_lambda0", "k0", "Q0", "class"], rows)
    lam = np.array([np.nan if p.lambda0 is None else p.lambda0 for p in pts], dtype=complex)
    circ = np.exp(2j * np.pi * np.linspace(0, 1, 200))
    plot(out.path("lambda_trajectory.svg"),
         [{"x": circ.real, "y": circ.imag, "color": "#999999"},
          {"x": lam.real, "y": lam.imag, "style": "points", "label": "lambda0(omega)"}],
         title="fundamental eigenvalue", xlabel="Re", ylabel="Im", equal=True)
    series = []
    for b in sorted({p.branch for p in pts}):
        sel = [p for p in pts if p.branch == b and p.lambda0 is not None]
        if sel:
            series.append({"x": [p.k0_unwrapped for p in sel], "y": [p.omega for p in sel]})
    plot(out.path("dispersion.svg"), series or [{"x": [0], "y": [0]}], title="dispersion", xlabel="k0 (unwrapped)",
         ylabel="omega")
    rec = _base_record(args, cfg, "dispersion")
    rec.update(timings={"dispersion_s": time.perf_counter() - t0}, K=K, M=M)
    out.record(rec)
    print(f"{len(pts)} frequencies, {len({p.branch for p in pts})} branch(es)")
    return EXIT_OK


def cmd_bands(args) -> int:
    cfg, medium = _load(args)
    _, M = _settings(args, cfg)
    if args.alpha is not None:
        rho = TrigPoly2D.from_terms(1.5, [(1, 0, "sin*cos", args.alpha), (0, 1, "cos*sin", args.alpha)])
        medium = replace(medium, mu_p=TrigPoly2D.const(1.0), rho_p=rho)
    s = np.arange(args.s_points) / args.s_points
    t0 = time.perf_counter()
    res = dirichlet_bands(medium, s, args.n_max, M)
    out = Outputs(args.out)
    out.csv("bands.csv", ["s", "n", "lambda_n"], [[sv, b.n, v] for b in res.bands for sv, v in zip(b.s, b.values)])
    plot(out.path("bands.svg"), [{"x": b.s, "y": b.values} for b in res.bands]
         + ([{"x": [0, 1], "y": [res.omega_star ** 2] * 2, "color": "#000000", "label": "omega_*^2"}]
            if res.omega_star else []),
         title="Dirichlet bands", xlabel="s", ylabel="lambda_n(s)")
    rec = _base_record(args, cfg, "bands")
    rec.update(omega_star=res.omega_star, overlap_from=res.overlap_from, notes=res.notes,
               bands=[{"n": b.n, "a": b.a, "b": b.b} for b in res.bands],
               timings={"bands_s": time.perf_counter() - t0})
    out.record(rec)
    print(f"omega_*={res.omega_star} (verified up to n={args.n_max})")
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg, medium = _load(args)
    K, M = _settings(args, cfg)
    if args.omegas:
        grid = [float(v) for v in args.omegas.split(",") if v.strip()]
    else:
        if args.omega_min is None or args.omega_max is None:
            raise ConfigError("classify needs --omegas or --omega-min/--omega-max")
        grid = list(np.linspace(args.omega_min, args.omega_max, args.steps))
    t0 = time.perf_counter()
    res = classify_sweep(medium, grid, K=K, M=M, tol_circle=cfg.solver.tol_circle)
    out = Outputs(args.out)
    out.csv("classify.csv", ["omega", "class"], [[e.omega, e.cls] for e in res.entries])
    rec = _base_record(args, cfg, "classify")
    rec.update(intervals=res.intervals(), failures={str(e.omega): e.error for e in res.entries if e.error},
               timings={"classify_s": time.perf_counter() - t0})
    out.record(rec)
    for cls, lo, hi in res.intervals():
        print(f"[{lo:g}, {hi:g}] {cls}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg, medium = _load(args)
    K, M = _settings(args, cfg)
    t0 = time.perf_counter()
    cases = validation_report(medium, args.omega, args.epsilon, cfg.source, tol=args.tol, K=K, M=M,
                              h=cfg.solver.interior_h)
    out = Outputs(args.out)
    p = out.path("oracle_report.json")
    p.write_text(json.dumps([c.as_dict() for c in cases], indent=2) + "\n")
    rec = _base_record(args, cfg, "validate")
    rec.update(omega=args.omega, epsilon=args.epsilon, K=K, M=M,
               max_discrepancy=max(c.discrepancy for c in cases), timings={"validate_s": time.perf_counter() - t0})
    out.record(rec)
    for c in cases:
        print(f"{c.name:16s} discrepancy {c.discrepancy:.3e} (truncation bound {c.truncation_bound:.1e})")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasirtr", description="Quasiperiodic 1D Helmholtz solver with RtR conditions")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--k-modes", type=int, default=None)
        p.add_argument("--mesh-nodes", type=int, default=None)

    p = sub.add_parser("solve", help="solve the whole-line problem at one frequency")
    common(p)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--cells", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep-eps", help="limiting absorption convergence study")
    common(p)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--eps-list", default="0.1,0.05,0.025,0.0125")
    p.set_defaults(func=cmd_sweep_eps)

    p = sub.add_parser("dispersion", help="track the fundamental eigenvalue over a frequency range")
    common(p)
    p.add_argument("--omega-min", type=float, required=True)
    p.add_argument("--omega-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=50)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("bands", help="Dirichlet eigenvalue bands of one cell")
    common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--s-points", type=int, default=64)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("classify", help="evanescent / propagative classification")
    common(p)
    p.add_argument("--omegas", default=None)
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=20)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("validate", help="compare the pipeline with truncated direct solves (epsilon >= 0.05)")
    common(p)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MediumValidationError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ZeroFluxError as exc:
        print(f"zero-flux frequency: {exc}", file=sys.stderr)
        return EXIT_ZERO_FLUX
    except (ExtractionError, WindingError, CellSolverError, SingularImpedanceError, ClassificationChangeError,
            np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
