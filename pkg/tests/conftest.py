import functools
import warnings

import numpy as np
import pytest

from quasirtr.halfline import fundamental_pipeline
from quasirtr.medium import CutVector, MediumSpec, Perturbation, TrigPoly2D

ACCEPTANCE_LINES: list[str] = []


def quasiperiodic_medium(with_defects: bool = True) -> MediumSpec:
    """mu = 1.5 + cos cos, rho = 1.5 + (sin + sin)/2, cut at 60 degrees, interior of one cell each side."""
    cut = CutVector.from_angle(np.pi / 3)
    mu = TrigPoly2D.from_terms(1.5, [(1, 1, "cos*cos", 1.0)])
    rho = TrigPoly2D.from_terms(1.5, [(1, 0, "sin*cos", 0.5), (0, 1, "cos*sin", 0.5)])
    pert = (Perturbation(-0.9, -0.3, 2.0, 1.0), Perturbation(0.2, 0.8, 1.0, 2.5)) if with_defects else ()
    return MediumSpec(mu, rho, cut, -1 / cut.theta2, 1 / cut.theta2, pert)


@functools.lru_cache(maxsize=None)
def pipeline(omega: float, epsilon: float = 0.0, K: int = 64):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fundamental_pipeline(quasiperiodic_medium(), omega, epsilon, K=K)


@pytest.fixture(scope="session")
def medium():
    return quasiperiodic_medium()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
