import numpy as np
import pytest

from conftest import quasiperiodic_medium
from quasirtr.medium import SourceSpec, homogeneous_medium
from quasirtr.oracle import (OracleRefused, decay_rate, green_solution, homogeneous_rtr, truncated_halfline,
                             truncation_cells)


def test_refuses_tiny_absorption():
    with pytest.raises(OracleRefused):
        truncation_cells(quasiperiodic_medium(), 4.0, 1e-3, 1e-6)


def test_truncation_bound_below_tolerance():
    n, bound = truncation_cells(quasiperiodic_medium(), 4.0, 0.1, 1e-6)
    assert bound < 1e-6 and n > 0
    assert decay_rate(4.0, 0.1) == pytest.approx(np.imag(np.sqrt(16 + 0.1j)))


@pytest.mark.parametrize("side", ["right", "left"])
def test_truncated_halfline_constant_medium(side):
    med = homogeneous_medium()
    o = truncated_halfline(med, side, 0.0, 3.0, 0.2, 3.0)
    assert o.rtr == pytest.approx(homogeneous_rtr(3.0, 0.2, 3.0), abs=1e-5)


def test_homogeneous_rtr_vanishes_for_matched_impedance():
    assert abs(homogeneous_rtr(3.0, 0.0, 3.0)) < 1e-15


def test_green_solution_solves_the_equation():
    src = SourceSpec(kind="gaussian", width=0.3)
    om = 2.0
    x = np.linspace(-0.5, 0.5, 201)
    h = x[1] - x[0]
    u = green_solution(src, om, x)
    lap = (u[2:] - 2 * u[1:-1] + u[:-2]) / h ** 2
    res = -lap - om ** 2 * u[1:-1] - src(x[1:-1])
    assert np.abs(res).max() < 1e-3 * np.abs(src(x)).max()


def test_doubling_truncation_changes_less_than_bound():
    med = quasiperiodic_medium()
    a = truncated_halfline(med, "right", 0.3, 4.0, 0.2, 4.0, tol=1e-4, nodes_per_cell=100)
    b = truncated_halfline(med, "right", 0.3, 4.0, 0.2, 4.0, tol=1e-9, nodes_per_cell=100)
    assert b.cells >= 2 * a.cells
    assert abs(a.rtr - b.rtr) < a.truncation_bound


def test_wholeline_zero_source_gives_zero():
    from quasirtr.oracle import truncated_wholeline
    med = quasiperiodic_medium()
    w = truncated_wholeline(med, 4.0, 0.2, SourceSpec(amplitude=0.0), tol=1e-3, nodes_per_cell=50)
    assert np.all(w.values == 0)


def test_validation_report_cases():
    from quasirtr.oracle import validation_report
    cases = validation_report(quasiperiodic_medium(), 4.0, 0.1, SourceSpec())
    names = [c.name for c in cases]
    assert names == ["Lambda_left", "p_left", "Lambda_right", "p_right", "interior_field"]
    assert max(c.discrepancy for c in cases) < 1e-3
    assert all(c.truncation_bound < 1e-6 for c in cases)
    assert set(cases[0].as_dict()) == {"name", "method", "oracle", "discrepancy", "truncation_bound"}
