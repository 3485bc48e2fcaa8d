import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import quasiperiodic_medium
from quasirtr.medium import (CutVector, MediumSpec, MediumValidationError, Perturbation, SourceSpec, TrigPoly2D,
                             effective_coefficient, homogeneous_medium, trace_at, validate)

finite = st.floats(-50, 50, allow_nan=False)


@given(s=finite, x=finite, m=st.integers(-3, 3))
def test_trace_is_periodic_in_offset(s, x, m):
    med = quasiperiodic_medium()
    a = trace_at(med.mu_p, s, x, med.cut)
    b = trace_at(med.mu_p, s + m, x, med.cut)
    assert np.isclose(a, b, atol=1e-9)


@given(s=st.floats(0, 1), x=st.floats(-10, 10), n=st.integers(-4, 4))
def test_one_cell_step_shifts_offset_by_delta(s, x, n):
    med = quasiperiodic_medium()
    L, d = med.cut.cell_length, med.cut.delta
    assert np.isclose(trace_at(med.rho_p, s, x + n * L, med.cut), trace_at(med.rho_p, s + n * d, x, med.cut),
                      atol=1e-9)


def test_cut_from_angle():
    cut = CutVector.from_angle(np.pi / 3)
    assert cut.delta == pytest.approx(1 / np.sqrt(3))
    assert cut.cell_length == pytest.approx(2 / np.sqrt(3))
    p, q = cut.convergents[-1]
    assert abs(p / q - cut.delta) < 1 / q**2


def test_cut_rejects_bad_direction():
    with pytest.raises(ValueError):
        CutVector(1.0, 0.0)


def test_trig_poly_terms():
    f = TrigPoly2D.from_terms(1.5, [(1, 1, "cos*cos", 1.0)])
    assert f(0.0, 0.0) == pytest.approx(2.5)
    assert f(0.5, 0.0) == pytest.approx(0.5)
    assert not f.is_constant() and TrigPoly2D.const(2.0).is_constant()
    lo, hi = f.sampled_bounds()
    assert lo == pytest.approx(0.5) and hi == pytest.approx(2.5)


def test_validate_snaps_endpoints_with_warning():
    cut = CutVector.from_angle(np.pi / 3)
    med = MediumSpec(TrigPoly2D.const(1.0), TrigPoly2D.const(1.0), cut, -1.0, 1.0)
    with pytest.warns(UserWarning, match="moved"):
        rep = validate(med)
    assert rep.medium.a_right == pytest.approx(1 / cut.theta2)
    assert rep.medium.a_left == pytest.approx(-1 / cut.theta2)


def test_validate_strict_endpoints():
    cut = CutVector.from_angle(np.pi / 3)
    med = MediumSpec(TrigPoly2D.const(1.0), TrigPoly2D.const(1.0), cut, -1.0, 1.0)
    with pytest.raises(MediumValidationError):
        validate(med, snap=False)


def test_validate_rejects_nonpositive_coefficient():
    cut = CutVector.from_angle(np.pi / 3)
    mu = TrigPoly2D.from_terms(0.5, [(1, 0, "cos*cos", 1.0)])
    med = MediumSpec(mu, TrigPoly2D.const(1.0), cut, -1 / cut.theta2, 1 / cut.theta2)
    with pytest.raises(MediumValidationError, match="mu_p"):
        validate(med)


def test_validate_rejects_overlapping_defects():
    base = quasiperiodic_medium(with_defects=False)
    med = MediumSpec(base.mu_p, base.rho_p, base.cut, base.a_left, base.a_right,
                     (Perturbation(-0.5, 0.3, 1, 1), Perturbation(0.2, 0.6, 1, 1)))
    with pytest.raises(MediumValidationError, match="overlap"):
        validate(med)


def test_effective_coefficient_uses_defect_values():
    med = quasiperiodic_medium()
    mu, rho = effective_coefficient(med, np.array([-0.5, 0.5, 0.0]))
    assert mu[0] == 2.0 and rho[0] == 1.0
    assert mu[1] == 1.0 and rho[1] == 2.5
    assert mu[2] == pytest.approx(2.5)


def test_bump_source_support_and_peak():
    src = SourceSpec()
    x = np.array([-1.0, -0.999, 0.0, 0.5, 1.0])
    f = src(x)
    assert f[2] == pytest.approx(1.0)
    assert f[0] == 0.0 and f[-1] == 0.0
    assert 0 < f[3] < 1e-10
    assert src.support == (-1.0, 1.0)


def test_homogeneous_medium_interior_is_cells():
    med = homogeneous_medium(cells=2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = validate(med)
    assert rep.medium.a_right * med.cut.theta2 == pytest.approx(2)
