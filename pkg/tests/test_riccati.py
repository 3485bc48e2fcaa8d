import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import pipeline, quasiperiodic_medium
from quasirtr.halfline import fundamental_pipeline
from quasirtr.medium import homogeneous_medium
from quasirtr.riccati import (WindingError, classify_frequency, continuous_log, difference_equation_check,
                              reconstruct_spectrum, winding_number)


@given(st.integers(-6, 6), st.floats(0.0, 0.9), st.integers(6, 9))
def test_winding_of_monomial_plus_offset(n, r, log_k):
    # z^n + c winds n times when |c| < 1
    K = 2 ** log_k
    s = np.arange(K) / K
    f = np.exp(2j * np.pi * n * s) + r * np.exp(-2j * np.pi * s) * (n != 0) + (n == 0) * 2.0
    w, resid = winding_number(f)
    assert w == n
    assert resid < 1e-6


def test_winding_refines_coarse_samples():
    s = np.arange(8) / 8
    w, _ = winding_number(np.exp(2j * np.pi * 3 * s))
    assert w == 3


def test_winding_undefined_near_zero():
    s = np.arange(64) / 64
    with pytest.raises(WindingError):
        winding_number(np.sin(2 * np.pi * s) + 0j)


def test_continuous_log_inverts_exp():
    s = np.arange(64) / 64
    g = 0.3 * np.cos(2 * np.pi * s) + 1j * (2.5 + np.sin(2 * np.pi * s))
    assert np.allclose(np.exp(continuous_log(np.exp(g))), np.exp(g))
    assert np.abs(np.diff(continuous_log(np.exp(g)).imag)).max() < 0.5


def test_reconstructed_spectrum_is_lattice():
    lam = reconstruct_spectrum(0.5 * np.exp(0.3j), "right", 0.1, 2)
    assert lam.size == 5
    assert np.allclose(np.abs(lam), 0.5)
    assert np.allclose(lam[3] / lam[2], np.exp(-0.2j * np.pi))


def test_homogeneous_medium_is_propagative():
    pl = fundamental_pipeline(homogeneous_medium(), 3.0, 0.0)
    assert pl.klass.cls == "propagative"
    lam = np.array([p.lam for p in pl.spectrum.resolved()])
    L, d = pl.mesh.length, quasiperiodic_medium().cut.delta
    # outgoing and incoming plane waves, each dressed by the phase lattice of the cut
    lattice = np.concatenate([reconstruct_spectrum(np.exp(3j * L), "right", d, 128),
                              reconstruct_spectrum(np.exp(-3j * L), "right", d, 128)])
    assert np.abs(np.abs(lam) - 1).max() < 1e-6
    assert max(np.abs(lattice - x).min() for x in lam) < 1e-6


@pytest.mark.parametrize("omega", [4.0, 5.642])
def test_left_and_right_fundamental_pairs(omega):
    pl = pipeline(omega)
    r, l = pl.fund["right"], pl.fund["left"]
    assert r.phi0(0.0) == pytest.approx(1.0) and l.phi0(0.0) == pytest.approx(1.0)
    if pl.klass.cls == "evanescent":
        assert abs(r.lambda0) < 1 and abs(l.lambda0) < 1
    else:
        assert abs(abs(r.lambda0) - 1) < 1e-3 and r.Q0 > 0 and l.Q0 > 0


def test_fundamental_pair_is_unique():
    pl = pipeline(5.642)
    zero = [p for p in pl.spectrum.resolved() if p.winding_phi == 0 and p.flux > 0]
    assert len(zero) == 1


def test_difference_check_reproduces_lambda():
    med = quasiperiodic_medium()
    d = difference_equation_check(pipeline(11.5).fund["right"], med.cut.delta)
    assert d.phi_residual < 1e-3 and d.lambda_residual < 1e-6


def test_classification_thresholds():
    pl = pipeline(4.0)
    strict = classify_frequency(pl.spectrum, 4.0, tol_circle=1e-3)
    assert strict.cls == "evanescent" and strict.n_on_circle == 0
    # a tolerance wider than the gap between |lambda0| and 1 mixes the circles
    loose = classify_frequency(pl.spectrum, 4.0, tol_circle=1.0)
    assert loose.cls != "evanescent"
