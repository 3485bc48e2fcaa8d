import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import pipeline, quasiperiodic_medium
from quasirtr.halfline import (SingularImpedanceError, build_symbols, decay_rate_fit, dtn_from_rtr,
                               flux_from_rtr, fundamental_pipeline, halfguide_trace, reconstruct_halfline,
                               riccati_residuals, rtr_coefficient, symbol_winding)
from quasirtr.medium import homogeneous_medium


def test_dtn_examples():
    assert dtn_from_rtr(0.0, 2.0) == pytest.approx(-2j)
    assert dtn_from_rtr(1.0, 2.0) == 0
    with pytest.raises(SingularImpedanceError):
        dtn_from_rtr(-1.0, 1.0)


@given(st.complex_numbers(max_magnitude=0.999))
def test_contractive_rtr_has_nonnegative_flux(Lam):
    assert flux_from_rtr(Lam) >= -1e-12
    assert flux_from_rtr(Lam) == pytest.approx(1 - abs(Lam) ** 2, abs=1e-12)


def test_homogeneous_halfline_field_is_outgoing_wave():
    med = homogeneous_medium()
    pl = fundamental_pipeline(med, 3.0, 0.0)
    fld = reconstruct_halfline(pl.fund["right"], med, med.a_right, 3, pl.mesh)
    x, u = fld.flat()
    exact = 1j / 6.0 * np.exp(3j * np.abs(x - med.a_right))
    assert np.abs(u - exact).max() / np.abs(exact).max() < 1e-5


@pytest.mark.parametrize("omega", [4.0, 5.642, 20.0])
@pytest.mark.parametrize("side", ["right", "left"])
def test_riccati_equations_hold(omega, side):
    pl = pipeline(omega)
    res = riccati_residuals(pl.symbols(side), build_symbols(pl.fund[side]))
    assert max(res) < 1e-6


@pytest.mark.parametrize("side", ["right", "left"])
def test_propagation_symbol_has_zero_winding(side):
    assert symbol_winding(build_symbols(pipeline(5.642).fund[side])) == 0


@pytest.mark.parametrize("omega", [4.0, 5.642])
def test_rtr_flux_matches_mode_flux(omega):
    med = quasiperiodic_medium()
    pl = pipeline(omega)
    f = pl.fund["right"]
    s = med.a_right * med.cut.theta1
    Lam = rtr_coefficient(f, pl.symbols_right, med.a_right, med.cut.theta1)
    assert abs(Lam) <= 1 + 1e-9
    assert flux_from_rtr(Lam) == pytest.approx(f.Q0 / abs(f.phi0(s)) ** 2, abs=1e-6)


def test_halfline_cells_join_continuously():
    med = quasiperiodic_medium()
    pl = pipeline(5.642)
    fld = reconstruct_halfline(pl.fund["left"], med, med.a_left, 6, pl.mesh)
    assert fld.junction_mismatch() < 1e-8


def test_halfguide_trace_matches_halfline():
    med = quasiperiodic_medium()
    pl = pipeline(4.0)
    f = pl.fund["right"]
    s = med.a_right * med.cut.theta1
    fld = reconstruct_halfline(f, med, med.a_right, 3, pl.mesh)
    tr = halfguide_trace(f, med, f.phi0.scaled(1 / complex(f.phi0(s))), med.a_right, 3, pl.mesh)
    assert np.abs(tr - fld.values[:3]).max() / np.abs(fld.values).max() < 1e-8


def test_decay_fit_needs_enough_cells():
    med = quasiperiodic_medium()
    pl = pipeline(4.0)
    with pytest.raises(ValueError):
        decay_rate_fit(reconstruct_halfline(pl.fund["right"], med, med.a_right, 3, pl.mesh))
