import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import quasiperiodic_medium
from quasirtr.interior import epsilon_sweep, h1_norm, interior_mesh, solve_field
from quasirtr.medium import SourceSpec, homogeneous_medium
from quasirtr.oracle import green_solution


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_h1_norm_of_linear_function(a, b):
    x = np.linspace(0, 1, 11)
    u = a + b * x
    exact = np.sqrt((a * a + a * b + b * b / 3) + b * b)
    assert h1_norm(x, u) == pytest.approx(exact, rel=1e-9, abs=1e-12)


def test_interior_mesh_contains_breakpoints():
    med = quasiperiodic_medium()
    nodes = interior_mesh(med, SourceSpec(), 0.05)
    for p in (-0.9, -0.3, 0.2, 0.8, -1.0, 1.0, med.a_left, med.a_right):
        assert np.min(np.abs(nodes - p)) < 1e-12
    assert np.all(np.diff(nodes) > 0)


def test_field_continuous_across_interfaces():
    med = quasiperiodic_medium()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fs = solve_field(med, 5.642, 0.0, SourceSpec(), n_cells=2)
    assert max(fs.continuity()) < 1e-8


def test_robin_trace_matches_dtn():
    med = homogeneous_medium()
    fs = solve_field(med, 3.0, 0.0, SourceSpec(), n_cells=1)
    it = fs.interior
    u_r = it.values[-1]
    assert it.robin_out_right == pytest.approx((it.dtn_right - 1j * it.z) * u_r, rel=1e-8)


def test_homogeneous_field_matches_green_function_with_absorption():
    med = homogeneous_medium(cells=1)
    src = SourceSpec()
    x = np.linspace(-3, 3, 601)
    u = solve_field(med, 3.0, 0.5, src, n_cells=3).sample(x)
    g = green_solution(src, 3.0, x, epsilon=0.5)
    assert np.linalg.norm(u - g) / np.linalg.norm(g) < 1e-3


def test_epsilon_sweep_rejects_bad_lists():
    med = homogeneous_medium()
    with pytest.raises(ValueError):
        epsilon_sweep(med, 3.0, [0.1, 0.2, 0.05])
    with pytest.raises(ValueError):
        epsilon_sweep(med, 3.0, [0.1, 0.05])
