"""Numba and numpy kernel paths must agree; the dispatch flag must select the fallback."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lunarcomm import kernels
from lunarcomm._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
rng = np.random.default_rng(7)


@needs_numba
def test_kepler_paths_agree():
    m = rng.uniform(0, 2 * math.pi, 5000)
    e = rng.uniform(0, 0.99, 5000)
    a, ok_a = kernels._solve_kepler_numba(m, e)
    b, ok_b = kernels._solve_kepler_numpy(m.copy(), e)
    assert ok_a and ok_b
    assert np.max(np.abs(a - b)) < 1e-12


@needs_numba
def test_segment_paths_agree():
    n = 5000
    p1, p2, c = (rng.normal(0, 5000, (n, 3)) for _ in range(3))
    r = rng.uniform(100, 4000, n)
    assert np.array_equal(kernels._segment_clear_numba(p1, p2, c, r), kernels._segment_clear_numpy(p1, p2, c, r))


@needs_numba
def test_elevation_paths_agree():
    n = 5000
    site, center, target = (rng.normal(0, 5000, (n, 3)) for _ in range(3))
    a = kernels._elevation_numba(site, center, target)
    b = kernels._elevation_numpy(site, center, target)
    assert np.max(np.abs(a - b)) < 1e-9


@given(arrays(float, 20, elements=st.floats(0, 2 * math.pi, exclude_max=True)), st.floats(0, 0.97))
@settings(max_examples=100, deadline=None)
def test_kepler_residual(m, e):
    big_e = kernels.solve_kepler(m, e)
    assert np.max(np.abs(big_e - e * np.sin(big_e) - m)) < 1e-11


def test_kepler_shape_preserved():
    out = kernels.solve_kepler(np.zeros((2, 3)), 0.1)
    assert out.shape == (2, 3)


def test_kepler_non_convergence_raises():
    with pytest.raises(kernels.KeplerConvergenceError):
        kernels.solve_kepler(np.array([1.0]), np.array([float("nan")]))


def test_segment_tangent_counts_as_clear():
    # closest approach exactly equals the radius
    assert kernels.segment_clear([-10.0, 5.0, 0.0], [10.0, 5.0, 0.0], [0.0, 0.0, 0.0], 5.0)[0]
    assert not kernels.segment_clear([-10.0, 4.9, 0.0], [10.0, 4.9, 0.0], [0.0, 0.0, 0.0], 5.0)[0]


def test_segment_sphere_beyond_endpoint_is_clear():
    assert kernels.segment_clear([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0], 1.5)[0]


def test_elevation_zenith_and_horizon():
    site = [0.0, 0.0, 10.0]
    assert kernels.elevation_deg(site, [0, 0, 0], [0.0, 0.0, 20.0])[0] == pytest.approx(90.0)
    assert kernels.elevation_deg(site, [0, 0, 0], [5.0, 0.0, 10.0])[0] == pytest.approx(0.0, abs=1e-12)
    assert kernels.elevation_deg(site, [0, 0, 0], [0.0, 0.0, 0.0])[0] == pytest.approx(-90.0)


def test_env_flag_selects_numpy_path():
    env = dict(os.environ, LUNARCOMM_NUMBA="0")
    code = "from lunarcomm import _accel; print(_accel.USE_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_numpy_path_end_to_end():
    """Access intervals computed on the fallback path match the default path."""
    code = (
        "from lunarcomm.scenario import bundled_scenario, run_access_study;"
        "sc = bundled_scenario().with_step(60.0);"
        "r = run_access_study(sc, [(2, 2)])[0];"
        "print(repr([(round(i.start, 6), round(i.stop, 6)) for i in r.chain]))"
    )
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, LUNARCOMM_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1]
    assert outs[0].startswith("[(")
