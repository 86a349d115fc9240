import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from burgers_rigidity import kernels

needs_numba = pytest.mark.skipif(kernels.NUMBA is None, reason="numba path disabled")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@needs_numba
@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 5)), elements=finite),
       st.integers(0, 2**32 - 1))
def test_fd_paths_agree(values, seed):
    valid = np.random.default_rng(seed).random(values.shape) > 0.2
    a = kernels.NUMPY["fd_axis0"](values, valid, 0.1)
    b = kernels.NUMBA["fd_axis0"](values, valid, 0.1)
    assert np.array_equal(a[1], b[1])
    assert np.allclose(a[0][a[1]], b[0][b[1]], rtol=1e-12, atol=1e-9)


@needs_numba
@given(arrays(np.float64, st.integers(3, 60), elements=st.floats(-5, 5)), st.floats(0.01, 0.18))
def test_godunov_paths_agree(u, lam):
    for x, y in zip(kernels.NUMPY["godunov"](u, lam), kernels.NUMBA["godunov"](u, lam)):
        assert np.allclose(x, y, rtol=1e-13, atol=1e-13)


@needs_numba
@given(arrays(np.float64, st.integers(2, 60), elements=st.floats(-5, 5)), st.lists(st.integers(1, 40), min_size=1))
def test_quotient_paths_agree(u, ks):
    ks = np.unique(np.array([k for k in ks if k < u.size] or [1], dtype=np.int64))
    if ks[0] >= u.size:
        return
    a = kernels.NUMPY["forward_quotients"](u, 0.1, ks)
    b = kernels.NUMBA["forward_quotients"](u, 0.1, ks)
    assert np.allclose(a[0], b[0], rtol=1e-13, atol=1e-12)


@needs_numba
@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 4)), elements=finite),
       st.integers(0, 2**32 - 1))
def test_jump_paths_agree(values, seed):
    valid = np.random.default_rng(seed).random(values.shape) > 0.1
    a = kernels.NUMPY["jump_flags"](values, valid, 5.0, 1e-8)
    b = kernels.NUMBA["jump_flags"](values, valid, 5.0, 1e-8)
    assert np.array_equal(a, b)


def test_godunov_flux_cases():
    # transonic rarefaction: interface flux f(0) = 0, so the cells next to it only see outer fluxes
    unew, _, _ = kernels.godunov(np.array([-1.0, -1.0, 1.0, 1.0]), 0.1)
    assert unew[1] == pytest.approx(-1.0 - 0.1 * (0.0 - 0.5))
    # shock with positive speed: upwind flux f(1) = 1/2 enters the first right cell
    unew, _, _ = kernels.godunov(np.array([1.0, 1.0, 0.0, 0.0]), 0.1)
    assert unew[2] == pytest.approx(0.0 + 0.1 * 0.5)


def test_env_flag_selects_numpy():
    env = dict(os.environ, BURGERS_RIGIDITY_NO_NUMBA="1")
    code = "from burgers_rigidity import kernels; print(kernels.IMPL is kernels.NUMPY, kernels.NUMBA is None)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["True", "True"]
