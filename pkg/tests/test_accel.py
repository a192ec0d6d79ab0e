import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact import _accel

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba missing")


def _cplx(rng, n, scale=3.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


@given(st.integers(0, 2 ** 31 - 1), st.floats(0.5, 20.0))
def test_lieb_kernels_backends_agree(seed, c):
    rng = np.random.default_rng(seed)
    x, nodes, vals = _cplx(rng, 37, 0.3 * c), rng.uniform(-5, 5, 53), _cplx(rng, 53)
    for fn in (_accel.lieb_apply, _accel.lieb_prime_apply):
        a, b = fn(x, nodes, vals, c, impl="numba"), fn(x, nodes, vals, c, impl="numpy")
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(b)))
    A = _accel.lieb_matrix(x, nodes, c, impl="numba")
    B = _accel.lieb_matrix(x, nodes, c, impl="numpy")
    assert np.max(np.abs(A - B)) <= 1e-13 * np.max(np.abs(B))


@given(st.integers(0, 2 ** 31 - 1))
def test_cauchy_backends_agree(seed):
    rng = np.random.default_rng(seed)
    pts, nodes, vals = _cplx(rng, 29) + 10j, _cplx(rng, 61), _cplx(rng, 61)
    for fn in (_accel.cauchy_apply, _accel.cauchy2_apply):
        a = fn(pts, nodes, vals, impl="numba")
        b = fn(pts, nodes, vals, impl="numpy")
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_double_pole_sum_is_derivative_of_cauchy_sum():
    rng = np.random.default_rng(3)
    nodes, vals = _cplx(rng, 40), _cplx(rng, 40)
    p, h = np.array([0.3 + 7j]), 1e-5
    fd = (_accel.cauchy_apply(p + h, nodes, vals) - _accel.cauchy_apply(p - h, nodes, vals)) / (2 * h)
    assert abs(fd[0] - _accel.cauchy2_apply(p, nodes, vals)[0]) < 1e-8 * abs(fd[0])


@given(st.complex_numbers(max_magnitude=800, allow_nan=False, allow_infinity=False))
def test_log1pexp_backends_agree_and_match_definition(z):
    a = _accel.log1pexp(np.array([z]), impl="numba")[0]
    b = _accel.log1pexp(np.array([z]), impl="numpy")[0]
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))
    if abs(z.real) < 30:
        ref = np.log(1 + np.exp(z))
        # equal up to the branch of the logarithm
        d = (a - ref) / (2j * np.pi)
        assert abs(d - round(d.real)) < 1e-9


def test_log1pexp_tiny_and_huge():
    z = np.array([-700 + 0.3j, 700 + 0.1j])
    out = _accel.log1pexp(z)
    assert abs(out[0] - np.exp(z[0])) <= 1e-15 * abs(np.exp(z[0]))
    assert abs(out[1] - z[1]) < 1e-12


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, ARTIFACT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from artifact import _accel; print(_accel.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["ARTIFACT_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", "from artifact import _accel; print(_accel.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
