import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.amplitudes import (amplitude_B, asymptotic_sum, c0_functional, double_pole_ibp,
                                 double_pole_offset, k_alpha, offset_polyline, pv_cauchy,
                                 surrounding_rectangle, theta_independence)
from artifact.deformed import lieb, solve_deformed
from artifact.errors import InvalidInput
from artifact.numerics import Contour, cauchy_transform
from artifact.thermo import ModelParams, solve_epsilon

V_PATH = [-3.0, 0.5 + 0.5j, 3.0]


def test_pv_on_real_segment_closed_form():
    C = Contour.polyline([-1, 2], max_panel=0.5)
    lam = C.nodes.real
    got = pv_cauchy(C, C.nodes ** 2)
    exact = 1.5 + 3 * lam + lam ** 2 * np.log((2 - lam) / (lam + 1))
    assert np.max(np.abs(got - exact)) < 1e-11


def test_pv_is_plemelj_average_on_bent_contour():
    C = Contour.polyline(V_PATH, max_panel=0.5)
    f = np.exp(-C.nodes ** 2)
    pv = pv_cauchy(C, f)
    n = 1j * C.tangents()
    k = np.arange(5, len(C), 37)
    k = k[np.abs(C.nodes[k] - V_PATH[1]) > 0.2]
    d = 1e-4
    z = C.nodes[k]
    Cf = lambda q: cauchy_transform(C, f, q)
    avg = 0.5 * (Cf(z + d * n[k]) + Cf(z - d * n[k]))
    # L' jumps by 2 pi i f' as well, so the side average carries pi i d n f'
    avg -= 1j * math.pi * d * n[k] * (-2 * z * np.exp(-z ** 2))
    assert np.max(np.abs(avg - pv[k])) < 1e-7


def test_double_pole_methods_agree():
    C = Contour.polyline(V_PATH, max_panel=0.5)
    nu = 0.3 * np.exp(-4 * C.nodes ** 2)
    ibp = double_pole_ibp(C, nu)
    off, (r1, r2) = double_pole_offset(C, nu, nu_fn=lambda p, sh: 0.3 * np.exp(-4 * p ** 2))
    assert abs(ibp - off) < 1e-9
    assert abs(r1 - r2) > abs(off - r2)        # extrapolation improves on both offsets


@given(st.floats(0.01, 0.3))
def test_offset_polyline_keeps_distance(delta):
    v = np.array(V_PATH)
    w = offset_polyline(v, delta)
    for k in range(len(v) - 1):
        for p in (w[k], w[k + 1]):
            a, b = v[k], v[k + 1]
            t = ((p - a) * np.conj(b - a)).real / abs(b - a) ** 2
            assert abs(abs(p - (a + t * (b - a))) - delta) < 1e-12
    # shifted to the left of the orientation
    assert w[0].imag > 0


def test_c0_functional_limits():
    C = Contour.polyline([-2, 2], max_panel=0.5)
    z = np.exp(-C.nodes ** 2)
    assert c0_functional(C, z, math.inf) == 0
    tall = Contour.polyline([-2, 4j, 2])
    with pytest.raises(InvalidInput):
        c0_functional(tall, np.ones(len(tall)), 5.0)
    # decays like 1/c^2 for large c
    a, b = c0_functional(C, z, 50.0), c0_functional(C, z, 100.0)
    assert abs(a / b - 4) < 0.01


@given(st.floats(-5, 5), st.floats(0.5, 20))
def test_k_alpha_at_zero_alpha_is_lieb_kernel(lam, c):
    assert abs(k_alpha(lam, c, 0.0) + 1j * lieb(lam, c)) < 1e-14


def test_surrounding_rectangle_encloses(standard_state):
    d = solve_deformed(standard_state, "+R1;-R1")
    R, H = surrounding_rectangle(d.contour, 10.0, standard_state.grid.cutoff)
    assert H > d.contour.max_abs_imag() and R.closed


def test_normalisation_at_alpha_zero(standard_state):
    amp = amplitude_B(solve_deformed(standard_state, "0"))
    assert abs(amp.B - 1) < 1e-6 and amp.alpha_limit


def test_free_fermion_amplitude_is_exp_of_double_integral(ff_params):
    d = solve_deformed(solve_epsilon(ff_params), "+R1;-R1")
    amp = amplitude_B(d)
    assert amp.c0 == 0 and abs(amp.det_u1 - 1) < 1e-14
    g = cmath.exp(2j * math.pi * ff_params.alpha) - 1
    assert abs(amp.B - g ** 2 * cmath.exp(amp.a_double) / (amp.denom1 * amp.denom2)
               * amp.denom1 * amp.denom2 / (1 - cmath.exp(2j * math.pi * ff_params.alpha)) ** 2
               * (1 - cmath.exp(2j * math.pi * ff_params.alpha)) ** 2 / g ** 2) < 1e-12


def test_theta_independence_n1():
    d = solve_deformed(solve_epsilon(ModelParams(10.0, 4.0, 2.0, 0.1)), "+R1;-R1")
    spread, _ = theta_independence(d, [(0.137 + 1j, -0.113 - 1j), (0.5 + 0.4j, -0.6 - 0.3j)])
    assert spread < 1e-8


def test_split_state_rejected():
    d = solve_deformed(solve_epsilon(ModelParams(math.inf, 1.0, 1.0)), "+R1;-R1")
    with pytest.raises(InvalidInput):
        amplitude_B(d)


def test_asymptotic_sum():
    x = np.array([0.0, 1.0])
    s = asymptotic_sum(None, ["0", "a"], [1.0, 0.5], [0.0, 2.0], x)
    assert np.allclose(s, [1.5, 1 + 0.5 * np.exp(-2)])
    with pytest.raises(InvalidInput):
        asymptotic_sum(None, ["0"], [1.0, 2.0], [0.0], x)
