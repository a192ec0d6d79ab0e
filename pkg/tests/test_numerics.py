import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.errors import (DerivativeVanishes, EvaluationTooCloseToContour, InvalidInput,
                             NoConvergence, SingularSystem, ZeroOnBoundary)
from artifact.numerics import (Contour, bernstein_rho, cauchy_transform, count_zeros,
                               count_zeros_polygon, default_grid, fixed_point, make_real_grid,
                               newton_complex, nystrom_det, nystrom_solve, reference_panel)


@given(st.integers(0, 31))
def test_gauss_panel_exact_for_polynomials(k):
    x, w, _, _ = reference_panel(16)
    exact = 0.0 if k % 2 else 2.0 / (k + 1)
    assert abs(np.sum(w * x ** k) - exact) < 1e-13


def test_real_grid_gaussian_integral():
    g = make_real_grid(8.0, 16, 16)
    assert abs(np.sum(g.weights * np.exp(-g.nodes ** 2)) - math.sqrt(math.pi)) < 1e-14
    assert g.nodes.flags.writeable is False


def test_grid_rejects_bad_sizes():
    with pytest.raises(InvalidInput):
        make_real_grid(1.0, 0, 16)
    with pytest.raises(InvalidInput):
        make_real_grid(math.inf, 4, 16)


def test_default_grid_cutoff_grows_with_temperature():
    assert default_grid(1, 5).cutoff > default_grid(1, 1).cutoff


def test_rectangle_winding_integral():
    C = Contour.rectangle(-1, 2, -1.5, 1, max_panel=0.5)
    assert abs(C.integrate(1 / C.nodes) - 2j * math.pi) < 1e-12
    assert abs(C.integrate(C.nodes ** 3)) < 1e-12


def test_clockwise_closed_contour_rejected():
    with pytest.raises(InvalidInput):
        Contour.polyline([0, 1j, 1], closed=True)


def test_spectral_derivative_of_polynomial():
    C = Contour.polyline([-1, 1 + 1j, 2], max_panel=0.7)
    f = C.nodes ** 5 - 2 * C.nodes
    assert np.max(np.abs(C.derivative(f) - (5 * C.nodes ** 4 - 2))) < 1e-10


def test_interpolation_reproduces_panel_polynomial():
    C = Contour.polyline([0, 2], max_panel=1.0)
    vals = np.exp(C.nodes)
    pts = np.array([0.1, 0.33, 0.9])
    assert np.max(np.abs(C.interpolate(vals, pts, 0) - np.exp(pts))) < 1e-13


@given(st.floats(-0.5, 1.5), st.floats(1e-6, 1.0), st.sampled_from([1, -1]))
def test_cauchy_transform_of_constant(x, y, side):
    C = Contour.polyline([0, 1], max_panel=0.25)
    lam = complex(x, side * y)
    exact = cmath.log((1 - lam) / (0 - lam))
    got = cauchy_transform(C, np.ones(len(C)), lam)
    assert abs(got - exact) < 1e-11 * max(1, abs(exact))


def test_cauchy_transform_on_contour_raises():
    C = Contour.polyline([0, 1])
    with pytest.raises(EvaluationTooCloseToContour):
        cauchy_transform(C, np.ones(len(C)), 0.5)


def test_bernstein_rho_is_one_on_segment():
    r = bernstein_rho(np.array([0j]), np.array([1 + 0j]), np.array([0.3 + 0j]))
    assert abs(r[0, 0] - 1) < 1e-12


def test_fixed_point_contraction_and_failure():
    v, rep = fixed_point(np.cos, np.array([0.0]), tol=1e-14)
    assert abs(v[0] - math.cos(v[0])) < 1e-13 and rep.converged
    with pytest.raises(NoConvergence):
        fixed_point(lambda v: 2 * v + 1, np.array([1.0]), max_iter=20)
    with pytest.raises(InvalidInput):
        fixed_point(np.cos, np.array([0.0]), damping=0)


@given(st.complex_numbers(min_magnitude=0.5, max_magnitude=5))
def test_newton_finds_square_roots(a):
    z = newton_complex(lambda z: z * z - a, lambda z: 2 * z, seed=cmath.sqrt(a) * 1.1)
    assert abs(z * z - a) < 1e-10


def test_newton_flat_derivative():
    with pytest.raises(DerivativeVanishes):
        newton_complex(lambda z: z * z + 1, lambda z: 2 * z, seed=0j)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_rank_one_determinant(a, b):
    g = make_real_grid(1.0, 4, 16)
    f = lambda x: np.exp(a * x)
    k = lambda x: np.cos(b * x)
    det = nystrom_det(lambda x, y: f(x) * k(y), g)
    exact = 1 + np.sum(g.weights * f(g.nodes) * k(g.nodes))
    assert abs(det - exact) < 1e-11 * abs(exact)


def test_nystrom_solve_and_singular():
    g = make_real_grid(1.0, 2, 16)
    v, rep = nystrom_solve(lambda x, y: np.ones_like(x * y), np.ones(len(g.nodes)), g, factor=0.25)
    # v + 0.25 * int v = 1 -> v = 1/(1 + 0.5)
    assert np.max(np.abs(v - 1 / 1.5)) < 1e-12
    with pytest.raises(SingularSystem):
        nystrom_solve(lambda x, y: np.ones_like(x * y), np.ones(len(g.nodes)), g, factor=-0.5)


@given(st.lists(st.complex_numbers(max_magnitude=0.8), min_size=1, max_size=4))
def test_argument_principle_counts_polynomial_roots(roots):
    f = lambda z: np.prod([z - r for r in roots], axis=0)
    assert count_zeros(f, -1 - 1j, 1 + 1j) == len(roots)


def test_count_polygon_and_zero_on_boundary():
    f = lambda z: z - 0.25
    assert count_zeros_polygon(f, [-1 - 0.5j, 1 - 0.5j, 1j]) == 1
    assert count_zeros_polygon(f, [1j, 1 - 0.5j, -1 - 0.5j]) == 1      # orientation does not matter
    with pytest.raises(ZeroOnBoundary):
        count_zeros(lambda z: z - 1, -1 - 1j, 1 + 1j)
