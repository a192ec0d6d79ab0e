import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.errors import InvalidInput, OutsideStrip
from artifact.numerics import default_grid
from artifact.thermo import (LARGE_C, ModelParams, ThermalState, epsilon_at, epsilon_prime_at,
                             fermi_weight, rho_t_at, solve_epsilon, yy_residual)


@given(st.floats(-3, 10), st.floats(0.3, 6))
def test_free_fermion_closed_forms(h, T):
    s = solve_epsilon(ModelParams(math.inf, h, T))
    lam = s.grid.nodes
    assert np.max(np.abs(s.eps - (lam ** 2 - h))) < 1e-12
    assert np.max(np.abs(s.rho_t - 1 / (2 * math.pi))) < 1e-12
    th = 1 / (1 + np.exp((lam ** 2 - h) / T))
    assert abs(s.D - np.sum(s.grid.weights * th) / (2 * math.pi)) < 1e-12


def test_yang_yang_residual_and_physical_sanity(standard_state):
    assert yy_residual(standard_state) < 1e-11
    assert standard_state.P.real > 0 and standard_state.D.real > 0
    assert abs(standard_state.P.imag) < 1e-14 and abs(standard_state.D.imag) < 1e-14
    # eps is even and rho_t exceeds the free value for repulsive c
    assert np.max(np.abs(standard_state.eps - standard_state.eps[::-1])) < 1e-11
    assert np.all(standard_state.rho_t.real > 1 / (2 * math.pi))


def test_continuation_matches_nodes(standard_state):
    lam = standard_state.grid.nodes[::7]
    assert np.max(np.abs(epsilon_at(standard_state, lam) - standard_state.eps[::7])) < 1e-11
    assert np.max(np.abs(rho_t_at(standard_state, lam) - standard_state.rho_t[::7])) < 1e-11


def test_epsilon_prime_is_derivative(standard_state):
    z, h = 0.7 + 0.4j, 1e-5
    fd = (epsilon_at(standard_state, z + h) - epsilon_at(standard_state, z - h)) / (2 * h)
    assert abs(fd - epsilon_prime_at(standard_state, z)) < 1e-8


def test_grid_convergence(standard_params):
    a = solve_epsilon(standard_params)
    b = solve_epsilon(standard_params, default_grid(4, 2, panel_width=0.5))
    assert abs(a.P - b.P) < 1e-12 and abs(a.D - b.D) < 1e-12


def test_large_c_approaches_free_fermions():
    a = solve_epsilon(ModelParams(LARGE_C, 1.0, 1.0))
    b = solve_epsilon(ModelParams(math.inf, 1.0, 1.0))
    assert abs(a.P - b.P) < 1e-7


def test_pressure_increases_with_chemical_potential():
    P = [solve_epsilon(ModelParams(10.0, h, 2.0)).P.real for h in (-1, 1, 3)]
    assert P[0] < P[1] < P[2]


def test_invalid_parameters():
    with pytest.raises(InvalidInput):
        ModelParams(10, 1, 0)
    with pytest.raises(InvalidInput):
        ModelParams(-1, 1, 1)


def test_strip_guard(standard_state):
    with pytest.raises(OutsideStrip):
        epsilon_at(standard_state, 9.5j)


def test_fermi_weight_values(standard_state):
    lam = standard_state.grid.nodes[:5]
    th = fermi_weight(standard_state, lam)
    assert np.max(np.abs(th - 1 / (1 + np.exp(standard_state.eps[:5] / 2)))) < 1e-14


def test_json_roundtrip(standard_state):
    back = ThermalState.from_json(standard_state.to_json())
    assert np.array_equal(back.eps, standard_state.eps)
    assert back.params == standard_state.params and back.P == standard_state.P
    with pytest.raises(InvalidInput):
        ThermalState.from_json('{"schema": 99}')
