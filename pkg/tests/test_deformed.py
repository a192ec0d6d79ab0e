import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.deformed import RootSelection, solve_deformed, tower_audit
from artifact.errors import InvalidInput
from artifact.lengths import correlation_length
from artifact.thermo import ModelParams, solve_epsilon

token = st.tuples(st.sampled_from("RL"), st.integers(1, 4))


@given(st.lists(token, min_size=0, max_size=3, unique=True), st.data())
def test_selection_text_roundtrip(plus, data):
    minus = data.draw(st.lists(token, min_size=len(plus), max_size=len(plus), unique=True))
    sel = RootSelection(tuple(("+", s, m - 1) for s, m in plus), tuple(("-", s, m - 1) for s, m in minus))
    assert RootSelection.parse(str(sel)) == sel
    assert sel.mirror().mirror() == sel


@pytest.mark.parametrize("text", ["+R1", "+R1;-R1;-L1", "+R0;-R1", "-R1;+R1", "+R1,+R1;-R1,-L1",
                                  "+R1,+L1;-R1", "+X1;-R1"])
def test_bad_selections(text):
    with pytest.raises(InvalidInput):
        RootSelection.parse(text)


def test_empty_selection_parses():
    assert RootSelection.parse("0").n == RootSelection.parse("").n == 0


def test_n0_state_is_shifted_eps(standard_params):
    p = standard_params.with_alpha(0.1)
    st_ = solve_epsilon(p)
    d = solve_deformed(st_, "0")
    assert np.max(np.abs(d.u - st_.eps)) < 1e-10


def test_conjugate_pair_solution(standard_state):
    d = solve_deformed(standard_state, "+R1;-R1")
    assert d.residual() < 1e-8 and max(d.root_residuals) < 1e-10
    # at alpha = 0 the roots are complex conjugates and lie near the Fermi-weight poles
    assert abs(d.s_plus[0] - d.s_minus[0].conjugate()) < 1e-9
    assert all(a == (1, 0) for a in tower_audit(d, _towers(d)))
    assert abs(d.s_plus[0] - d.r_plus[0]) < 1.0


def _towers(d):
    from artifact.deformed import Tower, _tower
    return [_tower(s, b, s.real, w, e) for s, b, w, e in d.contour.meta["towers"]]


def test_mirror_symmetry_of_lengths(standard_state):
    a = correlation_length(solve_deformed(standard_state, "+R1;-R1")).p
    b = correlation_length(solve_deformed(standard_state, "+L1;-L1")).p
    assert abs(a - b) < 1e-9


def test_json_dump(standard_state):
    import json
    d = solve_deformed(standard_state, "+R1;-R1")
    blob = json.loads(d.to_json())
    assert blob["selection"] == "+R1;-R1" and len(blob["z"][0]) == len(d.contour)


@pytest.mark.parametrize("h,T", [(-2.0, 2.0), (1.0, 2.0), (4.0, 1.0), (10.0, 0.5)])
def test_free_fermion_lengths_at_alpha_zero(h, T):
    # u == eps: each root sits on a pole and p = i (s+ - s-) = 2 Im sqrt(h + i pi T)
    d = solve_deformed(solve_epsilon(ModelParams(math.inf, h, T)), "+R1;-R1")
    assert d.contour.meta["split"]
    exact = 2 * cmath.sqrt(h + 1j * math.pi * T).imag
    assert abs(correlation_length(d).p - exact) < 1e-12


def test_free_fermion_alpha_continuity():
    p0 = correlation_length(solve_deformed(solve_epsilon(ModelParams(math.inf, 1.0, 2.0)), "+R1;-R1")).p
    pa = correlation_length(solve_deformed(solve_epsilon(ModelParams(math.inf, 1.0, 2.0, 1e-5)), "+R1;-R1")).p
    assert abs(pa - p0) < 1e-4 and not np.isnan(pa)


def test_gamma_step_independence(standard_state):
    a = correlation_length(solve_deformed(standard_state, "+R2;-R1")).p
    b = correlation_length(solve_deformed(standard_state, "+R2;-R1", gamma_steps=3)).p
    assert abs(a - b) < 1e-9
