import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.poles import (audit_count, branch_sign, fermi_residue, free_fermion_pole,
                            locate_poles)
from artifact.thermo import ModelParams, epsilon_prime_at, solve_epsilon


def test_branch_signs():
    assert branch_sign("+", "R") == branch_sign("-", "L") == 1
    assert branch_sign("+", "L") == branch_sign("-", "R") == -1


@given(st.floats(-2, 8), st.floats(0.3, 4), st.floats(-0.3, 0.3), st.integers(0, 3))
def test_free_fermion_poles_are_poles(h, T, a, m):
    ha = h + 2j * math.pi * a * T
    for half in "+-":
        for side in "RL":
            r = free_fermion_pole(ha, T, half, side, m)
            assert abs(1 + cmath.exp((r * r - ha) / T)) < 1e-10
            assert (r.real > 0) == (side == "R")


def test_free_fermion_table(ff_params):
    table = locate_poles(solve_epsilon(ff_params), 3)
    assert len(table) == 16
    for e in table.entries:
        assert abs(e.r - free_fermion_pole(ff_params.h_alpha, 1.0, e.half, e.side, e.m)) < 1e-10
        assert (e.r.imag > 0) == (e.half == "+")


def test_interacting_table(standard_state):
    table = locate_poles(standard_state, 3)
    assert max(e.residual for e in table.entries) < 1e-10
    assert all(a == b for _, a, b in audit_count(standard_state, table))
    # eps is even and real on R: poles come in mirror (-conj r) and conjugate pairs
    for e in table.entries:
        mirror = table.get(e.half, "L" if e.side == "R" else "R", e.m)
        conj = table.get("-" if e.half == "+" else "+", e.side, e.m)
        assert abs(mirror.r + e.r.conjugate()) < 1e-10 and abs(conj.r - e.r.conjugate()) < 1e-10
    with pytest.raises(KeyError):
        table.get("+", "R", 9)


def test_residue_formula(standard_state):
    table = locate_poles(standard_state, 1)
    e = table.get("+", "R", 0)
    assert abs(fermi_residue(standard_state, e.r) + 2.0 / epsilon_prime_at(standard_state, e.r)) < 1e-12
    assert abs(e.residue - fermi_residue(standard_state, e.r)) < 1e-12


def test_csv_dump(standard_state):
    text = locate_poles(standard_state, 0).to_csv()
    lines = text.strip().splitlines()
    assert lines[0].startswith("half,side,m,re_r") and len(lines) == 5
