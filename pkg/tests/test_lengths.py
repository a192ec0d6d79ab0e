import math

import numpy as np
import pytest

from artifact.deformed import solve_deformed
from artifact.lengths import (SWEEP_COLUMNS, alpha_slope_check, correlation_length, format_value,
                              leading_length, length_point, qtm_eigenvalue, qtm_ratio,
                              qtm_reference, rows_to_csv)
from artifact.thermo import ModelParams, solve_epsilon


def test_leading_length_contour_vs_pressure(standard_params):
    p = standard_params.with_alpha(0.1)
    d = solve_deformed(solve_epsilon(p), "0")
    assert abs(correlation_length(d).p - leading_length(p)) < 1e-9
    assert leading_length(standard_params) == 0


def test_slope_identity(standard_params):
    s, target, mism, rich = alpha_slope_check(standard_params)
    assert mism < 1e-6 and rich < 1e-6


def test_qtm_correspondence(standard_params):
    p = standard_params.with_alpha(0.1)
    th = solve_epsilon(p)
    d = solve_deformed(th, "+R1;-R1")
    pl = correlation_length(d).p
    phys = solve_epsilon(standard_params)
    assert abs(qtm_reference(phys) - qtm_eigenvalue(d) - pl) < 1e-10
    x = 3.0
    assert abs(qtm_ratio(d, phys, x) - np.exp(-x * pl)) < 1e-10 * abs(np.exp(-x * pl))


def test_positive_real_part_for_several_selections(standard_state):
    for sel in ("+R1;-R1", "+R1;-L1", "+R2;-R1", "+R1,+R2;-R1,-R2"):
        assert correlation_length(solve_deformed(standard_state, sel)).p.real > 0


def test_length_point_row_and_failure_row():
    row = length_point(10, 4, 2, 0.0, "+R1;-R1")
    assert row["converged"] and row["re_p"] > 0
    bad = length_point(math.inf, 10, 2, 1e-6, "+R1;-R1")      # root 1e-6 from its pole
    assert not bad["converged"] and math.isnan(bad["re_p"]) and "CannotSeparate" in bad["error"]


def test_csv_formatting_is_fixed():
    rows = [{"c": 10.0, "h": 0.1, "T": 2.0, "re_alpha": 0.0, "im_alpha": 0.0, "selection": "0",
             "re_p": 1 / 3, "im_p": 0.0, "residual": 1e-13, "converged": True}]
    text = rows_to_csv(rows)
    head, line = text.splitlines()
    assert head.split(",") == SWEEP_COLUMNS
    assert "0.33333333333333331" in line and line.endswith("true")
    assert float(format_value(1 / 3)) == 1 / 3
