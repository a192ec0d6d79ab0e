"""Correlation lengths p_i, the leading length p_0, and transfer-matrix eigenvalue analogs."""
import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArtifactError, BranchJump
from .numerics import TWO_PI, default_grid
from .thermo import solve_epsilon

BRANCH_TOL = 1e-8


@dataclass(frozen=True)
class LengthResult:
    selection: str
    p: complex
    branch_gap: float        # |log ratio| at the contour end (0 for a clean branch)
    refine_delta: float = math.nan

    @property
    def length(self):
        return 1.0 / self.p.real if self.p.real > 0 else math.inf


def _end_check(L, what):
    gap = float(max(abs(L[0]), abs(L[-1])))
    if not gap <= BRANCH_TOL:
        raise BranchJump(f"{what}: continuous log does not return to 0 at the ends ({gap:.2e})")
    return gap


def correlation_length(deformed):
    """p = -(1/2pi) int over the deformed contour of log[(1+e^{-u/T})/(1+e^{-eps/T})]."""
    C = deformed.contour
    Lu, Le = deformed.meta["logw_contour"], deformed.meta["logeps_contour"]
    gap = max(_end_check(Lu, "log(1+e^{-u/T})"), _end_check(Le, "log(1+e^{-eps/T})"))
    if C.meta.get("split"):
        # towers also enclose the eps-zeros: keep the eps part on the real line
        st = deformed.phys
        p = -np.sum(C.weights * Lu) / TWO_PI + st.P / st.params.T
    else:
        p = -np.sum(C.weights * (Lu - Le)) / TWO_PI
    return LengthResult(str(deformed.selection), complex(p), gap)


def leading_length(params, grid=None, tol=1e-12):
    """p_0 = (P(h) - P(h_alpha))/T from two thermal solves on the same grid."""
    if grid is None:
        grid = default_grid(params.h, params.T, params.alpha.imag)
    if params.alpha == 0:
        return 0j
    P0 = solve_epsilon(params.with_alpha(0), grid, tol).P
    Pa = solve_epsilon(params, grid, tol).P
    return complex((P0 - Pa) / params.T)


def alpha_slope_check(params, grid=None, step=1e-4):
    """Central difference of p_0 in alpha against -2 pi i D.

    Returns (slope, target, mismatch, richardson_change) where the last entry
    is the change of the slope when the step is halved."""
    p0 = params.with_alpha(0)
    if grid is None:
        grid = default_grid(params.h, params.T, 0.0)

    def slope(hs):
        return (leading_length(p0.with_alpha(hs), grid) - leading_length(p0.with_alpha(-hs), grid)) / (2 * hs)
    s1 = slope(step)
    s2 = slope(0.5 * step)
    D = solve_epsilon(p0, grid).D
    target = -2j * math.pi * D
    return s1, target, abs(s1 - target) / abs(target), abs(s2 - s1)


def qtm_eigenvalue(deformed):
    """Lambda_i = (1/2pi) int over the deformed contour of log(1 + e^{-u/T})."""
    C = deformed.contour
    Lu = deformed.meta["logw_contour"]
    _end_check(Lu, "log(1+e^{-u/T})")
    return complex(np.sum(C.weights * Lu) / TWO_PI)


def qtm_reference(thermal):
    """Lambda_0 at the physical chemical potential: (1/2pi) int_R log(1+e^{-eps/T}) = P/T."""
    return complex(thermal.P / thermal.params.T)


def qtm_ratio(deformed, thermal, x):
    """e^{-x p_i} written as exp(-x (Lambda_0(h) - Lambda_i(h_alpha)))."""
    return complex(np.exp(-x * (qtm_reference(thermal) - qtm_eigenvalue(deformed))))


# -- sweeps -------------------------------------------------------------------------

SWEEP_COLUMNS = ["c", "h", "T", "re_alpha", "im_alpha", "selection", "re_p", "im_p",
                 "residual", "converged"]


def length_point(c, h, T, alpha, selection, panel_width=1.0, order=16, tol=1e-11,
                 gamma_steps=8):
    """One sweep row; solver failures yield a row with converged=False."""
    from .deformed import solve_deformed
    from .thermo import ModelParams
    row = {"c": c, "h": h, "T": T, "re_alpha": complex(alpha).real,
           "im_alpha": complex(alpha).imag, "selection": str(selection)}
    try:
        params = ModelParams(c, h, T, alpha)
        grid = default_grid(h, T, complex(alpha).imag, panel_width, order)
        st = solve_epsilon(params, grid, min(tol, 1e-12))
        d = solve_deformed(st, selection, gamma_steps=gamma_steps, tol=tol)
        res = correlation_length(d)
        row.update(re_p=res.p.real, im_p=res.p.imag,
                   residual=max([d.residual()] + list(d.root_residuals)), converged=True)
    except ArtifactError as exc:
        row.update(re_p=math.nan, im_p=math.nan, residual=math.nan, converged=False,
                   error=f"{type(exc).__name__}: {exc}")
    return row


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def rows_to_csv(rows, columns=SWEEP_COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r.get(k, "")) for k in columns])
    return buf.getvalue()
