"""The acceptance suite: one function per criterion, each returning a CriterionResult.

Thresholds below are the fixed targets of the project; they are not tuned to
the results.  Wall-clock budgets are part of each check.
"""
import cmath
import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

GOLDEN_DIR = Path(__file__).resolve().parents[2] / "golden"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    values: dict = field(default_factory=dict)
    detail: str = ""

    def line(self):
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        tag = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.number:2d} {tag}  {self.title}: {vals} "
                f"[{self.seconds:.1f}s / {self.budget:g}s]{' ' + self.detail if self.detail else ''}")


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}j"
    return str(v)


def _timed(number, title, budget, body):
    t0 = time.perf_counter()
    ok, values, detail = body()
    dt = time.perf_counter() - t0
    return CriterionResult(number, title, bool(ok and dt < budget), dt, budget, values,
                           detail + ("" if dt < budget else " (over time budget)"))


# -- 1 ---------------------------------------------------------------------------------

def criterion_1():
    from .thermo import ModelParams, solve_epsilon

    def body():
        st = solve_epsilon(ModelParams(math.inf, 1.0, 1.0))
        lam = st.grid.nodes
        e_err = float(np.max(np.abs(st.eps - (lam ** 2 - 1.0))))
        r_err = float(np.max(np.abs(st.rho_t - 1 / (2 * math.pi))))
        return e_err < 1e-12 and r_err < 1e-12, {"eps_err": e_err, "rho_t_err": r_err}, ""
    return _timed(1, "free-fermion closed form", 1.0, body)


# -- 2 ---------------------------------------------------------------------------------

def criterion_2():
    from .poles import audit_count, locate_poles
    from .thermo import ModelParams, solve_epsilon

    def body():
        p = ModelParams(math.inf, 1.0, 1.0, 0.1)
        table = locate_poles(solve_epsilon(p), 3)
        seed_err = 0.0
        for e in table.entries:
            sg = 1 if (e.half, e.side) in (("+", "R"), ("-", "L")) else -1
            root = cmath.sqrt(p.h_alpha + sg * 1j * math.pi * p.T * (2 * e.m + 1))
            exact = root if e.side == "R" else -root
            seed_err = max(seed_err, abs(e.r - exact))
        complete = len(table) == 16
        st = solve_epsilon(ModelParams(10.0, 4.0, 2.0))
        t2 = locate_poles(st, 3)
        res = max(e.residual for e in t2.entries)
        audit = audit_count(st, t2)
        counts_ok = all(a == b for _, a, b in audit)
        ok = complete and seed_err < 1e-10 and res < 1e-10 and counts_ok
        return ok, {"seed_err": seed_err, "max_residual": res,
                    "audit": ";".join(f"{h}{a}/{b}" for h, a, b in audit)}, ""
    return _timed(2, "pole location", 5.0, body)


# -- 3 ---------------------------------------------------------------------------------

def criterion_3():
    from .deformed import solve_deformed
    from .lengths import correlation_length, leading_length
    from .thermo import ModelParams, solve_epsilon

    def body():
        p = ModelParams(10.0, 4.0, 2.0)
        d0 = solve_deformed(solve_epsilon(p), "0")
        p_zero = abs(correlation_length(d0).p)
        pa = p.with_alpha(0.1)
        da = solve_deformed(solve_epsilon(pa), "0")
        contour = correlation_length(da).p
        press = leading_length(pa)
        gap = abs(contour - press)
        return p_zero < 1e-10 and gap < 1e-9, {"p0_alpha0": p_zero, "contour_vs_pressure": gap,
                                               "p0": contour}, ""
    return _timed(3, "leading length", 10.0, body)


# -- 4 ---------------------------------------------------------------------------------

def criterion_4():
    from .lengths import alpha_slope_check
    from .thermo import ModelParams

    def body():
        s, target, mism, rich = alpha_slope_check(ModelParams(10.0, 4.0, 2.0))
        return mism < 1e-6, {"slope": s, "target": target, "rel_mismatch": mism}, ""
    return _timed(4, "slope / density identity", 10.0, body)


# -- 5 ---------------------------------------------------------------------------------

def criterion_5():
    from .deformed import solve_deformed
    from .lengths import correlation_length
    from .numerics import default_grid
    from .thermo import ModelParams, solve_epsilon

    def body():
        p = ModelParams(10.0, 4.0, 2.0)
        sel = "+R1;-R1"
        d = solve_deformed(solve_epsilon(p), sel)
        pl = correlation_length(d).p
        resid = d.residual()
        root_res = max(d.root_residuals)
        fine = solve_epsilon(p, default_grid(p.h, p.T, 0.0, panel_width=0.5))
        p_grid = correlation_length(solve_deformed(fine, sel)).p
        p_gamma = correlation_length(solve_deformed(solve_epsilon(p), sel, gamma_steps=16)).p
        stab = max(abs(p_grid - pl), abs(p_gamma - pl))
        ok = resid < 1e-8 and root_res < 1e-10 and abs(pl.imag) < 1e-8 and pl.real > 0 and stab < 1e-6
        return ok, {"p": pl, "eq_residual": resid, "root_residual": root_res,
                    "stability": stab}, ""
    return _timed(5, "deformed solve", 60.0, body)


# -- 6 ---------------------------------------------------------------------------------

def criterion_6():
    from .amplitudes import amplitude_B, theta_independence
    from .deformed import solve_deformed
    from .thermo import ModelParams, rho_t_at, solve_epsilon

    def body():
        p = ModelParams(10.0, 4.0, 2.0)
        st = solve_epsilon(p)
        amp = amplitude_B(solve_deformed(st, "0"))
        norm = abs(amp.B - 1)
        t1, t2 = amp.theta1, amp.theta2
        r1 = abs(amp.meta["ratio1"] - 2 * math.pi * rho_t_at(st, t1))
        r2 = abs(amp.meta["ratio2"] - 2 * math.pi * rho_t_at(st, t2))
        thetas = [(t1, t2), (0.41 + 0.2j, -0.37 - 0.15j), (-0.6 + 0.3j, 0.25 - 0.3j)]
        spreads = []
        for sel in ("0", "+R1;-R1"):
            d = solve_deformed(solve_epsilon(p.with_alpha(0.1)), sel)
            spreads.append(theta_independence(d, thetas)[0])
        spread = max(spreads)
        ok = norm < 1e-6 and max(r1, r2) < 1e-6 and spread < 1e-8
        return ok, {"abs_B_minus_1": norm, "ratio1_err": r1, "ratio2_err": r2,
                    "theta_spread": spread}, ""
    return _timed(6, "amplitude normalisation", 60.0, body)


# -- 7 ---------------------------------------------------------------------------------

def criterion_7(workers=None):
    from .thermo import ModelParams
    from .verification import ff_compare

    def body():
        cmp = ff_compare(ModelParams(math.inf, 1.0, 1.0, 0.1), np.arange(10.0, 31.0, 2.0),
                         workers=workers)
        ok = cmp.rate_mismatch < 0.1 and cmp.reduction >= 10
        return ok, {"rate": cmp.rate, "target": cmp.target, "rate_mismatch": cmp.rate_mismatch,
                    "reduction": cmp.reduction}, ""
    return _timed(7, "free-fermion oracle vs asymptotics", 120.0, body)


# -- 8 ---------------------------------------------------------------------------------

def criterion_8():
    from .verification import contraction_margin, exp_toy, lagrange_closed, lagrange_direct

    def body():
        spec = exp_toy()
        margin, _ = contraction_margin(spec)
        direct = lagrange_direct(spec, n_max=12, check=False)
        closed = lagrange_closed(spec)
        gap = abs(direct - closed)
        return margin >= 3 and gap < 1e-8, {"margin": margin, "gap": gap}, ""
    return _timed(8, "Lagrange-series identity", 30.0, body)


# -- 9 ---------------------------------------------------------------------------------

SYNTHETIC_CONFIGS = {
    "n=1": dict(),
    "n=2": dict(plus=(("R", 0), ("L", 1)), minus=(("L", 0), ("R", 1))),
}


def criterion_9():
    from .verification import SyntheticNu, contour_identity_check

    def body():
        vals = {}
        for name, kw in SYNTHETIC_CONFIGS.items():
            _, _, rel = contour_identity_check(SyntheticNu(**kw), lambda l: 0.2 * np.sin(l),
                                               lambda l: 0.2 * np.cos(l), x=1.3)
            vals[name] = rel
        return max(vals.values()) < 1e-10, vals, ""
    return _timed(9, "contour-deformation identity", 30.0, body)


# -- 10 --------------------------------------------------------------------------------

def read_sweep_csv(text):
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append(r)
    return rows


def golden_gap(rows, figure, golden_dir=GOLDEN_DIR):
    """Max |delta p| against the committed golden CSV (None when absent)."""
    path = Path(golden_dir) / f"figure_{figure}.csv"
    if not path.exists():
        return None
    ref = read_sweep_csv(path.read_text())
    if len(ref) != len(rows):
        return math.inf
    gap = 0.0
    for a, b in zip(rows, ref):
        for k in ("re_p", "im_p"):
            x, y = float(a[k]), float(b[k])
            if math.isnan(x) or math.isnan(y):
                return math.inf
            gap = max(gap, abs(x - y))
    return gap


def criterion_10(workers=None, figures=("3a", "3b", "4a", "4b"), golden_dir=GOLDEN_DIR):
    from .cli import build_config, figure_report, run_sweep

    def body():
        vals, ok = {}, True
        detail = []
        for fig in figures:
            cfg = build_config({"figure": fig, "workers": str(workers or 0)})
            rows = run_sweep(cfg)
            n, failed, nonpos, jumps = figure_report(rows, fig)
            gap = golden_gap(rows, fig, golden_dir)
            good = failed == 0 and nonpos == 0 and not jumps and (gap is None or gap < 1e-8)
            ok &= good
            vals[fig] = f"{n}rows/{failed}failed/{nonpos}nonpos/{len(jumps)}jumps" + \
                ("" if gap is None else f"/golden{gap:.1e}")
            if jumps:
                detail.append(f"{fig} jumps at {jumps[:3]}")
        return ok, vals, "; ".join(detail)
    return _timed(10, "figure reproduction", 900.0, body)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def run_all(only=None, workers=None):
    out = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        out.append(fn(workers) if k in (7, 10) else fn())
    return out
