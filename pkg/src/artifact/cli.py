"""Command-line front end: single points, figure sweeps, oracles and the acceptance suite.

    artifact thermo    --c 10 --h 4 --T 2
    artifact poles     --c 10 --h 4 --T 2
    artifact lengths   --figure 3a --out runs/
    artifact amplitude --c 10 --h 4 --T 2 --alpha-re 0.1 --selection "+R1;-R1"
    artifact oracle    --h 1 --T 1 --alpha-re 0.1
    artifact verify

Settings come from (lowest to highest precedence) built-in defaults, a flat
``key = value`` file given by ``--config`` and command-line flags.

Exit codes: 0 success, 1 a check failed, 2 solver failure (an error record is
written to ``errors.json`` in the output directory), 3 invalid input.
"""
import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ArtifactError, InvalidInput
from .lengths import SWEEP_COLUMNS, format_value, length_point, rows_to_csv

CACHE_ENV = "ARTIFACT_CACHE_DIR"
CACHE_POLICIES = ("off", "on", "refresh")
EXIT_OK, EXIT_CHECK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2, 3

# Figure sweeps.  Axis ranges are our choice: the published plots carry no
# numeric tick labels.
H_RANGE = "-2:10:0.25"
T_RANGE = "0.5:6:0.1"
FIG4B_SELECTIONS = (
    ("i", "+R1;-R1"),
    ("ii", "+R1;-L1"),
    ("iii", "+R2;-R1"),
    ("iv", "+R1,+R2;-R1,-R2"),
    ("v", "+R1,+R2;-R1,-L2"),
)
FIGURES = {
    "3a": dict(axis="h", axis_range=H_RANGE, c=("7", "10", "inf"), T=("2",),
               series="c", title="p(h), T = 2"),
    "3b": dict(axis="h", axis_range=H_RANGE, c=("10",), T=("1", "3", "5"),
               series="T", title="p(h), c = 10"),
    "4a": dict(axis="T", axis_range=T_RANGE, c=("10",), h=("-1", "4", "9"),
               series="h", title="p(T), c = 10"),
    "4b": dict(axis="h", axis_range=H_RANGE, c=("10",), T=("2",),
               selection=tuple(s for _, s in FIG4B_SELECTIONS), series="selection",
               title="Re p(h), c = 10, T = 2"),
}


# -- value parsing ------------------------------------------------------------------

def parse_number(text):
    t = str(text).strip().lower()
    if t in ("inf", "infinite", "infinity", "+inf"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise InvalidInput(f"not a number: {text!r}") from None


def parse_values(text):
    """'a:b:step' (inclusive range), 'v1,v2,...' or a single value -> (values, is_range)."""
    t = str(text).strip()
    if ":" in t:
        parts = t.split(":")
        if len(parts) != 3:
            raise InvalidInput(f"range {text!r} must read start:stop:step")
        a, b, st = (parse_number(p) for p in parts)
        if not (st > 0 and math.isfinite(a) and math.isfinite(b)) or b < a:
            raise InvalidInput(f"empty or invalid range {text!r}")
        n = int(math.floor((b - a) / st + 1e-9)) + 1
        # rounding keeps CSV values free of binary noise such as 0.30000000000000004
        return [round(a + k * st, 12) for k in range(n)], True
    vals = [parse_number(v) for v in t.split(",") if v.strip()]
    if not vals:
        raise InvalidInput(f"no values in {text!r}")
    return vals, False


def read_config(path):
    """Flat 'key = value' file; '#' starts a comment; keys may use '-' or '_'."""
    out = {}
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{k}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


# -- run configuration --------------------------------------------------------------

@dataclass
class RunConfig:
    c: list = field(default_factory=lambda: [10.0])
    h: list = field(default_factory=lambda: [4.0])
    T: list = field(default_factory=lambda: [2.0])
    alpha_re: list = field(default_factory=lambda: [0.0])
    alpha_im: list = field(default_factory=lambda: [0.0])
    selection: list = field(default_factory=lambda: ["+R1;-R1"])
    swept: tuple = ()                 # names given as a:b:step ranges
    figure: str = None
    grid_panels: float = 1.0          # panels per unit length of the real axis
    grid_order: int = 16
    tol: float = 1e-11
    gamma_steps: int = 8
    out: str = "."
    cache: str = "off"
    workers: int = 0                  # 0: one per CPU
    x: list = field(default_factory=lambda: [float(v) for v in range(10, 31, 2)])

    def validate(self):
        for name in ("c", "h", "T", "alpha_re", "alpha_im", "selection"):
            if not getattr(self, name):
                raise InvalidInput(f"{name}: empty value list")
        if any(not (t > 0) for t in self.T) or any(not (c > 0) for c in self.c):
            raise InvalidInput("T and c must be positive")
        if not (self.tol > 0 and self.grid_panels > 0):
            raise InvalidInput("tol and grid-panels must be positive")
        if self.grid_order < 2 or self.gamma_steps < 1:
            raise InvalidInput("grid-order >= 2 and gamma-steps >= 1 required")
        if len([s for s in self.swept if s in ("c", "h", "T")]) > 1:
            raise InvalidInput("at most one of c, h, T may be swept per run")
        if self.cache not in CACHE_POLICIES:
            raise InvalidInput(f"cache policy must be one of {CACHE_POLICIES}")
        return self

    @property
    def panel_width(self):
        return 1.0 / self.grid_panels

    def solver(self):
        return dict(panel_width=self.panel_width, order=self.grid_order, tol=self.tol,
                    gamma_steps=self.gamma_steps)

    def params(self):
        """The single parameter point (first entry of every list)."""
        from .thermo import ModelParams
        return ModelParams(self.c[0], self.h[0], self.T[0], complex(self.alpha_re[0], self.alpha_im[0]))


_LIST_KEYS = ("c", "h", "T", "alpha_re", "alpha_im")


def build_config(settings):
    """RunConfig from a mapping of raw strings (file merged with flags)."""
    cfg = RunConfig()
    swept = []
    fig = settings.get("figure")
    if fig:
        if fig not in FIGURES:
            raise InvalidInput(f"unknown figure {fig!r}; choose from {sorted(FIGURES)}")
        spec = FIGURES[fig]
        cfg.figure = fig
        for key in _LIST_KEYS + ("selection",):
            if key in spec:
                vals = spec[key] if key == "selection" else [parse_number(v) for v in spec[key]]
                setattr(cfg, key, list(vals))
        vals, _ = parse_values(spec["axis_range"])
        setattr(cfg, spec["axis"], vals)
        swept.append(spec["axis"])
    for key in _LIST_KEYS:
        if settings.get(key) is not None:
            vals, is_range = parse_values(settings[key])
            setattr(cfg, key, vals)
            if is_range and key not in swept:
                swept.append(key)
    if settings.get("selection") is not None:
        cfg.selection = [s.strip() for s in str(settings["selection"]).split("|") if s.strip()]
    conv = {"grid_panels": float, "grid_order": int, "tol": float, "gamma_steps": int,
            "workers": int, "out": str, "cache": str}
    for key, fn in conv.items():
        if settings.get(key) is not None:
            try:
                setattr(cfg, key, fn(settings[key]))
            except ValueError:
                raise InvalidInput(f"{key}: cannot parse {settings[key]!r}") from None
    if settings.get("x") is not None:
        cfg.x = parse_values(settings["x"])[0]
    cfg.swept = tuple(swept)
    return cfg.validate()


# -- cache --------------------------------------------------------------------------

def cache_dir():
    root = os.environ.get(CACHE_ENV)
    return Path(root) if root else Path.home() / ".cache" / "artifact"


def _cache_key(point, solver):
    blob = json.dumps({"v": __version__, "point": point, "solver": solver}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def cached_length_point(point, solver, policy="off", root=None):
    """length_point with a result cache: a hit returns the stored row verbatim
    (JSON round-trips doubles exactly), so cached and fresh rows are identical."""
    if policy == "off":
        return length_point(**point, **solver)
    root = Path(root) if root is not None else cache_dir()
    path = root / f"{_cache_key(_json_point(point), solver)}.json"
    if policy == "on" and path.exists():
        return json.loads(path.read_text())
    row = length_point(**point, **solver)
    if row.get("converged"):
        root.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(row))
        tmp.replace(path)
    return row


def _json_point(point):
    d = dict(point)
    d["alpha"] = [complex(d["alpha"]).real, complex(d["alpha"]).imag]
    d["c"] = "inf" if math.isinf(d["c"]) else d["c"]
    return d


# -- sweeps -------------------------------------------------------------------------

def sweep_points(cfg):
    """All (c, h, T, alpha, selection) combinations in a fixed nesting order:
    selection, c, T, h, alpha (innermost varies fastest)."""
    pts = []
    for sel in cfg.selection:
        for c in cfg.c:
            for T in cfg.T:
                for h in cfg.h:
                    for ar in cfg.alpha_re:
                        for ai in cfg.alpha_im:
                            pts.append({"c": c, "h": h, "T": T, "alpha": complex(ar, ai),
                                        "selection": sel})
    return pts


def _sweep_job(args):
    point, solver, policy, root = args
    return cached_length_point(point, solver, policy, root)


def run_sweep(cfg, progress=None):
    """Rows in input order; points are farmed out to a process pool when workers > 1."""
    pts = sweep_points(cfg)
    root = str(cache_dir()) if cfg.cache != "off" else None
    jobs = [(p, cfg.solver(), cfg.cache, root) for p in pts]
    workers = cfg.workers or os.cpu_count() or 1
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        rows = []
        for k, j in enumerate(jobs):
            rows.append(_sweep_job(j))
            if progress:
                progress(k + 1, len(jobs))
        return rows
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(_sweep_job, jobs, chunksize=4))


def figure_svg(rows, cfg, path):
    """Line plot of Re p against the swept axis, one line per series value."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    spec = FIGURES.get(cfg.figure, {})
    axis = spec.get("axis") or (cfg.swept[0] if cfg.swept else "h")
    series = spec.get("series", "selection")
    matplotlib.rcParams["svg.hashsalt"] = "artifact"
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = {}
    for r in rows:
        groups.setdefault(r[series], []).append(r)
    for key, rs in groups.items():
        xs = [r[axis] for r in rs]
        ys = [r["re_p"] for r in rs]
        label = f"{series} = {format_value(key) if not isinstance(key, str) else key}"
        if cfg.figure == "4b":
            label = dict((s, f"({n}) {s}") for n, s in FIG4B_SELECTIONS).get(key, label)
        ax.plot(xs, ys, label=label)
    ax.set_xlabel(axis)
    ax.set_ylabel("Re p")
    ax.set_title(spec.get("title", "Re p"))
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# -- figure-quality checks ------------------------------------------------------------

def curve_jumps(xs, ys, factor=5.0):
    """Indices k where |y[k+1] - y[k]| exceeds `factor` times the larger neighbouring
    step, i.e. the local slope times the step; a tiny absolute floor ignores
    flat stretches."""
    ys = np.asarray(ys, dtype=float)
    d = np.abs(np.diff(ys))
    scale = max(float(np.max(np.abs(ys))), 1.0) if len(ys) else 1.0
    bad = []
    for k in range(len(d)):
        nb = [d[j] for j in (k - 1, k + 1) if 0 <= j < len(d)]
        if nb and d[k] > factor * max(nb) and d[k] > 1e-9 * scale:
            bad.append(k)
    return bad


def figure_report(rows, figure):
    """(n_rows, n_failed, n_nonpositive, jumps) for a figure sweep."""
    spec = FIGURES[figure]
    axis, series = spec["axis"], spec["series"]
    failed = sum(1 for r in rows if not r.get("converged"))
    nonpos = sum(1 for r in rows if r.get("converged") and not r["re_p"] > 0)
    jumps = []
    groups = {}
    for r in rows:
        groups.setdefault(r[series], []).append(r)
    for key, rs in groups.items():
        rs = [r for r in rs if r.get("converged")]
        for k in curve_jumps([r[axis] for r in rs], [r["re_p"] for r in rs]):
            jumps.append((key, rs[k][axis], rs[k + 1][axis]))
    return len(rows), failed, nonpos, jumps


# -- commands -----------------------------------------------------------------------

def _out_dir(cfg):
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _error_record(cfg, command, errors):
    rec = {"command": command, "errors": errors}
    path = _out_dir(cfg) / "errors.json"
    path.write_text(json.dumps(rec, indent=1, default=str) + "\n")
    print(json.dumps(rec, default=str), file=sys.stderr)


def cmd_thermo(cfg):
    from .numerics import default_grid
    from .thermo import density, pressure, solve_epsilon, yy_residual
    p = cfg.params()
    grid = default_grid(p.h, p.T, p.alpha.imag, cfg.panel_width, cfg.grid_order)
    st = solve_epsilon(p, grid, min(cfg.tol, 1e-12))
    (_out_dir(cfg) / "thermo.json").write_text(st.to_json() + "\n")
    print(json.dumps({"P": format_value(complex(pressure(st)).real), "D": format_value(complex(density(st)).real),
                      "iterations": st.report.iterations, "residual": yy_residual(st)}))
    return EXIT_OK


def cmd_poles(cfg):
    from .poles import audit_count, locate_poles
    from .thermo import solve_epsilon
    st = solve_epsilon(cfg.params())
    table = locate_poles(st, 3)
    (_out_dir(cfg) / "poles.csv").write_text(table.to_csv())
    audit = audit_count(st, table)
    print(json.dumps({"entries": len(table), "audit": audit,
                      "max_residual": max(e.residual for e in table.entries)}))
    return EXIT_OK if all(a == b for _, a, b in audit) else EXIT_CHECK


def cmd_lengths(cfg):
    t0 = time.time()
    rows = run_sweep(cfg)
    out = _out_dir(cfg)
    stem = f"figure_{cfg.figure}" if cfg.figure else "lengths"
    (out / f"{stem}.csv").write_text(rows_to_csv(rows, SWEEP_COLUMNS))
    if cfg.figure or len(rows) > 1:
        figure_svg(rows, cfg, out / f"{stem}.svg")
    bad = [r for r in rows if not r.get("converged")]
    summary = {"rows": len(rows), "failed": len(bad), "seconds": round(time.time() - t0, 1)}
    if cfg.figure:
        n, failed, nonpos, jumps = figure_report(rows, cfg.figure)
        summary.update(nonpositive=nonpos, jumps=[list(map(str, j)) for j in jumps])
    print(json.dumps(summary))
    if bad:
        _error_record(cfg, "lengths", [{k: format_value(v) for k, v in r.items()} for r in bad])
        return EXIT_SOLVER
    if cfg.figure and (summary["nonpositive"] or summary["jumps"]):
        return EXIT_CHECK
    return EXIT_OK


def cmd_amplitude(cfg):
    from .amplitudes import amplitude_B
    from .deformed import solve_deformed
    from .lengths import correlation_length
    from .numerics import default_grid
    from .thermo import solve_epsilon
    p = cfg.params()
    grid = default_grid(p.h, p.T, p.alpha.imag, cfg.panel_width, cfg.grid_order)
    st = solve_epsilon(p, grid, min(cfg.tol, 1e-12))
    d = solve_deformed(st, cfg.selection[0], gamma_steps=cfg.gamma_steps, tol=cfg.tol)
    amp = amplitude_B(d)
    pl = correlation_length(d).p
    (_out_dir(cfg) / "amplitude.json").write_text(amp.to_json() + "\n")
    print(json.dumps({"selection": str(d.selection), "re_p": format_value(pl.real),
                      "im_p": format_value(pl.imag), "re_B": format_value(amp.B.real),
                      "im_B": format_value(amp.B.imag)}))
    return EXIT_OK


def cmd_oracle(cfg):
    from .verification import ff_compare
    p = cfg.params()
    if not p.infinite:
        p = replace(p, c=math.inf)
    cmp = ff_compare(p, cfg.x, workers=cfg.workers or None)
    (_out_dir(cfg) / "oracle.csv").write_text(cmp.to_csv())
    ok = cmp.rate_mismatch < 0.1 and cmp.reduction >= 10
    print(json.dumps({"rate": cmp.rate, "target": cmp.target, "rate_mismatch": cmp.rate_mismatch,
                      "reduction": cmp.reduction, "pass": ok}))
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify(cfg, only=None):
    from .acceptance import run_all
    results = run_all(only=only, workers=cfg.workers or None)
    for r in results:
        print(r.line())
    (_out_dir(cfg) / "acceptance.json").write_text(
        json.dumps([asdict(r) for r in results], indent=1, default=str) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {"thermo": cmd_thermo, "poles": cmd_poles, "lengths": cmd_lengths,
            "amplitude": cmd_amplitude, "oracle": cmd_oracle, "verify": cmd_verify}


def make_parser():
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value settings file")
        for flag in ("c", "h", "T", "alpha-re", "alpha-im"):
            sp.add_argument(f"--{flag}", help="value, list v1,v2 or range start:stop:step")
        sp.add_argument("--alpha", dest="alpha_re", help="alias of --alpha-re")
        sp.add_argument("--selection", help='root selection, e.g. "+R1,+R2;-R1,-L1"; several separated by |')
        sp.add_argument("--figure", choices=sorted(FIGURES))
        sp.add_argument("--grid-panels", help="quadrature panels per unit length (default 1)")
        sp.add_argument("--grid-order", help="Gauss-Legendre nodes per panel (default 16)")
        sp.add_argument("--tol")
        sp.add_argument("--gamma-steps")
        sp.add_argument("--out", help="output directory (default .)")
        sp.add_argument("--cache", choices=CACHE_POLICIES,
                        help=f"result cache policy; directory from ${CACHE_ENV}")
        sp.add_argument("--workers", help="worker processes (default: one per CPU)")
        sp.add_argument("--x", help="distances for the oracle comparison (default 10:30:2)")
        if name == "verify":
            sp.add_argument("--only", help="comma-separated criterion numbers")
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    raw = vars(args)
    try:
        settings = read_config(raw["config"]) if raw.get("config") else {}
        settings.update({k: v for k, v in raw.items()
                         if v is not None and k not in ("command", "config", "only")})
        cfg = build_config(settings)
    except (InvalidInput, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "verify":
            only = [int(s) for s in args.only.split(",")] if args.only else None
            return cmd_verify(cfg, only)
        return COMMANDS[args.command](cfg)
    except InvalidInput as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except ArtifactError as exc:
        _error_record(cfg, args.command, [{"error": type(exc).__name__, "message": str(exc)}])
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
