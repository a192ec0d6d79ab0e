import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact import cli
from artifact.errors import InvalidInput


def test_parse_values_forms():
    assert cli.parse_values("0.5:1:0.1") == ([0.5, 0.6, 0.7, 0.8, 0.9, 1.0], True)
    assert cli.parse_values("1, 2,3") == ([1.0, 2.0, 3.0], False)
    assert cli.parse_values("inf") == ([math.inf], False)
    for bad in ("1:2", "2:1:0.5", "0:1:0", "abc", ","):
        with pytest.raises(InvalidInput):
            cli.parse_values(bad)


@given(st.integers(-20, 20), st.integers(1, 40), st.sampled_from([0.05, 0.1, 0.25]))
def test_range_endpoints_are_clean(a, n, step):
    start = a * step
    vals, _ = cli.parse_values(f"{start}:{start + n * step}:{step}")
    assert len(vals) == n + 1
    assert all(repr(v) == repr(round(v, 12)) for v in vals)


def test_config_file_and_flag_override(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nh = 1:2:0.5\nT=3\ngrid-panels = 2  # trailing\n")
    s = cli.read_config(f)
    assert s == {"h": "1:2:0.5", "T": "3", "grid_panels": "2"}
    s.update({"T": "1.5"})
    cfg = cli.build_config(s)
    assert cfg.h == [1.0, 1.5, 2.0] and cfg.T == [1.5] and cfg.swept == ("h",)
    assert cfg.panel_width == 0.5
    (tmp_path / "bad.cfg").write_text("h 1\n")
    with pytest.raises(InvalidInput):
        cli.read_config(tmp_path / "bad.cfg")


def test_validation_rules():
    with pytest.raises(InvalidInput):
        cli.build_config({"h": "0:1:0.5", "T": "1:2:0.5"})
    with pytest.raises(InvalidInput):
        cli.build_config({"T": "-1"})
    with pytest.raises(InvalidInput):
        cli.build_config({"grid_order": "x"})
    with pytest.raises(InvalidInput):
        cli.build_config({"figure": "9z"})
    cfg = cli.build_config({"figure": "4b"})
    assert len(cfg.selection) == 5 and cfg.swept == ("h",)


def test_figure_point_counts():
    assert len(cli.sweep_points(cli.build_config({"figure": "3a"}))) == 147
    assert len(cli.sweep_points(cli.build_config({"figure": "4a"}))) == 168


def test_curve_jumps():
    xs = list(range(10))
    smooth = [0.1 * x * x for x in xs]
    assert cli.curve_jumps(xs, smooth) == []
    jumpy = smooth[:5] + [y + 10 for y in smooth[5:]]    # 10.9 vs neighbours 0.7, 1.1
    assert cli.curve_jumps(xs, jumpy) == [4]
    assert cli.curve_jumps(xs, [1.0] * 10) == []


POINT = {"c": 10.0, "h": 4.0, "T": 2.0, "alpha": 0j, "selection": "+R1;-R1"}
SOLVER = dict(panel_width=1.0, order=16, tol=1e-11, gamma_steps=8)


def test_cache_returns_identical_rows(tmp_path):
    fresh = cli.cached_length_point(POINT, SOLVER, "on", tmp_path)
    assert len(list(tmp_path.glob("*.json"))) == 1
    hit = cli.cached_length_point(POINT, SOLVER, "on", tmp_path)
    off = cli.cached_length_point(POINT, SOLVER, "off")
    assert cli.rows_to_csv([fresh]) == cli.rows_to_csv([hit]) == cli.rows_to_csv([off])


def test_cache_skips_failed_rows(tmp_path):
    bad = dict(POINT, c=math.inf, h=10.0, alpha=1e-6 + 0j)
    row = cli.cached_length_point(bad, SOLVER, "on", tmp_path)
    assert not row["converged"]
    assert list(tmp_path.glob("*.json")) == []


def test_sweep_order_independent_of_workers():
    cfg = cli.build_config({"h": "3,4", "T": "2", "selection": "0|+R1;-R1", "workers": "1"})
    serial = cli.run_sweep(cfg)
    cfg.workers = 2
    par = cli.run_sweep(cfg)
    assert cli.rows_to_csv(serial) == cli.rows_to_csv(par)
    assert [(r["selection"], r["h"]) for r in serial] == [("0", 3.0), ("0", 4.0),
                                                          ("+R1;-R1", 3.0), ("+R1;-R1", 4.0)]


def test_lengths_command_writes_deterministic_csv(tmp_path, capsys):
    argv = ["lengths", "--h", "3:4:1", "--T", "2", "--workers", "1", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_OK
    first = (tmp_path / "lengths.csv").read_text()
    svg = (tmp_path / "lengths.svg").read_text()
    assert cli.main(argv) == cli.EXIT_OK
    assert (tmp_path / "lengths.csv").read_text() == first
    assert (tmp_path / "lengths.svg").read_text() == svg
    rows = list(csv.DictReader(io.StringIO(first)))
    assert len(rows) == 2 and all(r["converged"] == "true" and float(r["re_p"]) > 0 for r in rows)


def test_thermo_and_poles_commands(tmp_path, capsys):
    assert cli.main(["thermo", "--out", str(tmp_path)]) == cli.EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert abs(float(out["P"]) - 2.5513989790942313) < 1e-12
    assert (tmp_path / "thermo.json").exists()
    assert cli.main(["poles", "--out", str(tmp_path)]) == cli.EXIT_OK
    assert (tmp_path / "poles.csv").read_text().count("\n") > 8


def test_exit_codes_and_error_record(tmp_path, capsys):
    assert cli.main(["thermo", "--T", "-1", "--out", str(tmp_path)]) == cli.EXIT_INPUT
    assert "InvalidInput" in capsys.readouterr().err
    assert cli.main(["lengths", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_INPUT
    code = cli.main(["lengths", "--c", "inf", "--h", "10", "--T", "2", "--alpha", "1e-6",
                     "--workers", "1", "--out", str(tmp_path)])
    assert code == cli.EXIT_SOLVER
    rec = json.loads((tmp_path / "errors.json").read_text())
    assert rec["command"] == "lengths" and "CannotSeparate" in rec["errors"][0]["error"]
