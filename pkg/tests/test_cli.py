import csv
import io
import json
import math

import pytest
from click.testing import CliRunner

from ballhull import __version__
from ballhull.cli import cmd_eval, main, parse_grid
from ballhull.errors import ConfigError


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def runner():
    return CliRunner()


def test_parse_grid():
    assert parse_grid("h=0:1:0.25") == ("h", [0.0, 0.25, 0.5, 0.75, 1.0])
    assert parse_grid("t=1,2.5") == ("t", [1.0, 2.5])
    assert len(parse_grid("h=0:2:0.1")[1]) == 21
    for bad in ("h", "h=1:0:0.1", "h=a,b", "h=0:1:0"):
        with pytest.raises((ValueError, ConfigError)):
            parse_grid(bad)


def test_eval_s_tail_limit(runner):
    res = runner.invoke(main, ["eval", "s-tail-limit", "--grid", "h=0:2:0.1"])
    assert res.exit_code == 0, res.output
    r = rows(res.output)
    assert r[0][:2] == ["h", "value"]
    assert len(r) == 22
    assert float(r[1][1]) == 1.0


def test_eval_constants_and_cap(runner):
    res = runner.invoke(main, ["eval", "constants", "--d", "2", "--delta", "0"])
    assert res.exit_code == 0, res.output
    text = res.output
    assert repr(4 * math.sqrt(2) / 3)[:12] in text
    res = runner.invoke(main, ["eval", "cap-area", "--grid", "h=1"])
    assert float(rows(res.output)[1][-1]) == pytest.approx(math.pi / 2, abs=1e-15)


def test_eval_deterministic_and_round_trip():
    h1, r1 = cmd_eval("r-tail-limit", {"h": [0.0, 0.5, 1.0]})
    h2, r2 = cmd_eval("r-tail-limit", {"h": [0.0, 0.5, 1.0]})
    assert r1 == r2
    # shortest round-trip decimals
    res = CliRunner().invoke(main, ["eval", "s-tail-limit", "--grid", "h=0.3"])
    v = float(rows(res.output)[1][1])
    assert v == math.exp(-4 * math.sqrt(2) / 3 * 0.3**1.5)


def test_eval_errors(runner):
    assert runner.invoke(main, ["eval", "no-such-law"]).exit_code == 1
    assert runner.invoke(main, ["eval", "cap-area", "--grid", "h=2"]).exit_code == 1
    assert runner.invoke(main, ["eval", "cap-area", "--grid", "bad"]).exit_code == 1


def test_run_synthetic_scaling(runner, tmp_path):
    out = tmp_path / "o"
    res = runner.invoke(main, ["run", "variance-scaling", "--synthetic", "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert (out / "report.json").exists() and (out / "config.ini").exists()
    assert (out / "VERSION").read_text().strip() == __version__
    rep = json.loads((out / "report.json").read_text())
    assert rep["passed"] is True


def test_run_byte_identical(runner, tmp_path):
    args = ["run", "survival", "--lambda", "200", "--reps", "60", "--seed", "5"]
    a, b = tmp_path / "a", tmp_path / "b"
    ra = runner.invoke(main, args + ["--out", str(a)])
    rb = runner.invoke(main, args + ["--out", str(b)])
    assert ra.exit_code in (0, 2) and ra.exit_code == rb.exit_code
    for name in ("report.json",):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    series = sorted(p.name for p in a.glob("series_*.csv"))
    assert series
    for name in series:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_persisted_and_reused(runner, tmp_path):
    a = tmp_path / "a"
    runner.invoke(main, ["run", "face-bijection", "--reps", "20", "--lambda", "30", "--out", str(a)])
    ini = (a / "config.ini").read_text()
    assert "lambda = 30.0" in ini and "alpha = 1.0" in ini and "seed = 20261014" in ini
    assert f"version = {__version__}" in ini
    b = tmp_path / "b"
    res = runner.invoke(main, ["run", "--config", str(a / "config.ini"), "--out", str(b)])
    assert res.exit_code == 0, res.output
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_run_exit_codes(runner, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nexperiment = dual-gumbel\nt = 30\nreps = 20\nsynthetic = false\n[tolerances]\nks = 0.0\n")
    res = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2, res.output
    assert runner.invoke(main, ["run", "no-such-experiment", "--out", str(tmp_path / "x")]).exit_code == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nreps = many\n")
    assert runner.invoke(main, ["run", "clt", "--config", str(bad)]).exit_code == 1
    assert runner.invoke(main, ["run", "clt", "--reps", "0", "--out", str(tmp_path / "y")]).exit_code == 1


def test_sample_outputs(runner):
    res = runner.invoke(main, ["sample", "ball", "--d", "2", "--lambda", "100"])
    assert res.exit_code == 0
    r = rows(res.output)
    assert r[0] == ["x", "y"] and len(r) > 1
    res = runner.invoke(main, ["sample", "halfspace", "--d", "2", "--L", "5", "--H", "4"])
    assert rows(res.output)[0] == ["v", "h"]
    res = runner.invoke(main, ["sample", "zerocell", "--alpha", "1", "--lambda", "20"])
    cell = json.loads(res.output)
    assert cell["inradius"] >= 1.0 and len(cell["polygon"]) >= 3
    assert runner.invoke(main, ["sample", "ball", "--d", "2", "--lambda", "1e13"]).exit_code == 1
    assert runner.invoke(main, ["sample", "unknown"]).exit_code == 1


def test_sample_deterministic(runner):
    a = runner.invoke(main, ["sample", "ball", "--lambda", "50", "--seed", "3"]).output
    b = runner.invoke(main, ["sample", "ball", "--lambda", "50", "--seed", "3"]).output
    assert a == b
