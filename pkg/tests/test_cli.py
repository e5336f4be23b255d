"""Command-line interface: parsing, artifacts, and exit codes."""

import json
import re

import numpy as np
import pytest

from kerrdimer import cli
from kerrdimer.cli import (RunConfig, SweepAxis, UsageError, main,
                           parse_config, run)
from kerrdimer.semiclassical import phase_diagram


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# kerrdimer ")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return lines[0], header, rows


# ---------------------------------------------------------------------------
# Parsing


def test_parse_compare_example():
    c = parse_config(["compare", "--u", "4", "--dw", "-3", "--j", "0.1",
                      "--f", "0:3:31", "--out", "/tmp/out.csv"])
    assert c.command == "compare"
    assert c.u == 4.0 and c.dw == -3.0 and c.j == 0.1
    assert c.f == SweepAxis("f", 0.0, 3.0, 31)
    assert c.axes == (c.f,)
    assert np.allclose(c.f.values, np.linspace(0.0, 3.0, 31))
    assert str(c.out) == "/tmp/out.csv"


def test_parse_applies_defaults():
    c = parse_config(["master-sweep", "--f", "0:3:4", "--out", "/tmp/o.csv"])
    assert c.j == 0.1 and c.u == 0.6 and c.dw == -3.0
    assert c.n_max == 15 and c.tol == 1e-8
    assert c.seed == 7041776


def test_parse_empty_argv_is_usage_error(capsys):
    with pytest.raises(UsageError):
        parse_config([])
    assert main([]) == cli.EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_parse_rejects_unknown_command():
    with pytest.raises(UsageError):
        parse_config(["frobnicate", "--out", "/tmp/o.csv"])


def test_parse_axis_count_enforced():
    with pytest.raises(UsageError, match="exactly 1 swept axis"):
        parse_config(["master-sweep", "--f", "2", "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="exactly 1 swept axis"):
        parse_config(["compare", "--f", "0:3:4", "--j", "0:1:5",
                      "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="exactly 2 swept axes"):
        parse_config(["phase-diagram", "--j", "0:0.5:6",
                      "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="exactly 0 swept axes"):
        parse_config(["trajectories", "--f", "0:3:4", "--out", "/tmp/o.csv"])


def test_parse_rejects_malformed_values():
    with pytest.raises(UsageError, match="--f"):
        parse_config(["compare", "--f", "0:3", "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="--f"):
        parse_config(["compare", "--f", "abc", "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="--n-max"):
        parse_config(["master-sweep", "--f", "0:3:4", "--n-max", "1.5",
                      "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="steps"):
        parse_config(["compare", "--f", "0:3:0", "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="--weighting"):
        parse_config(["trajectories", "--weighting", "both",
                      "--out", "/tmp/o.csv"])


def test_parse_negative_range_with_equals():
    c = parse_config(["semiclassical-sweep", "--dw=-4:-2:5", "--f", "2",
                      "--out", "/tmp/o.csv"])
    assert c.dw == SweepAxis("dw", -4.0, -2.0, 5)
    assert np.allclose(c.dw.values, [-4.0, -3.5, -3.0, -2.5, -2.0])


def test_parse_single_step_range():
    c = parse_config(["compare", "--f", "2:2:1", "--out", "/tmp/o.csv"])
    assert list(c.f.values) == [2.0]


def test_phase_diagram_axes_need_two_steps():
    with pytest.raises(UsageError, match="steps >= 2"):
        parse_config(["phase-diagram", "--j", "0:0:1", "--f", "0:5:6",
                      "--out", "/tmp/o.csv"])


def test_missing_output_path(monkeypatch):
    monkeypatch.delenv(cli.ENV_OUTDIR, raising=False)
    with pytest.raises(UsageError, match="output path"):
        parse_config(["compare", "--f", "0:3:4"])


def test_env_outdir_supplies_default_and_joins(monkeypatch, tmp_path):
    monkeypatch.setenv(cli.ENV_OUTDIR, str(tmp_path))
    c = parse_config(["compare", "--f", "0:3:4"])
    assert c.out == tmp_path / "compare.csv"
    c = parse_config(["compare", "--f", "0:3:4", "--out", "sub/x.csv"])
    assert c.out == tmp_path / "sub" / "x.csv"
    c = parse_config(["compare", "--f", "0:3:4", "--out", "/abs/x.csv"])
    assert str(c.out) == "/abs/x.csv"


def test_config_file_merge_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(
        {"u": 4, "f": "0:3:4", "n_max": 10, "dw": -3}))
    c = parse_config(["compare", "--config", str(cfg), "--n-max", "12",
                      "--out", "/tmp/o.csv"])
    assert c.u == 4.0
    assert c.f == SweepAxis("f", 0.0, 3.0, 4)
    assert c.n_max == 12          # flag wins over file
    assert c.j == 0.1             # default fills the rest


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(UsageError, match="unknown config key 'bogus'"):
        parse_config(["compare", "--config", str(cfg), "--f", "0:3:4",
                      "--out", "/tmp/o.csv"])


def test_config_file_malformed(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    with pytest.raises(UsageError, match="malformed config file"):
        parse_config(["compare", "--config", str(cfg), "--out", "/tmp/o.csv"])
    with pytest.raises(UsageError, match="cannot read config file"):
        parse_config(["compare", "--config", str(tmp_path / "missing.json"),
                      "--out", "/tmp/o.csv"])


def test_round_trip_idempotence():
    argvs = [
        ["compare", "--u", "4", "--dw", "-3", "--j", "0.1", "--f", "0:3:31",
         "--with-semiclassical", "--out", "/tmp/out.csv"],
        ["phase-diagram", "--u", "0.6", "--dw", "-3", "--j", "0:0.5:51",
         "--f", "0:5:101", "--out", "/tmp/pd.csv"],
        ["semiclassical-sweep", "--dw=-4:-2:5", "--f", "2",
         "--out", "/tmp/sc.csv"],
        ["trajectories", "--n-traj", "16", "--seed", "42", "--n-max", "8",
         "--workers", "2", "--out", "/tmp/tr.csv"],
        ["analytic-sweep", "--u", "4", "--f", "0.5:3:6", "--index-cap", "20",
         "--out", "/tmp/an.csv"],
    ]
    for argv in argvs:
        first = parse_config(argv)
        again = parse_config(first.to_argv())
        assert again == first, argv


# ---------------------------------------------------------------------------
# Exit codes


def test_exit_code_numerical_and_io(monkeypatch, tmp_path):
    base = parse_config(["analytic-sweep", "--u", "4", "--f", "1:2:2",
                         "--out", str(tmp_path / "a.csv")])

    def boom(config):
        raise RuntimeError("synthetic numerical failure")
    monkeypatch.setitem(cli._RUNNERS, "analytic-sweep", boom)
    assert run(base) == cli.EXIT_NUMERICAL

    monkeypatch.undo()
    bad = parse_config(["analytic-sweep", "--u", "4", "--f", "1:2:2",
                        "--out", "/dev/null/nope/a.csv"])
    assert run(bad) == cli.EXIT_IO


def test_exit_code_usage_from_main(capsys):
    assert main(["compare", "--f", "0:3"]) == cli.EXIT_USAGE
    assert "kerrdimer: error" in capsys.readouterr().err


def test_help_and_version_exit_zero(capsys):
    assert main(["--help"]) == 0
    assert "semiclassical-sweep" in capsys.readouterr().out
    assert main(["--version"]) == 0
    assert "kerrdimer" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Artifacts

FLOAT_RE = re.compile(r"^-?\d\.\d{16}e[+-]\d{2,3}$|^nan$")


def test_analytic_sweep_artifact(tmp_path, capsys):
    out = tmp_path / "ana.csv"
    code = main(["analytic-sweep", "--u", "4", "--dw", "-3", "--j", "0.1",
                 "--f", "0:3:7", "--out", str(out)])
    assert code == 0
    manifest, header, rows = _read_csv(out)
    assert "command=analytic-sweep" in manifest
    assert "gamma=1" in manifest
    assert "f=0.0:3.0:7" in manifest
    assert header == ["f", "n", "g2", "converged", "last_increment",
                      "validity"]
    assert len(rows) == 7
    for row in rows:
        assert FLOAT_RE.match(row[0])
        assert FLOAT_RE.match(row[1])
    # F = 0 has no series value; the sweep still covers it.
    assert rows[0][1] == "nan"
    assert float(rows[4][1]) == pytest.approx(1.0226959218389551, rel=1e-12)


def test_analytic_sweep_validity_warning(tmp_path, capsys):
    out = tmp_path / "ana.csv"
    assert main(["analytic-sweep", "--u", "0.6", "--j", "1.0",
                 "--f", "1:2:2", "--out", str(out)]) == 0
    assert "validity metric" in capsys.readouterr().err


def test_master_sweep_artifact(tmp_path):
    out = tmp_path / "ms.csv"
    code = main(["master-sweep", "--u", "4", "--dw", "-3", "--j", "0.1",
                 "--f", "0:2:3", "--n-max", "10", "--out", str(out)])
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header[:5] == ["f", "n1", "n2", "g2_1", "g2_2"]
    assert len(rows) == 3
    assert float(rows[0][1]) == 0.0          # vacuum at F = 0
    assert all(row[6] == "1" for row in rows)  # converged
    n1 = [float(row[1]) for row in rows]
    assert n1[1] < n1[2]


def test_semiclassical_sweep_artifact(tmp_path):
    out = tmp_path / "sc.csv"
    code = main(["semiclassical-sweep", "--u", "0.6", "--dw", "-3",
                 "--j", "1.0", "--f", "2:3:3", "--out", str(out)])
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header[0] == "f" and "stability" in header
    # The high-drive end of this cut is multistable.
    by_f = {}
    for row in rows:
        by_f.setdefault(row[0], []).append(row)
    assert max(len(v) for v in by_f.values()) >= 3


def test_phase_diagram_artifacts_match_library(tmp_path):
    out = tmp_path / "pd.csv"
    code = main(["phase-diagram", "--u", "0.6", "--dw", "-3", "--j", "0:0.2:3",
                 "--f", "2:4:3", "--out", str(out)])
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["j", "f", "n_stable", "n_breaking", "n_total"]
    assert len(rows) == 9

    from kerrdimer.model import make_params
    pd = phase_diagram(make_params(j=0.1, u=0.6, f=2.6, delta_omega=-3.0),
                       "j", "f", (np.linspace(0, 0.2, 3),
                                  np.linspace(2, 4, 3)))
    for idx, row in enumerate(rows):
        i, k = divmod(idx, 3)
        assert int(row[2]) == pd.n_stable[i, k]
        assert int(row[3]) == pd.n_breaking[i, k]
        assert int(row[4]) == pd.n_total[i, k]

    roots = tmp_path / "pd_roots.csv"
    _, rheader, rrows = _read_csv(roots)
    assert rheader[:4] == ["j", "f", "n1", "n2"]
    assert rrows, "per-root records should not be empty"


def test_compare_artifact_columns(tmp_path):
    out = tmp_path / "cmp.csv"
    code = main(["compare", "--u", "4", "--dw", "-3", "--j", "0.1",
                 "--f", "2:3:2", "--n-max", "12", "--with-semiclassical",
                 "--out", str(out)])
    assert code == 0
    _, header, rows = _read_csv(out)
    assert header == ["f", "n_master", "n_analytic", "n_rel_diff",
                      "g2_master", "g2_analytic", "g2_rel_diff",
                      "n_semiclassical"]
    for row in rows:
        n_m, n_a, rel = float(row[1]), float(row[2]), float(row[3])
        assert rel == pytest.approx(abs(n_a - n_m) / n_m, rel=1e-12)
        assert rel < 0.05


def test_trajectories_rerun_byte_identical(tmp_path):
    args = ["trajectories", "--u", "0.6", "--dw", "-3", "--j", "1.0",
            "--f", "2.6", "--n-max", "6", "--n-traj", "2",
            "--t-final", "20", "--seed", "42"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--workers", "3", "--out", str(out2)]) == 0
    for suffix in ("", "_samples", "_hist_n1", "_hist_dn"):
        f1 = out1.with_name(out1.stem + suffix + ".csv")
        f2 = out2.with_name(out2.stem + suffix + ".csv")
        assert f1.read_bytes() == f2.read_bytes(), suffix

    _, header, rows = _read_csv(out1)
    assert header == ["traj", "time", "channel", "n1_post", "n2_post",
                      "dn_post"]
    assert rows, "expected jump events"
    times = [float(r[1]) for r in rows if r[0] == "0"]
    assert times == sorted(times)
    _, hheader, hrows = _read_csv(out1.with_name("a_hist_dn.csv"))
    assert hheader == ["center", "lo", "hi", "weight"]
    assert sum(float(r[3]) for r in hrows) > 0
