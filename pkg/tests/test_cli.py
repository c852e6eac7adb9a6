import json
import subprocess
import sys
import time

import pytest

from ldpc_sched.cli import EXIT_INVALID, EXIT_IO, EXIT_USAGE, main
from ldpc_sched.decoder import ScheduleSequence
from ldpc_sched.graph import random_regular, to_alist


@pytest.fixture(scope="module")
def code(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "r48.alist"
    path.write_text(to_alist(random_regular(48, 3, 6, seed=0)))
    return path


def test_info(toy_alist, capsys):
    assert main(["info", str(toy_alist)]) == 0
    out = capsys.readouterr().out
    assert "N=3 M=2 E=4" in out
    assert "check degrees 2:2" in out


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE
    assert "invalid choice" in capsys.readouterr().err


def test_bad_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--trails", "3"])
    assert exc.value.code == EXIT_USAGE
    assert "unrecognized arguments" in capsys.readouterr().err


def test_unreadable_code(tmp_path, capsys):
    assert main(["info", str(tmp_path / "nope.alist")]) == EXIT_IO
    assert "cannot access" in capsys.readouterr().err


def test_invalid_values(code, capsys):
    assert main(["simulate", "--code", str(code), "--trials", "0"]) == EXIT_INVALID
    assert "trials must be >= 1" in capsys.readouterr().err
    assert main(["simulate", "--code", str(code), "--schedule", "zigzag"]) == EXIT_INVALID
    assert "neither a policy" in capsys.readouterr().err


def test_malformed_code(tmp_path, capsys):
    p = tmp_path / "bad.alist"
    p.write_text("3\n")
    assert main(["info", str(p)]) == EXIT_INVALID
    assert "malformed header" in capsys.readouterr().err


def test_optimize_then_simulate(code, tmp_path, capsys):
    sched = tmp_path / "best.sched"
    rc = main(["optimize", "--code", str(code), "--ebn0-db", "2.5", "--bins", "64", "--b", "4",
               "--big-s", "2", "--out", str(sched)])
    assert rc == 0
    assert ScheduleSequence.load(sched).order.shape == (24,)
    trace = (tmp_path / "best.sched.trace.csv").read_text().splitlines()
    assert trace[0] == "round,tau,accepted"
    out = tmp_path / "sim.csv"
    rc = main(["simulate", "--code", str(code), "--schedule", f"lowest-degree,{sched}",
               "--trials", "50", "--out", str(out), "--json", str(tmp_path / "sim.json")])
    assert rc == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "schedule_name,avg_nmp,reduction_ratio,ber,bler,trials"
    assert [r.split(",")[0] for r in rows[1:]] == ["row", "lowest-degree", "best"]
    assert json.loads((tmp_path / "sim.json").read_text())["baseline"] == "row"


def test_config_file_and_override(code, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"code": str(code), "ebn0_db": 2.0, "trials": 30, "seed": 1,
                               "schedule": "row", "out": str(tmp_path / "a.csv")}))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert main(["simulate", "--config", str(cfg), "--trials", "40",
                 "--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_text().splitlines()[1].endswith(",30")
    assert (tmp_path / "b.csv").read_text().splitlines()[1].endswith(",40")


def test_outputs_are_reproducible(code, tmp_path):
    for name in ("x", "y"):
        assert main(["trajectory", "--code", str(code), "--trials", "5", "--bins", "64",
                     "--seed", "3", "--schedule", "row,random", "--out", str(tmp_path / name)]) == 0
    for suffix in (".mc.csv", ".de.csv"):
        assert (tmp_path / f"x{suffix}").read_bytes() == (tmp_path / f"y{suffix}").read_bytes()


def test_de_curve(code, tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["de-curve", "--code", str(code), "--bins", "64", "--iterations", "2",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "schedule_name,nmp,ae,gap"
    assert len(lines) == 1 + 2 * 24 + 1
    assert "tau_AE=" in capsys.readouterr().err


def test_module_entry_point(toy_alist):
    r = subprocess.run([sys.executable, "-m", "ldpc_sched", "info", str(toy_alist)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "E=4" in r.stdout


@pytest.mark.slow
def test_simulate_desk_runtime(tmp_path):
    path = tmp_path / "r512.alist"
    path.write_text(to_alist(random_regular(512, 3, 6, seed=1)))
    t0 = time.perf_counter()
    assert main(["simulate", "--code", str(path), "--ebn0-db", "3.1", "--trials", "20000",
                 "--out", str(tmp_path / "s.csv")]) == 0
    assert time.perf_counter() - t0 < 600
