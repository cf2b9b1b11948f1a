"""Command-line behaviour: outputs, exit codes, CSV, determinism."""
import csv
import io
import subprocess
import sys

import pytest

from cli_cases import invocations, write_inputs
from subshiftlab.cli import dispatch


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def kv(line):
    return dict(item.split("=", 1) for item in line.split())


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    return write_inputs(tmp_path_factory.mktemp("cli"))


def test_bounds_commands():
    code, out, _ = run(["bounds", "binom", "--n", "4", "--alpha", "1/2"])
    assert code == 0 and out == "lower=4 sum=11 upper=16 holds=true\n"
    code, out, _ = run(["bounds", "sandwich", "--max-n", "64"])
    assert code == 0 and out.splitlines()[-1] == "cases=512 all_hold=true"


def test_schedule_extend_writes_file(tmp_path):
    target = tmp_path / "s.txt"
    code, out, _ = run(["schedule", "extend", "--out", str(target)])
    assert code == 0 and target.read_text() == out
    assert "level 2 l=65538 r=1/512" in out


def test_patterns_commands(files):
    code, out, _ = run(["patterns", "count", "--level", "1", "--parity", "+"])
    row = kv(out.strip())
    assert code == 0 and row["count"] == "64" and row["parity"] == "plus"
    code, out, _ = run(["--csv", "-", "patterns", "count", "--level", "1"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["level", "parity", "count", "logWeighted", "marginBits"]
    code, out, _ = run(["patterns", "verify-51", "--power", "10"])
    assert code == 0 and out.splitlines()[-1] == "holds=true"


def test_tiles_commands(files):
    assert run(["tiles", "count", "--tileset", "coordinate:4", "--region", "5x5"])[1] == "transfer=16\n"
    code, out, _ = run(["tiles", "verify-sim", "--rho", files["rho"], "--tau", "coordinate:2",
                        "--zoom", "2", "--map", files["map"]])
    assert code == 0 and kv(out.splitlines()[0])["unique_split"] == "true"
    code, out, _ = run(["tiles", "from-sft", "--patterns", files["patterns"]])
    assert code == 0 and out.count("\ntile ") == 5


def test_tm_commands():
    code, out, _ = run(["tm", "tiling", "--machine", "right-mover", "--width", "4", "--height", "3"])
    assert code == 0 and out == "tilings=1 matches_simulation=true\n"
    code, out, _ = run(["tm", "tiling", "--machine", "immediate-halt", "--width", "3", "--height", "2"])
    assert out == "tilings=0 matches_simulation=n/a\n"
    code, out, _ = run(["tm", "independence", "--machine", "reject-11", "--lengths", "2", "--width", "3",
                        "--height", "3"])
    assert code == 1 and "constant=false" in out


def test_gibbs_commands(files, tmp_path):
    code, out, _ = run(["gibbs", "pressure", "--potential", files["potential"], "--beta", "0"])
    assert code == 0 and float(kv(out.splitlines()[0])["pressure"]) == pytest.approx(0.6931471805599453)
    target = tmp_path / "sweep.csv"
    code, out, _ = run(["--csv", str(target), "gibbs", "sweep", "--potential", files["potential"],
                        "--betas", "0,1,2", "--families", files["families"]])
    rows = list(csv.DictReader(target.open()))
    assert code == 0 and out == "" and [r["beta"] for r in rows] == ["0.0", "1.0", "2.0"]
    assert float(rows[0]["mass_zero"]) == pytest.approx(0.5)
    code, out, _ = run(["gibbs", "demo", "--schedule", files["schedule"]])
    summary = kv(out.splitlines()[-1])
    assert code == 0 and summary["consistent"] == "true" and summary["flip"] != "none"


@pytest.mark.parametrize("argv, code, message", [
    (["bounds", "binom", "--n", "4"], 1, "[cli]"),
    (["bounds", "entropy", "--t", "3/2"], 1, "[schedule-bounds]"),
    (["tiles", "count", "--tileset", "/nonexistent", "--region", "2x2"], 1, "cannot read"),
    (["tiles", "solve", "--tileset", "coordinate:3", "--region", "3x3", "--limit", "2"], 2, "[wang-tiling]"),
    (["tm", "macro", "--machine", "accept-all", "--n", "10", "--io", "0,0,0,0"], 1, "minimum is 17"),
    (["--threads", "0", "bounds", "entropy", "--t", "1/2"], 1, "--threads"),
])
def test_error_exit_codes(argv, code, message):
    got, out, err = run(argv)
    assert got == code and err.startswith("error: ") and message in err


def test_no_arguments_prints_help():
    code, out, err = run([])
    assert code == 1 and out == "" and "usage:" in err


def test_console_script_and_cap_exit(tmp_path):
    sched = tmp_path / "deep.txt"
    sched.write_text("mode toy\nlevel 1 l=12 r=1/2\nlevel 2 l=12 r=1/2\nlevel 3 l=40 r=1/2\n")
    argv = ["patterns", "count", "--schedule", str(sched), "--level", "3"]
    p = subprocess.run(["subshiftlab", "--cap-enum", "1024"] + argv, capture_output=True, text=True)
    assert p.returncode == 2 and p.stderr.startswith("error: [subshift-x]")
    p = subprocess.run([sys.executable, "-m", "subshiftlab.cli", "patterns", "count", "--level", "1"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "count=64" in p.stdout


@pytest.mark.parametrize("threads", ["1", "4", "8"])
def test_every_invocation_is_byte_reproducible(files, threads):
    for argv in invocations(files):
        first = run(["--threads", threads] + argv)
        assert run(["--threads", threads] + argv) == first, argv
        assert run(argv) == first, argv
