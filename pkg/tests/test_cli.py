import csv
import json
import math
import subprocess
import sys

import pytest

from cavity_teleport.cli import dumps, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_defaults(capsys):
    code, out, _ = run(capsys, "run")
    assert code == 0
    report = json.loads(out)
    assert report["fidelity_sim"] == pytest.approx(0.98771, abs=1e-5)
    assert report["p_joint"] == pytest.approx(0.06328, abs=1e-5)
    notes = report["discrepancy_notes"]
    assert any("0.97" in n for n in notes)
    assert any("0.25" in n for n in notes)
    for line in out.splitlines():
        assert line == line.rstrip()


def test_run_json_round_trip(capsys):
    _, out, _ = run(capsys, "run", "--theta2", "2.1", "--alpha-re", "0.6", "--beta-re", "0", "--beta-im", "0.8")
    assert dumps(json.loads(out)) + "\n" == out


def test_seventeen_digits(capsys):
    _, out, _ = run(capsys, "run")
    line = next(ln for ln in out.splitlines() if '"fidelity_sim"' in ln)
    digits = line.split(": ")[1].rstrip(",").replace(".", "").lstrip("0")
    assert len(digits) == 17


def test_unit_point(capsys):
    code, out, _ = run(capsys, "run", "--alpha-re", "1", "--beta-re", "0", "--theta2", "1.1107207345")
    assert code == 0
    assert json.loads(out)["fidelity_sim"] == pytest.approx(1, abs=1e-9)


def test_unnormalized_rejected(capsys):
    code, _, err = run(capsys, "run", "--alpha-re", "1", "--beta-re", "1")
    assert code == 2
    assert "renormalize" in err
    code, out, _ = run(capsys, "run", "--alpha-re", "1", "--beta-re", "1", "--renormalize")
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg["renormalized"] is True
    assert cfg["alpha_re"] == pytest.approx(1 / math.sqrt(2))


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["run", "--theta2", "abc"],
        ["timing"],
        ["timing", "--g", "-3"],
        ["run", "--theta2", str(math.pi / 2)],
        ["sweep", "--steps", "1"],
        ["run", "--levels", "2"],
    ],
)
def test_argument_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_sweep_csv(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--min", "0", "--max", str(2 * math.pi), "--steps", "9", "--csv", str(path))
    assert code == 0
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta2", "cos_sqrt2_theta2", "fidelity_formula", "fidelity_sim", "p_joint"]
    assert len(rows) - 1 == 9
    assert [r[3] for r in rows[1:]].count("NA") == 2
    assert len(json.loads(out)["rows"]) == 9


def test_montecarlo(capsys):
    code, out, _ = run(capsys, "montecarlo", "--trials", "5000", "--seed", "3")
    assert code == 0
    rep = json.loads(out)
    assert abs(rep["success_rate"] - rep["p_joint_expected"]) < 4 * rep["stderr"]
    assert set(rep["failures_by_outcome"]) == {"gg", "ge", "eg"}


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize", "--min", "1", "--max", "1.3")
    assert code == 0
    rep = json.loads(out)
    assert rep["theta2_star"] == pytest.approx(math.pi / (2 * math.sqrt(2)), abs=1e-6)
    assert rep["fidelity_star"] == pytest.approx(1, abs=1e-9)


def test_timing(capsys):
    g = 2 * math.pi * 5e4
    code, out, _ = run(capsys, "timing", "--g", repr(g))
    assert code == 0
    rep = json.loads(out)
    assert rep["total_time"] == pytest.approx(4 * math.pi / g)
    assert rep["within_bound"] is True


def test_check(capsys):
    code, out, _ = run(capsys, "check", "--format", "text")
    assert code == 0
    assert out.count("PASS") == 3


def test_text_format(capsys):
    code, out, _ = run(capsys, "run", "--format", "text")
    assert code == 0
    assert "fidelity_sim: 0.9877" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--seed", "5"],
        ["montecarlo", "--trials", "2000", "--seed", "8"],
        ["sweep", "--steps", "7"],
        ["timing", "--g", "1e5", "--format", "text"],
    ],
)
def test_byte_identical_reruns(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cavity_teleport", "timing", "--g", "1e5"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(proc.stdout)["g"] == 1e5
