import csv
import json
import subprocess
import sys

import pytest

from assouad_forge.cli import UsageError, main, parse_args

STAIR = ('{"type":"staircase","default":"0","pieces":[{"lo":"0.4","hi":"0.6","value":"1"},'
         '{"lo":"0.9","hi":"1.6","value":"0.5"},{"lo":"2.5","hi":"3.1","value":"0"}]}')


@pytest.fixture
def work(tmp_path):
    (tmp_path / "p.json").write_text(STAIR)
    return tmp_path


def test_parse_build_and_sweep():
    cmd = parse_args(["build", "--profile", "p.json", "--gmax", "12", "--out", "f.pts"])
    assert cmd.verb == "build" and cmd.options.gmax == 12
    cmd = parse_args(["sweep", "--in", "f.pts", "--thetas", "64", "--window", "dyadic:1..16", "--out", "s.csv"])
    assert cmd.verb == "sweep" and cmd.options.thetas == 64
    assert cmd.options.window.ratio_exponents == tuple(range(1, 17))


@pytest.mark.parametrize("argv", [
    ["build", "--gmax"],
    ["build", "--profile", "p.json"],
    ["build", "--profile", "p.json", "--gmax", "x"],
    ["project", "--in", "f", "--theta", "one"],
    ["sweep", "--in", "f", "--thetas", "8", "--window", "dyadic:3"],
    ["frobnicate"],
    [],
    ["build", "--profile", "p.json", "--gmax", "3", "--bogus"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_args(argv)
    assert main(argv) == 2


def test_pipeline_build_project_estimate(work):
    f, p1, e = work / "f.pts", work / "p.txt", work / "e.csv"
    assert main(["build", "--profile", str(work / "p.json"), "--gmax", "12", "--depth", "6", "--out", str(f)]) == 0
    assert main(["project", "--in", str(f), "--theta", "1.0", "--out", str(p1)]) == 0
    assert main(["estimate", "--in", str(p1), "--window", "dyadic:1..12", "--out", str(e)]) == 0
    rows = list(csv.reader(e.open()))
    assert rows[0][:3] == ["kind", "a", "j"] and rows[1][0] == "estimate"
    float(rows[1][5])


def test_verify_clean_and_corrupted(work):
    f = work / "f.pts"
    assert main(["build", "--profile", str(work / "p.json"), "--gmax", "12", "--depth", "6", "--out", str(f)]) == 0
    out = work / "v.json"
    assert main(["verify", "--in", str(f), "--out", str(out)]) == 0
    reports = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["pass"] for r in reports)
    assert {r["check"] for r in reports} == {"yydecay", "bilipschitz", "separation",
                                             "radius_bracket", "global_covering"}
    # drag one point of a deep cluster onto its neighbour's Z level
    lines = f.read_text().splitlines()
    start = max(i for i, l in enumerate(lines) if l.startswith("# cluster") and " c=0x0p+0" not in l)
    x, _ = lines[start + 3].split()
    lines[start + 3] = f"{x} {lines[start + 4].split()[1]}"
    bad = work / "bad.pts"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--in", str(bad), "--out", str(work / "bad.json")]) == 1


def test_input_errors_exit_two(work):
    assert main(["project", "--in", str(work / "missing.pts"), "--theta", "1"]) == 2
    (work / "junk.pts").write_text("garbage\n")
    assert main(["sweep", "--in", str(work / "junk.pts"), "--thetas", "4"]) == 2
    (work / "bad.json").write_text('{"type":"constant","value":"2"}')
    assert main(["build", "--profile", str(work / "bad.json"), "--gmax", "2"]) == 2
    assert not (work / "out.pts").exists()


def test_directions_and_tangent(work, capsys):
    assert main(["directions", "--profile", str(work / "p.json"), "--count", "8"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,theta,value,block" and len(out) == 9
    assert main(["tangent", "--profile", str(work / "p.json"), "--theta", "1", "--depth", "4"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["k", "n_k", "g", "dH", "ratio", "ratio_bound", "flags"]
    assert all(float(r[3]) < 1e-20 and not r[6] for r in rows[1:])


def test_outputs_are_idempotent(work):
    f = work / "f.pts"
    args = ["build", "--profile", str(work / "p.json"), "--gmax", "9", "--out", str(f)]
    assert main(args) == 0
    first = f.read_bytes()
    assert main(args) == 0
    assert f.read_bytes() == first
    s1, s2 = work / "s1.csv", work / "s2.csv"
    assert main(["sweep", "--in", str(f), "--thetas", "clusters", "--window", "dyadic:1..8", "--out", str(s1)]) == 0
    assert main(["sweep", "--in", str(f), "--thetas", "clusters", "--window", "dyadic:1..8", "--out", str(s2)]) == 0
    assert s1.read_bytes() == s2.read_bytes()


def test_console_entry_point(work):
    r = subprocess.run([sys.executable, "-m", "assouad_forge", "directions", "--profile",
                        str(work / "p.json"), "--depth", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[1] == "1,0.0625,0,1"
