import json
import subprocess
import sys

import pytest

from conftest import FRAMES, load_display
from veltman.cli import main
from veltman.formula import flatten_and, parse
from veltman.schemata import slim_tilde
from veltman.semantics import force, parse_countermodel

PICTURE = str(FRAMES / "slim_f0_picture.txt")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_slim2(capsys):
    code, out, _ = run(capsys, "gen", "slim", "2")
    assert code == 0
    first, vars_line = out.splitlines()
    assert flatten_and(parse(first)) == flatten_and(load_display("slim_2"))
    assert vars_line == "vars a0 a1 b0 b1 c0 c1 e1"


def test_gen_broad_u1(capsys):
    assert run(capsys, "gen", "broad-u", "1")[1].splitlines()[0] == "<>~(d1 |> ~c)"


def test_gen_fixed_w(capsys):
    assert run(capsys, "gen", "fixed", "W")[1].splitlines()[0] == "a |> b -> a |> b & []~a"


def test_gen_bad_id(capsys):
    code, _, err = run(capsys, "gen", "slim", "x")
    assert code == 2 and "integer" in err


def test_check_picture_writes_countermodel(capsys, tmp_path):
    out_file = tmp_path / "cm.txt"
    code, out, _ = run(capsys, "check", PICTURE, "--schema", "slim-tilde", "0",
                       "--out", str(out_file))
    assert code == 1 and "countermodel" in out
    cm = parse_countermodel(out_file.read_text())
    assert cm.formula == slim_tilde(0)
    assert not force(cm.frame, cm.valuation, cm.world, cm.formula)


@pytest.mark.parametrize("axiom", ["L1", "L2", "L3", "J1", "J2", "J3", "J4", "J5"])
def test_check_one_world_axioms(capsys, tmp_path, axiom):
    frame = tmp_path / "one.txt"
    frame.write_text("worlds 1\nR\n")
    assert run(capsys, "check", str(frame), "--schema", "fixed", axiom)[0] == 0


def test_check_over_budget(capsys):
    code, _, err = run(capsys, "check", PICTURE, "--schema", "slim-tilde", "2",
                       "--exhaustive", "--budget", "20")
    assert code == 2 and "budget" in err


def test_check_sampled(capsys):
    code, out, _ = run(capsys, "check", PICTURE, "--formula", "<>p |> p", "--samples", "100")
    assert code == 0 and "100 samples" in out


def test_check_needs_formula(capsys):
    assert run(capsys, "check", PICTURE)[0] == 2


def test_frame_validate(capsys, tmp_path):
    assert run(capsys, "frame", "validate", PICTURE)[0] == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("worlds 2\nR 0>1 1>0\n")
    code, out, _ = run(capsys, "frame", "validate", str(bad))
    assert code == 1 and "RCycle" in out


def test_frame_count(capsys):
    assert run(capsys, "frame", "count", "--size", "2")[1].strip() == "3"
    assert run(capsys, "frame", "count", "--size", "3", "--dedup", "true")[1].strip() == "8"


def test_frame_enumerate_round_trips(capsys, tmp_path):
    out_file = tmp_path / "frames.txt"
    assert run(capsys, "frame", "enumerate", "--size", "3", "--out", str(out_file))[0] == 0
    blocks = out_file.read_text().split("# frame ")[1:]
    assert len(blocks) == 8


def test_correspond_slim0(capsys, tmp_path):
    out_file = tmp_path / "rep.json"
    code, out, _ = run(capsys, "correspond", "slim", "0", "--size", "3", "--exhaustive",
                       "--out", str(out_file))
    assert code == 0 and "mismatches 0" in out
    rep = json.loads(out_file.read_text())
    assert rep["summary"]["mismatches"] == 0
    refs = {r["witness"] for r in rep["rows"] if r["witness"]}
    assert refs <= set(rep["certificates"])


def test_correspond_requires_index(capsys):
    assert run(capsys, "correspond", "slim")[0] == 2
    assert run(capsys, "correspond", "P", "1")[0] == 2


def test_separate_same_index(capsys):
    code, _, err = run(capsys, "separate", "1", "1")
    assert code == 2 and "different" in err


def test_separate_writes_certificate(capsys, tmp_path):
    out_file = tmp_path / "cert.txt"
    code, out, _ = run(capsys, "separate", "0", "1", "--max", "7", "--out", str(out_file))
    assert code == 0
    cert = parse_countermodel(out_file.read_text())
    assert not force(cert.frame, cert.valuation, cert.world, cert.formula)


def test_separate_exhausted(capsys):
    code, out, _ = run(capsys, "separate", "0", "1", "--max", "3")
    assert code == 1 and "at most 3 worlds" in out


def test_hierarchy_syntactic(capsys):
    code, out, _ = run(capsys, "hierarchy", "--syntactic", "--max", "4")
    assert code == 0 and out.count(": yes") == 5


def test_hierarchy_small(capsys):
    code, out, _ = run(capsys, "hierarchy", "--max", "2", "--size", "3")
    assert code == 0 and "mismatches 0" in out


def test_report_is_byte_stable(capsys):
    a = run(capsys, "correspond", "P", "--size", "3", "--exhaustive", "-v")[1]
    b = run(capsys, "correspond", "P", "--size", "3", "--exhaustive", "-v")[1]
    assert a == b


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "veltman.cli", "gen", "fixed", "J5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("<>p |> p")


def test_mismatch_channel_fires(capsys, monkeypatch):
    import veltman.harness as harness
    # a condition that always claims to hold must clash with real countermodels
    monkeypatch.setattr(harness, "pm_condition", lambda frame, which: None)
    code, out, _ = run(capsys, "correspond", "P", "--size", "3", "--exhaustive")
    assert code == 1
    assert "MISMATCH" in out and "worlds 3" in out
