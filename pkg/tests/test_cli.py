from pathlib import Path

import pytest

from univgroup.cli import main
from univgroup.fraisse import load
from univgroup.textio import parse_metric

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_eval(capsys):
    assert run(capsys, "eval", "-m", DATA / "z2.metric", "-x", 1, 1) == (0, "3/2\n", "")
    assert run(capsys, "eval", "-m", DATA / "z_w1.metric", "-x", -4)[1] == "4\n"


def test_dist(capsys):
    code, out, _ = run(capsys, "dist", "-a", DATA / "z_w1.metric", "-b", DATA / "z_w5_4.metric", "-R", 3)
    assert (code, out) == (0, "1/4\n")


def test_ball(capsys, tmp_path):
    code, out, _ = run(capsys, "ball", "-m", DATA / "z2.metric", "-r", "3/2")
    rows = out.splitlines()
    assert code == 0 and rows[0] == "x1\tx2\tdelta_num\tdelta_den"
    assert len(rows) == 8 and rows[1] == "0\t0\t0\t1" and rows[-1] == "1\t1\t3\t2"
    target = tmp_path / "ball.tsv"
    run(capsys, "ball", "-m", DATA / "z2.metric", "-r", "3/2", "--out", target)
    assert target.read_text() == out


def test_stable_norm(capsys):
    code, out, _ = run(capsys, "stable-norm", "-m", DATA / "z2.metric", "-x", 1, 1)
    assert (code, out) == (0, "lp 3/2\nupper 3/2 N 8\n")


def test_rationalize(capsys):
    code, out, _ = run(capsys, "rationalize", "-m", DATA / "z2.metric", "--eps", "1/2")
    assert code == 0
    assert out.splitlines()[2:] == ["gen 1 0 w 11/8", "gen 0 1 w 11/8", "gen 1 1 w 15/8"]


def test_extend_and_amalgamate(capsys):
    code, out, _ = run(capsys, "extend-katetov", "-k", DATA / "pm1.katetov")
    assert code == 0 and "gen 1 -1 w 1" in out.splitlines() and "gen 1 1 w 1" in out.splitlines()
    code, out, _ = run(capsys, "amalgamate", "-l", DATA / "z_w1.metric", "-r", DATA / "z_w1.metric", "--shared", 0)
    assert code == 0 and out == "metric v1\nrank 2\ngen 1 0 w 1\ngen 0 1 w 1\n"


def test_build(capsys, tmp_path):
    target = tmp_path / "chain.txt"
    code, _, err = run(capsys, "build", "--bound", 1, "--out", target)
    assert code == 0 and err.startswith("stages 2 rank 1 ran 1")
    assert load(target.read_text()).last.rank == 1


def test_check_suite(capsys):
    code, out, _ = run(capsys, "check", "wordmetric", "--seed", 7)
    assert code == 0 and out.endswith("0 failures, ok\n")


def test_approximate_and_embed(capsys, tmp_path):
    code, out, err = run(capsys, "approximate", "--oracle", DATA / "z_w1.metric", "--eps", "1/4", "--radius", 4)
    assert code == 0 and parse_metric(out).rank == 1 and err.startswith("ratio 0 ")
    code, out, _ = run(capsys, "embed", "--oracle", DATA / "z_w1.metric", "--depth", 2)
    assert code == 0 and out.startswith("embedding v1\ndepth 2\n")


def test_usage_errors(capsys, tmp_path):
    bad = tmp_path / "bad.metric"
    bad.write_text("metric v1\nrank 1\ngen 1 w x\n")
    code, _, err = run(capsys, "eval", "-m", bad, "-x", 1)
    assert code == 2 and "line 3" in err
    zero = tmp_path / "zero.metric"
    zero.write_text("metric v1\nrank 1\ngen 0 w 1\ngen 1 w 1\n")
    assert run(capsys, "eval", "-m", zero, "-x", 1)[0] == 2
    assert run(capsys, "eval", "-m", DATA / "z2.metric", "-x", 1)[0] == 2
    assert run(capsys, "eval", "-m", tmp_path / "missing.metric", "-x", 1)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["ball", "-m", str(DATA / "z2.metric"), "-r", "0.5"])
    assert exc.value.code == 2


def test_resource_limit(capsys, monkeypatch):
    monkeypatch.setenv("UNIVGROUP_NODE_BUDGET", "5")
    code, _, err = run(capsys, "eval", "-m", DATA / "skew.metric", "-x", 9, 7)
    assert code == 3 and err.startswith("resource limit")
