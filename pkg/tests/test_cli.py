import json
import math
import subprocess
import sys

import pytest

from radop.cli import main
from radop.geometry import disk
from radop.norms import BergmanSpace


@pytest.fixture
def disk_json(tmp_path):
    path = tmp_path / "disk.json"
    path.write_text(json.dumps(BergmanSpace(disk()).to_json()))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norms_table(capsys, disk_json):
    code, out, _ = run(capsys, "norms", "--space", disk_json, "--N", "3")
    assert code == 0
    vals = [e["norm_sq"] for e in json.loads(out)["entries"]]
    assert vals == pytest.approx([math.pi, math.pi / 2, math.pi / 3, math.pi / 4], rel=1e-15)


def test_norms_csv(capsys):
    code, out, _ = run(capsys, "norms", "--space", "hartogs", "--N", "1", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "alpha1,alpha2,norm_sq,provenance"
    assert len(lines) > 2


def test_verify_commutation(capsys):
    code, out, err = run(capsys, "verify", "--suite", "commutation", "--trials", "100", "--seed", "1")
    assert code == 0
    assert json.loads(out)["worst_residual"] < 1e-12
    assert err.startswith("PASS commutation")


def test_spectrum_limit_point(capsys, disk_json, tmp_path):
    csv_path = tmp_path / "hull.csv"
    code, out, _ = run(capsys, "spectrum", "--space", disk_json, "--symbol", "reciprocal-succ", "--N", "100",
                       "--csv", str(csv_path))
    assert code == 0
    rep = json.loads(out)
    assert any(math.hypot(*p) < 1e-6 for p in rep["limit_points"])
    assert rep["compact"] is True and rep["finite_rank"] is False
    assert csv_path.read_text().startswith("re,im\n")


def test_numrange_square(capsys):
    sym = json.dumps({"kind": "builtin", "name": "geometric", "params": {"base": [0, 1]}})
    code, out, _ = run(capsys, "numrange", "--space", "disk", "--symbol", sym, "--N", "12")
    assert code == 0
    hull = [complex(*v) for v in json.loads(out)["hull"]]
    assert len(hull) == 4
    for v in (1, 1j, -1, -1j):
        assert min(abs(h - v) for h in hull) < 1e-12


def test_output_is_byte_identical(capsys, tmp_path):
    args = ["spectrum", "--space", "disk", "--symbol", "reciprocal-succ", "--N", "40"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_figure_is_written(capsys, tmp_path):
    fig = tmp_path / "spec.png"
    code, _, _ = run(capsys, "spectrum", "--space", "disk", "--symbol", "reciprocal-succ", "--N", "20",
                     "--figure", str(fig))
    assert code == 0
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_apply_routes(capsys):
    poly = json.dumps({"dim": 1, "terms": [[[1], [1, 0]]]})
    code, out, _ = run(capsys, "apply", "--space", "disk", "--symbol", "reciprocal-succ", "--poly", poly,
                       "--z", "0.4", "--route", "both")
    assert code == 0
    val = json.loads(out)["values"][0]
    assert val["diagonal"][0] == pytest.approx(0.2, abs=1e-15)
    assert val["integral"][0] == pytest.approx(0.2, abs=1e-6)


def test_algebra_expression(capsys):
    code, out, _ = run(capsys, "algebra", "--space", "disk", "--def", "a=reciprocal-succ",
                       "--def", 'b={"kind": "finite", "entries": [[[0], [2, 0]]]}', "--expr", "star(a) * b + 2·a",
                       "--N", "4")
    assert code == 0
    rep = json.loads(out)
    assert rep["norm"]["value"] == pytest.approx(4.0)


def test_feasible_and_classify(capsys):
    code, out, _ = run(capsys, "feasible", "--space", "hartogs", "--samples", "5")
    assert code == 0 and json.loads(out)["verdict"] == "feasible-at-samples"
    code, out, _ = run(capsys, "classify", "--coeffs", "geometric-series")
    rep = json.loads(out)
    assert code == 0 and rep["hardy"]["member"] and not rep["dirichlet"]["member"]


def test_cache_commands(capsys):
    run(capsys, "norms", "--space", "hartogs", "--N", "2")
    code, out, _ = run(capsys, "cache", "show")
    assert code == 0
    code, out, _ = run(capsys, "cache", "clear")
    assert code == 0 and "removed" in json.loads(out)


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "nonsense")[0] == 1
    assert run(capsys, "norms", "--space", "nowhere")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "norms", "--space", str(bad))[0] == 1
    assert run(capsys, "norms", "--space", "disk", "--N", "-1")[0] == 2
    assert run(capsys, "norms", "--space", "disk", "--rel-tol", "0")[0] == 2
    poly = json.dumps({"dim": 1, "terms": [[[1], [1, 0]]]})
    assert run(capsys, "apply", "--space", "disk", "--symbol", "one", "--poly", poly, "--z", "1.5",
               "--route", "integral")[0] == 2
    assert run(capsys, "algebra", "--space", "disk", "--def", "a=one", "--expr", "a +")[0] == 1


def test_verify_failure_exit_code(capsys, monkeypatch):
    from radop import cli
    from radop.verify import SuiteResult

    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: SuiteResult("adjoint", 1.0, 1e-8, 1))
    code, _, err = run(capsys, "verify", "--suite", "adjoint")
    assert code == 4 and err.startswith("FAIL")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "radop", "norms", "--space", "disk", "--N", "1", "--no-cache"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["N"] == 1
