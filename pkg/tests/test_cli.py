import json

import pytest

from multipoly import fixtures
from multipoly.cli import main


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        code, _, _ = run(["gen", "--degrees", "2,2", "--dims", "2,2", "--codomain", "1",
                          "--seed", 42, "--out", path], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["version"] == 1 and len(data["coeffs"]) == 16
    assert all(-1 <= c <= 1 for c in data["coeffs"])


def test_global_flags_before_command(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["--seed", 5, "--out", a, "gen", "--degrees", "1", "--dims", "3"], capsys)
    run(["gen", "--degrees", "1", "--dims", "3", "--seed", 5, "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("args", [
    ["gen", "--degrees", "0,1", "--dims", "2,2"],
    ["gen", "--degrees", "5", "--dims", "100"],
    ["gen", "--degrees", "1", "--dims", "2", "--format", "csv"],
    ["verify", "--suite", "nonsense"],
    ["norm", "--in", "/nonexistent/file.json"],
    ["gen", "--degrees", "1", "--dims", "2", "--seed", "-1"],
])
def test_config_errors_exit_2(args, capsys, tmp_path):
    code, _, err = run(args, capsys)
    assert code == 2 and "error" in err


def test_no_partial_file_on_failure(tmp_path, capsys):
    out = tmp_path / "x.json"
    code, _, _ = run(["gen", "--degrees", "5", "--dims", "100", "--out", out], capsys)
    assert code == 2 and not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_verify_polarization(capsys, tmp_path):
    out = tmp_path / "v.json"
    code, _, err = run(["verify", "--suite", "polarization", "--trials", 20, "--tol", "1e-9",
                        "--seed", 1, "--out", out], capsys)
    assert code == 0
    data = json.loads(out.read_text())
    assert data["ok"] and {c["name"] for c in data["checks"]} == {
        "polarization-formula", "base-point-independence"}
    assert "pass" in err


def test_verify_symmetry_on_fixture(capsys):
    path = fixtures.path("example2_block_not_fully_symmetric")
    code, out, _ = run(["verify", "--suite", "symmetry", "--in", path, "--trials", 5,
                        "--format", "csv"], capsys)
    assert code == 0
    rows = dict(line.split(",")[:2] for line in out.splitlines()[1:])
    assert rows["example2_block_not_fully_symmetric: block-symmetric"] == "pass"
    assert rows["example2_block_not_fully_symmetric: fully-symmetric fails as expected"] == "pass"


def test_verify_failure_exit_1(capsys):
    # an impossible tolerance makes the base-point check fail
    code, _, _ = run(["verify", "--suite", "polarization", "--trials", 3, "--tol", "-1"], capsys)
    assert code == 1


def test_norm_identity(capsys):
    code, out, _ = run(["norm", "--in", fixtures.path("id_2_2"), "--p", "2,2",
                        "--restarts", 32], capsys)
    assert code == 0
    assert json.loads(out)["lower"] == pytest.approx(1.0, abs=1e-9)


def test_norm_kinds(capsys):
    for kind in ("multilinear", "chain"):
        code, out, _ = run(["norm", "--in", fixtures.path("example2_block_not_fully_symmetric"),
                            "--kind", kind, "--restarts", 4], capsys)
        assert code == 0
        assert json.loads(out)["kind"] == kind


def test_summing_cauchy_schwarz(capsys, tmp_path):
    csv_path = tmp_path / "r.csv"
    code, out, _ = run(["summing", "--in", fixtures.path("id_1_1"),
                        "--classes", "lp:2,lp:2->lp:1", "--trials", 200,
                        "--csv", csv_path], capsys)
    assert code == 0
    assert json.loads(out)["c_lower"] == pytest.approx(1.0, abs=1e-6)
    assert csv_path.read_text().startswith("step,phase,ratio\n")
    code, _, _ = run(["summing", "--in", fixtures.path("id_1_1")], capsys)
    assert code == 2
    code, out, _ = run(["summing", "--in", fixtures.path("cauchy_schwarz_summing"),
                        "--trials", 10], capsys)
    assert code == 0 and json.loads(out)["classes"] == "lp:2,lp:2->lp:1"


def test_report_empty_dir(tmp_path, capsys):
    code, out, _ = run(["report", "--dir", tmp_path, "--format", "csv"], capsys)
    assert code == 0 and out == "file,command,key,value\n"


def test_report_aggregates(tmp_path, capsys):
    run(["gen", "--degrees", "1,1", "--dims", "2,2", "--out", tmp_path / "t.json"], capsys)
    run(["norm", "--in", tmp_path / "t.json", "--restarts", 2, "--out", tmp_path / "n.json"],
        capsys)
    code, out, _ = run(["report", "--dir", tmp_path, "--format", "csv"], capsys)
    assert code == 0
    assert "n.json,norm,lower," in out and "t.json,tensor,m,2" in out
    code, out, _ = run(["report", "--dir", tmp_path], capsys)
    assert [r["file"] for r in json.loads(out)["reports"]] == ["n.json", "t.json"]
