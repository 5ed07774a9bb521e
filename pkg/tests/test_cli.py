import json
import subprocess
import sys

import pytest

from rkhs_geometry.cli import main


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def results(out):
    doc = json.loads(out)
    assert doc["schema"] == "rkhs-geometry/1"
    return doc["results"]


def test_dist_table(capsys):
    code, out, _ = run(["dist-table", "--kernel", "dhb:alpha=1", "--metric", "delta", "--points", "[0,0.6]"], capsys)
    assert code == 0
    m = results(out)[0]["matrix"]
    assert m[0][0] == 0 and abs(m[0][1] - 0.6) < 1e-15 and m[0][1] == m[1][0]


def test_dist_table_csv(capsys):
    code, out, _ = run(["dist-table", "--kernel", "dhb:alpha=1", "--points", "[0,0.6]", "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "i,j,value"
    assert len(out.splitlines()) == 5


def test_undefined_cells_are_null(capsys, tmp_path, monkeypatch):
    # k_0 = 0 in this custom space, so any distance to 0 is undefined
    (tmp_path / "g.json").write_text(json.dumps({"points": [0, 1, 2], "matrix": [[0, 0, 0], [0, 2, 1], [0, 1, 2]]}))
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(["dist-table", "--kernel", "custom:file=g.json", "--points", "[0,1,2]"], capsys)
    assert code == 0
    assert '"matrix":[[0,null,null],[null,0,' in out
    code, out, _ = run(["dist-table", "--kernel", "custom:file=g.json", "--points", "[0,1,2]", "--format", "csv"],
                       capsys)
    assert "0,1,NA" in out.splitlines()
    code, out, _ = run(["dist-table", "--kernel", "dhb:alpha=1", "--metric", "rho", "--points", "[0, 0.5]"], capsys)
    assert code == 0 and abs(results(out)[0]["matrix"][0][1] - 0.5) < 1e-15


def test_vacuous_identity_suite(capsys):
    code, out, _ = run(["identity-check", "--suite", "magic", "--samples", "0"], capsys)
    assert code == 0
    r = results(out)[0]
    assert r["checks"] == 0 and r["failures"] == []


def test_identity_failure_exit_code(capsys):
    code, out, err = run(["identity-check", "--suite", "magic", "--samples", "50", "--tol", "0"], capsys)
    r = results(out)[0]
    assert code == (1 if r["failures"] else 0)
    if r["failures"]:
        assert "FAILED" in err and r["failures"][0]["identity"]


def test_np_test(capsys):
    code, out, _ = run(["np-test", "--kernel", "dhb:alpha=2", "--points", "[0.5,-0.5]"], capsys)
    assert code == 0
    r = results(out)[0]
    assert r["is_psd"] is False and abs(r["min_eig"] + 0.125) < 1e-12


@pytest.mark.parametrize("args", [
    ["dist-table", "--kernel", "dhb:alpa=1", "--points", "[0]"],
    ["dist-table", "--kernel", "dhb:alpha=1", "--points", "[1.5]"],
    ["dist-table", "--kernel", "dhb:alpha=1", "--points", "[0"],
    ["dist-table", "--kernel", "dhb:alpha=1", "--metric", "taxicab", "--points", "[0]"],
    ["np-test", "--kernel", "dhb:alpha=1", "--points", "[0]", "--format", "csv"],
    ["dist-table", "--kernel", "dhb:alpha=1"],
    ["bogus"],
])
def test_usage_errors_exit_2(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2
    assert err


def test_parse_error_message_has_position(capsys):
    code, _, err = run(["dist-table", "--kernel", "dhb:alpa=1", "--points", "[0]"], capsys)
    assert code == 2 and "position 4" in err


def test_geodesic(capsys):
    code, out, _ = run(["geodesic", "--kernel", "dhb:alpha=1", "--from", "0", "--to", "0.5"], capsys)
    r = results(out)[0]
    assert code == 0 and abs(r["inner"] - 0.5493061443340548) < 2e-3 and r["direct"] < r["inner"]


def test_zeroset(capsys):
    code, out, _ = run(["zeroset", "--generator", "geometric:base=2", "--space", "hardy"], capsys)
    r = results(out)[0]
    assert code == 0 and r["classification"] == "converges" and r["truncated"]
    code, out, _ = run(["zeroset", "--kernel", "dhb:alpha=0", "--generator", "geometric:base=2"], capsys)
    assert results(out)[0]["classification"] == "diverges-to-zero"
    code, _, _ = run(["zeroset", "--kernel", "dhb:alpha=2", "--generator", "geometric:base=2"], capsys)
    assert code == 2


def test_subspace(capsys):
    code, out, _ = run(["subspace", "--kernel", "dhb:alpha=2", "--subspace", "vanish:points=[0]",
                        "--pairs", "[[0.5,-0.5],[0.1,0.2]]"], capsys)
    r = results(out)[0]
    assert code == 0 and r["claim"] == "bergman" and r["passed"]
    assert r["rows"][0]["delta_J"] < r["rows"][0]["delta_H"]
    code, out, _ = run(["subspace", "--kernel", "fock:beta=1", "--subspace", "vanish:points=[0]",
                        "--pairs", "[[0.5,-0.5]]"], capsys)
    assert code == 0 and results(out)[0]["claim"] is None


def test_series_check(capsys):
    code, out, _ = run(["series-check", "--t", "0.1", "0.9"], capsys)
    a, b = results(out)
    assert code == 0 and a["lhs"] < a["rhs"] and b["lhs"] > b["rhs"]


def test_output_file_and_thread_independence(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("RKHS_GEOMETRY_THREADS", threads)
        p = tmp_path / f"t{threads}.json"
        assert main(["dist-table", "--kernel", "fock:beta=1", "--points", "[0,1,\"1j\",2,-1]",
                     "--output", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    monkeypatch.setenv("RKHS_GEOMETRY_THREADS", "zero")
    assert main(["dist-table", "--kernel", "fock:beta=1", "--points", "[0,1]"]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rkhs_geometry.cli", "np-test", "--kernel", "dhb:alpha=1",
                           "--points", "[0, 0.5]"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"][0]["is_psd"] is True
