import json
import subprocess
import sys

import pytest

from kepler_convexity.cli import analyze_f3, main, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_identity(capsys):
    code, out, err = run(capsys, "verify", "identity")
    assert code == 0
    rep = json.loads(out)
    assert rep["factorization"]["outcome"] in ("ExactIdentity", "IdentityModuloF")
    assert "ExactIdentity" in err
    assert rep["sigma"] == -1


def test_certify_rkp(capsys):
    code, out, _ = run(capsys, "certify", "rkp", "--energy", "-2", "--samples", "20000")
    assert code == 0
    rep = json.loads(out)
    assert rep["pass"] is True and rep["violations"] == []
    assert list(rep)[:10] == ["c", "samples", "seed", "sigma", "min_det", "min_eig", "argmin", "factor_minima", "violations", "pass"]
    assert len(rep["argmin"]) == 4 and set(rep["factor_minima"]) == {"f1", "f2", "f3", "f4"}
    assert rep["seed"] == 0x4B45504C


def test_certify_domain_error(capsys):
    code, out, err = run(capsys, "certify", "rkp", "--energy", "-1")
    assert code == 2 and out == ""
    assert len(err.strip().splitlines()) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["certify", "rkp"],
        ["certify", "rkp", "--energy", "abc"],
        ["certify", "rkp", "--energy", "-2", "--samples", "0"],
        ["bogus"],
        ["scan", "r3bp", "--mu", "0.5"],
        ["scan", "r3bp", "--mu", "0.5", "--fractions", "1.5"],
        ["analyze", "f3", "--a-grid", "0.5:1.5:3"],
        ["analyze", "f3", "--c-grid", "-1.4"],
        ["certify", "rkp", "--energy", "-2", "--seed", "-1"],
        ["verify", "identity", "--format", "csv"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert len(err.strip().splitlines()) == 1


def test_scan_csv_rows(capsys, tmp_path):
    out = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "scan", "r3bp", "--mu", "0.1,0.5", "--fractions", "0.5,0.9,0.99", "--samples", "800", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "mu,c_crit,energy,fraction,samples,skipped,min_eig,min_det,pass"
    assert len(lines) == 1 + 2 * 3
    assert all(l.endswith(",true") for l in lines[1:])


def test_reports_byte_identical(capsys, tmp_path):
    paths = []
    for jobs in ("1", "3"):
        p = tmp_path / f"cert{jobs}.json"
        assert main(["certify", "rkp", "--energy", "-4", "--samples", "5000", "--seed", "17", "--jobs", jobs, "--out", str(p)]) == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_control_report(capsys):
    code, out, _ = run(capsys, "control", "direct-lc", "--energies", "-1.5005,-8", "--samples", "4000")
    rep = json.loads(out)
    assert code == 0 and rep["expectation_met"]
    assert rep["rows"][0]["direct_pass"] is False and rep["rows"][1]["direct_pass"] is True
    assert rep["composed_all_pass"] is True


def test_analyze_f3_cells():
    a = [0.5**0.5, (7 / 18) ** 0.5]
    rows = analyze_f3(a, [-1.5 - 1e-9, -4.0])
    assert len(rows) == 2 + 4  # the split cell is evaluated under both cases
    first = rows[0]
    assert first["pass"] and first["f3"] == pytest.approx(1.125, abs=1e-7)
    split = [r for r in rows if abs(r["a2"] - 7 / 18) < 1e-12]
    assert {r["case"] for r in split} == {"crit", "axis"}
    assert all(r["pass"] for r in rows)


def test_analyze_default_grid(capsys):
    code, out, _ = run(capsys, "analyze", "f3")
    rep = json.loads(out)
    assert code == 0 and rep["cells"] == 10_000 and rep["failures"] == 0


def test_parse_grid():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("-1.6,-2") == [-1.6, -2.0]


def test_verify_maps(capsys):
    code, out, _ = run(capsys, "verify", "maps", "--samples", "2000", "--sym-samples", "100")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["sigma"] == -1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "kepler_convexity", "certify", "rkp", "--energy", "-1"], capture_output=True, text=True)
    assert r.returncode == 2
