import json
import os
import subprocess
import sys

import pytest

from cubiccount.cli import main
from cubiccount.curve import normalize_point
from cubiccount.fileio import (
    CurveFileError,
    curve_to_json,
    fixture_catalog,
    load_curve,
    parse_curve,
    points_from_csv,
    points_to_csv,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_points_fermat(capsys):
    code, out, _ = run(capsys, "points", "--curve", "fermat", "--B", "100")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x0,x1,x2" and len(lines) == 5 and lines[-1] == "N=3"
    assert points_from_csv("\n".join(lines[:-1])) == [
        normalize_point(t) for t in ((0, 1, -1), (1, -1, 0), (1, 0, -1))
    ]


def test_rank_exponent_r16(capsys):
    code, out, _ = run(capsys, "bounds", "rank-exponent", "--r", "16")
    assert code == 0 and json.loads(out)["exponent"] == "8"


def test_check_nodal(capsys):
    code, out, _ = run(capsys, "check", "--curve", "nodal")
    assert code == 1 and "[0:0:1]" in out and "SingularCertified" in out
    code, out, _ = run(capsys, "check", "--curve", "fermat")
    assert code == 0 and "SmoothCertified(prime=5)" in out


def test_singular_curve_is_refused(capsys):
    code, _, err = run(capsys, "points", "--curve", "nodal", "--B", "5")
    assert code == 1 and "singular" in err


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "points", "--curve", "fermat")[0] == 2
    assert run(capsys, "bounds", "diagnostics")[0] == 2


def test_malformed_curve(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "check", "--curve", str(bad))
    assert code == 1 and "malformed" in err
    short = tmp_path / "short.json"
    short.write_text(json.dumps({"coefficients": ["1", "2"]}))
    assert run(capsys, "check", "--curve", str(short))[0] == 1
    assert run(capsys, "check", "--curve", "no-such-curve")[0] == 1


def test_group_commands(capsys):
    code, out, _ = run(capsys, "group", "mul", "--curve", "fermat", "--P", "[1:0:-1]", "--m", "2")
    assert code == 0 and out.strip() == "[0:1:-1]"
    code, out, _ = run(capsys, "group", "add", "--curve", "f6", "--P", "[17:37:21]", "--Q", "[1:-1:0]")
    assert out.strip() == "[17:37:21]"
    code, out, _ = run(capsys, "group", "neg", "--curve", "f6", "--P", "17,37,21")
    assert out.strip() == "[37:17:21]"
    code, out, _ = run(
        capsys, "group", "relation", "--curve", "fermat", "--m", "2", "--P", "[0:1:-1]", "--Q", "[1:0:-1]", "--R", "[1:-1:0]"
    )
    assert out.strip() == "holds"
    code, _, err = run(capsys, "group", "add", "--curve", "fermat", "--P", "[1:1:1]", "--Q", "[1:-1:0]")
    assert code == 1
    code, out, _ = run(capsys, "group", "mul", "--curve", "fermat", "--P", "[1:0:6]", "--m", "3", "--p", "7")
    assert code == 0 and out.strip() == "[1:6:0]"


def test_fp_count_and_badprimes(capsys):
    code, out, _ = run(capsys, "fp-count", "--curve", "fermat", "--p", "3,5,7")
    assert out.splitlines() == ["p,n_p,hasse_ok", "3,bad,", "5,6,True", "7,9,True"]
    code, out, _ = run(capsys, "badprimes", "--curve", "fermat", "--bound", "100")
    assert json.loads(out)["bad_primes"] == [3]


def test_classes_and_xpoints(capsys):
    code, out, _ = run(capsys, "classes", "--curve", "fermat", "--B", "10", "--m", "3")
    d = json.loads(out)
    assert d["count"] == 3 and d["within_16_m_r"] and "heuristic" in d["method"]
    code, out, _ = run(capsys, "xpoints", "--curve", "f6", "--m", "2", "--generator", "[17:37:21]", "--multiples", "1:8")
    lines = out.splitlines()
    assert lines[0].startswith("# {") and lines[1] == "P.x0,P.x1,P.x2,Q.x0,Q.x1,Q.x2"
    assert len(lines) == 2 + 8 + 1 and lines[-1].startswith("# pairs=8")


def test_detmethod_command(capsys, tmp_path):
    code, out, _ = run(capsys, "detmethod", "--curve", "f6", "--m", "1", "--B", "100", "--a", "1", "--b", "1")
    d = json.loads(out)
    assert code == 0 and d["s"] == 6 and d["pairs"] == 3 and d["auxiliary_form"]["vanishes_at_pairs"]
    assert d["rank_r"]["source"] == "fixture-supplied, unverified"
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "detmethod", "--curve", "fermat", "--m", "1", "--B", "20", "--out", str(target))
    assert code == 0 and out.startswith("s=") and json.loads(target.read_text())["pairs"] == 3


def test_bounds_commands(capsys):
    d = json.loads(run(capsys, "bounds", "uniform-bound", "--B", "3", "--r", "0")[1])
    assert d["value"] == pytest.approx(3.3838179381, rel=1e-9)
    assert json.loads(run(capsys, "bounds", "optimal-m", "--B", "3")[1])["m"] == 2
    d = json.loads(run(capsys, "bounds", "params", "--B", "1000", "--A", "6")[1])
    assert d["size_holds"] and d["s"] == 2202
    d = json.loads(run(capsys, "bounds", "mertens", "--s", "10")[1])
    assert d["sum_logp_over_p"] == pytest.approx(1.3127, abs=1e-4)
    d = json.loads(run(capsys, "bounds", "divisor-sum", "--Pi", "6")[1])
    assert d["holds"]
    d = json.loads(run(capsys, "bounds", "divisor-sum", "--exhaustive", "1000")[1])
    assert d["first_failure"] is None
    out = run(capsys, "bounds", "rank-exponent", "--r", "3", "--format", "csv")[1]
    assert out.splitlines()[1] == "1,-7/16,-7/16"
    d = json.loads(run(capsys, "bounds", "diagnostics", "--curve", "f6", "--B", "100", "--prime-bound", "100")[1])
    assert d["bad_primes"] == [2, 3] and d["few_points"]


def test_growth(capsys):
    code, out, _ = run(capsys, "growth", "--curve", "fermat", "--B-grid", "10,100")
    lines = out.splitlines()
    assert lines[0] == "B,N(B),uniform_bound,logB_power"
    assert [l.split(",")[1] for l in lines[1:]] == ["3", "3"]
    assert run(capsys, "growth", "--curve", "selmer", "--B-grid", "10")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["points", "--curve", "e37a", "--B", "50"],
        ["detmethod", "--curve", "f6", "--m", "2", "--B", "50", "--a", "1", "--b", "4"],
        ["bounds", "rank-exponent", "--r", "7"],
        ["classes", "--curve", "e5077a", "--B", "20", "--m", "2"],
    ],
)
def test_output_is_deterministic(capsys, argv):
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "cubiccount", "bounds", "optimal-m", "--B", "1000"], capture_output=True, text=True
    )
    assert res.returncode == 0 and json.loads(res.stdout)["m"] == 3


def test_fixture_catalog_and_round_trip(tmp_path, monkeypatch):
    cat = fixture_catalog()
    assert set(cat) == {"fermat", "f6", "selmer", "e37a", "e5077a"}
    assert set(fixture_catalog(negative=True)) == {"nodal", "cube"}
    rec = cat["f6"]
    path = tmp_path / "f6.json"
    path.write_text(curve_to_json(rec))
    assert load_curve(path) == rec
    # a singular curve in the main section is rejected
    (tmp_path / "negative").mkdir()
    (tmp_path / "oops.json").write_text(json.dumps({"coefficients": ["1"] + ["0"] * 9}))
    with pytest.raises(CurveFileError):
        fixture_catalog(tmp_path)
    monkeypatch.setenv("CUBICCOUNT_FIXTURES", str(tmp_path))
    (tmp_path / "oops.json").unlink()
    assert set(fixture_catalog()) == {"f6"}


def test_curve_parsing_errors():
    with pytest.raises(CurveFileError):
        parse_curve({"coefficients": ["a"] * 10})
    with pytest.raises(CurveFileError):
        parse_curve({"coefficients": ["1"] * 10, "rank": -1})
    with pytest.raises(CurveFileError):
        parse_curve({"coefficients": ["1", "0", "0", "0", "0", "0", "1", "0", "0", "1"], "base_point": [1, 1, 1]})
    big = parse_curve({"coefficients": [str(10**40)] + ["0"] * 5 + ["1", "0", "0", "1"]})
    assert big.form.coeffs[0] == 10**40


def test_points_csv_round_trip():
    pts = [normalize_point((1, -2, 3)), normalize_point((10**30, 1, 0))]
    assert points_from_csv(points_to_csv(pts)) == pts
