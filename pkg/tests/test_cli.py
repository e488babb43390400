import csv
import io
import json

import pytest
from click.testing import CliRunner

from modricci.cli import emit_plotdata, main, parse_scenario, run
from modricci.errors import ConfigParseError, ModelUnknown, UnknownKind

FLAT = """
[scenario]
name = flat
suites = radial

[model]
kind = Euclidean
dimension = 3

[ladders]
R = 0.1, 0.5, 1
"""

HYP = """
[scenario]
name = hyp
suites = {suites}

[model]
kind = Hyperbolic
dimension = 3
lam = {lam}
curvature = -1
"""


def write(tmp_path, text, name="s.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def test_flat_radial_passes(tmp_path):
    res = invoke("verify", write(tmp_path, FLAT), "--out", str(tmp_path / "o"))
    assert res.exit_code == 0, res.output
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["schema"] == 1
    assert rep["summary"]["n_fail"] == 0
    assert rep["summary"]["n_rows"] == len(rep["rows"])
    assert (tmp_path / "o" / "report.csv").exists()


def test_negative_control_exit_one(tmp_path):
    res = invoke("verify", write(tmp_path, HYP.format(suites="curvature, LaplacianComparison", lam=1)),
                 "--out", str(tmp_path / "o"))
    assert res.exit_code == 1
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert any(not r["pass"] for r in rep["rows"])


def test_list_models():
    res = invoke("list-models")
    assert res.exit_code == 0
    assert len(res.output.strip().splitlines()) == 7


def test_config_error_names_line_and_field(tmp_path):
    bad = FLAT.replace("dimension = 3", "dimension = three")
    with pytest.raises(ConfigParseError) as err:
        parse_scenario(bad)
    assert err.value.field == "dimension"
    assert err.value.line == bad.splitlines().index("dimension = three") + 1
    res = invoke("verify", write(tmp_path, bad))
    assert res.exit_code == 2


def test_unknown_model(tmp_path):
    bad = FLAT.replace("Euclidean", "Torus")
    with pytest.raises(ModelUnknown):
        parse_scenario(bad)
    assert invoke("verify", write(tmp_path, bad)).exit_code == 2


def test_unknown_suite():
    with pytest.raises(ConfigParseError) as err:
        parse_scenario(FLAT.replace("suites = radial", "suites = radial, topology"))
    assert err.value.field == "suites"


def test_empty_ladder():
    with pytest.raises(ConfigParseError):
        parse_scenario(FLAT.replace("R = 0.1, 0.5, 1", "R = "))


def test_missing_model():
    with pytest.raises(ConfigParseError):
        parse_scenario("[scenario]\nsuites = radial\n")


def test_ladder_variants():
    scen = parse_scenario(HYP.format(suites="LaplacianComparison", lam=2) + "\n[ladders]\nlam = 2, 3\n")
    rep = run(scen)
    assert {c["params"]["lam"] for c in rep.certificates} == {2.0, 3.0}


def test_plotdata_flat_volume_ratio(tmp_path):
    out = tmp_path / "o"
    invoke("verify", write(tmp_path, FLAT), "--out", str(out))
    text = emit_plotdata(str(out / "report.json"), "VolumeRatioBound")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["parameter", "lhs", "rhs", "margin"]
    assert all(abs(float(r["margin"])) <= 1e-10 for r in rows)
    with pytest.raises(UnknownKind):
        emit_plotdata(str(out / "report.json"), "NotAKind")
    assert invoke("plot", str(out / "report.json"), "NotAKind").exit_code == 2


def test_plotdata_hyperbolic_laplacian(tmp_path):
    out = tmp_path / "o"
    invoke("verify", write(tmp_path, HYP.format(suites="LaplacianComparison", lam=2)), "--out", str(out))
    res = invoke("plot", str(out / "report.json"), "LaplacianComparison")
    rows = list(csv.DictReader(io.StringIO(res.output)))
    margins = [float(r["margin"]) for r in rows]
    assert all(m > 0 for m in margins)
