import json

import pytest
from click.testing import CliRunner

from ffiwasawa.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, EXIT_PRECISION, SCHEMA, main, run
from ffiwasawa.iwasawa import GroupRingElt

from conftest import fixture_path

BASE = """
[field]
q = 5
p = 5

[curve]
a1 = 0
a2 = 0
a3 = 0
a4 = {a4}
a6 = 1

[precision]
N = 20

[bsd]
sha = {sha}
torsion = 9
"""


def write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_places_report_schema(tmp_path):
    cfg = write(tmp_path, BASE.format(a4=1, sha=1))
    res = invoke("places", "--config", cfg)
    assert res.exit_code == EXIT_PASS
    rep = json.loads(res.output)
    assert rep["schema"] == SCHEMA and rep["command"] == "places"
    assert [r["reduction"] for r in rep["results"]["places"]] == ["good-ordinary"] * 6


def test_lvalue_reports_rational_value(tmp_path):
    cfg = write(tmp_path, BASE.format(a4=1, sha=1))
    res = invoke("lvalue", "--config", cfg)
    assert res.exit_code == EXIT_PASS
    assert json.loads(res.output)["results"]["l_values"]["trivial"]["rational"] == "5/81"


def test_mtt_pass_and_fail(tmp_path):
    good = write(tmp_path, BASE.format(a4=1, sha=1), "good.ini")
    bad = write(tmp_path, BASE.format(a4=1, sha=4), "bad.ini")
    assert invoke("check", "mtt", "--config", good).exit_code == EXIT_PASS
    res = invoke("check", "mtt", "--config", bad)
    assert res.exit_code == EXIT_FAIL
    assert json.loads(res.output)["status"] == "fail"


def test_supersingular_place_in_tower_is_config_error(tmp_path):
    # y^2 = x^3 + 1 is supersingular over F_5
    text = BASE.format(a4=0, sha=1) + "\n[tower]\ncoordinates = cyclotomic:t\nlevel = 1\n"
    res = invoke("build", "--config", write(tmp_path, text))
    assert res.exit_code == EXIT_CONFIG


@pytest.mark.parametrize("text", [
    "[curve]\na1 = 0\n",
    "[field]\nq = 6\np = 3\n",
    "[field]\nq = 4\np = 2\n",
    BASE.format(a4=1, sha=1).replace("N = 20", "N = 2") + "\n[tower]\ncoordinates = constant\nlevel = 2\n",
    "[field]\nq = 5\np = 5\n[checks]\nrun = nonsense\n",
])
def test_config_errors(tmp_path, text):
    cfg = write(tmp_path, text)
    code = run(cfg, out=str(tmp_path / "out.json"))
    assert code == EXIT_CONFIG


def test_precision_exhausted(tmp_path):
    text = "[field]\nq = 3\np = 3\n[iwasawa]\nsource = inline\nmoduli = 3\ncoeffs = 0 0 0\nprecision = 4\n"
    res = invoke("iwasawa", "mu", "--config", write(tmp_path, text))
    assert res.exit_code == EXIT_PRECISION
    assert json.loads(res.output)["status"] == "precision-exhausted"


def test_classical_fe_without_curve(tmp_path):
    text = "[field]\nq = 3\np = 3\n[classical]\nmodulus = t:2\n"
    res = invoke("classical-fe", "--config", write(tmp_path, text), "--level", 1)
    assert res.exit_code == EXIT_PASS
    assert json.loads(res.output)["checks"][0]["status"] == "pass"


def test_empty_check_list_gives_header_only(tmp_path):
    cfg = write(tmp_path, "[field]\nq = 3\np = 3\n")
    out = tmp_path / "r.json"
    assert run(cfg, out=str(out)) == EXIT_PASS
    rep = json.loads(out.read_text())
    assert rep["checks"] == [] and rep["results"] == {} and rep["status"] == "pass"


def test_iwasawa_inline_invariants(tmp_path):
    text = "[field]\nq = 3\np = 3\n[iwasawa]\nsource = inline\nmoduli = 3\ncoeffs = 3 6 0\n"
    cfg = write(tmp_path, text)
    res = invoke("iwasawa", "mu", "--config", cfg)
    assert res.exit_code == EXIT_PASS and json.loads(res.output)["results"]["mu"] == 1
    res = invoke("iwasawa", "order", "--config", cfg)
    assert res.exit_code == EXIT_PASS


def test_build_roundtrip_and_determinism(tmp_path):
    cfg = str(fixture_path("fx3_cyclotomic.ini"))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert invoke("build", "--config", cfg, "--level", 1, "--out", a).exit_code == EXIT_PASS
    assert invoke("build", "--config", cfg, "--level", 1, "--out", b).exit_code == EXIT_PASS
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    f = GroupRingElt.from_json(rep["results"]["hat_L"])
    assert f.moduli == (3,)
    assert rep["results"]["aleph"] == f.aleph


def test_text_format_is_deterministic(tmp_path):
    cfg = str(fixture_path("fx1_constant.ini"))
    outs = [invoke("check", "mtt", "--config", cfg, "--format", "text").output for _ in range(2)]
    assert outs[0] == outs[1]
    assert "[pass]" in outs[0]
