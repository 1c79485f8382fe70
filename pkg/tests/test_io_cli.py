import json
from pathlib import Path

import numpy as np
import pytest

from woldkit import cli, models
from woldkit.cstar import rep_from_multiplicities
from woldkit.io import (InputError, load_json, problem_from_json, problem_to_json, schema, validate_schema)

ROOT = Path(__file__).resolve().parents[1]


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def graph_problem():
    rep = models.graph_rep(models.two_vertex_graph())
    return problem_to_json(rep.system, rep)


def twisted_problem(t=None):
    rep = models.twisted_shift(models.TwistedShiftSpec(2, {(1, 0): complex(np.exp(0.5j))}, 1, 3))
    doc = problem_to_json(rep.system, rep)
    if t is not None:
        doc["flips"]["2,1"] = [[[t, 0.0]]]
    return doc


def test_schema_copies_identical():
    for name in ("problem", "report"):
        pkg = json.loads((ROOT / "src/woldkit/schema" / f"{name}.schema.json").read_text())
        docs = json.loads((ROOT / "docs/schema" / f"{name}.schema.json").read_text())
        assert pkg == docs
        assert schema(name) == pkg


def test_problem_round_trip():
    doc = twisted_problem()
    prob = problem_from_json(doc)
    doc2 = problem_to_json(prob.system, prob.rep)
    prob2 = problem_from_json(doc2)
    for a, b in zip(prob.rep.tmaps, prob2.rep.tmaps):
        assert np.abs(a - b).max() <= 1e-15
    assert prob2.rep.window["levels"] == 3


def test_problem_with_pi_round_trip():
    fx = models.section5_fixtures()["swap"]
    pi = rep_from_multiplicities(fx.correspondence.algebra, [1, 0])
    prob = problem_from_json(problem_to_json(fx.system(), None, pi))
    assert prob.rep is None
    assert np.allclose(prob.pi.images, pi.images)


def test_schema_error_has_pointer():
    doc = graph_problem()
    doc["algebra"] = [2, "x"]
    with pytest.raises(InputError) as exc:
        validate_schema(doc)
    assert exc.value.path.startswith("/algebra")


def test_bad_label_has_pointer():
    doc = graph_problem()
    doc["flips"] = {"1,1": [[[1, 0]]]}
    with pytest.raises(InputError) as exc:
        problem_from_json(doc)
    assert exc.value.path.startswith("/flips")


def test_load_json_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(InputError):
        load_json(str(p))


def test_cli_decompose_graph(tmp_path, capsys):
    f = write(tmp_path, "graph.json", graph_problem())
    code, out, _ = run(["decompose", f, "--mode", "dc"], capsys)
    assert code == 0
    report = json.loads(out)
    validate_schema(report, "report")
    dims = {k: v["dim"] for k, v in report["results"]["summands"].items() if v["dim"]}
    assert dims == {"{1}": 2}
    assert report["results"]["residual_sum"] <= 1e-9


def test_cli_extend_nonfaithful(tmp_path, capsys):
    fx = models.section5_fixtures()["nonfaithful"]
    pi = rep_from_multiplicities(fx.correspondence.algebra, [0, 1])
    f = write(tmp_path, "section5_nonfaithful.json", problem_to_json(fx.system(), None, pi))
    code, out, err = run(["extend", f, "--mode", "eqrep"], capsys)
    assert code == 3
    report = json.loads(out)
    assert report["status"] == "infeasible"
    assert report["results"]["certificate"]["obstruction"] == "zero induction row 2 with m_2=1"


def test_cli_validate_flip_unitarity(tmp_path, capsys):
    f = write(tmp_path, "twisted.json", twisted_problem(t=1.1))
    code, out, err = run(["validate", f], capsys)
    assert code == 2
    assert "flip unitarity" in err
    assert any(v.startswith("flip unitarity") for v in json.loads(out)["results"]["validation"]["violations"])


def test_cli_validate_ok(tmp_path, capsys):
    f = write(tmp_path, "twisted.json", twisted_problem())
    code, out, _ = run(["validate", f, "--abs-tol", "1e-10"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["tolerance"]["abs_tol"] == 1e-10
    validate_schema(report, "report")


def test_cli_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{")
    code, _, err = run(["validate", str(p)], capsys)
    assert code == 2
    assert json.loads(err)["path"] == "/"


def test_cli_missing_file(tmp_path, capsys):
    code, _, err = run(["validate", str(tmp_path / "none.json")], capsys)
    assert code == 2


def test_cli_bad_arguments(capsys):
    assert cli.run(["decompose"]) == 2
    assert cli.run(["frobnicate"]) == 2


def test_cli_decompose_requires_dc(tmp_path, capsys):
    rep = models.graph_rep(models.nondc_graph())
    f = write(tmp_path, "nondc.json", problem_to_json(rep.system, rep))
    code, _, err = run(["decompose", f, "--mode", "dc"], capsys)
    assert code == 2
    assert "doubly commuting" in err
    code, out, _ = run(["decompose", f, "--mode", "weak"], capsys)
    assert code == 0
    dims = {k: v["dim"] for k, v in json.loads(out)["results"]["summands"].items()}
    assert dims == {"{}": 1, "{1}": 2, "{2}": 0, "wi": 3}


def test_cli_general_alpha(tmp_path, capsys):
    f = write(tmp_path, "tw.json", twisted_problem())
    code, out, _ = run(["decompose", f, "--mode", "general", "--alpha", "1,2", "--emit-projections"], capsys)
    assert code == 0
    s = json.loads(out)["results"]["summands"]
    assert list(s) == ["{1,2}"]
    assert "projection" in s["{1,2}"]


def test_cli_classify(tmp_path, capsys):
    f = write(tmp_path, "tw.json", twisted_problem())
    code, out, _ = run(["classify", f], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    assert res["isometric"] and res["doubly_commuting"]
    assert res["purity"]["1"]["pure"]


def test_cli_model_and_induce(tmp_path, capsys):
    out_file = tmp_path / "g.json"
    code, _, _ = run(["model", "graph", "--fixture", "grid", "--k", "2", "--size", "2", "-o", str(out_file)], capsys)
    assert code == 0
    doc = json.loads(out_file.read_text())
    validate_schema(doc)
    # point mass at the source vertex of the grid; every path starts there
    pi = {"dim": 1, "units": {f"{v},1,1": [[[1.0 if v == 1 else 0.0, 0.0]]] for v in range(1, 7)}}
    pf = write(tmp_path, "pi.json", pi)
    code, out, _ = run(["induce", str(out_file), "--pi", pf], capsys)
    assert code == 0
    induced = json.loads(out)
    prob = problem_from_json(induced)
    assert prob.rep.dim == 6


@pytest.mark.parametrize("family,args", [
    ("twisted-shift", ["--k", "2", "--theta", "0.5", "--levels", "2"]),
    ("automorphism", ["--blocks", "1,1", "--perm", "2,1", "--levels", "2"]),
    ("graph", ["--fixture", "nondc"]),
    ("section5", ["--name", "swap"]),
])
def test_cli_model_families_validate(tmp_path, capsys, family, args):
    out_file = tmp_path / "m.json"
    assert run(["model", family, *args, "-o", str(out_file)], capsys)[0] == 0
    assert run(["validate", str(out_file)], capsys)[0] == 0


def test_cli_extend_construct_swap(tmp_path, capsys):
    out_file = tmp_path / "s.json"
    run(["model", "section5", "--name", "swap", "-o", str(out_file)], capsys)
    code, out, _ = run(["extend", str(out_file), "--mode", "construct", "--levels", "3"], capsys)
    assert code == 0
    ext = json.loads(out)["results"]["extension"]
    assert max(ext["residuals"].values()) <= 1e-9
    code, out, _ = run(["extend", str(out_file), "--mode", "unit2"], capsys)
    assert code == 0
    assert json.loads(out)["results"]["unit2"] is False
