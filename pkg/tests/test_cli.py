import io
import json

import pytest

from wallcross.cli import main
from wallcross.errors import InvariantError, SchemaError
from wallcross.io import FIXTURE_DIR, load_json, parse_lattice, parse_truncation


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def fixture(name):
    return json.loads((FIXTURE_DIR / name).read_text())


def write(tmp_path, data, name="in.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_bundled_pentagon_parses():
    data = load_json("examples/pentagon.json")
    ctx, ref, _ = parse_lattice(data["lattice"])
    assert ctx.rank == 2
    assert parse_truncation(data, ctx).order == 10


def test_skew_form_must_be_antisymmetric():
    with pytest.raises(InvariantError) as exc:
        parse_lattice({"rank": 2, "skew_form": [[0, 1], [1, 0]]})
    assert exc.value.invariant == "skew_form"


def test_missing_order_pointer():
    data = fixture("pentagon.json")
    del data["truncation"]["order"]
    ctx, _, _ = parse_lattice(data["lattice"])
    with pytest.raises(SchemaError) as exc:
        parse_truncation(data, ctx)
    assert exc.value.pointer == "/truncation/order"


def test_verify_pentagon():
    code, out, _ = run("verify-wcf", "examples/pentagon.json", "--order", "10")
    assert code == 0
    assert "identity mod degree 11" in out


def test_verify_mismatch_exit_one(tmp_path):
    data = fixture("pentagon.json")
    data["rhs"] = data["rhs"][::-1]
    code, out, _ = run("verify-wcf", write(tmp_path, data), "--order", "4")
    assert code == 1
    assert "mismatch mod degree 5" in out


def test_complete_su2_pattern():
    code, out, _ = run("complete", "examples/su2.json", "--order", "7")
    assert code == 0
    rows = [r.split("\t") for r in out.strip().splitlines()[1:]]
    added = {r[2]: r[4] for r in rows if r[3] == "yes"}
    assert set(added) == {"1,1", "2,1", "1,2", "3,2", "2,3", "4,3", "3,4"}
    assert added["1,1"] == "1 + 4*t^2*x*y + 10*t^4*x^2*y^2 + 20*t^6*x^3*y^3"
    assert added["3,2"] == "1 + 2*t^5*x^3*y^2"


def test_compare_fiber_fixtures():
    for name in ("ad-strong.json", "ad-weak.json", "su2-fiber.json"):
        code, out, _ = run("compare-fiber", f"examples/{name}", "--t", "1")
        assert code == 0, name
        assert out.strip().endswith("Match")


def test_compare_fiber_mismatch(tmp_path):
    data = fixture("ad-strong.json")
    data["renaming"] = {"X": "x1", "Y": "x3", "Z": "1/y1", "W": "1/y3"}
    code, out, _ = run("compare-fiber", write(tmp_path, data))
    assert code == 1
    assert "Mismatch" in out and "FG partner" in out


def test_glue_text():
    code, out, _ = run("glue", "examples/ad-strong.json")
    assert code == 0
    assert out.splitlines() == ["Z*W - (t*(Y + 1))", "X*Y - (t*(W + 1))"]


def test_factorize_and_spectrum():
    code, out, _ = run("factorize", "examples/su2-wcf.json", "--order", "5")
    assert code == 0
    assert "K_{2,0}^-2" in out
    code, out, _ = run("spectrum-generator", "examples/spectrum-weak.json")
    assert (code, out) == (0, "K_{0,1} K_{1,1} K_{1,0}\n")


def test_ysystem_verbs():
    code, out, _ = run("ysystem", "examples/pentagon-ysystem.json")
    assert code == 0 and out.strip().endswith("period\t5")
    code, out, _ = run("ysystem", "examples/su2-ysystem.json", "--format", "json")
    assert code == 0 and json.loads(out)["period"] is None


def test_input_errors_exit_two(tmp_path):
    code, out, err = run("verify-wcf", write(tmp_path, {"lattice": {"rank": 2, "skew_form": [[0, 1], [1, 0]]}}))
    assert code == 2 and out == "" and err.startswith("InvariantError")
    data = fixture("pentagon.json")
    del data["truncation"]["order"]
    code, out, err = run("verify-wcf", write(tmp_path, data))
    assert code == 2 and out == "" and "/truncation/order" in err
    code, _, err = run("verify-wcf", str(tmp_path / "nope.json"))
    assert code == 2
    p = tmp_path / "broken.json"
    p.write_text("{")
    assert run("glue", str(p))[0] == 2


def test_inconsistent_structure_exit_one(tmp_path):
    data = fixture("ad-weak.json")
    data["complete"] = False
    code, out, err = run("glue", write(tmp_path, data))
    assert code == 1 and out == "" and err.startswith("InconsistentStructure")


def test_deterministic_output(tmp_path):
    for verb, name in [("complete", "su2.json"), ("glue", "ad-weak.json"), ("factorize", "pentagon.json")]:
        a = run(verb, f"examples/{name}", "--format", "json")
        b = run(verb, f"examples/{name}", "--format", "json")
        assert a == b


def test_output_file_and_plot(tmp_path):
    target = tmp_path / "rays.tsv"
    fig = tmp_path / "rays.svg"
    code, out, _ = run("complete", "examples/ad.json", "--output", str(target), "--plot", str(fig))
    assert code == 0 and out == ""
    assert target.read_text().startswith("kind\tbase\tdirection")
    assert fig.stat().st_size > 0
    again = tmp_path / "again.svg"
    run("complete", "examples/ad.json", "--output", str(target), "--plot", str(again))
    assert fig.read_bytes() == again.read_bytes()
