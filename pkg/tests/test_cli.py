import json
import os

import pytest

from dsltv.cli import main
from dsltv.model import dump_model, load_model
from dsltv.parser import parse_spec_file

from conftest import fixture_path


UML = fixture_path("uml2java.dslt")
B4 = fixture_path("uml2java_b4.dslt")
KB = fixture_path("kboundary_tight.dslt")


def test_check_text_exit_zero(capsys):
    assert main(["check", UML]) == 0
    out = capsys.readouterr().out
    assert "satisfied" in out


def test_check_json_schema(capsys):
    assert main(["check", UML, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    report = doc["transformation uml2java"]
    assert report["violations"] == []
    assert "parameters" in report
    assert "property PackageHasPackageDeclaration" in doc


def test_check_violating_spec_exits_one(tmp_path, capsys):
    spec = tmp_path / "inf.dslt"
    spec.write_text("""
metamodel M { class A { n: Int } }
metamodel N { class B { } }
transformation t : M -> N {
    layer L { rule R { match { any a : A where n > 0 } apply { b : B } } }
}
""")
    assert main(["check", str(spec)]) == 1


def test_cutoff_reports_reference_bounds(capsys):
    assert main(["cutoff", B4, "--format", "json",
                 "--dependency-mode", "trace"]) == 0
    doc = json.loads(capsys.readouterr().out)
    row = doc["PropertyHasField"]
    assert row["params"] == {"c": 5, "m": 3, "p": 1, "d": 1, "a": 5, "r": 8,
                             "dPrime": 1}
    assert row["bounds"] == {"coarse": 120, "sharp": 150, "tight": 102,
                             "k": 102}
    assert row["dominant"] == ["tight"]


def test_verify_streams_ndjson(capsys):
    assert main(["verify", UML, "--property",
                 "PackageHasPackageDeclaration"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    verdicts = [l for l in lines if l["event"] == "verdict"]
    assert len(verdicts) == 1
    v = verdicts[0]
    assert v["property"] == "PackageHasPackageDeclaration"
    assert v["status"] == "HOLDS"
    assert set(v) >= {"event", "property", "status", "k", "perClassMax",
                      "fragment", "dominant", "timeSec"}
    assert lines[-1]["event"] == "summary"


def test_verify_violated_exits_one(capsys):
    assert main(["verify", UML, "--property",
                 "ClassMappedToInterfaceDeclaration_ShouldFail"]) == 1


def test_verify_unknown_exits_two(capsys):
    assert main(["verify", UML, "--timeout", "0.000001", "--property",
                 "PackageHasPackageDeclaration"]) == 2


def test_verify_unknown_property_name_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", UML, "--property", "NoSuchProperty"])
    assert exc.value.code == 3


def test_parse_error_exits_three(tmp_path, capsys):
    bad = tmp_path / "bad.dslt"
    bad.write_text("metamodel { oops")
    with pytest.raises(SystemExit) as exc:
        main(["check", str(bad)])
    assert exc.value.code == 3


def test_usage_error_exits_three(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", UML, "--fragment", "bogus"])
    assert exc.value.code == 3


def test_config_file_fills_defaults_but_flags_win(tmp_path, capsys):
    cfg = tmp_path / "dsltv.cfg"
    cfg.write_text("timeout = 0.000001\n")
    # config alone drives the timeout into UNKNOWN territory
    assert main(["verify", UML, "--config", str(cfg), "--property",
                 "PackageHasPackageDeclaration"]) == 2
    capsys.readouterr()
    # an explicit flag overrides the config value
    assert main(["verify", UML, "--config", str(cfg), "--timeout", "60",
                 "--property", "PackageHasPackageDeclaration"]) == 0


def test_run_writes_target_and_log(tmp_path, capsys):
    spec = parse_spec_file(KB)
    source = {"elements": [{"id": "s1", "type": "Source",
                            "attrs": {"name": "a"}}],
              "links": [], "traces": []}
    model_path = tmp_path / "in.json"
    model_path.write_text(json.dumps(source))
    out_path = tmp_path / "out.json"
    log_path = tmp_path / "log.ndjson"
    assert main(["run", KB, "--model", str(model_path),
                 "--out", str(out_path), "--log", str(log_path)]) == 0
    target = load_model(out_path.read_text())
    assert {e.klass for e in target.elements} == {"TypeDecl"}
    log = [json.loads(l) for l in log_path.read_text().splitlines()]
    assert log and log[0]["rule"] == "Source2TypeDecl"


def test_abstract_writes_proof_spec(tmp_path, capsys):
    spec = tmp_path / "inf.dslt"
    spec.write_text("""
metamodel M { class A { n: Int } }
metamodel N { class B { } }
transformation t : M -> N {
    layer L { rule R { match { any a : A where n > 0 } apply { b : B } } }
}
""")
    out = tmp_path / "proof.dslt"
    assert main(["abstract", str(spec), "--out", str(out)]) == 0
    proof = parse_spec_file(str(out))
    assert not isinstance(proof, list)
    domain = {a.name: a.domain for a in
              proof.find_class("A")[1].attributes}["n"]
    assert domain.is_finite()
    mapping = json.loads((tmp_path / "proof.dslt.map.json").read_text())
    assert mapping


def test_kboundary_writes_report(tmp_path, capsys):
    out = tmp_path / "report.md"
    rc = main(["kboundary", KB, "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "SourceHasTypeDecl" in text
    assert "SourceSharesTypeDecl_ShouldFail" in text
    doc = json.loads((tmp_path / "report.md.json").read_text())
    assert len(doc) == 2
