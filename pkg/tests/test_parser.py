import glob
import os

from dsltv.parser import parse_spec, parse_spec_file
from dsltv.printer import print_spec
from dsltv.spec_ast import AttrBinding, EnumValue

from conftest import FIXTURES


def all_fixture_paths():
    return sorted(glob.glob(os.path.join(FIXTURES, "**", "*.dslt"),
                            recursive=True))


def test_all_fixtures_parse():
    for path in all_fixture_paths():
        spec = parse_spec_file(path)
        assert not isinstance(spec, list), (path, spec)


def test_print_parse_round_trip():
    for path in all_fixture_paths():
        spec = parse_spec_file(path)
        text = print_spec(spec)
        again = parse_spec(text, path)
        assert not isinstance(again, list), (path, again)
        assert again == spec, path


def test_print_idempotent():
    for path in all_fixture_paths():
        spec = parse_spec_file(path)
        once = print_spec(spec)
        assert print_spec(parse_spec(once, path)) == once, path


def _errors(text):
    result = parse_spec(text, "inline")
    assert isinstance(result, list), "expected diagnostics"
    return " | ".join(d.message for d in result)


MINI = """
metamodel M {{
    class A {{ }}
}}
metamodel N {{
    class B {{ }}
}}
transformation t : M -> N {{
    layer L {{
        rule R {{
            match {{ any a : A }}
            apply {{ b : B }}
        }}
    }}
}}
{extra}
"""


def test_unknown_class_is_reported():
    msg = _errors(MINI.format(extra="""
property P "doc" {
    precondition { any x : Nope }
    postcondition { b : B }
}
"""))
    assert "Nope" in msg


def test_duplicate_rule_is_reported():
    bad = MINI.format(extra="").replace(
        "rule R {\n            match { any a : A }\n            apply { b : B }\n        }",
        "rule R { match { any a : A } apply { b : B } }\n"
        "        rule R { match { any a : A } apply { b : B } }")
    assert "duplicate rule" in _errors(bad)


def test_incompatible_link_endpoint_is_reported():
    msg = _errors("""
metamodel M {
    class A { }
    class B { }
    assoc ab : A -> B [0..*]
}
metamodel N { class C { } }
transformation t : M -> N {
    layer L {
        rule R {
            match {
                any a : A
                any b : B
                direct l : ab -- b.a
            }
            apply { c : C }
        }
    }
}
""")
    assert "incompatible" in msg


def test_enum_literal_apply_binding_resolves():
    spec = parse_spec("""
metamodel M { class A { } }
metamodel N {
    enum Kind { X, Y }
    class B { kind: Kind }
}
transformation t : M -> N {
    layer L {
        rule R {
            match { any a : A }
            apply { b : B { kind = Kind.X } }
        }
    }
}
""", "inline")
    assert not isinstance(spec, list), spec
    rule = spec.transformations[0].layers[0].rules[0]
    binding = rule.apply.elements[0].bindings[0]
    assert binding == AttrBinding("kind", EnumValue("Kind", "X"))


def test_unknown_enum_literal_is_reported():
    msg = _errors("""
metamodel M { class A { } }
metamodel N {
    enum Kind { X }
    class B { kind: Kind }
}
transformation t : M -> N {
    layer L {
        rule R {
            match { any a : A }
            apply { b : B { kind = Kind.Z } }
        }
    }
}
""")
    assert "unknown literal" in msg


def test_trace_constraint_rejected_in_match():
    msg = _errors("""
metamodel M { class A { } }
metamodel N { class B { } }
transformation t : M -> N {
    layer L {
        rule R {
            match {
                any a : A
                a <--trace-- a
            }
            apply { b : B }
        }
    }
}
""")
    assert "trace" in msg.lower()
