from dsltv.fragments import check_flnr, check_gbpp
from dsltv.parser import parse_spec


def _flnr(spec):
    t = spec.transformations[0]
    return check_flnr(t, spec.metamodel(t.source), spec.metamodel(t.target))


def test_uml2java_is_in_fragment(uml2java):
    report = _flnr(uml2java)
    assert report.ok, report.violations
    assert set(report.satisfied) >= {"R2", "R3", "R4", "R5"}
    assert report.m == 2


def test_b4_parameters(uml2java_b4):
    report = _flnr(uml2java_b4)
    assert report.ok, report.violations
    assert report.m == 3


def test_vacuous_restrictions_reported(uml2java):
    report = _flnr(uml2java)
    assert "R1" in report.satisfied
    assert "R6" in report.satisfied


def test_backward_without_earlier_producer_violates():
    spec = parse_spec("""
metamodel M { class A { } }
metamodel N {
    class B { }
    class C { }
}
transformation t : M -> N {
    layer L {
        rule R {
            match {
                any a : A
                b <--trace-- a
            }
            apply {
                b : B
                c : C
            }
        }
    }
}
""", "inline")
    assert isinstance(spec, list) or not _flnr(spec).ok


def test_infinite_attribute_domain_flags_abstraction():
    spec = parse_spec("""
metamodel M { class A { n: Int } }
metamodel N { class B { } }
transformation t : M -> N {
    layer L { rule R { match { any a : A where n >= 1 } apply { b : B } } }
}
""", "inline")
    report = _flnr(spec)
    assert not report.ok
    assert all(v.restriction == "R5" for v in report.violations)


def test_gbpp_accepts_corpus_properties(corpus):
    for name, spec in corpus:
        for prop in spec.properties:
            report = check_gbpp(prop)
            assert report.ok, (name, prop.name, report.violations)
            assert report.p >= 1


def test_gbpp_pattern_sizes(uml2java):
    sizes = {p.name: check_gbpp(p).p
             for p in uml2java.properties}
    assert sizes["PackageHasPackageDeclaration"] == 1
    assert sizes["OwnedPropertyHasOwnedField"] == 2
