import itertools
import random

from dsltv.cutoff import (CutoffParams, FragmentKind, RelevanceMode,
                          compute_cutoff, cutoff_params, cutoff_report,
                          per_class_bounds, relevant_rules, select_fragment)
from dsltv.model import mandatory_closure


def test_reference_parameters_give_reference_bounds():
    bounds = compute_cutoff(CutoffParams(c=5, m=3, p=1, d=1, a=5, r=8))
    assert (bounds.k_coarse, bounds.k_sharp, bounds.k_tight) == (120, 150, 102)
    assert bounds.k == 102
    assert bounds.dominant == ("tight",)


def test_zero_depth_reduces_sharp_and_tight():
    p, m, r, a, c = 2, 3, 5, 1, 4
    bounds = compute_cutoff(CutoffParams(c=c, m=m, p=p, d=0, a=a, r=r))
    # d' = 1 keeps multiplicative bounds alive while d = 0 kills tight's
    # dependency term entirely.
    assert bounds.k_sharp == p * (1 + m * r) * (a + 1)
    assert bounds.k_tight == p * (a + 1)
    assert bounds.dominant == ("tight",)


def test_single_element_rules_make_tight_linear():
    for p, r, d, a in itertools.product((1, 2), (1, 4), (1, 3), (0, 2)):
        bounds = compute_cutoff(CutoffParams(c=3, m=1, p=p, d=d, a=a, r=r))
        assert bounds.k_tight == p * (a + 1)


def test_bounds_monotone_in_every_parameter():
    rng = random.Random(7)
    fields = ("c", "m", "p", "d", "a", "r")
    for _ in range(200):
        base = CutoffParams(c=rng.randint(1, 6), m=rng.randint(1, 5),
                            p=rng.randint(1, 4), d=rng.randint(0, 4),
                            a=rng.randint(0, 6), r=rng.randint(1, 9))
        for f in fields:
            bumped = CutoffParams(**{**base.__dict__, f: getattr(base, f) + 1})
            assert compute_cutoff(bumped).k >= compute_cutoff(base).k, (base, f)


def _pipeline(spec, prop_name, mode=RelevanceMode.TRACE_ATTRIBUTE_AWARE):
    prop = spec.property(prop_name)
    t = spec.transformations[0]
    closure = mandatory_closure(spec.metamodel(t.source))
    rel = relevant_rules(spec, prop, mode)
    params = cutoff_params(spec, prop, rel, closure)
    return prop, rel, params


def test_attribute_awareness_only_prunes(uml2java):
    for prop in uml2java.properties:
        trace = relevant_rules(uml2java, prop, RelevanceMode.TRACE_AWARE)
        attr = relevant_rules(uml2java, prop,
                              RelevanceMode.TRACE_ATTRIBUTE_AWARE)
        assert attr.relevant_rules <= trace.relevant_rules, prop.name


def test_b4_pipeline_reproduces_reference_cutoff(uml2java_b4):
    _, _, params = _pipeline(uml2java_b4, "PropertyHasField",
                             RelevanceMode.TRACE_AWARE)
    assert params == CutoffParams(c=5, m=3, p=1, d=1, a=5, r=8)
    assert compute_cutoff(params).k == 102


def test_per_class_bounds_cap_and_seed(uml2java):
    prop, rel, params = _pipeline(uml2java, "PackageHasPackageDeclaration")
    k = compute_cutoff(params).k
    bounds = per_class_bounds(uml2java, prop, rel, k)
    assert bounds.max_bound() == 2
    assert all(0 <= v <= k for v in bounds.source.values())
    assert all(0 <= v <= k for v in bounds.target.values())
    assert bounds.source["Package"] >= 1


def test_fragment_kinds_are_nested(uml2java):
    for prop in uml2java.properties:
        rel = relevant_rules(uml2java, prop,
                             RelevanceMode.TRACE_ATTRIBUTE_AWARE)
        minimal = select_fragment(uml2java, prop, rel, FragmentKind.MINIMAL)
        baseline = select_fragment(uml2java, prop, rel, FragmentKind.BASELINE)
        full = select_fragment(uml2java, prop, rel, FragmentKind.FULL)
        assert set(minimal) <= set(full), prop.name
        assert set(baseline) <= set(full), prop.name
        if rel.relevant_rules:
            assert set(minimal) <= set(baseline), prop.name
        n_layers = len(uml2java.transformations[0].layers)
        assert tuple(full) == tuple(range(n_layers))


def test_cutoff_report_shape(uml2java):
    prop, rel, params = _pipeline(uml2java, "PackageHasPackageDeclaration")
    k = compute_cutoff(params).k
    per_class = per_class_bounds(uml2java, prop, rel, k)
    report = cutoff_report(params, compute_cutoff(params), per_class)
    assert report["params"] == {"c": params.c, "m": params.m, "p": params.p,
                                "d": params.d, "a": params.a, "r": params.r,
                                "dPrime": params.d_prime}
    assert report["bounds"]["k"] == k
    assert report["dominant"] == list(compute_cutoff(params).dominant)
    assert max(report["perClass"]["source"].values()) <= k
