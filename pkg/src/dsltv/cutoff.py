"""Cutoff bound computation.

Given a property over a layered monotone transformation, compute:
  - the relevant rule set and backward-dependency depth (three pruning modes),
  - the three global cutoff formulas and their minimum K,
  - per-class slot bounds as a least fixed point,
  - the layer fragment to verify (Minimal / Baseline / Full).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .inheritance import flatten_inheritance_info, is_subtype, types_overlap
from .model import ClosureInfo
from .parser import property_metamodels
from .spec_ast import CopyBinding


class RelevanceMode(Enum):
    LEGACY = "legacy"
    TRACE_AWARE = "trace"
    TRACE_ATTRIBUTE_AWARE = "trace-attr"


class FragmentKind(Enum):
    MINIMAL = "minimal"
    BASELINE = "baseline"
    FULL = "full"


@dataclass(frozen=True)
class RelevanceResult:
    relevant_rules: frozenset  # rule names
    depth: int                 # d: longest backward-dependency chain
    source_classes: frozenset  # classes behind c
    unproducible: tuple = ()   # demanded (source type or None, target type)
                               # pairs no rule can produce

    @property
    def r(self):
        return len(self.relevant_rules)

    @property
    def c(self):
        return max(1, len(self.source_classes))


@dataclass(frozen=True)
class CutoffParams:
    c: int
    m: int
    p: int
    d: int
    a: int
    r: int

    @property
    def d_prime(self):
        return max(self.d, 1)


@dataclass(frozen=True)
class CutoffBounds:
    k_coarse: int
    k_sharp: int
    k_tight: int

    @property
    def k(self):
        return min(self.k_coarse, self.k_sharp, self.k_tight)

    @property
    def dominant(self):
        names = (("coarse", self.k_coarse), ("sharp", self.k_sharp),
                 ("tight", self.k_tight))
        return tuple(n for n, v in names if v == self.k)


@dataclass(frozen=True)
class PerClassBounds:
    source: dict
    target: dict

    def max_bound(self):
        vals = list(self.source.values()) + list(self.target.values())
        return max(vals, default=0)


def compute_cutoff(params):
    p, m, r, d, a, c = params.p, params.m, params.r, params.d, params.a, params.c
    dp = params.d_prime
    return CutoffBounds(
        k_coarse=c * (m + p) * dp * (a + 1),
        k_sharp=p * (1 + m * r) * dp * (a + 1),
        k_tight=p * (1 + (m - 1) * r * d) * (a + 1),
    )


# ---------------------------------------------------------------------------
# Relevance
# ---------------------------------------------------------------------------

def _literal_bindings(rule, apply_name):
    el = rule.apply.element_map()[apply_name]
    return {b.attr: b.value for b in el.bindings
            if not isinstance(b.value, CopyBinding)}


def _constraint_satisfiable(op, constraint_value, literal):
    if op == "==":
        return literal == constraint_value
    if op == "!=":
        return literal != constraint_value
    try:
        if op == "<":
            return literal < constraint_value
        if op == "<=":
            return literal <= constraint_value
        if op == ">":
            return literal > constraint_value
        if op == ">=":
            return literal >= constraint_value
    except TypeError:
        return True
    return True


def _rule_can_satisfy(rule, apply_el, post_element):
    """False only when a literal apply binding contradicts a property guard."""
    literals = _literal_bindings(rule, apply_el.name)
    for c in post_element.constraints:
        if c.attr in literals and not _constraint_satisfiable(
                c.op, c.value, literals[c.attr]):
            return False
    return True


def relevant_rules(spec, prop, mode, transformation=None):
    """Select the rules that can contribute to the property's postcondition.

    Legacy keeps every rule producing any postcondition target type.  The
    trace-aware modes start from the property's demanded (source, target)
    trace pairs and close recursively through backward-link demands; the
    attribute-aware mode additionally drops producers whose literal apply
    bindings contradict the property's guards on the produced element.
    """
    t = transformation or spec.transformations[0]
    src_info = flatten_inheritance_info(spec.metamodel(t.source))
    tgt_info = flatten_inheritance_info(spec.metamodel(t.target))
    all_rules = [(li, rule) for li, layer in enumerate(t.layers)
                 for rule in layer.rules]

    def producers(demand_src, demand_tgt, attr_element=None, below=None):
        """Rules with a fresh apply element of type demand_tgt (and, when
        demand_src is set, a match element of type demand_src)."""
        out = []
        for li, rule in all_rules:
            if below is not None and li >= below:
                continue
            fresh = [e for e in rule.fresh_apply_elements()
                     if types_overlap(tgt_info, e.klass, demand_tgt)]
            if not fresh:
                continue
            if demand_src is not None and not any(
                    types_overlap(src_info, e.klass, demand_src)
                    for e in rule.match.elements):
                continue
            if mode is RelevanceMode.TRACE_ATTRIBUTE_AWARE and attr_element \
                    is not None:
                fresh = [e for e in fresh
                         if _rule_can_satisfy(rule, e, attr_element)]
                if not fresh:
                    continue
            out.append((li, rule))
        return out

    unproducible = []
    retained = {}
    if mode is RelevanceMode.LEGACY:
        for e in prop.postcondition.elements:
            found = producers(None, e.klass)
            if not found:
                unproducible.append((None, e.klass))
            for li, rule in found:
                retained[rule.name] = (li, rule)
    else:
        post_map = prop.postcondition.element_map()
        pre_map = prop.precondition.element_map()
        traced = {post_el for post_el, _ in prop.traces}
        worklist = []
        for post_el, pre_el in prop.traces:
            worklist.append((pre_map[pre_el].klass, post_map[post_el].klass,
                             post_map[post_el], None))
        for e in prop.postcondition.elements:
            if e.name not in traced:
                worklist.append((None, e.klass, e, None))
        seen_demands = set()
        while worklist:
            d_src, d_tgt, attr_el, below = worklist.pop()
            key = (d_src, d_tgt, id(attr_el), below)
            if key in seen_demands:
                continue
            seen_demands.add(key)
            found = producers(d_src, d_tgt, attr_el, below)
            if not found and below is None:
                unproducible.append((d_src, d_tgt))
            for li, rule in found:
                if rule.name not in retained:
                    retained[rule.name] = (li, rule)
                    match_map = rule.match.element_map()
                    apply_map = rule.apply.element_map()
                    for apply_name, match_name in rule.backward:
                        worklist.append((match_map[match_name].klass,
                                         apply_map[apply_name].klass,
                                         None, li))

    # d: longest backward chain over retained rules (edges to earlier-layer
    # producers of the demanded trace pair)
    depth_memo = {}

    def depth_of(name):
        if name in depth_memo:
            return depth_memo[name]
        li, rule = retained[name]
        match_map = rule.match.element_map()
        apply_map = rule.apply.element_map()
        best = 0
        for apply_name, match_name in rule.backward:
            s_cls = match_map[match_name].klass
            t_cls = apply_map[apply_name].klass
            for lj, other in all_rules:
                if lj >= li or other.name not in retained:
                    continue
                if any(types_overlap(tgt_info, e.klass, t_cls)
                       for e in other.fresh_apply_elements()) and any(
                        types_overlap(src_info, e.klass, s_cls)
                        for e in other.match.elements):
                    best = max(best, 1 + depth_of(other.name))
        depth_memo[name] = best
        return best

    d = max((depth_of(n) for n in retained), default=0)

    classes = {e.klass for _, rule in retained.values()
               for e in rule.match.elements}
    classes |= {e.klass for e in prop.precondition.elements}
    closure = _mandatory_reachable(spec.metamodel(t.source), classes)
    return RelevanceResult(frozenset(retained), d, frozenset(closure),
                           tuple(unproducible))


def _mandatory_reachable(mm, classes):
    out = set(classes)
    info = flatten_inheritance_info(mm)
    changed = True
    while changed:
        changed = False
        for a in mm.associations:
            if a.lower >= 1:
                if any(is_subtype(info, c, a.source) for c in out) \
                        and a.target not in out:
                    out.add(a.target)
                    changed = True
    return out


def cutoff_params(spec, prop, relevance, closure, transformation=None):
    """Assemble the six theorem parameters for one property."""
    t = transformation or spec.transformations[0]
    arities = [rule.arity() for _, rule in t.all_rules()
               if rule.name in relevance.relevant_rules]
    p = max(len(prop.precondition.elements), len(prop.postcondition.elements))
    return CutoffParams(
        c=relevance.c,
        m=max(arities, default=0),
        p=max(p, 1),
        d=relevance.depth,
        a=closure.effective_arity,
        r=relevance.r,
    )


# ---------------------------------------------------------------------------
# Per-class bounds (least fixed point)
# ---------------------------------------------------------------------------

def per_class_bounds(spec, prop, relevance, k, transformation=None,
                     rule_names=None):
    """Least fixed point of per-class slot obligations, capped at k.

    Source seeds are the property's precondition element counts (counting an
    element for every concrete class compatible with its declared class);
    mandatory lower bounds propagate on both sides; target production sums
    bounded rule-firing counts.  `rule_names` restricts the producing rules
    (defaults to the relevant set).
    """
    t = transformation or spec.transformations[0]
    src_mm = spec.metamodel(t.source)
    tgt_mm = spec.metamodel(t.target)
    src_info = flatten_inheritance_info(src_mm)
    tgt_info = flatten_inheritance_info(tgt_mm)
    names = relevance.relevant_rules if rule_names is None else set(rule_names)
    rules = [rule for _, rule in t.all_rules() if rule.name in names]

    def seeds(pattern, info):
        counts = {c: 0 for c in info}
        for e in pattern.elements:
            for c in info:
                if types_overlap(info, c, e.klass):
                    counts[c] += 1
        return {c: min(n, k) for c, n in counts.items()}

    src = seeds(prop.precondition, src_info)
    tgt_seed = seeds(prop.postcondition, tgt_info)

    def closure_fixpoint(base, mm, info):
        """counts[B] = min(k, base[B] + sum of lower * count(forcing A))."""
        counts = dict(base)
        changed = True
        while changed:
            changed = False
            for b in info:
                forced = 0
                for a in mm.associations:
                    if a.lower < 1 or a.target != b:
                        continue
                    forcing = sum(counts[c] for c in info
                                  if is_subtype(info, c, a.source))
                    forced += a.lower * min(forcing, k)
                demand = min(k, base[b] + forced)
                if counts[b] < demand:
                    counts[b] = demand
                    changed = True
        return counts

    src = closure_fixpoint(src, src_mm, src_info)

    def source_count(klass):
        # available choices for a match element of declared class `klass`
        return min(k, sum(src[c] for c in src_info
                          if is_subtype(src_info, c, klass)))

    production = {c: 0 for c in tgt_info}
    for rule in rules:
        n_r = 1
        for e in rule.match.elements:
            n_r = min(k, n_r * source_count(e.klass))
        for e in rule.fresh_apply_elements():
            production[e.klass] = min(k, production[e.klass] + n_r)
    tgt_base = {c: min(k, tgt_seed[c] + production[c]) for c in tgt_info}
    tgt = closure_fixpoint(tgt_base, tgt_mm, tgt_info)
    return PerClassBounds(src, tgt)


# ---------------------------------------------------------------------------
# Fragment selection
# ---------------------------------------------------------------------------

def select_fragment(spec, prop, relevance, kind, transformation=None):
    """Ordered layer-index subset to verify.

    Minimal is the shortest layer prefix containing, for every demanded
    postcondition type / trace pair, at least one relevant producer rule.
    Baseline is the layers of all relevant rules plus their backward-closure
    layers.  Full is every layer.
    """
    t = transformation or spec.transformations[0]
    n = len(t.layers)
    if kind is FragmentKind.FULL:
        return tuple(range(n))

    layer_of_rule = {}
    for li, layer in enumerate(t.layers):
        for rule in layer.rules:
            layer_of_rule[rule.name] = li
    relevant_layers = sorted({layer_of_rule[r] for r in relevance.relevant_rules
                              if r in layer_of_rule})
    if kind is FragmentKind.BASELINE:
        # backward closure: a relevant rule in the set may demand producers in
        # earlier layers; those layers join the fragment
        layers = set(relevant_layers)
        src_info = flatten_inheritance_info(spec.metamodel(t.source))
        tgt_info = flatten_inheritance_info(spec.metamodel(t.target))
        work = [(li, rule) for li, layer in enumerate(t.layers)
                for rule in layer.rules
                if rule.name in relevance.relevant_rules]
        seen = set()
        while work:
            li, rule = work.pop()
            if rule.name in seen:
                continue
            seen.add(rule.name)
            match_map = rule.match.element_map()
            apply_map = rule.apply.element_map()
            for apply_name, match_name in rule.backward:
                s_cls = match_map[match_name].klass
                t_cls = apply_map[apply_name].klass
                for lj, layer in enumerate(t.layers[:li]):
                    for other in layer.rules:
                        if any(types_overlap(tgt_info, e.klass, t_cls)
                               for e in other.fresh_apply_elements()) and any(
                                types_overlap(src_info, e.klass, s_cls)
                                for e in other.match.elements):
                            layers.add(lj)
                            work.append((lj, other))
        return tuple(sorted(layers))

    # Minimal: shortest prefix covering every demanded production
    if not relevant_layers:
        return (0,) if n else ()
    demands = _property_demands(spec, prop, t)
    src_info = flatten_inheritance_info(spec.metamodel(t.source))
    tgt_info = flatten_inheritance_info(spec.metamodel(t.target))
    for j in range(n):
        if _prefix_covers(spec, prop, t, relevance, j, demands,
                          src_info, tgt_info):
            return tuple(range(j + 1))
    return tuple(range(n))


def _property_demands(spec, prop, t):
    post_map = prop.postcondition.element_map()
    pre_map = prop.precondition.element_map()
    traced = {post_el for post_el, _ in prop.traces}
    demands = []
    for post_el, pre_el in prop.traces:
        demands.append((pre_map[pre_el].klass, post_map[post_el].klass))
    for e in prop.postcondition.elements:
        if e.name not in traced:
            demands.append((None, e.klass))
    return demands


def _prefix_covers(spec, prop, t, relevance, j, demands, src_info, tgt_info):
    for d_src, d_tgt in demands:
        hit = False
        for li, layer in enumerate(t.layers[:j + 1]):
            for rule in layer.rules:
                if rule.name not in relevance.relevant_rules:
                    continue
                if not any(types_overlap(tgt_info, e.klass, d_tgt)
                           for e in rule.fresh_apply_elements()):
                    continue
                if d_src is not None and not any(
                        types_overlap(src_info, e.klass, d_src)
                        for e in rule.match.elements):
                    continue
                hit = True
        if not hit:
            return False
    return True


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

def cutoff_report(params, bounds, per_class):
    return {
        "params": {"c": params.c, "m": params.m, "p": params.p,
                   "d": params.d, "a": params.a, "r": params.r,
                   "dPrime": params.d_prime},
        "bounds": {"coarse": bounds.k_coarse, "sharp": bounds.k_sharp,
                   "tight": bounds.k_tight, "k": bounds.k},
        "perClass": {"source": dict(sorted(per_class.source.items())),
                     "target": dict(sorted(per_class.target.items()))},
        "dominant": list(bounds.dominant),
    }
