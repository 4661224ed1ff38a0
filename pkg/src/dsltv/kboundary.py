"""Empirical cutoff-boundary validation.

Three phases per property: a uniform sweep that shifts every per-class bound
by an offset and re-verifies, a selective pass decrementing one class at a
time to find the binding classes, and concrete witness execution at support
levels around the base bound.  Results render to a markdown report plus raw
JSON.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .cutoff import compute_cutoff, cutoff_params, per_class_bounds, \
    relevant_rules, select_fragment, PerClassBounds
from .engine import check_property_concrete, execute
from .inheritance import flatten_inheritance_info
from .model import mandatory_closure, validate_conformance
from .orchestrator import HOLDS, UNKNOWN, VIOLATED, VerificationConfig, \
    _transformation_for, verify_property
from .smtencode import encode
from .smtrun import lazy_closure_loop

OFFSETS = tuple(range(-3, 4))


@dataclass
class SweepResult:
    property: str
    base_k: int
    per_class_max: int
    dominant: tuple
    expected_pattern: str  # negative | positive
    rows: list = field(default_factory=list)  # (offset, status, seconds)
    matched: bool = False

    def to_json(self):
        return {
            "property": self.property,
            "baseK": self.base_k,
            "perClassMax": self.per_class_max,
            "dominant": list(self.dominant),
            "expectedPattern": self.expected_pattern,
            "offsets": [{"delta": d, "status": s, "timeSec": round(t, 3)}
                        for d, s, t in self.rows],
            "matched": self.matched,
        }


@dataclass
class PerturbationResult:
    property: str
    base_status: str
    runs: list = field(default_factory=list)  # (class, side, status|skipped)
    binding_classes: list = field(default_factory=list)
    matched: bool = False

    def to_json(self):
        return {
            "property": self.property,
            "baseStatus": self.base_status,
            "runs": [{"class": c, "side": s, "status": st}
                     for c, s, st in self.runs],
            "bindingClasses": list(self.binding_classes),
            "matched": self.matched,
        }


@dataclass
class WitnessResult:
    property: str
    rows: list = field(default_factory=list)
    # (level, index, predicted, actual, matched)

    @property
    def matched(self):
        return all(m for *_, m in self.rows)

    def to_json(self):
        return {
            "property": self.property,
            "witnesses": [{"level": lv, "index": i, "predicted": p,
                           "actual": a, "matched": m}
                          for lv, i, p, a, m in self.rows],
            "matched": self.matched,
        }


class _BoundsLab:
    """Shared per-property machinery: base bounds, seed classes, and a
    solve-at-bounds primitive that bypasses fragment refinement so every run
    measures exactly the requested bounds."""

    def __init__(self, spec, prop, config):
        self.spec = spec
        self.config = config
        self.prop = spec.property(prop) if isinstance(prop, str) else prop
        self.t = _transformation_for(spec, self.prop)
        self.relevance = relevant_rules(spec, self.prop,
                                        config.relevance_mode, self.t)
        closure = mandatory_closure(spec.metamodel(self.t.source))
        self.params = cutoff_params(spec, self.prop, self.relevance, closure,
                                    self.t)
        self.cutoff = compute_cutoff(self.params)
        self.fragment = select_fragment(spec, self.prop, self.relevance,
                                        config.fragment_kind, self.t)
        layer_of = {r.name: li for li, r in self.t.all_rules()}
        self.rule_names = tuple(sorted(
            r for r in self.relevance.relevant_rules
            if layer_of.get(r) in set(self.fragment)))
        self.base = per_class_bounds(spec, self.prop, self.relevance,
                                     self.cutoff.k, self.t,
                                     rule_names=self.rule_names)
        src_info = flatten_inheritance_info(spec.metamodel(self.t.source))
        tgt_info = flatten_inheritance_info(spec.metamodel(self.t.target))
        self.seed_source = set()
        for e in self.prop.precondition.elements:
            self.seed_source |= src_info[e.klass].subtypes
        self.seed_target = set()
        for e in self.prop.postcondition.elements:
            self.seed_target |= tgt_info[e.klass].subtypes

    def shifted(self, delta):
        def shift(side, seeds):
            out = {}
            for c, b in side.items():
                if b <= 0:
                    out[c] = 0  # classes out of play stay out of play
                    continue
                floor = 1 if c in seeds else 0
                out[c] = max(floor, b + delta)
            return out
        return PerClassBounds(source=shift(self.base.source,
                                           self.seed_source),
                              target=shift(self.base.target,
                                           self.seed_target))

    def decremented(self, klass, side):
        source = dict(self.base.source)
        target = dict(self.base.target)
        table = source if side == "source" else target
        if table.get(klass, 0) <= 0:
            return None
        table[klass] -= 1
        return PerClassBounds(source=source, target=target)

    def solve_at(self, bounds):
        options = self.config.encode_options(self.fragment, self.rule_names)
        start = time.monotonic()
        problem = encode(self.spec, self.prop, bounds, options, self.t)
        verdict, _ = lazy_closure_loop(problem, self.config.timeout_seconds,
                                       self.spec, self.t,
                                       self.config.solver_command)
        elapsed = time.monotonic() - start
        status = {"unsat": HOLDS, "sat": VIOLATED}.get(verdict.status, UNKNOWN)
        return status, elapsed


def _expected_at(pattern, delta):
    if pattern == "positive":
        return HOLDS
    return HOLDS if delta < 0 else VIOLATED


def uniform_sweep(spec, prop, config=None, base_verdict=None):
    config = config or VerificationConfig()
    lab = _BoundsLab(spec, prop, config)
    if base_verdict is None:
        base_verdict = verify_property(spec, lab.prop, config)
    pattern = "negative" if base_verdict.status == VIOLATED else "positive"
    result = SweepResult(lab.prop.name, lab.cutoff.k,
                         lab.base.max_bound(), lab.cutoff.dominant, pattern)
    for delta in OFFSETS:
        status, elapsed = lab.solve_at(lab.shifted(delta))
        result.rows.append((delta, status, elapsed))
    result.matched = all(s == _expected_at(pattern, d)
                         for d, s, _ in result.rows)
    return result


def selective_minus_one(spec, prop, config=None, base_verdict=None):
    config = config or VerificationConfig()
    lab = _BoundsLab(spec, prop, config)
    if base_verdict is None:
        base_verdict = verify_property(spec, lab.prop, config)
    result = PerturbationResult(lab.prop.name, base_verdict.status)
    for side, table in (("source", lab.base.source),
                        ("target", lab.base.target)):
        for klass in sorted(table):
            bounds = lab.decremented(klass, side)
            if bounds is None:
                result.runs.append((klass, side, "skipped"))
                continue
            status, _ = lab.solve_at(bounds)
            result.runs.append((klass, side, status))
            if status != base_verdict.status:
                result.binding_classes.append(f"{side}:{klass}")
    if base_verdict.status == VIOLATED:
        result.matched = bool(result.binding_classes)
    else:
        result.matched = not result.binding_classes
    return result


def witness_validation(spec, prop, family, config=None, base_verdict=None):
    """family maps a support level in {"base-1", "base", "base+1"} to an
    iterable of conformant source models."""
    config = config or VerificationConfig()
    lab = _BoundsLab(spec, prop, config)
    if base_verdict is None:
        base_verdict = verify_property(spec, lab.prop, config)
    pattern = "negative" if base_verdict.status == VIOLATED else "positive"
    deltas = {"base-1": -1, "base": 0, "base+1": 1}
    result = WitnessResult(lab.prop.name)
    src_mm = spec.metamodel(lab.t.source)
    for level in ("base-1", "base", "base+1"):
        for i, source in enumerate(family.get(level, ())):
            report = validate_conformance(source, src_mm)
            if not report.conformant:
                raise ValueError(
                    f"witness {level}[{i}] for {lab.prop.name} is not "
                    f"conformant: {report.violations[0].message}")
            run = execute(lab.t, source, spec)
            concrete = check_property_concrete(lab.prop, source, run, spec)
            actual = HOLDS if concrete.holds else VIOLATED
            predicted = _expected_at(pattern, deltas[level])
            result.rows.append((level, i, predicted, actual,
                                predicted == actual))
    return result


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def _tick(flag):
    return "yes" if flag else "NO"


def emit_report(results, spec_name="spec"):
    """results: list of dicts with keys sweep, perturbation, witness (any of
    which may be None)."""
    lines = ["# Cutoff boundary validation", ""]
    lines += ["| Spec | Property | Base K | Dominant formula | Uniform | "
              "Sel. -1 | Concrete |",
              "|---|---|---|---|---|---|---|"]
    for entry in results:
        sweep = entry.get("sweep")
        pert = entry.get("perturbation")
        wit = entry.get("witness")
        name = (sweep or pert or wit).property
        base_k = sweep.base_k if sweep else "-"
        dominant = "/".join(sweep.dominant) if sweep else "-"
        lines.append(
            f"| {spec_name} | {name} | {base_k} | {dominant} | "
            f"{_tick(sweep.matched) if sweep else '-'} | "
            f"{_tick(pert.matched) if pert else '-'} | "
            f"{_tick(wit.matched) if wit else '-'} |")
    lines.append("")

    lines += ["## Uniform sweep", ""]
    for entry in results:
        sweep = entry.get("sweep")
        if sweep is None:
            continue
        lines += [f"### {sweep.property} ({sweep.expected_pattern})", "",
                  "| delta | verdict | time (s) |", "|---|---|---|"]
        for d, s, t in sweep.rows:
            lines.append(f"| {d:+d} | {s} | {t:.3f} |")
        lines.append("")

    lines += ["## Selective per-class decrement", ""]
    for entry in results:
        pert = entry.get("perturbation")
        if pert is None:
            continue
        binding = ", ".join(pert.binding_classes) or "none"
        lines += [f"### {pert.property} (base {pert.base_status})", "",
                  f"Binding classes: {binding}", "",
                  "| class | side | verdict |", "|---|---|---|"]
        for c, side, status in pert.runs:
            lines.append(f"| {c} | {side} | {status} |")
        lines.append("")

    lines += ["## Concrete witnesses", ""]
    for entry in results:
        wit = entry.get("witness")
        if wit is None:
            continue
        lines += [f"### {wit.property}", "",
                  "| level | index | predicted | actual | matched |",
                  "|---|---|---|---|---|"]
        for lv, i, p, a, m in wit.rows:
            lines.append(f"| {lv} | {i} | {p} | {a} | {_tick(m)} |")
        lines.append("")
    return "\n".join(lines)


def results_json(results):
    out = []
    for entry in results:
        item = {}
        for key in ("sweep", "perturbation", "witness"):
            item[key] = entry[key].to_json() if entry.get(key) else None
        out.append(item)
    return json.dumps(out, indent=2)
