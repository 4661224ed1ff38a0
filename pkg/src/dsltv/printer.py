"""Canonical text rendering of a resolved Specification.

print_spec(parse_spec(text)) parses back to an equal AST, and rendering is a
fixpoint: print(parse(print(parse(text)))) == print(parse(text)).
"""

from __future__ import annotations

from .spec_ast import (
    BoolDomain,
    CopyBinding,
    EnumRef,
    EnumValue,
    IntRange,
    IntSet,
    IntUnbounded,
    StringUnbounded,
    StringVocab,
)


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _literal(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return _quote(v)
    if isinstance(v, EnumValue):
        return f"{v.enum}.{v.literal}"
    raise TypeError(f"unprintable literal {v!r}")


def _domain(d):
    if isinstance(d, BoolDomain):
        return "Bool"
    if isinstance(d, IntRange):
        return f"Int[{d.lo}..{d.hi}]"
    if isinstance(d, IntSet):
        return "Int{" + ", ".join(str(v) for v in d.members) + "}"
    if isinstance(d, IntUnbounded):
        return "Int"
    if isinstance(d, StringVocab):
        return "String[" + ", ".join(_quote(w) for w in d.words) + "]"
    if isinstance(d, StringUnbounded):
        return "String"
    if isinstance(d, EnumRef):
        return d.enum
    raise TypeError(f"unprintable domain {d!r}")


def _pattern_lines(pattern, traces=(), indent="        "):
    lines = []
    for e in pattern.elements:
        head = f"{indent}{'any ' if e.any_flag else ''}{e.name} : {e.klass}"
        if e.constraints:
            head += " where " + " and ".join(
                f"{c.attr} {c.op} {_literal(c.value)}" for c in e.constraints)
        lines.append(head)
    for l in pattern.links:
        prefix = "direct " if l.direct else ""
        lines.append(f"{indent}{prefix}{l.name} : {l.assoc} -- {l.source}.{l.target}")
    for post_el, pre_el in traces:
        lines.append(f"{indent}{post_el} <--trace-- {pre_el}")
    return lines


def _apply_lines(graph, indent="            "):
    lines = []
    for e in graph.elements:
        head = f"{indent}{e.name} : {e.klass}"
        if e.bindings:
            parts = []
            for b in e.bindings:
                if isinstance(b.value, CopyBinding):
                    parts.append(f"{b.attr} = {b.value.element}.{b.value.attr}")
                else:
                    parts.append(f"{b.attr} = {_literal(b.value)}")
            head += " { " + ", ".join(parts) + " }"
        lines.append(head)
    for l in graph.links:
        lines.append(f"{indent}{l.name} : {l.assoc} -- {l.source}.{l.target}")
    return lines


def print_spec(spec):
    out = []
    for mm in spec.metamodels:
        out.append(f"metamodel {mm.name} {{")
        for e in mm.enums:
            out.append(f"    enum {e.name} {{ " + ", ".join(e.literals) + " }")
        for c in mm.classes:
            head = "    "
            if c.abstract:
                head += "abstract "
            head += f"class {c.name}"
            if c.parent:
                head += f" extends {c.parent}"
            if not c.attributes:
                out.append(head + " { }")
            else:
                out.append(head + " {")
                for a in c.attributes:
                    out.append(f"        {a.name}: {_domain(a.domain)}")
                out.append("    }")
        for a in mm.associations:
            mult = f" [{a.lower}..{'*' if a.upper is None else a.upper}]"
            out.append(f"    assoc {a.name} : {a.source} -> {a.target}{mult}")
        out.append("}")
        out.append("")
    for t in spec.transformations:
        out.append(f"transformation {t.name} : {t.source} -> {t.target} {{")
        for layer in t.layers:
            out.append(f"    layer {layer.name} {{")
            for r in layer.rules:
                out.append(f"        rule {r.name} {{")
                out.append("            match {")
                out.extend(_pattern_lines(r.match, indent="                "))
                out.append("            }")
                out.append("            apply {")
                out.extend(_apply_lines(r.apply, indent="                "))
                out.append("            }")
                if r.backward:
                    out.append("            backward {")
                    for ae, me in r.backward:
                        out.append(f"                {ae} <--trace-- {me}")
                    out.append("            }")
                out.append("        }")
            out.append("    }")
        out.append("}")
        out.append("")
    for p in spec.properties:
        doc = f" {_quote(p.doc)}" if p.doc else ""
        out.append(f"property {p.name}{doc} {{")
        out.append("    precondition {")
        out.extend(_pattern_lines(p.precondition))
        out.append("    }")
        out.append("    postcondition {")
        out.extend(_pattern_lines(p.postcondition, traces=p.traces))
        out.append("    }")
        out.append("}")
        out.append("")
    return "\n".join(out)
