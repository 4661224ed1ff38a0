"""Self-contained solver for the SMT-LIB 2 subset this package emits.

Supports QF_LIA restricted to finite-domain integer constants: every Int
variable must have derivable lower and upper bounds from the asserted
constraints (the encoder always asserts them).  Integers are grounded with a
one-hot boolean encoding, formulas are Tseitin-transformed to CNF, and a
small CDCL search (watched literals, first-UIP learning, VSIDS, restarts)
decides satisfiability.

Usage: dsltv-solve [file]   (reads stdin when no file is given)
Prints "sat" plus a (model ...) block, or "unsat".
"""

from __future__ import annotations

import sys


# ---------------------------------------------------------------------------
# S-expression reader
# ---------------------------------------------------------------------------

class SmtSyntaxError(ValueError):
    pass


def tokenize_sexprs(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            toks.append(ch)
            i += 1
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SmtSyntaxError("unterminated quoted symbol")
            toks.append(text[i + 1:j])
            i = j + 1
        elif ch == '"':
            j = i + 1
            out = []
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        out.append('"')
                        j += 2
                        continue
                    break
                out.append(text[j])
                j += 1
            else:
                raise SmtSyntaxError("unterminated string")
            toks.append('"' + "".join(out) + '"')
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            toks.append(text[i:j])
            i = j
    return toks


def parse_sexprs(text):
    toks = tokenize_sexprs(text)
    pos = 0
    out = []

    def read():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok == "(":
            lst = []
            while pos < len(toks) and toks[pos] != ")":
                lst.append(read())
            if pos >= len(toks):
                raise SmtSyntaxError("unbalanced parenthesis")
            pos += 1
            return lst
        if tok == ")":
            raise SmtSyntaxError("unexpected ')'")
        return tok

    while pos < len(toks):
        out.append(read())
    return out


# ---------------------------------------------------------------------------
# CNF + CDCL
# ---------------------------------------------------------------------------

class Cnf:
    def __init__(self):
        self.nvars = 0
        self.clauses = []

    def new_var(self):
        self.nvars += 1
        return self.nvars

    def add(self, clause):
        clause = sorted(set(clause), key=abs)
        for lit in clause:
            if -lit in clause:
                return
        self.clauses.append(clause)


class Solver:
    """CDCL over integer-labelled literals (v and -v)."""

    def __init__(self, cnf):
        self.n = cnf.nvars
        self.assign = [0] * (self.n + 1)   # 0 unset, 1 true, -1 false
        self.level = [0] * (self.n + 1)
        self.reason = [None] * (self.n + 1)
        self.activity = [0.0] * (self.n + 1)
        self.phase = [False] * (self.n + 1)
        self.trail = []
        self.trail_lim = []
        self.watches = {}
        self.clauses = []
        self.var_inc = 1.0
        self.ok = True
        for c in cnf.clauses:
            if not self.add_clause(c):
                self.ok = False
                break

    def watch(self, lit, clause):
        self.watches.setdefault(lit, []).append(clause)

    def value(self, lit):
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits):
        if not lits:
            return False
        if len(lits) == 1:
            return self.enqueue(lits[0], None)
        clause = list(lits)
        self.clauses.append(clause)
        self.watch(-clause[0], clause)
        self.watch(-clause[1], clause)
        return True

    def enqueue(self, lit, reason):
        v = self.value(lit)
        if v == 1:
            return True
        if v == -1:
            return False
        var = abs(lit)
        self.assign[var] = 1 if lit > 0 else -1
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def propagate(self):
        while self._qhead < len(self.trail):
            lit = self.trail[self._qhead]
            self._qhead += 1
            watching = self.watches.get(lit, [])
            keep = []
            i = 0
            while i < len(watching):
                clause = watching[i]
                i += 1
                # keep the falsified watch in position 1
                if clause[0] == -lit:
                    clause[0], clause[1] = clause[1], clause[0]
                if self.value(clause[0]) == 1:
                    keep.append(clause)
                    continue
                moved = False
                for idx in range(2, len(clause)):
                    if self.value(clause[idx]) != -1:
                        clause[1], clause[idx] = clause[idx], clause[1]
                        self.watch(-clause[1], clause)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(clause)
                if not self.enqueue(clause[0], clause):
                    keep.extend(watching[i:])
                    self.watches[lit] = keep
                    return clause
            self.watches[lit] = keep
        return None

    _qhead = 0

    def bump(self, var):
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for i in range(1, self.n + 1):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100

    def analyze(self, conflict):
        learnt = []
        seen = [False] * (self.n + 1)
        counter = 0
        lit0 = None
        p_reason = conflict
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            for q in p_reason:
                if q is lit0:
                    continue
                var = abs(q)
                if not seen[var] and self.level[var] > 0:
                    seen[var] = True
                    self.bump(var)
                    if self.level[var] == cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            lit0 = p
            seen[abs(p)] = False
            counter -= 1
            idx -= 1
            if counter == 0:
                break
            p_reason = [l for l in (self.reason[abs(p)] or []) if l != p]
        learnt.insert(0, -lit0)
        if len(learnt) == 1:
            bt = 0
        else:
            bt = max(self.level[abs(l)] for l in learnt[1:])
        return learnt, bt

    def backtrack(self, level):
        while self.trail_lim and len(self.trail_lim) > level:
            lim = self.trail_lim.pop()
            while len(self.trail) > lim:
                lit = self.trail.pop()
                var = abs(lit)
                self.phase[var] = lit > 0
                self.assign[var] = 0
                self.reason[var] = None
        self._qhead = min(self._qhead, len(self.trail))

    def decide(self):
        best, best_act = 0, -1.0
        for v in range(1, self.n + 1):
            if self.assign[v] == 0 and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        return best

    def solve(self):
        if not self.ok:
            return False
        self._qhead = 0
        conflicts_budget = 100
        total_restarts = 0
        while True:
            conflict = self.propagate()
            if conflict is not None:
                if not self.trail_lim:
                    return False
                learnt, bt = self.analyze(conflict)
                self.backtrack(bt)
                if len(learnt) == 1:
                    if not self.enqueue(learnt[0], None):
                        return False
                else:
                    # put a literal of backtrack level in watch position 1
                    for i in range(1, len(learnt)):
                        if self.level[abs(learnt[i])] == bt:
                            learnt[1], learnt[i] = learnt[i], learnt[1]
                            break
                    self.clauses.append(learnt)
                    self.watch(-learnt[0], learnt)
                    self.watch(-learnt[1], learnt)
                    self.enqueue(learnt[0], learnt)
                self.var_inc *= 1.05
                conflicts_budget -= 1
                if conflicts_budget <= 0:
                    total_restarts += 1
                    conflicts_budget = 100 * (total_restarts + 1)
                    self.backtrack(0)
                continue
            var = self.decide()
            if var == 0:
                return True
            self.trail_lim.append(len(self.trail))
            self.enqueue(var if self.phase[var] else -var, None)

    def model_value(self, var):
        return self.assign[var] == 1


# ---------------------------------------------------------------------------
# Boolean circuit with Tseitin transform
# ---------------------------------------------------------------------------

class Circuit:
    TRUE = "true"
    FALSE = "false"

    def __init__(self):
        self.cnf = Cnf()
        self.const_true = self.cnf.new_var()
        self.cnf.add([self.const_true])
        self.cache = {}

    def lit_true(self):
        return self.const_true

    def lit_false(self):
        return -self.const_true

    def var(self):
        return self.cnf.new_var()

    def and_(self, lits):
        lits = [l for l in lits if l != self.const_true]
        if any(l == -self.const_true for l in lits):
            return self.lit_false()
        if not lits:
            return self.lit_true()
        if len(lits) == 1:
            return lits[0]
        key = ("and", tuple(sorted(lits)))
        if key in self.cache:
            return self.cache[key]
        out = self.var()
        for l in lits:
            self.cnf.add([-out, l])
        self.cnf.add([out] + [-l for l in lits])
        self.cache[key] = out
        return out

    def or_(self, lits):
        return -self.and_([-l for l in lits])

    def ite(self, c, t, e):
        return self.and_([self.or_([-c, t]), self.or_([c, e])])

    def iff(self, a, b):
        return self.and_([self.or_([-a, b]), self.or_([-b, a])])


# ---------------------------------------------------------------------------
# SMT front end: sorts, grounding, evaluation
# ---------------------------------------------------------------------------

class SmtError(ValueError):
    pass


class SmtScript:
    def __init__(self):
        self.sorts = {}        # name -> "Bool" | "Int"
        self.assertions = []
        self.stack = []        # for push/pop: saved assertion lengths
        self.produce_models = False

    def run(self, forms, out=sys.stdout):
        for form in forms:
            if not isinstance(form, list) or not form:
                raise SmtError(f"bad command: {form!r}")
            head = form[0]
            if head in ("set-logic", "set-info", "set-option"):
                continue
            if head in ("declare-const", "declare-fun"):
                name = form[1]
                sort = form[-1]
                if head == "declare-fun" and form[2] != []:
                    raise SmtError("only zero-arity functions supported")
                if sort not in ("Bool", "Int"):
                    raise SmtError(f"unsupported sort {sort!r}")
                self.sorts[name] = sort
            elif head == "assert":
                self.assertions.append(form[1])
            elif head == "push":
                self.stack.append(len(self.assertions))
            elif head == "pop":
                self.assertions = self.assertions[:self.stack.pop()]
            elif head == "check-sat":
                self.last = self.check(out)
            elif head == "get-model":
                self.print_model(out)
            elif head == "exit":
                break
            else:
                raise SmtError(f"unsupported command {head!r}")

    # -- grounding ---------------------------------------------------------

    def derive_bounds(self):
        """Scan assertions for (<= c x) / (<= x c) / (= x c) shapes to bound
        every Int variable."""
        lo = {}
        hi = {}

        def note_lo(name, v):
            lo[name] = max(lo.get(name, v), v) if name in lo else v

        def note_hi(name, v):
            hi[name] = min(hi.get(name, v), v) if name in hi else v

        def is_int(tok):
            return isinstance(tok, str) and \
                (tok.lstrip("-").isdigit() if tok else False)

        def walk(e, positive):
            if not isinstance(e, list) or not e:
                return
            head = e[0]
            if head == "and" and positive:
                for sub in e[1:]:
                    walk(sub, True)
            elif head in ("<=", "<", ">=", ">", "=") and len(e) == 3 \
                    and positive:
                a, b = e[1], e[2]
                if is_int(a) and isinstance(b, str) and b in self.sorts:
                    v = int(a)
                    if head in ("<=",):
                        note_lo(b, v)
                    elif head == "<":
                        note_lo(b, v + 1)
                    elif head == ">=":
                        note_hi(b, v)
                    elif head == ">":
                        note_hi(b, v - 1)
                    elif head == "=":
                        note_lo(b, v)
                        note_hi(b, v)
                elif is_int(b) and isinstance(a, str) and a in self.sorts:
                    v = int(b)
                    if head == "<=":
                        note_hi(a, v)
                    elif head == "<":
                        note_hi(a, v - 1)
                    elif head == ">=":
                        note_lo(a, v)
                    elif head == ">":
                        note_lo(a, v + 1)
                    elif head == "=":
                        note_lo(a, v)
                        note_hi(a, v)

        for a in self.assertions:
            walk(a, True)
        return lo, hi

    def check(self, out):
        circuit = Circuit()
        bool_vars = {}
        for name, sort in self.sorts.items():
            if sort == "Bool":
                bool_vars[name] = circuit.var()

        lo, hi = self.derive_bounds()
        onehot = {}  # int var -> {value: sat literal}
        self.domains = {}
        for name, sort in self.sorts.items():
            if sort != "Int":
                continue
            if name not in lo or name not in hi:
                raise SmtError(
                    f"cannot derive finite bounds for Int variable {name!r}")
            if lo[name] > hi[name]:
                # contradictory asserted bounds: trivially unsatisfiable
                self._model = None
                print("unsat", file=out)
                return "unsat"
            values = range(lo[name], hi[name] + 1)
            self.domains[name] = list(values)
            lits = {v: circuit.var() for v in values}
            onehot[name] = lits
            circuit.cnf.add(list(lits.values()))
            vs = list(lits.values())
            for i in range(len(vs)):
                for j in range(i + 1, len(vs)):
                    circuit.cnf.add([-vs[i], -vs[j]])

        def int_operands(e):
            """Collect (variable names, constant offset factor) for a linear
            term; supports var, constant, +, -, * by constant."""
            if isinstance(e, str):
                if e.lstrip("-").isdigit():
                    return [], int(e)
                if self.sorts.get(e) == "Int":
                    return [(e, 1)], 0
                raise SmtError(f"not an Int term: {e!r}")
            head = e[0]
            if head == "+":
                vs, c = [], 0
                for sub in e[1:]:
                    v2, c2 = int_operands(sub)
                    vs += v2
                    c += c2
                return vs, c
            if head == "-":
                if len(e) == 2:
                    vs, c = int_operands(e[1])
                    return [(n, -k) for n, k in vs], -c
                vs, c = int_operands(e[1])
                for sub in e[2:]:
                    v2, c2 = int_operands(sub)
                    vs += [(n, -k) for n, k in v2]
                    c -= c2
                return vs, c
            if head == "*" and len(e) == 3:
                for a, b in ((e[1], e[2]), (e[2], e[1])):
                    if isinstance(a, str) and a.lstrip("-").isdigit():
                        vs, c = int_operands(b)
                        k = int(a)
                        return [(n, f * k) for n, f in vs], c * k
            if head == "ite":
                raise SmtError("ite over Int not supported")
            raise SmtError(f"unsupported Int term {e!r}")

        def atom_lit(op, left, right):
            """Comparison atom over linear Int terms, compiled by enumerating
            the involved variables' finite domains."""
            lvs, lc = int_operands(left)
            rvs, rc = int_operands(right)
            terms = {}
            for n, k in lvs:
                terms[n] = terms.get(n, 0) + k
            for n, k in rvs:
                terms[n] = terms.get(n, 0) - k
            const = lc - rc  # atom: sum(terms) + const OP 0
            names = [n for n, k in terms.items() if k != 0]
            if len(names) > 3:
                raise SmtError("atom involves too many Int variables")

            def test(total):
                if op == "=":
                    return total == 0
                if op == "<=":
                    return total <= 0
                if op == "<":
                    return total < 0
                if op == ">=":
                    return total >= 0
                if op == ">":
                    return total > 0
                raise SmtError(f"unknown comparison {op!r}")

            combos = [[]]
            for n in names:
                combos = [c + [(n, v)] for c in combos for v in self.domains[n]]
            good = []
            for combo in combos:
                total = const + sum(terms[n] * v for n, v in combo)
                if test(total):
                    good.append(circuit.and_(
                        [onehot[n][v] for n, v in combo]))
            return circuit.or_(good)

        def compile_bool(e):
            if e == "true":
                return circuit.lit_true()
            if e == "false":
                return circuit.lit_false()
            if isinstance(e, str):
                if e in bool_vars:
                    return bool_vars[e]
                raise SmtError(f"unknown Bool term {e!r}")
            head = e[0]
            if head == "and":
                return circuit.and_([compile_bool(x) for x in e[1:]])
            if head == "or":
                return circuit.or_([compile_bool(x) for x in e[1:]])
            if head == "not":
                return -compile_bool(e[1])
            if head == "=>":
                lits = [compile_bool(x) for x in e[1:]]
                out2 = lits[-1]
                for l in reversed(lits[:-1]):
                    out2 = circuit.or_([-l, out2])
                return out2
            if head == "xor":
                out2 = compile_bool(e[1])
                for x in e[2:]:
                    out2 = -circuit.iff(out2, compile_bool(x))
                return out2
            if head == "ite":
                return circuit.ite(compile_bool(e[1]), compile_bool(e[2]),
                                   compile_bool(e[3]))
            if head in ("<=", "<", ">=", ">"):
                return atom_lit(head, e[1], e[2])
            if head in ("=", "distinct"):
                args = e[1:]
                if self._is_bool_term(args[0]):
                    lits = [compile_bool(x) for x in args]
                    pairs = []
                    for i in range(len(lits) - 1):
                        for j in range(i + 1, len(lits)):
                            eq = circuit.iff(lits[i], lits[j])
                            pairs.append(eq if head == "=" else -eq)
                    return circuit.and_(pairs)
                pairs = []
                for i in range(len(args) - 1):
                    for j in range(i + 1, len(args)):
                        eq = atom_lit("=", args[i], args[j])
                        pairs.append(eq if head == "=" else -eq)
                return circuit.and_(pairs)
            raise SmtError(f"unsupported operator {head!r}")

        for a in self.assertions:
            circuit.cnf.add([compile_bool(a)])

        solver = Solver(circuit.cnf)
        sat = solver.solve()
        self._model = None
        if sat:
            model = {}
            for name, lit in bool_vars.items():
                model[name] = solver.model_value(lit)
            for name, lits in onehot.items():
                val = next((v for v, l in lits.items()
                            if solver.model_value(l)), None)
                model[name] = self.domains[name][0] if val is None else val
            self._model = model
            print("sat", file=out)
            return "sat"
        print("unsat", file=out)
        return "unsat"

    def _is_bool_term(self, e):
        if e in ("true", "false"):
            return True
        if isinstance(e, str):
            return self.sorts.get(e) == "Bool"
        return e[0] in ("and", "or", "not", "=>", "xor", "ite", "=",
                        "distinct", "<=", "<", ">=", ">")

    def print_model(self, out):
        if self._model is None:
            print("(error \"no model available\")", file=out)
            return
        lines = ["(model"]
        for name in sorted(self._model):
            v = self._model[name]
            if isinstance(v, bool):
                sv, sort = ("true" if v else "false"), "Bool"
            else:
                sv = str(v) if v >= 0 else f"(- {-v})"
                sort = "Int"
            sym = f"|{name}|" if any(c in name for c in "()# ") else name
            lines.append(f"  (define-fun {sym} () {sort} {sv})")
        lines.append(")")
        print("\n".join(lines), file=out)


def solve_text(text, out=sys.stdout):
    script = SmtScript()
    script.run(parse_sexprs(text), out=out)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if argv:
        with open(argv[0], "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    try:
        solve_text(text)
    except (SmtError, SmtSyntaxError) as e:
        print(f"(error \"{e}\")")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
