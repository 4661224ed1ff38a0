import io

from dsltv.smtsolver import main as solver_main
from dsltv.smtsolver import solve_text


def _solve(text):
    out = io.StringIO()
    solve_text(text, out=out)
    return out.getvalue()


def test_simple_sat_with_model():
    out = _solve("""
(declare-const a Bool)
(declare-const b Bool)
(assert (or a b))
(assert (not a))
(check-sat)
(get-model)
""")
    assert out.startswith("sat")
    assert "(define-fun b () Bool true)" in out
    assert "(define-fun a () Bool false)" in out


def test_simple_unsat():
    out = _solve("""
(declare-const a Bool)
(assert a)
(assert (not a))
(check-sat)
""")
    assert out.strip() == "unsat"


def test_pigeonhole_is_unsat():
    lines = []
    for p in range(4):
        for h in range(3):
            lines.append(f"(declare-const p{p}h{h} Bool)")
    for p in range(4):
        lines.append("(assert (or " +
                     " ".join(f"p{p}h{h}" for h in range(3)) + "))")
    for h in range(3):
        for p in range(4):
            for q in range(p + 1, 4):
                lines.append(f"(assert (not (and p{p}h{h} p{q}h{h})))")
    lines.append("(check-sat)")
    assert _solve("\n".join(lines)).strip() == "unsat"


def test_bounded_integers():
    out = _solve("""
(declare-const x Int)
(declare-const y Int)
(assert (>= x 0))
(assert (<= x 3))
(assert (>= y 0))
(assert (<= y 3))
(assert (= (+ x y) 5))
(assert (> x y))
(check-sat)
(get-model)
""")
    assert out.startswith("sat")
    model = {}
    for line in out.splitlines():
        if "define-fun" in line:
            parts = line.replace("(", " ").replace(")", " ").split()
            model[parts[1]] = int(parts[-1])
    assert model["x"] + model["y"] == 5 and model["x"] > model["y"]


def test_push_pop_scoping():
    out = _solve("""
(declare-const a Bool)
(assert a)
(push 1)
(assert (not a))
(check-sat)
(pop 1)
(check-sat)
""")
    assert out.split() == ["unsat", "sat"]


def test_distinct_forces_order():
    out = _solve("""
(declare-const x Int)
(declare-const y Int)
(assert (>= x 0)) (assert (<= x 1))
(assert (>= y 0)) (assert (<= y 1))
(assert (distinct x y))
(assert (> x y))
(check-sat)
(get-model)
""")
    assert out.startswith("sat")
    assert "(define-fun x () Int 1)" in out
    assert "(define-fun y () Int 0)" in out


def test_cli_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.smt2"
    bad.write_text("(assert unknown-symbol)\n(check-sat)\n")
    rc = solver_main([str(bad)])
    assert rc == 1
    assert "(error" in capsys.readouterr().out
