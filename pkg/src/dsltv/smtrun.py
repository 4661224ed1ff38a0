"""Child-process driver for an SMT-LIB 2 solver.

The problem text is written to a temporary .smt2 file and the solver is
invoked on it.  By default the bundled finite-domain solver is used
(python -m dsltv.smtsolver); any solver accepting a filename argument and
printing sat/unsat plus a (model ...) block works (z3, cvc5, ...).
"""

from __future__ import annotations

import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass

from .smtsolver import parse_sexprs


@dataclass
class SolverVerdict:
    status: str               # sat | unsat | unknown | timeout | solver-error
    model: dict = None
    wall_time: float = 0.0
    raw_output: str = ""

    def __post_init__(self):
        assert (self.model is not None) == (self.status == "sat")


def default_solver_command():
    return [sys.executable, "-m", "dsltv.smtsolver"]


def parse_model_text(text):
    """Extract variable values from solver output following 'sat'."""
    start = text.find("(")
    if start < 0:
        return {}
    forms = parse_sexprs(text[start:])
    model = {}

    def visit(form):
        if not isinstance(form, list):
            return
        if form and form[0] == "define-fun" and len(form) >= 5:
            name = form[1]
            value = form[4]
            model[name] = _decode_value(value)
        else:
            for sub in form:
                visit(sub)

    for f in forms:
        visit(f)
    return model


def _decode_value(value):
    if value == "true":
        return True
    if value == "false":
        return False
    if isinstance(value, str) and value.lstrip("-").isdigit():
        return int(value)
    if isinstance(value, list) and len(value) == 2 and value[0] == "-":
        return -_decode_value(value[1])
    return value


def run_solver(problem, timeout_seconds, solver_command=None):
    """Solve one encoded problem in a child process.

    The child is terminated and reaped when the timeout expires.
    """
    cmd = list(solver_command or default_solver_command())
    start = time.monotonic()
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False,
                                     encoding="utf-8") as fh:
        fh.write(problem.text)
        path = fh.name
    proc = None
    try:
        proc = subprocess.Popen(cmd + [path], stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, text=True)
        try:
            out, err = proc.communicate(timeout=timeout_seconds)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return SolverVerdict("timeout",
                                 wall_time=time.monotonic() - start)
        wall = time.monotonic() - start
        first = next((ln.strip() for ln in out.splitlines() if ln.strip()),
                     "")
        if first == "unsat":
            return SolverVerdict("unsat", wall_time=wall, raw_output=out)
        if first == "sat":
            try:
                model = parse_model_text(out)
            except Exception:
                return SolverVerdict("solver-error", wall_time=wall,
                                     raw_output=out)
            return SolverVerdict("sat", model=model, wall_time=wall,
                                 raw_output=out)
        if first == "unknown":
            return SolverVerdict("unknown", wall_time=wall, raw_output=out)
        return SolverVerdict("solver-error", wall_time=wall,
                             raw_output=out + ("\n" + err if err else ""))
    except FileNotFoundError:
        return SolverVerdict("solver-error",
                             wall_time=time.monotonic() - start,
                             raw_output=f"solver binary not found: {cmd[0]}")
    finally:
        if proc is not None and proc.poll() is None:
            proc.kill()
            proc.communicate()
        try:
            os.unlink(path)
        except OSError:
            pass


def _violated_deferred(problem, model, spec, transformation=None):
    """Deferred lower-bound assertions whose constraint the model violates.

    The deferred assertions were generated per source slot; re-checking them
    symbolically is unnecessary: decode the source and test each mandatory
    lower bound concretely.
    """
    from .smtencode import decode_counterexample
    from .model import validate_conformance
    enc = problem.metadata["encoder"]
    source, _, _ = decode_counterexample(model, problem, spec, transformation)
    report = validate_conformance(source, enc.src_mm)
    return [v for v in report.violations if v.kind == "multiplicity-lower"]


def lazy_closure_loop(problem, timeout_seconds, spec, transformation=None,
                      solver_command=None):
    """Solve with source lower-bound constraints deferred.

    Whenever a sat model violates a mandatory lower bound, the withheld
    assertions are added and the problem is re-solved.  Terminates on unsat,
    a closure-clean model, or timeout.  Adding all deferred assertions at
    once after the first violation keeps the loop to at most two rounds
    while preserving the eager verdict.
    """
    deadline = time.monotonic() + timeout_seconds
    current = problem
    rounds = 0
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return SolverVerdict("timeout"), rounds
        verdict = run_solver(current, remaining, solver_command)
        if verdict.status != "sat" or not current.deferred:
            return verdict, rounds
        violations = _violated_deferred(current, verdict.model, spec,
                                        transformation)
        if not violations:
            return verdict, rounds
        current = current.with_extra_assertions(current.deferred)
        current.deferred = []
        rounds += 1
