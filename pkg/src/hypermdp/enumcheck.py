"""Reference semantics: check formulas by direct quantifier instantiation.

Scheduler quantifiers range over the memoryless non-probabilistic
assignments, state quantifiers over all states; the quantifier-free body
is evaluated on the self-composition induced by the chosen assignments.
Serves as the oracle for the constraint-encoding engine and as a
standalone checker.  Mixed scheduler prefixes are supported here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple

from . import analysis
from .errors import (
    CapExceeded,
    IllFormed,
    QuantifierOrderViolation,
    UnboundSchedulerVariable,
    UnboundStateVariable,
    UnknownProposition,
)
from .formula import (
    And,
    Arith,
    BoundedUntil,
    Const,
    Formula,
    Less,
    Next,
    NotF,
    ProbOf,
    Prop,
    SchedQuant,
    StateQuant,
    TrueF,
    Until,
    body_propositions,
    check_well_formed,
    count_quantifiers,
    state_var_index,
)
from .model import Dtmc, Mdp, SchedulerAssignment, enumerate_schedulers, induce_dtmc, self_compose


@dataclass
class Verdict:
    """Truth value plus witness or counterexample instantiations.

    Values are recorded for the maximal leading same-kind quantifier
    chain: a true exists-led formula carries a witness, a false
    forall-led formula a counterexample.
    """

    truth: bool
    mode: str = "none"  # 'witness' | 'counterexample' | 'none'
    schedulers: Dict[str, SchedulerAssignment] = field(default_factory=dict)
    states: Dict[str, str] = field(default_factory=dict)


def _unit_composition() -> Dtmc:
    # zero state variables: a single anonymous state with a self-loop
    unit = ()
    return Dtmc(states=(unit,), trans={unit: ((unit, Fraction(1)),)}, ap=(), labels={unit: frozenset()})


class Evaluator:
    """Evaluates bodies and probability expressions on one composition.

    Probability vectors are memoized per path formula: the linear solvers
    already produce all composed states at once, so state-quantifier loops
    reuse them.
    """

    def __init__(self, composed: Dtmc, var_index: Dict[str, int]):
        self.d = composed
        self.var_index = var_index
        self._vectors = {}
        self._preds = {}

    def eval_body(self, body, at) -> bool:
        if isinstance(body, TrueF):
            return True
        if isinstance(body, Prop):
            return f"{body.name}@{self.var_index[body.var]}" in self.d.labels[at]
        if isinstance(body, And):
            return self.eval_body(body.left, at) and self.eval_body(body.right, at)
        if isinstance(body, NotF):
            return not self.eval_body(body.operand, at)
        if isinstance(body, Less):
            return self.eval_prob(body.left, at) < self.eval_prob(body.right, at)
        raise AssertionError(body)

    def eval_prob(self, pexpr, at) -> Fraction:
        if isinstance(pexpr, Const):
            return pexpr.value
        if isinstance(pexpr, Arith):
            left = self.eval_prob(pexpr.left, at)
            right = self.eval_prob(pexpr.right, at)
            if pexpr.op == "+":
                return left + right
            if pexpr.op == "-":
                return left - right
            return left * right
        if isinstance(pexpr, ProbOf):
            return self.path_vector(pexpr.path)[at]
        raise AssertionError(pexpr)

    def predicate(self, body) -> dict:
        if body not in self._preds:
            self._preds[body] = {r: self.eval_body(body, r) for r in self.d.states}
        return self._preds[body]

    def path_vector(self, path) -> dict:
        vec = self._vectors.get(path)
        if vec is None:
            if isinstance(path, Next):
                vec = analysis.next_probs(self.d, self.predicate(path.operand))
            elif isinstance(path, Until):
                vec = analysis.until_probs(self.d, self.predicate(path.left), self.predicate(path.right))
            elif isinstance(path, BoundedUntil):
                vec = analysis.bounded_until_probs(
                    self.d, self.predicate(path.left), self.predicate(path.right), path.k1, path.k2
                )
            else:
                raise AssertionError(path)
            self._vectors[path] = vec
        return vec


def eval_body(composed: Dtmc, body, at, var_index: Dict[str, int]) -> bool:
    """One-off body evaluation on a composition (no shared memo)."""
    return Evaluator(composed, var_index).eval_body(body, at)


def eval_prob(composed: Dtmc, pexpr, at, var_index: Dict[str, int]) -> Fraction:
    """One-off probability-expression evaluation on a composition."""
    return Evaluator(composed, var_index).eval_prob(pexpr, at)


def build_composition(mdp: Mdp, f: Formula, chosen: Dict[str, SchedulerAssignment]) -> Tuple[Dtmc, Dict[str, int]]:
    """Induce one chain per scheduler variable and compose per state variable."""
    state_quants = [q for q in f.prefix if isinstance(q, StateQuant)]
    var_index = state_var_index(f)
    if not state_quants:
        return _unit_composition(), var_index
    induced = {}
    for name, assignment in chosen.items():
        induced[name] = induce_dtmc(mdp, assignment)
    components = [induced[q.sched] for q in state_quants]
    return self_compose(components), var_index


def validate_inputs(mdp: Mdp, f: Formula, max_sched_vars: int, max_state_vars: int) -> None:
    """Shared entry checks: well-formedness, quantifier caps, alphabet."""
    try:
        check_well_formed(f)
    except (UnboundStateVariable, UnboundSchedulerVariable, QuantifierOrderViolation) as exc:
        raise IllFormed(str(exc)) from exc
    m, n = count_quantifiers(f)
    if m > max_sched_vars:
        raise CapExceeded(f"{m} scheduler variables exceed the cap of {max_sched_vars}")
    if n > max_state_vars:
        raise CapExceeded(f"{n} state variables exceed the cap of {max_state_vars}")
    unknown = body_propositions(f.body) - set(mdp.ap)
    if unknown:
        raise UnknownProposition(f"propositions not in the model alphabet: {sorted(unknown)}")


def check(
    mdp: Mdp,
    f: Formula,
    max_sched_vars: int = 3,
    max_state_vars: int = 3,
) -> Verdict:
    """Evaluate a formula by enumerating schedulers and states.

    Schedulers are tried outermost in lexicographic order, then state
    quantifiers left to right, short-circuiting on exists-success and
    forall-failure.
    """
    validate_inputs(mdp, f, max_sched_vars, max_state_vars)

    sched_quants = [q for q in f.prefix if isinstance(q, SchedQuant)]
    state_quants = [q for q in f.prefix if isinstance(q, StateQuant)]

    def eval_states(evaluator: Evaluator, idx: int, partial: tuple):
        if idx == len(state_quants):
            return evaluator.eval_body(f.body, partial), {}
        q = state_quants[idx]
        for s in mdp.states:
            truth, trace = eval_states(evaluator, idx + 1, partial + (s,))
            if q.exists and truth:
                return True, {q.name: s, **trace}
            if not q.exists and not truth:
                return False, {q.name: s, **trace}
        return (not q.exists), {}

    def eval_scheds(idx: int, chosen: Dict[str, SchedulerAssignment]):
        if idx == len(sched_quants):
            composed, var_index = build_composition(mdp, f, chosen)
            evaluator = Evaluator(composed, var_index)
            if not state_quants:
                return evaluator.eval_body(f.body, composed.states[0]), {}
            return eval_states(evaluator, 0, ())
        q = sched_quants[idx]
        for assignment in enumerate_schedulers(mdp):
            truth, trace = eval_scheds(idx + 1, {**chosen, q.name: assignment})
            if q.exists and truth:
                return True, {q.name: assignment, **trace}
            if not q.exists and not truth:
                return False, {q.name: assignment, **trace}
        return (not q.exists), {}

    truth, trace = eval_scheds(0, {})
    return assemble_verdict(f, truth, trace)


def replay(mdp: Mdp, f: Formula, verdict: Verdict) -> bool:
    """Re-evaluate the formula with the verdict's instantiations pinned.

    Quantifiers named in the verdict are fixed to the recorded values;
    the remaining ones are evaluated per their kind.  A valid witness
    yields True, a valid counterexample False.
    """
    sched_quants = [q for q in f.prefix if isinstance(q, SchedQuant)]
    state_quants = [q for q in f.prefix if isinstance(q, StateQuant)]

    def eval_states(evaluator: Evaluator, idx: int, partial: tuple) -> bool:
        if idx == len(state_quants):
            return evaluator.eval_body(f.body, partial)
        q = state_quants[idx]
        if q.name in verdict.states:
            return eval_states(evaluator, idx + 1, partial + (verdict.states[q.name],))
        results = (eval_states(evaluator, idx + 1, partial + (s,)) for s in mdp.states)
        return any(results) if q.exists else all(results)

    def eval_scheds(idx: int, chosen: dict) -> bool:
        if idx == len(sched_quants):
            composed, var_index = build_composition(mdp, f, chosen)
            evaluator = Evaluator(composed, var_index)
            if not state_quants:
                return evaluator.eval_body(f.body, composed.states[0])
            return eval_states(evaluator, 0, ())
        q = sched_quants[idx]
        if q.name in verdict.schedulers:
            return eval_scheds(idx + 1, {**chosen, q.name: verdict.schedulers[q.name]})
        results = (
            eval_scheds(idx + 1, {**chosen, q.name: a}) for a in enumerate_schedulers(mdp)
        )
        return any(results) if q.exists else all(results)

    return eval_scheds(0, {})


def assemble_verdict(f: Formula, truth: bool, trace: dict) -> Verdict:
    verdict = Verdict(truth=truth)
    if not f.prefix:
        return verdict
    lead = f.prefix[0].exists
    if truth and lead:
        verdict.mode = "witness"
    elif not truth and not lead:
        verdict.mode = "counterexample"
    else:
        return verdict
    for q in f.prefix:
        if q.exists != lead or q.name not in trace:
            break
        if isinstance(q, SchedQuant):
            verdict.schedulers[q.name] = trace[q.name]
        else:
            verdict.states[q.name] = trace[q.name]
    return verdict
