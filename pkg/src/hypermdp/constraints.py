"""Constraint-system representation and SMT-LIB2 emission.

The system mixes Boolean structure over three atom kinds: Boolean
variables, scheduler-choice equalities (enumerated domains, compiled to
one-hot Booleans on emission) and comparisons of linear rational
expressions.  Everything is immutable and deterministic: iteration
follows registration order, so emitted text is reproducible byte for
byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class BoolRef:
    name: str


@dataclass(frozen=True)
class ChoiceIs:
    family: int
    state: str
    action: str


@dataclass(frozen=True)
class Lin:
    """const + sum of coeff*var."""

    const: Fraction = ZERO
    terms: Tuple[Tuple[Fraction, str], ...] = ()


@dataclass(frozen=True)
class Cmp:
    op: str  # '=', '<', '<=', '>', '>='
    left: Lin
    right: Lin


@dataclass(frozen=True)
class MulEq:
    """result = left * right over variables; only produced by a
    variable-times-variable product in the source formula."""

    result: str
    left: str
    right: str


@dataclass(frozen=True)
class NotT:
    operand: "Term"


@dataclass(frozen=True)
class AndT:
    items: Tuple["Term", ...]


@dataclass(frozen=True)
class OrT:
    items: Tuple["Term", ...]


@dataclass(frozen=True)
class ImpliesT:
    antecedent: "Term"
    consequent: "Term"


@dataclass(frozen=True)
class XorT:
    left: "Term"
    right: "Term"


Term = object

TRUE_T = AndT(())
FALSE_T = OrT(())


def var(name: str) -> Lin:
    return Lin(ZERO, ((ONE, name),))


def const(value) -> Lin:
    return Lin(Fraction(value), ())


def eq(left: Lin, right: Lin) -> Cmp:
    return Cmp("=", left, right)


# -- system -------------------------------------------------------------------


@dataclass
class ConstraintSystem:
    """Variable pool plus constraints; the output of the encoding."""

    # (family, state) -> enabled actions, in order
    choice_domains: Dict[Tuple[int, str], Tuple[str, ...]] = field(default_factory=dict)
    # name -> kind: 'holds' | 'prob' | 'value' | 'toint' | 'dist'
    variables: Dict[str, str] = field(default_factory=dict)
    constraints: List[Term] = field(default_factory=list)
    truth: Optional[Term] = None
    # subformula bookkeeping: node -> index, plus printable forms
    subformula_index: Dict[object, int] = field(default_factory=dict)
    subformula_text: List[str] = field(default_factory=list)
    # decode metadata, filled by the encoder
    meta: Optional[object] = None

    def declare(self, name: str, kind: str) -> str:
        existing = self.variables.get(name)
        if existing is None:
            self.variables[name] = kind
        return name

    def add(self, term: Term):
        self.constraints.append(term)

    def index_of(self, node, text: str) -> int:
        idx = self.subformula_index.get(node)
        if idx is None:
            idx = len(self.subformula_text)
            self.subformula_index[node] = idx
            self.subformula_text.append(text)
        return idx

    def variable_count(self) -> int:
        one_hot = sum(len(dom) for dom in self.choice_domains.values())
        return one_hot + len(self.variables)

    def constraint_count(self) -> int:
        return len(self.constraints)


# -- evaluation ---------------------------------------------------------------


def evaluate_lin(lin: Lin, values: Dict[str, Fraction]) -> Fraction:
    acc = lin.const
    for coeff, name in lin.terms:
        acc += coeff * values[name]
    return acc


def evaluate_term(term: Term, values: Dict[str, Fraction], choices: Dict[Tuple[int, str], str]) -> bool:
    """Evaluate a term under a full assignment (used by tests and the
    eager engine's self-check)."""
    if isinstance(term, BoolRef):
        return bool(values[term.name])
    if isinstance(term, ChoiceIs):
        return choices[(term.family, term.state)] == term.action
    if isinstance(term, Cmp):
        left = evaluate_lin(term.left, values)
        right = evaluate_lin(term.right, values)
        return {
            "=": left == right,
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }[term.op]
    if isinstance(term, MulEq):
        return values[term.result] == values[term.left] * values[term.right]
    if isinstance(term, NotT):
        return not evaluate_term(term.operand, values, choices)
    if isinstance(term, AndT):
        return all(evaluate_term(t, values, choices) for t in term.items)
    if isinstance(term, OrT):
        return any(evaluate_term(t, values, choices) for t in term.items)
    if isinstance(term, ImpliesT):
        return (not evaluate_term(term.antecedent, values, choices)) or evaluate_term(
            term.consequent, values, choices
        )
    if isinstance(term, XorT):
        return evaluate_term(term.left, values, choices) != evaluate_term(term.right, values, choices)
    raise AssertionError(term)


def evaluate_system(cs: ConstraintSystem, values, choices) -> bool:
    return all(evaluate_term(t, values, choices) for t in cs.constraints)


# -- SMT-LIB2 emission ----------------------------------------------------------


def _choice_symbol(family: int, state: str, action: str) -> str:
    return f"ch_{family}_{state}_{action}"


def _frac_sexpr(value: Fraction) -> str:
    if value < 0:
        return f"(- {_frac_sexpr(-value)})"
    if value.denominator == 1:
        return str(value.numerator)
    return f"(/ {value.numerator} {value.denominator})"


def _lin_sexpr(lin: Lin) -> str:
    parts = []
    if lin.const != 0 or not lin.terms:
        parts.append(_frac_sexpr(lin.const))
    for coeff, name in lin.terms:
        if coeff == 1:
            parts.append(name)
        else:
            parts.append(f"(* {_frac_sexpr(coeff)} {name})")
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def term_sexpr(term: Term) -> str:
    if isinstance(term, BoolRef):
        return term.name
    if isinstance(term, ChoiceIs):
        return _choice_symbol(term.family, term.state, term.action)
    if isinstance(term, Cmp):
        return f"({term.op} {_lin_sexpr(term.left)} {_lin_sexpr(term.right)})"
    if isinstance(term, MulEq):
        return f"(= {term.result} (* {term.left} {term.right}))"
    if isinstance(term, NotT):
        return f"(not {term_sexpr(term.operand)})"
    if isinstance(term, AndT):
        if not term.items:
            return "true"
        if len(term.items) == 1:
            return term_sexpr(term.items[0])
        return "(and " + " ".join(term_sexpr(t) for t in term.items) + ")"
    if isinstance(term, OrT):
        if not term.items:
            return "false"
        if len(term.items) == 1:
            return term_sexpr(term.items[0])
        return "(or " + " ".join(term_sexpr(t) for t in term.items) + ")"
    if isinstance(term, ImpliesT):
        return f"(=> {term_sexpr(term.antecedent)} {term_sexpr(term.consequent)})"
    if isinstance(term, XorT):
        return f"(xor {term_sexpr(term.left)} {term_sexpr(term.right)})"
    raise AssertionError(term)


def _has_muleq(term: Term) -> bool:
    if isinstance(term, MulEq):
        return True
    if isinstance(term, NotT):
        return _has_muleq(term.operand)
    if isinstance(term, (AndT, OrT)):
        return any(_has_muleq(t) for t in term.items)
    if isinstance(term, ImpliesT):
        return _has_muleq(term.antecedent) or _has_muleq(term.consequent)
    if isinstance(term, XorT):
        return _has_muleq(term.left) or _has_muleq(term.right)
    return False


def emit_smtlib2(cs: ConstraintSystem) -> str:
    """Deterministic SMT-LIB2 script for the system.

    Enumerated choice variables are compiled to one-hot Boolean
    selectors; distance variables are plain reals (only their ordering
    matters).
    """
    lines = []
    if cs.subformula_text:
        lines.append("; subformulas:")
        for idx, text in enumerate(cs.subformula_text):
            lines.append(f";   [{idx}] {text}")
    logic = "QF_NRA" if any(_has_muleq(t) for t in cs.constraints) else "QF_LRA"
    lines.append(f"(set-logic {logic})")

    for (family, state), actions in cs.choice_domains.items():
        for action in actions:
            lines.append(f"(declare-const {_choice_symbol(family, state, action)} Bool)")
        for i, first in enumerate(actions):
            for second in actions[i + 1:]:
                lines.append(
                    "(assert (not (and "
                    f"{_choice_symbol(family, state, first)} "
                    f"{_choice_symbol(family, state, second)})))"
                )

    for name, kind in cs.variables.items():
        if kind == "holds":
            lines.append(f"(declare-const {name} Bool)")
        else:
            lines.append(f"(declare-const {name} Real)")
            if kind == "prob":
                lines.append(f"(assert (and (<= 0 {name}) (<= {name} 1)))")

    for term in cs.constraints:
        lines.append(f"(assert {term_sexpr(term)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
