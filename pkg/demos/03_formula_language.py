#!/usr/bin/env python3
"""The formula language: quantifier prefixes, sugar, well-formedness.

Formulas quantify schedulers first, then states bound to a scheduler
variable; bodies compare probability expressions over path operators.
Everything sugary (F, G, bounds as <=k, ->, =, xor, ...) is rewritten
into a small core at parse time.
"""

from hypermdp import check_well_formed, count_quantifiers, format_formula, parse_formula
from hypermdp.errors import QuantifierOrderViolation, UnboundStateVariable

examples = [
    "forall sched s. exists st x(s). P(X a(x)) < 0.5",
    "exists sched s. exists st x(s). init(x) & P(F a(x)) = 1",
    "forall sched s. forall st x(s). forall st y(s). (init(x) & init(y)) -> P(F a(x)) = P(F a(y))",
    "exists sched s. forall st x(s). exists st y(s). (init(x) & init(y)) -> P(F die=3(x)) = P(F die=3(y))",
]

for text in examples:
    f = parse_formula(text)
    check_well_formed(f)
    m, n = count_quantifiers(f)
    print(f"{m} scheduler / {n} state variables:  {text}")
    print("  desugared core:", format_formula(f))
    print()

print("G is one minus reaching the negation:")
g = parse_formula("forall sched s. forall st x(s). P(G a(x)) > 1/2")
print(" ", format_formula(g))

print("\nbinding rules are enforced:")
try:
    check_well_formed(parse_formula("P(X a(x)) < 1/2"))
except UnboundStateVariable as exc:
    print("  free state variable rejected:", exc)

from hypermdp.formula import Formula, Less, Next, Prop, ProbOf, SchedQuant, StateQuant, Const
from fractions import Fraction

backwards = Formula(
    prefix=(StateQuant(False, "x", "s"), SchedQuant(True, "s")),
    body=Less(ProbOf(Next(Prop("a", "x"))), Const(Fraction(1, 2))),
)
try:
    check_well_formed(backwards)
except QuantifierOrderViolation as exc:
    print("  state-before-scheduler prefix rejected:", exc)
