#!/usr/bin/env python3
"""Exact probability computation on chains.

The unbounded-until solver is exact rational linear algebra, so answers
like "probability 1" are the literal rational 1, not 0.999...; value
iteration approaches the same numbers from below.
"""

from fractions import Fraction

from hypermdp import (
    bounded_until_probs,
    enumerate_schedulers,
    induce_dtmc,
    next_probs,
    parse_mdp,
    qualitative_sets,
    until_probs,
    until_probs_vi,
)

COIN = """\
states: s0 s1 s2
labels: s0: init; s1: a
action s0 alpha: s0 1/2, s1 1/2
action s0 beta: s2 1
action s1 tau: s1 1
action s2 tau: s2 1
"""

mdp = parse_mdp(COIN)
alpha, beta = enumerate_schedulers(mdp)
chain = induce_dtmc(mdp, alpha)

everywhere = {s: True for s in chain.states}
target = {s: "a" in chain.labels[s] for s in chain.states}

s_zero, s_yes = qualitative_sets(chain, everywhere, target)
print("graph preprocessing: zero set", sorted(s_zero), "target set", sorted(s_yes))

reach = until_probs(chain, everywhere, target)
print("P(eventually a) under the flip action:", dict(reach))
print("  note s0 is exactly", reach["s0"], "(the self-loop geometric series sums to 1)")

bypass = induce_dtmc(mdp, beta)
print("P(eventually a) under the bypass action:", dict(until_probs(bypass, everywhere,
      {s: "a" in bypass.labels[s] for s in bypass.states})))

print("\nbounded windows from s0:")
for k1, k2 in ((0, 0), (0, 1), (1, 2), (0, 5)):
    vec = bounded_until_probs(chain, everywhere, target, k1, k2)
    print(f"  P(a within [{k1},{k2}]) = {vec['s0']}")

print("\none-step probability:", next_probs(chain, target)["s0"])

print("\nvalue iteration climbs toward the exact answer:")
for n in (1, 5, 10, 30):
    approx = until_probs_vi(chain, everywhere, target, n)["s0"]
    print(f"  {n:>2} iterations: {approx} = {float(approx):.10f}")
print("  exact:         ", reach["s0"])
print("  the 30-step gap is exactly (1/2)^30 =", Fraction(1, 2) ** 30)
