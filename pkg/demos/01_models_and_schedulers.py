#!/usr/bin/env python3
"""Tour of the model layer: MDPs, schedulers, induced chains, composition.

A tiny two-action MDP shows the whole pipeline: parse and validate a
model, enumerate its memoryless schedulers, fix one to get a chain, and
run several chains side by side as a product.
"""

from hypermdp import enumerate_schedulers, induce_dtmc, parse_mdp, self_compose

COIN = """\
states: s0 s1 s2
labels: s0: init; s1: a
action s0 alpha: s0 1/2, s1 1/2
action s0 beta: s2 1
action s1 tau: s1 1
action s2 tau: s2 1
"""

mdp = parse_mdp(COIN)
print("states:", mdp.states)
print("enabled actions per state:")
for s in mdp.states:
    print(f"  {s}: {', '.join(mdp.enabled[s])}")

print(f"\nthe scheduler space has {mdp.scheduler_space_size()} elements:")
for sched in enumerate_schedulers(mdp):
    print(" ", dict(sched.as_dict()))

# fixing a scheduler removes all nondeterminism
alpha_first, beta_first = enumerate_schedulers(mdp)
chain = induce_dtmc(mdp, alpha_first)
print("\nchain induced by the alpha choice:")
for s in chain.states:
    row = ", ".join(f"{t} w.p. {p}" for t, p in chain.trans[s])
    print(f"  {s} -> {row}")

# two copies of the chain running independently, propositions tagged per copy
product = self_compose([chain, chain])
print(f"\nbinary self-composition: {len(product.states)} joint states")
print("labels at (s0, s1):", sorted(product.labels[("s0", "s1")]))
row = product.trans[("s0", "s0")]
print("row of (s0, s0):")
for target, p in row:
    print(f"  -> {target} w.p. {p}")
