#!/usr/bin/env python3
"""Detecting probabilistic side channels in three little programs.

Each generator builds an MDP where scheduler choices select secrets (or
thread interleavings) and a universally quantified equality of reach
probabilities states "the observable distribution is secret-independent".
A false verdict means a leak, and the counterexample names the pair of
secrets (schedulers) an attacker would distinguish.
"""

from hypermdp import check
from hypermdp.cases import gen_password, gen_thread_sched, gen_timing_attack

for spec, story in (
    (gen_timing_attack(1), "branchy modular-exponentiation loop, 1 iteration"),
    (gen_password(1), "early-exit string comparison, 1 character"),
    (gen_thread_sched(0, 1), "two threads racing to write a flag, secrets 0 vs 1"),
):
    verdict = check(spec.mdp, spec.formula)
    print(f"{spec.name}: {story}")
    print(f"  {len(spec.mdp.states)} states, {spec.mdp.transition_count()} transitions, "
          f"{spec.mdp.scheduler_space_size()} schedulers")
    print(f"  secret-independent: {verdict.truth}")
    if verdict.mode == "counterexample":
        names = ", ".join(verdict.schedulers)
        print(f"  counterexample schedulers ({names}) distinguish the runs:")
        for name, sched in verdict.schedulers.items():
            branchy = {s: a for s, a in sched.as_dict().items()
                       if len(spec.mdp.enabled[s]) > 1}
            print(f"    {name}: {branchy}")
        if verdict.states:
            print(f"    observed from states: {dict(verdict.states)}")
    print()

print("all three channels leak: timing (long vs short branch), early exit")
print("(match vs mismatch), and scheduling (which thread writes last).")
