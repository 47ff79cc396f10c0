"""Exact probability computation on discrete-time Markov chains.

Qualitative reachability sets by graph analysis, unbounded until via an
exact rational linear system (Gaussian elimination), bounded until by
finite recursion, one-step probabilities, and a value-iteration oracle
used only for cross-checking.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, Mapping, Tuple

from .errors import BoundError, SingularSystem
from .model import Dtmc

Predicate = Mapping  # state -> bool, total over d.states
ProbVector = Dict

_ZERO = Fraction(0)
_ONE = Fraction(1)


def qualitative_sets(d: Dtmc, phi1: Predicate, phi2: Predicate) -> Tuple[FrozenSet, FrozenSet]:
    """(S_zero, S_yes) for ``phi1 U phi2``.

    S_yes is the phi2 states; S_zero the states with until-probability
    exactly 0, i.e. the complement of backward reachability from phi2
    through phi1 states.
    """
    preds: Dict = {s: [] for s in d.states}
    for s in d.states:
        for t, _ in d.trans[s]:
            preds[t].append(s)
    s_yes = frozenset(s for s in d.states if phi2[s])
    reach = set(s_yes)
    frontier = list(s_yes)
    while frontier:
        t = frontier.pop()
        for s in preds[t]:
            if s not in reach and phi1[s]:
                reach.add(s)
                frontier.append(s)
    s_zero = frozenset(s for s in d.states if s not in reach)
    return s_zero, s_yes


def until_probs(d: Dtmc, phi1: Predicate, phi2: Predicate) -> ProbVector:
    """Exact least-fixed-point solution of ``P(phi1 U phi2)`` per state.

    1 on S_yes, 0 on S_zero (which covers the not-phi1-nor-phi2 states);
    the remaining states form a uniquely solvable linear system.
    """
    s_zero, s_yes = qualitative_sets(d, phi1, phi2)
    result: ProbVector = {}
    unknown = []
    for s in d.states:
        if s in s_yes:
            result[s] = _ONE
        elif s in s_zero:
            result[s] = _ZERO
        else:
            unknown.append(s)
    if not unknown:
        return result

    index = {s: i for i, s in enumerate(unknown)}
    m = len(unknown)
    # p_s - sum_{s' unknown} P(s,s') p_s' = sum_{s' in S_yes} P(s,s')
    matrix = [[_ZERO] * m for _ in range(m)]
    rhs = [_ZERO] * m
    for s in unknown:
        i = index[s]
        matrix[i][i] = _ONE
        for t, p in d.trans[s]:
            if t in index:
                matrix[i][index[t]] -= p
            elif t in s_yes:
                rhs[i] += p
    solution = _solve_linear(matrix, rhs)
    for s, value in zip(unknown, solution):
        result[s] = value
    return result


def _solve_linear(matrix, rhs):
    """Gaussian elimination with partial pivoting, exact over Fractions."""
    m = len(matrix)
    for col in range(m):
        pivot = max(range(col, m), key=lambda r: abs(matrix[r][col]))
        if matrix[pivot][col] == 0:
            raise SingularSystem(f"no pivot in column {col}")
        if pivot != col:
            matrix[col], matrix[pivot] = matrix[pivot], matrix[col]
            rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = 1 / matrix[col][col]
        for r in range(col + 1, m):
            factor = matrix[r][col] * inv
            if factor == 0:
                continue
            row_r, row_c = matrix[r], matrix[col]
            for c in range(col, m):
                row_r[c] -= factor * row_c[c]
            rhs[r] -= factor * rhs[col]
    solution = [_ZERO] * m
    for r in range(m - 1, -1, -1):
        acc = rhs[r]
        row = matrix[r]
        for c in range(r + 1, m):
            acc -= row[c] * solution[c]
        solution[r] = acc / row[r]
    return solution


def bounded_until_probs(d: Dtmc, phi1: Predicate, phi2: Predicate, k1: int, k2: int) -> ProbVector:
    """``P(phi1 U[k1,k2] phi2)`` by the three-case bound recursion."""
    if k1 < 0 or k2 < 0 or k1 > k2:
        raise BoundError(f"bad bounds [{k1},{k2}]")
    if k2 == 0:
        return {s: (_ONE if phi2[s] else _ZERO) for s in d.states}
    if k1 == 0:
        prev = bounded_until_probs(d, phi1, phi2, 0, k2 - 1)
        out = {}
        for s in d.states:
            if phi2[s]:
                out[s] = _ONE
            elif not phi1[s]:
                out[s] = _ZERO
            else:
                out[s] = sum((p * prev[t] for t, p in d.trans[s]), _ZERO)
        return out
    prev = bounded_until_probs(d, phi1, phi2, k1 - 1, k2 - 1)
    out = {}
    for s in d.states:
        if not phi1[s]:
            out[s] = _ZERO
        else:
            out[s] = sum((p * prev[t] for t, p in d.trans[s]), _ZERO)
    return out


def next_probs(d: Dtmc, phi: Predicate) -> ProbVector:
    """One-step probability of hitting a phi state."""
    return {
        s: sum((p for t, p in d.trans[s] if phi[t]), _ZERO)
        for s in d.states
    }


def until_probs_vi(d: Dtmc, phi1: Predicate, phi2: Predicate, iterations: int) -> ProbVector:
    """Value-iteration lower bound for ``P(phi1 U phi2)``.

    Starts from the indicator of the phi2 states and applies the one-step
    expectation, keeping phi2 states at 1 and unfit states at 0.  Converges
    monotonically from below to until_probs; oracle only, never on the
    verdict path.
    """
    vec = {s: (_ONE if phi2[s] else _ZERO) for s in d.states}
    for _ in range(iterations):
        nxt = {}
        for s in d.states:
            if phi2[s]:
                nxt[s] = _ONE
            elif not phi1[s]:
                nxt[s] = _ZERO
            else:
                nxt[s] = sum((p * vec[t] for t, p in d.trans[s]), _ZERO)
        vec = nxt
    return vec
