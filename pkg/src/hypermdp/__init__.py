"""Exact model checking of probabilistic hyperproperties on MDPs.

Two engines decide formulas with scheduler and state quantifiers over
explicit-state Markov decision processes: direct quantifier enumeration
and an eager constraint-encoding procedure with witness extraction.
All probability arithmetic is exact rational.
"""

from .analysis import bounded_until_probs, next_probs, qualitative_sets, until_probs, until_probs_vi
from .enumcheck import Verdict, check, replay
from .formula import Formula, check_well_formed, count_quantifiers, format_formula, parse_formula
from .model import (
    Dtmc,
    Mdp,
    SchedulerAssignment,
    dtmc_as_mdp,
    enumerate_schedulers,
    format_mdp,
    induce_dtmc,
    load_mdp,
    parse_mdp,
    self_compose,
    validate_mdp,
)
from .smt import SmtVerdict, decode_witness, encode_main, solve_eager
from .constraints import emit_smtlib2

__all__ = [
    "Dtmc",
    "Formula",
    "Mdp",
    "SchedulerAssignment",
    "SmtVerdict",
    "Verdict",
    "bounded_until_probs",
    "check",
    "check_well_formed",
    "count_quantifiers",
    "decode_witness",
    "dtmc_as_mdp",
    "emit_smtlib2",
    "encode_main",
    "enumerate_schedulers",
    "format_formula",
    "format_mdp",
    "induce_dtmc",
    "load_mdp",
    "next_probs",
    "parse_formula",
    "parse_mdp",
    "qualitative_sets",
    "replay",
    "self_compose",
    "solve_eager",
    "until_probs",
    "until_probs_vi",
    "validate_mdp",
]
