import random
from fractions import Fraction

import pytest

from hypermdp.errors import (
    FormulaSyntaxError,
    QuantifierOrderViolation,
    UnboundStateVariable,
)
from hypermdp.formula import (
    And,
    Arith,
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
    check_well_formed,
    cmp_eq,
    count_quantifiers,
    format_formula,
    parse_formula,
)
from .helpers import random_formula, scope_check

TRUE = TrueF()


class TestParse:
    def test_reach_equality(self):
        f = parse_formula("forall sched s. forall st x(s). P(F a(x)) = 1")
        assert f.prefix == (SchedQuant(False, "s"), StateQuant(False, "x", "s"))
        reach = ProbOf(Until(TRUE, Prop("a", "x")))
        assert f.body == cmp_eq(reach, Const(Fraction(1)))

    def test_globally_is_one_minus_reach_of_negation(self):
        f = parse_formula("forall sched s. forall st x(s). P(G a(x)) < 1")
        expected = Arith("-", Const(Fraction(1)), ProbOf(Until(TRUE, NotF(Prop("a", "x")))))
        assert f.body == Less(expected, Const(Fraction(1)))

    def test_conformance_prefix_shape(self):
        f = parse_formula(
            "exists sched s. forall st x(s). exists st y(s)."
            " (init(x) & init(y)) -> P(F a(x)) = P(F a(y))"
        )
        kinds = [(q.exists, type(q).__name__) for q in f.prefix]
        assert kinds == [
            (True, "SchedQuant"),
            (False, "StateQuant"),
            (True, "StateQuant"),
        ]

    def test_decimal_and_rational_constants_are_exact(self):
        f = parse_formula("forall sched s. forall st x(s). P(X a(x)) < 0.5")
        g = parse_formula("forall sched s. forall st x(s). P(X a(x)) < 1/2")
        assert f.body == g.body

    def test_bounded_until_sugar(self):
        f = parse_formula("exists sched s. exists st x(s). P(true U<=3 a(x)) > 0")
        g = parse_formula("exists sched s. exists st x(s). P(F[0,3] a(x)) > 0")
        assert f.body == g.body

    def test_proposition_names_with_equals_segment(self):
        f = parse_formula("forall sched s. forall st x(s). P(F die=3(x)) = 1/6")
        props = [n for n in str(f.body).split() if "die=3" in n]
        assert props  # parsed as a single proposition token

    def test_unary_minus(self):
        f = parse_formula("forall sched s. forall st x(s). -1/2 < P(X a(x)) - 1/2")
        assert isinstance(f.body, Less)
        assert f.body.left == Arith("-", Const(Fraction(0)), Const(Fraction(1, 2)))

    def test_xor_sugar(self):
        f = parse_formula("forall sched s. forall st x(s). forall st y(s). a(x) xor a(y)")
        g = parse_formula("forall sched s. forall st x(s). forall st y(s). a(x) ^ a(y)")
        assert f.body == g.body
        assert isinstance(f.body, NotF)

    def test_thresholds_outside_unit_interval(self):
        f = parse_formula("exists sched s. exists st x(s). P(F a(x)) + P(F b(x)) < 3/2")
        assert isinstance(f.body, Less)
        assert f.body.right == Const(Fraction(3, 2))

    def test_syntax_error_carries_position(self):
        with pytest.raises(FormulaSyntaxError) as exc:
            parse_formula("forall sched s. forall st x(s). P(F a(x)")
        assert exc.value.line == 1

    def test_bad_bounds_rejected(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("exists sched s. exists st x(s). P(true U[3,1] a(x)) > 0")

    def test_non_integer_bound_rejected(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("exists sched s. exists st x(s). P(true U[1/2,2] a(x)) > 0")

    def test_zero_denominator_constant_rejected(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("exists sched s. exists st x(s). P(X a(x)) < 1/0")

    def test_garbage_input_raises_only_package_errors(self):
        # malformed input must never escape as a raw Python exception
        from hypermdp.errors import HyperMdpError

        rng = random.Random(99)
        alphabet = "abxs01 ()[]<>=+-*&|!^./,#\nPXUFG"
        for _ in range(500):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 40)))
            try:
                parse_formula(text)
            except HyperMdpError:
                pass


class TestWellFormed:
    def test_good_prefix(self):
        f = parse_formula("forall sched s. exists st x(s). P(X a(x)) < 1/2")
        check_well_formed(f)

    def test_unbound_state_variable(self):
        f = parse_formula("P(X a(x)) < 1/2")
        with pytest.raises(UnboundStateVariable):
            check_well_formed(f)

    def test_state_quantifier_before_its_scheduler(self):
        f = Formula(
            prefix=(StateQuant(False, "x", "s"), SchedQuant(True, "s")),
            body=Less(ProbOf(Next(Prop("a", "x"))), Const(Fraction(1, 2))),
        )
        with pytest.raises(QuantifierOrderViolation):
            check_well_formed(f)

    def test_matches_independent_scope_checker(self):
        rng = random.Random(42)
        agree = 0
        for _ in range(200):
            f = random_formula(rng)
            ours = None
            try:
                check_well_formed(f)
            except Exception as exc:
                ours = exc
            theirs = scope_check(f)
            assert (ours is None) == (theirs is None), (f, ours, theirs)
            agree += 1
        assert agree == 200

    def test_bound_variable_renaming_preserves_verdict(self):
        rng = random.Random(43)
        for _ in range(100):
            f = random_formula(rng)

            def rename(name):
                return name + "_r"

            renamed_prefix = []
            for q in f.prefix:
                if isinstance(q, SchedQuant):
                    renamed_prefix.append(SchedQuant(q.exists, rename(q.name)))
                else:
                    renamed_prefix.append(StateQuant(q.exists, rename(q.name), rename(q.sched)))

            def rename_body(node):
                if isinstance(node, Prop):
                    return Prop(node.name, rename(node.var))
                if isinstance(node, And):
                    return And(rename_body(node.left), rename_body(node.right))
                if isinstance(node, NotF):
                    return NotF(rename_body(node.operand))
                if isinstance(node, Less):
                    return Less(rename_p(node.left), rename_p(node.right))
                return node

            def rename_p(node):
                if isinstance(node, Arith):
                    return Arith(node.op, rename_p(node.left), rename_p(node.right))
                if isinstance(node, ProbOf):
                    path = node.path
                    if isinstance(path, Next):
                        return ProbOf(Next(rename_body(path.operand)))
                    if isinstance(path, Until):
                        return ProbOf(Until(rename_body(path.left), rename_body(path.right)))
                    return ProbOf(
                        type(path)(rename_body(path.left), rename_body(path.right), path.k1, path.k2)
                    )
                return node

            g = Formula(prefix=tuple(renamed_prefix), body=rename_body(f.body))
            assert scope_check(f) == scope_check(g)


class TestCounts:
    def test_conformance_counts(self):
        f = parse_formula(
            "exists sched s. forall st x(s). exists st y(s)."
            " (init(x) & init(y)) -> P(F a(x)) = P(F a(y))"
        )
        assert count_quantifiers(f) == (1, 2)

    def test_two_scheduler_counts(self):
        f = parse_formula(
            "forall sched s1. forall sched s2. forall st x(s1). forall st y(s2)."
            " (init(x) & init(y)) -> P(F a(x)) = P(F a(y))"
        )
        assert count_quantifiers(f) == (2, 2)

    def test_closed_body(self):
        f = parse_formula("1/2 < 1")
        assert count_quantifiers(f) == (0, 0)
        check_well_formed(f)


class TestRoundTrip:
    def test_print_parse_identity_on_random_asts(self):
        rng = random.Random(17)
        for _ in range(150):
            f = random_formula(rng)
            printed = format_formula(f)
            again = parse_formula(printed)
            assert again == f, printed

    def test_desugaring_preserves_constant_arithmetic(self):
        # closed comparisons: evaluate the sugared text directly with exact
        # arithmetic and compare against evaluating the desugared AST
        cases = [
            ("1/2 + 1/4 <= 3/4", True),
            ("1/2 * 1/2 = 1/4", True),
            ("1 - 1/3 != 2/3", False),
            ("2/3 > 1/2 + 1/6", False),
            ("1/3 >= 1/3", True),
            ("0.25 = 1/4", True),
        ]

        def eval_const_body(body):
            if isinstance(body, TrueF):
                return True
            if isinstance(body, And):
                return eval_const_body(body.left) and eval_const_body(body.right)
            if isinstance(body, NotF):
                return not eval_const_body(body.operand)
            if isinstance(body, Less):
                return eval_const_pexpr(body.left) < eval_const_pexpr(body.right)
            raise AssertionError(body)

        def eval_const_pexpr(p):
            if isinstance(p, Const):
                return p.value
            ops = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b}
            return ops[p.op](eval_const_pexpr(p.left), eval_const_pexpr(p.right))

        for text, expected in cases:
            f = parse_formula(text)
            assert eval_const_body(f.body) is expected
