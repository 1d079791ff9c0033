"""Three-valued evaluation: Kleene mode, supervaluation mode, and the
truth-assignment axioms (locality, exactness, precision monotonicity).

Oracles: a tiny independent classical evaluator for the generator
fragment; the supervaluation oracle is its glb over completions."""

import itertools
import random

import pytest

from deflog.errors import EvaluationError, NonTotalDefinitionError
from deflog.evaluator import KLEENE, SUPERVALUATION, evaluate, evaluate_exact
from deflog.interpretation import PartialInterpretation, read_structure
from deflog.parser import parse_formula, parse_theory
from deflog.syntax import (
    And, Atom1, ExistsFO, ForallFO, Iff, Implies, Not, Or, free_symbols,
)
from deflog.truthvalues import F, T, U, PartialSet, glb_prec, leq_prec
from deflog.vocab import Vocabulary

from gen import P0, P1, Q0, random_formula, random_interpretation

SAMPLES = 500


def classical_eval(e, i) -> bool:
    """Independent two-valued evaluator for the generator fragment."""
    if isinstance(e, Atom1):
        key = tuple(i.value(a.symbol) for a in e.args)
        return i.value(e.predicate).value(key) is T
    if isinstance(e, Not):
        return not classical_eval(e.body, i)
    if isinstance(e, And):
        return classical_eval(e.left, i) and classical_eval(e.right, i)
    if isinstance(e, Or):
        return classical_eval(e.left, i) or classical_eval(e.right, i)
    if isinstance(e, Implies):
        return not classical_eval(e.left, i) or classical_eval(e.right, i)
    if isinstance(e, Iff):
        return classical_eval(e.left, i) == classical_eval(e.right, i)
    if isinstance(e, (ForallFO, ExistsFO)):
        results = (classical_eval(e.body, i._expand(e.var, d)) for d in i.domain)
        return all(results) if isinstance(e, ForallFO) else any(results)
    raise AssertionError(f"oracle cannot handle {e!r}")


def super_oracle(e, i):
    preds = [s for s in free_symbols(e) if s.type.is_predicate]
    results = {classical_eval(e, j) for j in i.completions(preds)}
    if results == {True}:
        return T
    if results == {False}:
        return F
    return U


def parse(text, names="p q s"):
    vocab = Vocabulary.of([P0, Q0, P1])
    return parse_formula(text, vocab)


def struct(text):
    return read_structure(text, Vocabulary.of([P0, Q0, P1]))


class TestModeContrast:
    """The supervaluation is at least as precise as Kleene, strictly so
    on excluded-middle instances."""

    def test_excluded_middle_with_unknown_p(self):
        i = struct("domain = {a}\np = {(): u}\n")
        e = parse("p | ~p")
        assert evaluate(e, i, KLEENE) is U
        assert evaluate(e, i, SUPERVALUATION) is T

    def test_disjunction_of_distinct_unknowns_stays_unknown(self):
        i = struct("domain = {a}\np = {(): u}\nq = {(): u}\n")
        e = parse("p | q")
        assert evaluate(e, i, KLEENE) is U
        assert evaluate(e, i, SUPERVALUATION) is U

    def test_contradiction(self):
        i = struct("domain = {a}\np = {(): u}\n")
        e = parse("p & ~p")
        assert evaluate(e, i, KLEENE) is U
        assert evaluate(e, i, SUPERVALUATION) is F


class TestAxioms:
    """Randomized: the three truth-assignment axioms in both modes."""

    def test_exactness_both_modes_match_classical(self):
        rng = random.Random(11)
        for _ in range(SAMPLES // 2):
            e = random_formula(rng, rng.randint(0, 3))
            i = random_interpretation(rng, domain=("a", "b"))
            # force an exact interpretation
            i = next(i.completions(i.predicate_symbols()))
            expected = T if classical_eval(e, i) else F
            assert evaluate(e, i, KLEENE) is expected
            assert evaluate(e, i, SUPERVALUATION) is expected
            assert evaluate_exact(e, i) is expected

    def test_precision_monotonicity_and_mode_order(self):
        rng = random.Random(13)
        for _ in range(SAMPLES):
            e = random_formula(rng, rng.randint(0, 3))
            i = random_interpretation(rng, domain=("a", "b"))
            vk, vs = evaluate(e, i, KLEENE), evaluate(e, i, SUPERVALUATION)
            # kleene <=p supervaluation pointwise
            assert leq_prec(vk, vs)
            # supervaluation mode equals the brute-force oracle
            assert vs is super_oracle(e, i)
            # refine one unknown atom: both modes may only gain precision
            unknown = i.u_atoms(i.predicate_symbols())
            if unknown:
                j = i.revise([rng.choice(unknown)], rng.choice((T, F)))
                assert leq_prec(vk, evaluate(e, j, KLEENE))
                assert leq_prec(vs, evaluate(e, j, SUPERVALUATION))

    def test_locality(self):
        rng = random.Random(17)
        for _ in range(SAMPLES // 5):
            e = random_formula(rng, rng.randint(0, 2))
            i = random_interpretation(rng)
            # interpretations agreeing on the free symbols agree on e
            j = random_interpretation(rng)
            free = free_symbols(e)
            merged = j
            for s in free:
                if s.type.is_predicate:
                    merged = merged._expand(s, i.value(s))
            for mode in (KLEENE, SUPERVALUATION):
                assert evaluate(e, i, mode) is evaluate(e, merged, mode)


class TestConstructs:
    def test_quantifiers_over_partial_unary(self):
        i = struct("domain = {a, b}\ns = {(a): t, (b): u}\n")
        assert evaluate(parse("?x: s(x)"), i) is T
        assert evaluate(parse("!x: s(x)"), i) is U

    def test_comparisons(self):
        i = read_structure("domain = {1..3}\n", Vocabulary.of([P1]))
        assert evaluate(parse("1 < 2"), i) is T
        assert evaluate(parse("?x: x > 2"), i) is T
        assert evaluate(parse("!x: x + 1 > x"), i) is T
        # out-of-domain sums make atoms false, not errors
        assert evaluate(parse("?x: s(x + 3)"), i) is F

    def test_equality_on_non_integer_elements(self):
        i = struct("domain = {a, b}\n")
        assert evaluate(parse("?x: ?y: x = y"), i) is T
        assert evaluate(parse("!x: !y: x = y"), i) is F
        # order comparisons are integer-only: false on symbolic elements
        assert evaluate(parse("?x: ?y: x < y"), i) is F

    def test_cardinality_aggregate(self):
        i = struct("domain = {a, b}\ns = {(a): t, (b): u}\n")
        assert evaluate(parse("#{x: s(x)} > 0"), i) is T
        assert evaluate(parse("#{x: s(x)} = 2"), i) is U
        assert evaluate(parse("#{x: s(x)} = 0"), i) is F

    def test_sum_aggregate(self):
        vocab = Vocabulary.of([P1])
        i = read_structure("domain = {1..3}\ns = {(1): t, (2): t, (3): f}\n", vocab)
        e = parse_formula("sum{x: s(x)} = 3", vocab)
        assert evaluate(e, i) is T

    def test_second_order_quantifiers(self):
        i = struct("domain = {a, b}\ns = {(a): t, (b): f}\n")
        assert evaluate(parse("?? X[pred/1]: ((!x: X(x) => s(x)) & (?x: X(x)))"), i) is T
        assert evaluate(parse("!! X[pred/1]: (?x: X(x))"), i) is F  # empty X

    def test_definition_expression_values(self):
        i = struct("domain = {a}\np = {(): t}\nq = {(): f}\n")
        assert evaluate(parse("{p <- ~q.}"), i) is T
        assert evaluate(parse("{p <- q.}"), i) is F

    def test_let_requires_total_definition(self):
        i = struct("domain = {a}\nq = {(): t}\n")
        assert evaluate(parse("let {p <- ~q.} in p"), i) is F
        with pytest.raises(NonTotalDefinitionError):
            evaluate(parse("let {p <- ~p.} in p"), i)

    def test_evaluate_exact_demands_exact_input(self):
        i = struct("domain = {a}\np = {(): u}\n")
        with pytest.raises(EvaluationError):
            evaluate_exact(parse("p"), i)

    def test_unknown_mode_rejected(self):
        i = struct("domain = {a}\np = {(): t}\n")
        with pytest.raises(EvaluationError):
            evaluate(parse("p"), i, "classical")


class TestSecondOrderAtoms:
    def test_partial_so_argument_takes_glb_over_completions(self):
        text = """
        vocab { E: template so-pred(pred/1); s: pred/1; }
        formula f { E(s) }
        """
        th = parse_theory(text)
        E, s = th.vocabulary.get("E"), th.vocabulary.get("s")
        nonempty = PartialSet.from_map(
            {(rel,): T if rel else F
             for rel in [frozenset(), frozenset({("a",)})]}
        )
        exact = PartialInterpretation.make(
            ("a",), {E: nonempty, s: PartialSet.from_map({("a",): T})}
        )
        assert evaluate(th.formulas["f"], exact) is T
        partial = exact.expand(s, PartialSet.from_map({("a",): U}))
        # s may complete to {} (E false) or {a} (E true): unknown
        assert evaluate(th.formulas["f"], partial) is U
