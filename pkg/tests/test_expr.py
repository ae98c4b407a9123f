import datetime as dt
import random

import pytest

from gamify import expr as E
from gamify.errors import (
    AbsentOperand,
    DivisionByZero,
    ExprSyntaxError,
    TypeMismatch,
    UnknownIdentifier,
)

from _oracles import random_scope, random_typed_expr, ref_outcome


TASK_SCOPE_IDS = {
    "plannedCompletionDate", "realCompletionDate", "estimatedEffort",
    "realEffort", "estimatedWorkUnits", "realWorkUnits", "grade",
}


class TestParse:
    def test_comparison_ast(self):
        ast = E.parse("realEffort < estimatedEffort")
        assert ast == E.Binary("<", E.Ident("realEffort"), E.Ident("estimatedEffort"))

    def test_conjunction_ast(self):
        ast = E.parse("Level <5 & Following <20")
        assert ast == E.Binary(
            "&",
            E.Binary("<", E.Ident("Level"), E.Num(5.0)),
            E.Binary("<", E.Ident("Following"), E.Num(20.0)),
        )

    def test_unbalanced_paren_is_syntax_error(self):
        with pytest.raises(ExprSyntaxError):
            E.parse("realEffort < (")

    def test_scope_signature_rejects_unknown(self):
        with pytest.raises(UnknownIdentifier):
            E.parse("nonexistentAttr > 1", TASK_SCOPE_IDS)
        E.parse("realEffort < estimatedEffort", TASK_SCOPE_IDS)

    def test_alias_operators(self):
        assert E.parse("true && false") == E.parse("true & false")
        assert E.parse("true || false") == E.parse("true | false")

    def test_precedence(self):
        # unary > * / > + - > comparison > & > |
        ast = E.parse("1 + 2 * 3 < 10 & true | false")
        assert ast == E.Binary(
            "|",
            E.Binary(
                "&",
                E.Binary("<",
                         E.Binary("+", E.Num(1.0), E.Binary("*", E.Num(2.0), E.Num(3.0))),
                         E.Num(10.0)),
                E.Bool(True),
            ),
            E.Bool(False),
        )

    def test_chained_comparison_rejected(self):
        with pytest.raises(ExprSyntaxError):
            E.parse("1 < 2 < 3")

    def test_date_literal(self):
        ast = E.parse('Date("2020-03-01")')
        assert ast == E.DateLit(dt.date(2020, 3, 1))

    def test_bad_date_literal(self):
        with pytest.raises(ExprSyntaxError):
            E.parse('Date("2020-13-40")')
        with pytest.raises(ExprSyntaxError):
            E.parse("Date(2020)")

    def test_bare_date_is_identifier(self):
        assert E.parse("Date") == E.Ident("Date")


class TestEvalBool:
    def test_case1_condition(self):
        ast = E.parse("realEffort < estimatedEffort")
        assert E.eval_bool(ast, {"realEffort": 18, "estimatedEffort": 20}) is True

    def test_case3_condition(self):
        ast = E.parse("realEffort < (estimatedEffort/2)")
        assert E.eval_bool(ast, {"realEffort": 8, "estimatedEffort": 20}) is True

    def test_absent_identifier_fails_closed(self):
        ast = E.parse("realEffort < 10")
        assert E.eval_bool(ast, {}) is False
        assert E.eval_bool(ast, {"realEffort": E.ABSENT}) is False

    def test_absence_collapses_smallest_comparison_only(self):
        ast = E.parse("realEffort < 10 | estimatedEffort > 1")
        assert E.eval_bool(ast, {"estimatedEffort": 5}) is True

    def test_type_mismatch_date_plus_number(self):
        ast = E.parse('Date("2020-01-01") + 1 > 0')
        with pytest.raises(TypeMismatch):
            E.eval_bool(ast, {})

    def test_non_boolean_result_rejected(self):
        with pytest.raises(TypeMismatch):
            E.eval_bool(E.parse("1 + 1"), {})

    def test_dates_compare_as_epoch_days(self):
        scope = {"d": dt.date(2021, 5, 3)}
        assert E.eval_bool(E.parse('d == Date("2021-05-03")'), scope) is True
        assert E.eval_bool(E.parse('d < Date("2021-05-04")'), scope) is True
        assert E.eval_bool(E.parse('Date("2021-05-03") == Date("2021-05-03")'), {}) is True


class TestEvalNumber:
    def test_plain_attribute(self):
        assert E.eval_number(E.parse("estimatedEffort"), {"estimatedEffort": 20}) == 20.0

    def test_case2_modifier(self):
        ast = E.parse("estimatedEffort - (realEffort - estimatedEffort)")
        assert E.eval_number(ast, {"estimatedEffort": 20, "realEffort": 22}) == 18.0

    def test_annihilator(self):
        assert E.eval_number(E.parse("0 * realEffort"), {"realEffort": 7}) == 0.0

    def test_absent_operand_fails_loud(self):
        with pytest.raises(AbsentOperand):
            E.eval_number(E.parse("estimatedEffort * 2"), {})

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            E.eval_number(E.parse("1 / (2 - 2)"), {})

    def test_negative_results_allowed(self):
        ast = E.parse("estimatedEffort - realEffort")
        assert E.eval_number(ast, {"estimatedEffort": 5, "realEffort": 9}) == -4.0


class TestFreeIdentifiers:
    def test_comparison(self):
        ast = E.parse("realEffort < estimatedEffort")
        assert E.free_identifiers(ast) == {"realEffort", "estimatedEffort"}

    def test_no_identifiers(self):
        assert E.free_identifiers(E.parse("1 < 2")) == set()

    def test_table5_predicate(self):
        ast = E.parse("Level <5 & Following <20")
        assert E.free_identifiers(ast) == {"Level", "Following"}


class TestInferType:
    TYPES = {"realEffort": E.NUMBER, "estimatedEffort": E.NUMBER, "d": E.DATE}

    def test_numeric(self):
        assert E.infer_type(E.parse("realEffort * 2"), self.TYPES) == E.NUMBER

    def test_boolean(self):
        assert E.infer_type(E.parse('d < Date("2020-01-01")'), self.TYPES) == E.BOOLEAN

    def test_rejects_date_arithmetic(self):
        with pytest.raises(TypeMismatch):
            E.infer_type(E.parse("d + 1"), self.TYPES)

    def test_rejects_unknown_identifier(self):
        with pytest.raises(UnknownIdentifier):
            E.infer_type(E.parse("mystery > 0"), self.TYPES)

    def test_rejects_logical_on_numbers(self):
        with pytest.raises(TypeMismatch):
            E.infer_type(E.parse("1 & 2"), self.TYPES)


class TestPrinter:
    SOURCES = [
        "realEffort < estimatedEffort",
        "Level <5 & Following <20",
        "estimatedEffort - (realEffort - estimatedEffort)",
        "realEffort < (estimatedEffort/2)",
        "!(a < 1) | b == 2 & c != 3",
        "-(x + 1) * 2 / 3 - -4",
        'Date("2020-01-01") < firstBehaviorDate',
        "1 + 2 + 3 - 4 * 5 / 6",
        "true & false | true",
        "(1 < 2) == (3 < 4)",
    ]

    @pytest.mark.parametrize("source", SOURCES)
    def test_round_trip(self, source):
        ast = E.parse(source)
        assert E.parse(E.to_source(ast)) == ast

    def test_round_trip_random(self):
        rng = random.Random(2024)
        for _ in range(300):
            want = rng.choice(["num", "bool"])
            ast = random_typed_expr(rng, want)
            assert E.parse(E.to_source(ast)) == ast


class TestDifferential:
    def test_matches_reference_interpreter(self):
        rng = random.Random(7)
        for _ in range(1000):
            want = rng.choice(["num", "bool"])
            ast = random_typed_expr(rng, want)
            scope = random_scope(rng)
            expected = ref_outcome(ast, scope, want)
            assert _outcome(ast, scope, want) == expected
            # The printed form must evaluate identically too.
            assert _outcome(E.parse(E.to_source(ast)), scope, want) == expected

    def test_evaluation_is_pure(self):
        rng = random.Random(99)
        for _ in range(50):
            ast = random_typed_expr(rng, "bool")
            scope = random_scope(rng)
            assert _outcome(ast, scope, "bool") == _outcome(ast, scope, "bool")


def _outcome(ast, scope, want):
    try:
        if want == "bool":
            return ("ok", E.eval_bool(ast, scope))
        return ("ok", E.eval_number(ast, scope))
    except (TypeMismatch, DivisionByZero, AbsentOperand) as err:
        return ("err", type(err).__name__)
