"""Concrete syntax for formulas"""
import pytest

from toposforge.core.errors import FormulaSyntaxError, SortError, UnboundedQuantificationError
from toposforge.services.formula import (
    OMEGA, And, App, Const, Eq, Forall, Implies, Member, Modal, Not, Or, Power, Pred, PropConst, Sort, Var,
)
from toposforge.services.parser import FormulaParser, parse, parse_sort

F = Sort.sheaf("F")
O = Sort.sheaf("O")


def prop(name):
    return PropConst(Const(name))


def test_connective_precedence():
    """/\\ binds tighter than \\/, which binds tighter than =>"""
    phi = parse("a = b /\\ c = d \\/ e = f")
    expected = Or(
        And(Eq(Const("a"), Const("b")), Eq(Const("c"), Const("d"))),
        Eq(Const("e"), Const("f")),
    )
    assert phi == expected
    assert parse("A => B => C") == Implies(prop("A"), Implies(prop("B"), prop("C")))
    assert parse("~A /\\ B") == And(Not(prop("A")), prop("B"))
    assert parse("box[j] A \\/ B") == Or(Modal("j", prop("A")), prop("B"))


def test_quantifier_name_lists():
    phi = parse("forall x, y:F. x = y")
    assert phi == Forall("x", F, Forall("y", F, Eq(Var("x", F), Var("y", F))))


def test_arithmetic_terms():
    phi = parse("s + t*u = 0", {"s": O, "t": O, "u": O})
    s, t, u = Var("s", O), Var("t", O), Var("u", O)
    assert phi == Eq(App("add", (s, App("mul", (t, u)))), Const("0"))
    assert parse("pow(s, 2) = 1", {"s": O}) == Eq(Power(s, 2), Const("1"))


def test_applications_become_predicates_when_standing_alone():
    phi = parse("forall s:O. inv(s) => nilp(s)")
    assert phi.body == Implies(Pred("inv", (Var("s", O),)), Pred("nilp", (Var("s", O),)))


def test_syntax_error_reports_offset():
    with pytest.raises(FormulaSyntaxError) as excinfo:
        parse("forall x:F. (")
    assert excinfo.value.position == 13
    assert excinfo.value.text == "forall x:F. ("
    assert "offset 13" in str(excinfo.value)


def test_unexpected_character():
    with pytest.raises(FormulaSyntaxError) as excinfo:
        parse("a = b $")
    assert excinfo.value.position == 6


def test_unbounded_sorts_are_rejected():
    for sort in ("Set", "Sh", "Type"):
        with pytest.raises(UnboundedQuantificationError):
            parse(f"forall x:{sort}. true")
    assert issubclass(UnboundedQuantificationError, SortError)


def test_declarations_and_known_constants():
    assert parse("x = y", {"x": F}) == Eq(Var("x", F), Const("y"))
    with pytest.raises(SortError, match="unbound variable x"):
        parse("x = y", constants={"y"})
    assert parse("1 = 0", constants=set()) == Eq(Const("1"), Const("0"))


def test_sort_errors():
    with pytest.raises(SortError):
        parse("s^n = 0", {"s": O})
    with pytest.raises(SortError):
        parse("1")
    with pytest.raises(SortError):
        parse("x in S", {"x": F, "S": F})
    assert parse("x in S", {"x": F, "S": Sort.power(F)}) == Member(Var("x", F), Var("S", Sort.power(F)))


def test_parse_sort():
    assert parse_sort("F") == F
    assert parse_sort("Omega") == OMEGA
    assert parse_sort("P(F)") == Sort.power(F)
    assert parse_sort("P(P(F))") == Sort.power(Sort.power(F))


def test_parser_instances_are_independent():
    parser = FormulaParser()
    assert parser.parse("true") == parse("true")
