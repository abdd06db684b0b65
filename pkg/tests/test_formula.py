"""Formula syntax trees: printing, substitution, schemas and translations"""
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from toposforge.core.errors import SortError, UnboundedSchemaError
from toposforge.services.formula import (
    And, BigAnd, BigOr, Bot, Const, Eq, Exists, Forall, Implies, Modal, Not, Or, Power, PropConst, SchemaOr, Sort,
    Top, Var,
    box_translate, connectives_outside_modal, exists_unique, exposed_connectives, format_formula, free_vars,
    geometric_implication_shape, is_geometric, negneg_translate, substitute, unfold_schema,
)
from toposforge.services.parser import parse
from strategies import environments, formulas_over

F = Sort.sheaf("F")


def test_printer_spacing():
    """Equality gets spaces, negation and modal operators bind tightly"""
    phi = And(Eq(Const("a"), Const("b")), Not(PropConst(Const("U"))))
    assert format_formula(phi) == "a = b /\\ ~U"
    assert format_formula(Modal("j", Eq(Const("a"), Const("b")))) == "box[j] (a = b)"
    assert format_formula(Top()) == "true"
    assert format_formula(Bot()) == "false"


def test_printer_parenthesizes_by_precedence():
    a, b, c = (PropConst(Const(n)) for n in "ABC")
    assert format_formula(And(Or(a, b), c)) == "(A \\/ B) /\\ C"
    assert format_formula(Or(a, And(b, c))) == "A \\/ B /\\ C"
    assert format_formula(Implies(Implies(a, b), c)) == "(A => B) => C"
    assert format_formula(Implies(a, Implies(b, c))) == "A => B => C"


def test_printed_text_parses_back():
    for text in [
        "forall x:F. x = c => exists y:F. y = x",
        "~~(exists x:F. ~~(p(x) = y))",
        "box[j] (a = b) /\\ box[j] (c = d)",
        "bigvee[n=0..3] s^n = 0",
    ]:
        assert format_formula(parse(text, {"s": Sort.sheaf("O")})) == text


def test_free_vars_respects_binders():
    x, y = Var("x", F), Var("y", F)
    phi = And(Eq(x, y), Exists("y", F, Eq(y, x)))
    assert free_vars(phi) == {("x", F), ("y", F)}
    assert free_vars(Forall("x", F, Exists("y", F, Eq(x, y)))) == frozenset()


def test_substitution_avoids_capture():
    """Substituting y for x under a binder of y renames the binder"""
    body = Exists("y", F, Eq(Var("x", F), Var("y", F)))
    result = substitute(body, "x", Var("y", F))
    assert result == Exists("y'", F, Eq(Var("y", F), Var("y'", F)))


def test_substitution_checks_sorts():
    with pytest.raises(SortError):
        substitute(Eq(Var("x", F), Var("x", F)), "x", Var("z", Sort.sheaf("G")))


def test_schema_unfolding():
    s = Var("s", Sort.sheaf("O"))
    schema = parse("bigvee[n=0..] s^n = 0", {"s": Sort.sheaf("O")})
    assert isinstance(schema, SchemaOr)
    with pytest.raises(UnboundedSchemaError):
        unfold_schema(schema)
    unfolded = unfold_schema(schema, bound=2)
    assert isinstance(unfolded, BigOr)
    assert len(unfolded.parts) == 3
    assert unfolded.parts[0] == Eq(Power(s, 0), Const("0"))
    assert unfolded.parts[2] == Eq(Power(s, 2), Const("0"))


def test_geometric_classification():
    assert is_geometric(parse("exists x:F. x = c \\/ false"))
    assert is_geometric(parse("bigvee{U; V}"))
    assert not is_geometric(parse("U => V"))
    assert not is_geometric(parse("forall x:F. x = c"))


def test_geometric_implication_shape():
    shape = geometric_implication_shape(parse("forall x:F. x = c => exists y:F. y = x"))
    assert shape is not None
    prefix, antecedent, consequent = shape
    assert prefix == (("x", F),)
    assert antecedent == Eq(Var("x", F), Const("c"))
    assert isinstance(consequent, Exists)
    assert geometric_implication_shape(parse("(U => V) => W")) is None


def test_exists_unique_shape():
    phi = exists_unique("x", F, Eq(Var("x", F), Const("c")))
    assert isinstance(phi, Exists)
    assert isinstance(phi.body, And)
    assert isinstance(phi.body.right, Forall)
    assert phi.body.right.var == "x'"


def test_box_translation_boxes_every_connective():
    result = box_translate(parse("a = b /\\ c = d"), "j")
    assert format_formula(result.formula) == "box[j] (box[j] (a = b) /\\ box[j] (c = d))"
    assert not result.elided_gray_boxes


def test_box_translation_elides_gray_boxes():
    result = box_translate(parse("a = b /\\ c = d"), "j", elide_gray=True)
    assert format_formula(result.formula) == "box[j] (a = b) /\\ box[j] (c = d)"
    assert result.elided_gray_boxes


def test_box_translation_keeps_true_and_nests_modalities():
    assert box_translate(Top(), "j").formula == Top()
    assert format_formula(box_translate(parse("box[k] U"), "j").formula) == "box[j] box[k] box[j] U"


def test_box_translation_only_boxes_outside_implications_when_elided():
    """Elided translations keep ⇒ and ∀ unboxed, everything else sits under a box"""
    phi = parse("forall x:F. x = c => exists y:F. y = x \\/ U")
    translated = box_translate(phi, "j", elide_gray=True).formula
    assert connectives_outside_modal(translated) == {"forall", "implies"}


def test_negneg_translation():
    result = negneg_translate(parse("exists x:F. p(x)=y"))
    assert format_formula(result.formula) == "~~(exists x:F. ~~(p(x) = y))"
    assert negneg_translate(Top()).formula == Top()


def test_empty_big_connectives_parse():
    assert parse("bigvee{}") == BigOr(())
    assert parse("bigand{}") == BigAnd(())
    assert format_formula(BigOr(())) == "bigvee{}"


def test_implications_under_a_disjunction_end_up_boxed():
    """Only ⇒/∀/⋀ reachable through ∧, ⇒, ∀ and ⋀ stay outside the boxes"""
    phi = parse("U \\/ ~V")
    assert not is_geometric(phi)
    assert exposed_connectives(phi) == set()
    assert connectives_outside_modal(box_translate(phi, "j", elide_gray=True).formula) == set()
    assert exposed_connectives(parse("forall x:F. x = c => U")) == {"forall", "implies"}
    assert exposed_connectives(parse("exists x:F. x = c => U")) == set()


generated = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@generated
@given(data=st.data())
def test_generated_formulas_print_and_parse_back(data):
    env = data.draw(environments())
    phi = data.draw(formulas_over(env, depth=3, scope=(("x", F),)))
    assert parse(format_formula(phi), {"x": F}) == phi


@generated
@given(data=st.data())
def test_substitution_keeps_formulas_geometric(data):
    env = data.draw(environments())
    phi = data.draw(formulas_over(env, depth=3, geometric=True, scope=(("x", F),)))
    assert is_geometric(phi)
    for t in (Var("v1", F), Var("y", F), Const("c")):
        assert is_geometric(substitute(phi, "x", t))


@generated
@given(data=st.data())
def test_substitution_preserves_classification(data):
    env = data.draw(environments())
    phi = data.draw(formulas_over(env, depth=3, scope=(("x", F),)))
    assert is_geometric(substitute(phi, "x", Var("v1", F))) == is_geometric(phi)


@generated
@given(data=st.data())
def test_geometric_formulas_translate_entirely_under_boxes(data):
    env = data.draw(environments())
    phi = data.draw(formulas_over(env, depth=3, geometric=True))
    for elide in (True, False):
        assert connectives_outside_modal(box_translate(phi, "j", elide_gray=elide).formula) == set()


@generated
@given(data=st.data())
def test_elided_translation_leaves_the_exposed_connectives(data):
    env = data.draw(environments())
    phi = data.draw(formulas_over(env, depth=3))
    outside = connectives_outside_modal(box_translate(phi, "j", elide_gray=True).formula)
    assert outside == exposed_connectives(phi)
    if exposed_connectives(phi):
        assert not is_geometric(phi)
        assert outside
