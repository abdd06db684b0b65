"""Kripke-Joyal forcing over sheaves on finite spaces"""
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from toposforge.core.errors import NonGeometricError, ResolutionError, SortError
from toposforge.core.loaders import register_nuclei
from toposforge.services.corpus import truncation_sheaf
from toposforge.services.formula import Const, Eq, PropConst, Sort, Var, box_translate
from toposforge.services.forcing import (
    ForcingEngine, ForcingQuery, check_box_stability, check_box_theorem, check_constant_transfer,
    check_geometric_spreading, check_gray_elision, check_locality, check_metaproperty, check_monotonicity,
    check_stalk_open, check_unique_existence, check_witness_property, force, standard_rules, truth_value,
    verify_inference_rules,
)
from toposforge.services.frame import discrete
from toposforge.services.parser import parse
from toposforge.services.sheaf import Environment, constant_sheaf

from strategies import environments, formulas_over, seeds

F = Sort.sheaf("F")
DECIDABLE = "forall x:F. forall y:F. x = y \\/ ~(x = y)"


def test_double_negation_of_dense_open(sierpinski_env):
    engine = ForcingEngine(sierpinski_env)
    X = sierpinski_env.space
    assert engine.force(X.full, parse("~~U"))
    assert engine.truth_value(parse("~~U")).label == "X"


def test_excluded_middle_fails_on_sierpinski(sierpinski_env):
    engine = ForcingEngine(sierpinski_env)
    X = sierpinski_env.space
    phi = parse("U \\/ ~U")
    assert not engine.force(X.full, phi)
    assert engine.force(X.named_open("U"), phi)
    assert engine.truth_value(phi).label == "U"
    assert engine.truth_value(parse("~U")).label == "{}"


def test_false_only_on_the_empty_open(sierpinski_env):
    X = sierpinski_env.space
    engine = ForcingEngine(sierpinski_env)
    assert engine.force(X.empty, parse("false"))
    assert not engine.force(X.named_open("U"), parse("false"))


def test_module_level_helpers(sierpinski_env):
    X = sierpinski_env.space
    assert force(ForcingQuery(X, X.full, parse("~~U"), sierpinski_env))
    assert truth_value(parse("U"), sierpinski_env).open == X.named_open("U")


def test_decidable_equality(sierpinski_env, sierpinski):
    """Constant sheaves have decidable equality; a truncation sheaf does not"""
    assert ForcingEngine(sierpinski_env).force(sierpinski.full, parse(DECIDABLE))
    env = Environment(sierpinski)
    env.add_sheaf("F", truncation_sheaf(sierpinski, [1, 2]))
    engine = ForcingEngine(env)
    assert not engine.force(sierpinski.full, parse(DECIDABLE))
    assert engine.force(sierpinski.named_open("U"), parse(DECIDABLE))


def test_bound_variables_and_truth_values(sierpinski):
    env = Environment(sierpinski)
    G = truncation_sheaf(sierpinski, [1, 2])
    env.add_sheaf("F", G)
    x, y = G.global_sections
    phi = Eq(Var("x", F), Var("y", F))
    assert ForcingEngine(env).truth_value(phi, {"x": x, "y": y}).label == "U"
    with pytest.raises(SortError):
        ForcingEngine(env).force(sierpinski.full, phi, {"x": x})


def test_existence_without_global_witness(vee_env):
    """Both semantics force exists x:F. true, yet F has no global section"""
    X = vee_env.space
    phi = parse("exists x:F. true")
    assert ForcingEngine(vee_env).force(X.full, phi)
    assert ForcingEngine(vee_env, "covers").force(X.full, phi)
    assert vee_env.sheaves["F"].global_sections == ()
    instances = [("x", F, parse("true"))]
    assert check_witness_property(vee_env, instances).passed


def test_unknown_names(sierpinski_env):
    engine = ForcingEngine(sierpinski_env)
    X = sierpinski_env.space
    with pytest.raises(ResolutionError):
        engine.force(X.full, parse("V"))
    with pytest.raises(ResolutionError):
        engine.force(X.full, parse("box[nothing] U"))
    with pytest.raises(ResolutionError):
        engine.force(frozenset({1}), parse("true"))
    with pytest.raises(ValueError):
        ForcingEngine(sierpinski_env, "sometimes")


def test_inference_rules_hold_except_excluded_middle(sierpinski_env):
    rules = standard_rules(parse("U"), parse("~U"), parse("~~U"))
    results = verify_inference_rules(sierpinski_env, rules)
    by_name = {r.name: r for r in results}
    excluded = by_name.pop("rule excluded-middle")
    assert not excluded.passed
    assert excluded.status == "XFAIL"
    assert all(r.passed for r in by_name.values()), [r.name for r in by_name.values() if not r.passed]


def test_inference_rules_with_variables(sierpinski_env):
    x, y = Var("x", F), Var("y", F)
    rules = standard_rules(Eq(x, y), Eq(y, x), PropConst(Const("U")), F)
    results = verify_inference_rules(sierpinski_env, rules)
    assert any(r.name == "rule equality-subst" for r in results)
    assert all(r.passed for r in results if not r.expected_failure)


def test_locality():
    X = discrete(2)
    env = Environment(X)
    env.add_sheaf("F", constant_sheaf(X, (0, 1), "F"))
    cover = (X.open_of(["p0"]), X.open_of(["p1"]))
    assert check_locality(env, parse(DECIDABLE), cover)
    assert check_locality(env, parse("exists x:F. forall y:F. x = y"), cover)


def test_locality_of_existence(vee_env):
    X = vee_env.space
    cover = (X.open_of(["g", "a"]), X.open_of(["g", "b"]))
    assert check_locality(vee_env, parse("exists x:F. true"), cover)


def test_geometric_spreading(vee_env):
    assert check_geometric_spreading(vee_env, parse("exists x:F. true"))
    with pytest.raises(NonGeometricError):
        check_geometric_spreading(vee_env, parse("forall x:F. true"))


def test_box_theorem_on_sierpinski(sierpinski_env):
    for text in ("U \\/ ~U", DECIDABLE, "exists x:F. true", "U"):
        phi = parse(text)
        assert check_box_theorem(sierpinski_env, "negneg", phi), text
        assert check_box_theorem(sierpinski_env, "closed_U", phi), text
    X = sierpinski_env.space
    translated = box_translate(parse("U \\/ ~U"), "negneg").formula
    assert ForcingEngine(sierpinski_env).force(X.full, translated)


def test_box_stability_and_gray_elision(sierpinski_env):
    for text in ("U \\/ ~U", "exists x:F. x = x", "U => false"):
        phi = parse(text)
        assert check_box_stability(sierpinski_env, "negneg", phi)
        assert check_gray_elision(sierpinski_env, "negneg", phi)
    assert check_stalk_open(sierpinski_env, "point_sigma", parse("U \\/ exists x:F. true"))
    with pytest.raises(NonGeometricError):
        check_stalk_open(sierpinski_env, "negneg", parse("~U"))


def test_unique_existence(sierpinski_env):
    X = sierpinski_env.space
    env = sierpinski_env.copy()
    G = env.sheaves["F"]
    env.add_constant("c", "F", X.full, G.find_section("1", X.full))
    assert check_unique_existence(env, "x", F, Eq(Var("x", F), Const("c")))
    assert check_unique_existence(env, "x", F, parse("true"))


def test_constant_parameters_transfer(sierpinski_env):
    env = Environment(sierpinski_env.space)
    env.add_sheaf("F", sierpinski_env.sheaves["F"])
    for text in (DECIDABLE, "exists x:F. forall y:F. x = y", "forall x:F. exists y:F. ~(x = y)"):
        assert check_constant_transfer(env, parse(text)), text


def test_metaproperties(sierpinski_env, vee_env):
    U = PropConst(Const("U"))
    X_prop = PropConst(Const("X"))
    for result in check_metaproperty(sierpinski_env, "quasicompact", [(U, X_prop)]):
        assert result.passed
    assert all(r.passed for r in check_metaproperty(sierpinski_env, "local"))
    assert all(r.passed for r in check_metaproperty(vee_env, "local"))
    assert all(r.passed for r in check_metaproperty(vee_env, "irreducible"))
    X = discrete(2)
    env = Environment(X)
    assert all(r.passed for r in check_metaproperty(env, "irreducible"))
    with pytest.raises(ValueError):
        check_metaproperty(env, "compact")


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def test_forcing_is_monotone(data):
    env = data.draw(environments())
    phi = data.draw(formulas_over(env, depth=3))
    assert check_monotonicity(env, phi)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(env=environments(max_stalk=2), seed=seeds)
def test_cover_and_minimal_semantics_agree(env, seed):
    from toposforge.services import corpus

    phi = corpus.FormulaGenerator(corpus.make_rng(seed), env).formula(2)
    X = env.space
    minimal, covers = ForcingEngine(env), ForcingEngine(env, "covers")
    for U in X.opens:
        assert minimal.force(U, phi) == covers.force(U, phi)


def test_nuclei_registration(sierpinski):
    env = register_nuclei(Environment(sierpinski))
    assert {"negneg", "id", "open_U", "closed_U", "point_eta", "point_sigma"} <= set(env.nuclei)
