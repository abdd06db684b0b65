"""Sheaves on finite spaces: validation, derived sheaves, sheafification, flabbiness"""
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from toposforge.core.errors import GluingError, NotFunctorialError, ResolutionError, SheafError
from toposforge.services.corpus import truncation_sheaf
from toposforge.services.forcing import (
    check_comprehension_equivalence, check_comprehension_stalks, equivalent_rewrites,
)
from toposforge.services.formula import Sort
from toposforge.services.frame import discrete, nucleus_identity, nucleus_negneg
from toposforge.services.parser import parse
from toposforge.services.sheaf import (
    Environment, check_sheaf, comprehend, constant_sheaf, extension_by_empty, find_sheaf_isomorphism,
    flabbiness, from_tables, is_box_separated, is_box_sheaf, is_flabby, matching_families, omega_sheaf,
    plus_construction, power_object, sheafify, singleton_sheaf, stalk,
)
from strategies import environments, formulas_over


def test_constant_sheaf_sections(sierpinski):
    F = check_sheaf(constant_sheaf(sierpinski, (0, 1), "F"))
    U = sierpinski.named_open("U")
    assert len(F.global_sections) == 2
    assert len(F.sections(U)) == 2
    assert len(F.sections(sierpinski.empty)) == 1
    s = F.find_section("1", sierpinski.full)
    assert F.label(F.restrict(s, sierpinski.full, U)) == "1"


def test_constant_sheaf_on_discrete_space():
    X = discrete(2)
    F = check_sheaf(constant_sheaf(X, (0, 1)), exhaustive=True)
    assert len(F.global_sections) == 4
    assert {F.label(s) for s in F.global_sections} == {"0", "1", "{p0:0,p1:1}", "{p0:1,p1:0}"}


def test_find_section_unknown_label(sierpinski):
    F = constant_sheaf(sierpinski, (0, 1), "F")
    with pytest.raises(ResolutionError):
        F.find_section("7", sierpinski.full)


def test_gluing_failure_is_reported():
    X = discrete(2)
    p0, p1 = X.open_of(["p0"]), X.open_of(["p1"])
    F = from_tables(
        "G",
        X,
        {X.empty: ["*"], p0: ["a", "b"], p1: ["a"], X.full: ["a"]},
        {(X.full, p0): {"a": "a"}, (X.full, p1): {"a": "a"}},
    )
    with pytest.raises(GluingError) as excinfo:
        check_sheaf(F)
    assert excinfo.value.family == ("b", "a")


def test_empty_sections_must_be_a_singleton(sierpinski):
    F = from_tables("G", sierpinski, {sierpinski.empty: ["x", "y"], sierpinski.full: []}, {})
    with pytest.raises(SheafError):
        check_sheaf(F)


def test_missing_restriction_is_not_functorial(sierpinski):
    U = sierpinski.named_open("U")
    F = from_tables("G", sierpinski, {sierpinski.empty: ["*"], U: ["a"], sierpinski.full: ["a"]}, {})
    with pytest.raises(NotFunctorialError):
        check_sheaf(F)


def test_sheaf_without_global_sections(vee_sheaf):
    """Every stalk is inhabited but the local choices do not glue"""
    X = vee_sheaf.space
    assert vee_sheaf.global_sections == ()
    cover = (X.open_of(["g", "a"]), X.open_of(["g", "b"]))
    assert matching_families(vee_sheaf, cover) == []


def test_omega_and_power_object(sierpinski):
    assert len(omega_sheaf(sierpinski).global_sections) == 3
    point = discrete(1)
    P = power_object(constant_sheaf(point, (0, 1)))
    assert len(P.global_sections) == 4
    assert len(power_object(singleton_sheaf(point)).global_sections) == 2


def test_subsheaves(sierpinski):
    F = constant_sheaf(sierpinski, (0, 1), "F")
    U = sierpinski.named_open("U")
    sub = extension_by_empty(F, U)
    sub.check()
    assert all(sub.contains(s, U) for s in F.sections(U))
    assert not any(sub.contains(s, sierpinski.full) for s in F.global_sections)
    assert sub.as_sheaf().global_sections == ()

    env = Environment(sierpinski)
    env.add_sheaf("F", F)
    one = F.find_section("1", sierpinski.full)
    env.add_constant("c", "F", sierpinski.full, one)
    ones = comprehend(F, parse("x = c", {"x": Sort.sheaf("F")}), env, "x")
    assert [F.label(s) for s in ones.as_sheaf().global_sections] == ["1"]


def test_sheaf_isomorphism(sierpinski):
    F = constant_sheaf(sierpinski, (0, 1), "F")
    G = constant_sheaf(sierpinski, ("a", "b"), "G")
    assert find_sheaf_isomorphism(F, G) is not None
    assert find_sheaf_isomorphism(F, truncation_sheaf(sierpinski, [1, 2])) is None


def test_constant_sheaf_is_a_sheaf_for_every_nucleus(sierpinski):
    F = constant_sheaf(sierpinski, (0, 1), "F")
    assert is_box_sheaf(F, nucleus_identity(sierpinski.frame))
    assert is_box_sheaf(F, nucleus_negneg(sierpinski))


def test_sheafification_along_negneg(sierpinski):
    j = nucleus_negneg(sierpinski)
    F = constant_sheaf(sierpinski, (0, 1), "F")
    G, unit = sheafify(F, j)
    assert G.name == "a(F)"
    assert is_box_sheaf(G, j)
    assert unit.is_injective()
    assert len(G.global_sections) == 2


def test_sheafification_collapses_unseparated_sections(sierpinski):
    """Two global sections that agree on the dense open U are identified"""
    j = nucleus_negneg(sierpinski)
    F = truncation_sheaf(sierpinski, [1, 2])
    assert len(F.global_sections) == 2
    assert not is_box_separated(F, j)
    plus, unit = plus_construction(F, j)
    assert is_box_separated(plus, j)
    assert not unit.is_injective()
    G, _ = sheafify(F, j)
    assert is_box_sheaf(G, j)
    assert len(G.global_sections) == 1


def test_flabbiness(sierpinski, vee_sheaf):
    assert is_flabby(constant_sheaf(sierpinski, (0, 1), "F"))
    assert is_flabby(constant_sheaf(discrete(2), (0, 1), "F"))
    assert not is_flabby(vee_sheaf)
    report = flabbiness(vee_sheaf)
    assert not report.surjective_restrictions
    assert report.locally_extendable == report.internal == report.surjective_restrictions


def test_stalks(vee_sheaf):
    X = vee_sheaf.space
    assert len(stalk(vee_sheaf, X.point_index("g"))) == 2
    assert len(stalk(vee_sheaf, X.point_index("a"))) == 1


def test_comprehension_of_equivalent_formulas(sierpinski):
    F = constant_sheaf(sierpinski, (0, 1), "F")
    env = Environment(sierpinski)
    env.add_sheaf("F", F)
    env.add_constant("c", "F", sierpinski.full, F.find_section("1", sierpinski.full))
    phi = parse("x = c", {"x": Sort.sheaf("F")})
    for left, right in equivalent_rewrites(phi):
        assert check_comprehension_equivalence(env, "F", "x", left, right)
    assert check_comprehension_stalks(env, "F", "x", phi)
    assert not check_comprehension_equivalence(env, "F", "x", phi, parse("~(x = c)", {"x": Sort.sheaf("F")}))


generated = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@generated
@given(data=st.data())
def test_comprehension_respects_equivalence(data):
    env = data.draw(environments(max_stalk=2))
    phi = data.draw(formulas_over(env, depth=2, scope=(("x", Sort.sheaf("F")),)))
    for left, right in equivalent_rewrites(phi):
        assert check_comprehension_equivalence(env, "F", "x", left, right)


@generated
@given(data=st.data())
def test_geometric_comprehension_stalks_are_satisfying_germs(data):
    env = data.draw(environments(max_stalk=2))
    phi = data.draw(formulas_over(env, depth=2, geometric=True, scope=(("x", Sort.sheaf("F")),)))
    assert check_comprehension_stalks(env, "F", "x", phi)
