"""Spectra of finite rings: frame, structure sheaf, generic filter and quasicoherence"""
import pytest

from toposforge.core.errors import NotLocalError
from toposforge.services.finring import (
    identity_map, ideal_generated, projection_map, regular_module, submodules, zmod,
)
from toposforge.services.frame import points_of_frame
from toposforge.services.sheaf import extension_by_empty
from toposforge.services.spectrum import (
    check_generic_metaproperty, check_internal_quasicoherence, check_stronger_generic_statement,
    check_structure_sheaf, describe_spectrum, expected_ring_properties, filters_over_units, generic_filter,
    internal_ring_properties, local_spectrum_frame, prime_elimination_table, quasicoherator, spectrum,
    spec_space, structure_sheaf, tilde,
)


def test_spectrum_of_zmod_12(zmod12):
    spec = spectrum(zmod12)
    X = spec.space
    assert spec.spec_frame.frame.size == 4
    assert set(X.points) == {"p2", "p3"}
    assert X.label(spec.basic_open(2)) == "D(2)"
    assert spec.basic_open(2) == frozenset({X.point_index("p3")})
    assert spec.basic_open(1) == X.full
    assert spec.basic_open(6) == X.empty


def test_one_point_spectrum():
    assert len(spectrum(zmod(4)).space) == 1


def test_structure_sheaf_sections(zmod12):
    assert check_structure_sheaf(zmod12) == []
    O = structure_sheaf(zmod12)
    assert len(O.global_sections) == 12
    summary = describe_spectrum(zmod12)
    assert summary.sections["X"] == 12
    assert summary.size == 12
    assert len(summary.points) == 2


@pytest.mark.parametrize("n", [4, 6])
def test_internal_ring_properties_match_classical(n):
    A = zmod(n)
    assert internal_ring_properties(A) == expected_ring_properties(A)


def test_structure_sheaf_is_local_internally():
    properties = internal_ring_properties(zmod(6))
    assert properties["local"]
    assert properties["field"]
    assert not internal_ring_properties(zmod(4))["field"]


def test_generic_filter(zmod12):
    G = generic_filter(zmod12)
    assert G.failing_axioms() == []
    assert G.law_violations() == []
    assert check_generic_metaproperty(zmod12, "exists b:A. a = b*g", "a", {"g": 2})


def test_stronger_statement_needs_nilpotent_or_invertible():
    A = zmod(6)
    assert not check_stronger_generic_statement(A, 2)
    assert check_stronger_generic_statement(A, 1)
    assert check_stronger_generic_statement(zmod(4), 2)


def test_quasicoherence(zmod12):
    M = regular_module(zmod12)
    evens = ideal_generated(zmod12, [2]).members
    assert evens in submodules(M)
    assert check_internal_quasicoherence(zmod12, M, sorted(evens))
    D2 = spectrum(zmod12).basic_open(2)
    assert not check_internal_quasicoherence(zmod12, M, extension_by_empty(tilde(M), D2))


def test_prime_elimination_agrees():
    A = zmod(4)
    alpha = projection_map(A, ideal_generated(A, [2]))
    rows = prime_elimination_table(A, alpha.source, alpha.target, alpha)
    assert rows
    assert [row.statement for row in rows if not row.agrees] == []


def test_local_spectrum_needs_a_local_base():
    with pytest.raises(NotLocalError):
        local_spectrum_frame(zmod(6), identity_map(zmod(6)))


def test_local_spectrum_over_itself():
    R = zmod(4)
    phi = identity_map(R)
    ctx = local_spectrum_frame(R, phi)
    assert ctx.frame.size == 2
    assert len(points_of_frame(ctx.frame)) == len(filters_over_units(R, phi)) == 1
    for ideal in ctx.ideals:
        assert quasicoherator(ctx, ideal).members == ideal.members


def test_spec_space_matches_the_radical_ideals(zmod12):
    X, opens = spec_space(zmod12)
    assert len(X) == 2
    assert len(X.opens) == 4
    assert sorted(opens.values(), key=len)[0] == X.empty
