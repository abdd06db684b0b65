"""Finite rings: construction, ideals, filters, localization, Krull dimension and modules"""
import numpy as np
import pytest

from toposforge.core.errors import ConfigError, NonMonicModulusError, RingAxiomError, RingError
from toposforge.services.finring import (
    FinRing, check_kronecker_identity, classical_krull_dimension, enumerate_filters, enumerate_ideals,
    find_ring_isomorphism, generator_label, ideal_generated, inverse, is_complementary, is_local,
    is_module_map, is_reduced, krull_dim_leq, localize, localize_at_prime, make_ring, maximal_ideals,
    min_generators, nilradical, prime_ideals, product, projection_map, quotient_module, radical_ideals,
    regular_module, search_filters, structure_map, submodules, units, zmod,
)


def members(ideals):
    return sorted(sorted(i.members) for i in ideals)


def test_zmod_12_elements(zmod12):
    assert zmod12.size == 12
    assert nilradical(zmod12) == {0, 6}
    assert units(zmod12) == {1, 5, 7, 11}
    assert inverse(zmod12, 5) == 5
    assert inverse(zmod12, 2) is None
    assert not is_reduced(zmod12)


def test_zmod_12_ideals(zmod12):
    assert len(enumerate_ideals(zmod12)) == 6
    assert len(radical_ideals(zmod12)) == 4
    evens, threes = list(range(0, 12, 2)), list(range(0, 12, 3))
    assert members(prime_ideals(zmod12)) == sorted([evens, threes])
    assert members(maximal_ideals(zmod12)) == sorted([evens, threes])
    assert generator_label(zmod12, ideal_generated(zmod12, [8])) == "(4)"
    assert generator_label(zmod12, ideal_generated(zmod12, [])) == "(0)"


def test_local_and_reduced():
    assert is_local(zmod(4))
    assert not is_local(zmod(6))
    assert is_reduced(zmod(6))
    assert classical_krull_dimension(zmod(12)) == 0


def test_make_ring_specs():
    assert make_ring("zmod 12").size == 12
    assert make_ring("zmod12").size == 12
    assert make_ring("product (zmod 2) (zmod 4)").size == 8
    field4 = make_ring("polyquot (zmod 2) x^2+x+1")
    assert field4.size == 4
    assert len(units(field4)) == 3
    assert is_reduced(field4)


def test_make_ring_errors():
    with pytest.raises(NonMonicModulusError):
        make_ring("polyquot (zmod 2) 1")
    with pytest.raises(ConfigError):
        make_ring("ring 5")
    with pytest.raises(ConfigError):
        make_ring("zmod 100")


def test_ring_axioms_are_checked():
    """A table without additive inverses is rejected"""
    with pytest.raises(RingAxiomError):
        FinRing("bad", ["0", "1"], np.array([[0, 1], [1, 1]]), np.array([[0, 0], [0, 1]]))


def test_filters_are_complements_of_primes(zmod12):
    filters = enumerate_filters(zmod12)
    assert len(filters) == 2
    assert filters == search_filters(zmod12)
    for F in filters:
        assert F.prime.members in {p.members for p in prime_ideals(zmod12)}
        assert 1 in F and 0 not in F


def test_localization(zmod12):
    away_from_two = localize(zmod12, [2])
    assert away_from_two.ring.size == 3
    assert find_ring_isomorphism(away_from_two.ring, zmod(3)) is not None
    evens = next(p for p in prime_ideals(zmod12) if 2 in p)
    at_two = localize_at_prime(zmod12, evens)
    assert at_two.ring.size == 4
    assert find_ring_isomorphism(at_two.ring, zmod(4)) is not None


def test_krull_dimension(zmod12):
    result = krull_dim_leq(zmod12, 0)
    assert result.holds
    assert not krull_dim_leq(zmod(2), -1).holds
    assert krull_dim_leq(FinRing("0", ["0"], [[0]], [[0]], zero=0, one=0), -1).holds
    with pytest.raises(RingError):
        krull_dim_leq(zmod12, -2)
    for a in (0, 2, 3):
        b = result.witnesses[(a,)]
        assert is_complementary(zmod12, (a,), b)
        assert check_kronecker_identity(zmod12, a, b[0]) == []
    assert result.witnesses[(2,)] == (3,)


def test_ring_isomorphisms():
    assert find_ring_isomorphism(product(zmod(3), zmod(4)), zmod(12)) is not None
    assert find_ring_isomorphism(zmod(4), product(zmod(2), zmod(2))) is None
    assert find_ring_isomorphism(zmod(4), zmod(5)) is None


def test_structure_maps():
    phi = structure_map(zmod(4), zmod(2))
    assert phi.table == (0, 1, 0, 1)
    with pytest.raises(RingError):
        structure_map(zmod(2), zmod(4))


def test_modules():
    A = zmod(4)
    two = ideal_generated(A, [2])
    Q = quotient_module(A, two)
    assert Q.size == 2
    proj = projection_map(A, two)
    assert is_module_map(proj)
    assert proj.is_surjective()
    assert not proj.is_injective()
    M = regular_module(zmod(12))
    assert min_generators(M) == 1
    assert len(submodules(M)) == 6
