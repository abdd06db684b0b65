"""Finite spaces, their frames of opens, points and nuclei"""
import pytest

from toposforge.core.errors import FrameError, NotATopologyError, ResolutionError
from toposforge.services.corpus import vee
from toposforge.services.frame import (
    Frame, check_nucleus, discrete, find_frame_isomorphism, frame_negneg, indiscrete, is_dense, nucleus_closed,
    nucleus_identity, nucleus_negneg, nucleus_open, nucleus_point, nucleus_violation, points_of_frame,
    points_of_frame_bruteforce, sublocale_frame, validate_space,
)


def test_validate_space_rejects_missing_unions():
    with pytest.raises(NotATopologyError) as excinfo:
        validate_space(["a", "b", "c"], [[], ["a"], ["b"], ["a", "b", "c"]])
    assert excinfo.value.pair == ("{a}", "{b}")


def test_validate_space_rejects_bad_data():
    with pytest.raises(NotATopologyError):
        validate_space(["a", "b"], [["a"], ["a", "b"]])
    with pytest.raises(NotATopologyError):
        validate_space(["a", "a"], [[], ["a"]])
    with pytest.raises(ResolutionError):
        validate_space(["a"], [[], ["a"], ["z"]])
    with pytest.raises(NotATopologyError):
        validate_space(["a", "b"], [[], ["a"], ["a", "b"]], {"V": ["b"]})


def test_sierpinski_topology(sierpinski):
    U = sierpinski.named_open("U")
    assert len(sierpinski.opens) == 3
    assert U == frozenset({0})
    assert sierpinski.label(U) == "U"
    assert sierpinski.label(sierpinski.full) == "X"
    assert sierpinski.label(sierpinski.empty) == "{}"
    assert sierpinski.minimal_open(1) == sierpinski.full
    assert sierpinski.negate(U) == sierpinski.empty
    assert sierpinski.closure(U) == sierpinski.full
    assert is_dense(sierpinski, U)
    assert sierpinski.is_T0 and sierpinski.is_local and sierpinski.is_irreducible
    assert not sierpinski.is_discrete


def test_space_properties():
    assert discrete(2).is_discrete
    assert not discrete(2).is_irreducible
    assert not discrete(2).is_local
    assert not indiscrete(2).is_T0
    assert indiscrete(2).is_local
    assert vee().is_irreducible and not vee().is_local


def test_heyting_implication_is_interior(sierpinski):
    X = sierpinski
    U = X.named_open("U")
    for V in X.opens:
        for W in X.opens:
            assert X.heyting(V, W) == X.interior((X.full - V) | W)
    assert X.heyting(X.full, U) == U


def test_frame_from_space_matches_opens(sierpinski):
    F = sierpinski.frame
    assert F.size == 3
    U = F.element_of(sierpinski.named_open("U"))
    assert F.negate(U) == F.bottom
    assert F.negate(F.negate(U)) == F.top
    assert F.join(U, F.bottom) == U


def test_frame_rejects_non_distributive_lattice():
    """The diamond M3 is a lattice but not a frame"""
    order = {(0, 1), (0, 2), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4)}
    with pytest.raises(FrameError):
        Frame.from_order(["0", "a", "b", "c", "1"], lambda a, b: a == b or (a, b) in order)


def test_points_of_frames():
    for X in (discrete(1), discrete(2), discrete(3), vee(), indiscrete(2), validate_space(
        ["eta", "sigma"], [[], ["eta"], ["eta", "sigma"]],
    )):
        points = points_of_frame(X.frame)
        assert points == points_of_frame_bruteforce(X.frame)
    assert len(points_of_frame(discrete(3).frame)) == 3
    assert len(points_of_frame(indiscrete(2).frame)) == 1
    assert len(points_of_frame(vee().frame)) == 3


def test_frame_to_space_round_trip():
    X = vee()
    Y, _ = X.frame.to_space()
    assert len(Y) == 3
    assert find_frame_isomorphism(X.frame, Y.frame) is not None
    assert find_frame_isomorphism(X.frame, discrete(2).frame) is None


def test_standard_nuclei_satisfy_the_axioms(sierpinski):
    X = sierpinski
    U = X.named_open("U")
    nuclei = [
        nucleus_negneg(X),
        nucleus_identity(X.frame),
        nucleus_open(X, U),
        nucleus_closed(X, X.full - U),
        nucleus_point(X, 0),
        nucleus_point(X, 1),
        frame_negneg(X.frame),
    ]
    for j in nuclei:
        assert nucleus_violation(j) is None, j.label
        assert check_nucleus(j)


def test_nucleus_values_on_sierpinski(sierpinski):
    X = sierpinski
    U = X.named_open("U")
    negneg = nucleus_negneg(X)
    assert [negneg.on_open(V) for V in (X.empty, U, X.full)] == [X.empty, X.full, X.full]
    closed = nucleus_closed(X, X.full - U)
    assert [closed.on_open(V) for V in (X.empty, U, X.full)] == [U, U, X.full]
    at_sigma = nucleus_point(X, 1)
    assert [at_sigma.on_open(V) for V in (X.empty, U, X.full)] == [U, U, X.full]
    assert nucleus_open(X, U).table == negneg.table


def test_negneg_agrees_with_frame_double_negation():
    for X in (vee(), discrete(2), indiscrete(2)):
        assert nucleus_negneg(X).table == frame_negneg(X.frame).table


def test_non_nucleus_is_reported(sierpinski):
    X = sierpinski
    F = X.frame
    shrink = type(nucleus_identity(F))(F, tuple(F.bottom for _ in F.elements), "zero")
    assert nucleus_violation(shrink) is not None
    assert not check_nucleus(shrink)


def test_sublocales(sierpinski):
    X = sierpinski
    negneg = sublocale_frame(nucleus_negneg(X))
    assert negneg.frame.size == 2
    Y, _ = negneg.to_space()
    assert len(Y) == 1
    closed = sublocale_frame(nucleus_closed(X, X.full - X.named_open("U")))
    assert closed.frame.size == 2
    assert sublocale_frame(nucleus_identity(X.frame)).frame.size == 3
