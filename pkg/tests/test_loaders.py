"""Input files, builtin spaces and the loading session"""
from pathlib import Path

import pytest

from toposforge.core.errors import ConfigError, NotATopologyError, ResolutionError, SortError
from toposforge.core.loaders import (
    Session, parse_space, resolve_nucleus, resolve_open, standard_nucleus_names,
)
from toposforge.services.workbench import Workbench

SPACE = """
# Sierpinski space
points: eta sigma
open:
open U: eta
open: eta sigma
"""

SHEAF = """
sheaf F on sierpinski
sections X: a b
sections U: a b
restrict X->U: a->a b->b
op neg X: a->b b->a
op neg U: a->b b->a
"""

MODULE = """
module M over Z2
elements: 0 1
zero: 0
add 0: 0 1
add 1: 1 0
act 0: 0 0
act 1: 0 1
map alpha M -> M: 0->0 1->1
"""


def test_parse_space():
    X = parse_space(SPACE)
    assert X.points == ("eta", "sigma")
    assert len(X.opens) == 3
    assert X.named_open("U") == frozenset({0})


def test_parse_space_errors():
    with pytest.raises(ConfigError):
        parse_space("open: a")
    with pytest.raises(ConfigError):
        parse_space("points: a\nclosed: a")
    with pytest.raises(NotATopologyError):
        parse_space("points: a b\nopen: a")


def test_resolve_open(sierpinski):
    assert resolve_open(sierpinski, "X") == sierpinski.full
    assert resolve_open(sierpinski, "U") == frozenset({0})
    assert resolve_open(sierpinski, "{eta}") == frozenset({0})
    assert resolve_open(sierpinski, "0") == sierpinski.opens[0]
    with pytest.raises(ConfigError):
        resolve_open(sierpinski, "99")
    with pytest.raises(ResolutionError):
        resolve_open(sierpinski, "V")


def test_nucleus_names(sierpinski):
    names = standard_nucleus_names(sierpinski)
    assert names == ["negneg", "id", "open_U", "closed_U", "point_eta", "point_sigma"]
    assert resolve_nucleus(sierpinski, "closed_U").on_open(sierpinski.empty) == frozenset({0})
    with pytest.raises(ResolutionError):
        resolve_nucleus(sierpinski, "sideways")


def test_sheaf_with_operations():
    session = Session()
    assert session.load_text(SHEAF, "ignored") == "F"
    session.resolve()
    record = session.sheaf("F")
    assert record.space == "sierpinski"
    assert len(record.sheaf.global_sections) == 2
    env = session.environment(session.space("sierpinski"))
    assert "neg" in env.functions
    answer = Workbench(session).evaluate("forall x:F. ~(neg(x) = x)", space="sierpinski")
    assert answer.forced
    assert answer.truth_value == "X"


def test_missing_operation_entry_is_a_sort_error():
    session = Session()
    session.load_text(SHEAF.replace("op neg U: a->b b->a\n", ""), "F")
    session.resolve()
    X = session.space("sierpinski")
    F = session.sheaf("F").sheaf
    (neg,) = session.environment(X).functions["neg"]
    a = F.find_section("a", X.full)
    assert F.label(neg.apply(X.full, a)) == "b"
    U = X.named_open("U")
    with pytest.raises(SortError):
        neg.apply(U, F.restrict(a, X.full, U))


def test_restriction_must_shrink():
    session = Session()
    session.load_text("sheaf G on sierpinski\nsections U: a\nsections X: a\nrestrict U->X: a->a", "G")
    with pytest.raises(ConfigError):
        session.resolve()


def test_module_and_map():
    session = Session()
    assert session.load_text("ring zmod 2", "Z2") == "Z2"
    assert session.load_text(MODULE, "ignored") == "M"
    session.resolve()
    M = session.modules["M"]
    assert M.size == 2
    alpha, source, target = session.maps["alpha"]
    assert (source, target) == ("M", "M")
    assert alpha.is_injective()


def test_non_linear_map_is_rejected():
    session = Session()
    session.load_text("ring zmod 2", "Z2")
    session.load_text(MODULE.replace("0->0 1->1", "0->1 1->0"), "M")
    with pytest.raises(ConfigError):
        session.resolve()


def test_bad_inputs():
    session = Session()
    with pytest.raises(ConfigError):
        session.load_text("# nothing here\n", "empty")
    with pytest.raises(ConfigError):
        session.load_text("hello world", "what")
    with pytest.raises(ResolutionError):
        session.space("moebius")
    with pytest.raises(ResolutionError):
        session.sheaf("F")


def test_load_files(tmp_path):
    path = tmp_path / "sierp.space"
    path.write_text(SPACE, encoding="utf-8")
    session = Session()
    assert session.load(path) == "sierp"
    assert len(session.space("sierp").opens) == 3
    assert session.space(str(path)) is not None
    with pytest.raises(ResolutionError):
        session.load(tmp_path / "missing.space")


def test_ring_lookup():
    session = Session()
    A = session.ring("zmod 6")
    assert A.size == 6
    assert session.ring("zmod 6") is A


def test_sample_data_files():
    data = Path(__file__).resolve().parent.parent / "data"
    session = Session()
    for name in ("zmod4.ring", "quotient.module", "regular.module", "truncation.sheaf"):
        session.load(data / name)
    bench = Workbench(session)
    bench.initialize()
    assert set(session.modules) == {"M", "R"}
    assert bench.evaluate("forall n:M. exists m:R. proj(m) = n", ring="zmod4").forced
    assert not bench.evaluate("forall m, k:R. proj(m) = proj(k) => m = k", ring="zmod4").forced
    assert len(bench.sheafify("sierpinski", "T").sections["X"]) == 1
