"""Verification suites over small fixed corpora"""
import pytest

from toposforge.core.errors import NotATopologyError, ResolutionError
from toposforge.services import corpus
from toposforge.services.corpus import vee
from toposforge.services.finring import zmod
from toposforge.services.frame import discrete, validate_space
from toposforge.services.frame import sierpinski as sierpinski_space
from toposforge.services.verify import SUITES, SuiteConfig, run_suite


@pytest.fixture
def small_config(sierpinski):
    return SuiteConfig(seed=7, max_depth=2, spaces=[sierpinski, discrete(2), vee()], rings=[zmod(4), zmod(12)])


def test_suite_registry():
    assert set(SUITES) == {
        "inference-rules", "locality", "geometric-spreading", "comprehension", "box-theorem", "sheafification",
        "nuclei", "metaproperties", "spectrum", "generic-filter", "quasicoherator", "dimension", "prime-elimination",
        "ring-properties",
    }
    with pytest.raises(ResolutionError):
        run_suite("tarski")


def test_nuclei_suite(small_config):
    report = run_suite("nuclei", small_config)
    assert report.suite == "nuclei"
    assert report.checks
    assert report.ok, report.render_text()


def test_spectrum_suite(small_config):
    report = run_suite("spectrum", small_config)
    assert report.ok, report.render_text()
    names = {c.name for c in report.checks}
    assert "zmod 12 has 4 frame elements and 2 points" in names
    assert "zmod 4 is a one-point locale" in names
    assert any("frame=4 elements, points=2" in c.location for c in report.checks)


def test_dimension_suite(small_config):
    report = run_suite("dimension", small_config)
    assert report.ok, report.render_text()
    assert len(report.checks) == 8


def test_inference_rules_suite_reports_expected_failures(small_config):
    report = run_suite("inference-rules", small_config)
    assert report.ok, report.render_text()
    summary = report.render_text().splitlines()[-1]
    assert summary.startswith("inference-rules:")
    assert "0 failed" in summary
    assert "(seed 7)" in summary


def test_corpus_is_deterministic():
    first = corpus.corpus_spaces(seed=3, count=8, max_points=4)
    second = corpus.corpus_spaces(seed=3, count=8, max_points=4)
    assert [(X.points, X.opens) for X in first] == [(X.points, X.opens) for X in second]
    assert all(len(X) <= 4 for X in first)
    assert [A.name for A in corpus.corpus_rings()][:2] == ["zmod 2", "zmod 3"]


def test_comprehension_suite(small_config):
    report = run_suite("comprehension", small_config)
    assert report.ok, report.render_text()
    assert len(report.checks) == 3 * (4 * 3 + 3)


def test_random_spaces_are_named_when_built():
    for seed in range(20):
        X = corpus.random_space(corpus.make_rng(seed), 4)
        assert set(X.names.values()) <= {"U", "V"}
        for U in X.names:
            assert X.is_open(U)
            assert U and U != X.full
    same = corpus.random_space(corpus.make_rng(5), 4)
    assert same.names == corpus.random_space(corpus.make_rng(5), 4).names


def test_named_opens_are_validated():
    assert sierpinski_space({"U": ["eta"]}).named_open("U") == frozenset({0})
    with pytest.raises(NotATopologyError):
        validate_space(["eta", "sigma"], [[], ["eta"], ["eta", "sigma"]], {"W": ["sigma"]})
