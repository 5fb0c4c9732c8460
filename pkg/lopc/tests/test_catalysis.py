"""
Tests for catalysis checks and the bounded catalyst search.
"""

import pytest
from hypothesis import given, settings

from lopc.core.catalysis import (
    CatalysisKind,
    candidate_catalysts,
    check_catalysis,
    check_shuffling_catalysis,
    find_catalyst,
)
from lopc.core.dist import SecrecySpectrum
from lopc.core.errors import ParseError
from lopc.core.majorization import majorizes
from lopc.tests.strategies import spectra

SOURCE = SecrecySpectrum.parse("2/5,2/5,1/10,1/10")
TARGET = SecrecySpectrum.parse("1/2,1/4,1/4,0")


def test_catalyst_enables_forbidden_conversion():
    assert not majorizes(TARGET, SOURCE)
    verdict = check_catalysis(SOURCE, TARGET, SecrecySpectrum.parse("3/5,2/5"))
    assert verdict.kind == CatalysisKind.CATALYZED_POSSIBLE
    assert verdict.possible
    assert verdict.to_dict()["catalyst"] == ["3/5", "2/5"]


def test_wrong_catalyst_does_not_help():
    verdict = check_catalysis(SOURCE, TARGET, SecrecySpectrum.parse("4/5,1/5"))
    assert verdict.kind == CatalysisKind.NOT_WITH_THIS_CATALYST
    assert not verdict.possible


def test_direct_conversion_needs_no_catalyst(trit, bit):
    assert check_catalysis(trit, bit, SecrecySpectrum.parse("3/5,2/5")).kind == CatalysisKind.DIRECTLY_POSSIBLE


def test_search_finds_first_catalyst():
    verdict = find_catalyst(SOURCE, TARGET, max_dim=2, denom_bound=10)
    assert verdict.kind == CatalysisKind.CATALYZED_POSSIBLE
    assert verdict.catalyst == SecrecySpectrum.parse("3/5,2/5")
    assert verdict.candidates_checked == 3


def test_search_uses_environment_bounds(monkeypatch):
    monkeypatch.setenv("LOPC_CATALYST_MAX_DIM", "2")
    monkeypatch.setenv("LOPC_CATALYST_DENOM_BOUND", "4")
    verdict = find_catalyst(SOURCE, TARGET)
    assert verdict.kind == CatalysisKind.NONE_FOUND_WITHIN_BOUNDS
    assert verdict.bounds == (2, 4)
    assert verdict.candidates_checked == 2


def test_search_cannot_raise_secrecy(bit, trit):
    verdict = find_catalyst(bit, trit, max_dim=3, denom_bound=6)
    assert verdict.kind == CatalysisKind.NONE_FOUND_WITHIN_BOUNDS
    assert verdict.candidates_checked == 0


def test_search_rejects_tiny_bounds():
    with pytest.raises(ParseError):
        find_catalyst(SOURCE, TARGET, max_dim=1, denom_bound=10)


def test_candidate_order():
    first = [c.to_strings() for c in candidate_catalysts(2, 4)]
    assert first == [["2/3", "1/3"], ["3/4", "1/4"]]
    dims = [len(c) for c in candidate_catalysts(3, 6)]
    assert dims == sorted(dims)
    assert all(len(set(c.weights)) > 1 for c in candidate_catalysts(3, 6))


@settings(max_examples=100, deadline=None)
@given(spectra(max_dim=4, max_denom=8), spectra(max_dim=4, max_denom=8), spectra(max_dim=2, max_denom=8))
def test_shuffling_question_is_secrecy_question_reversed(source, target, r):
    assert check_shuffling_catalysis(source, target, r).kind == check_catalysis(target, source, r).kind
