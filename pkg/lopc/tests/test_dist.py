"""
Tests for exact joint distributions.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lopc.core.dist import (
    JointDist,
    SecrecySpectrum,
    Verdict,
    apply_local_map,
    cat_state,
    classify_pure,
    correlated_spectrum,
    entropy_of_secrecy,
    eve,
    honest,
    is_product,
    local_entropy,
    marginal,
    mutual_information,
    parse_vector,
    pure_state,
    shared_bit,
    tensor,
    to_prob,
)
from lopc.core.errors import (
    ClassificationError,
    NormalizationError,
    ParseError,
    PartitionError,
    UnknownPartyError,
)
from lopc.tests.strategies import spectra


def test_decimal_strings_are_exact():
    assert to_prob("0.4") == Fraction(2, 5)
    assert to_prob(0.25) == Fraction(1, 4)
    assert parse_vector("2/5, 2/5, 0.1, 0.1") == [Fraction(2, 5), Fraction(2, 5), Fraction(1, 10), Fraction(1, 10)]


def test_malformed_probability():
    with pytest.raises(ParseError):
        to_prob("1/0")
    with pytest.raises(ParseError):
        to_prob("3/2")


def test_spectrum_sorts_with_stable_ties():
    s = SecrecySpectrum.of(["1/4", "1/2", "1/4"])
    assert s.weights == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))


def test_normalization_error_reports_deficit():
    with pytest.raises(NormalizationError) as err:
        JointDist((honest("A"), honest("B"), eve()), {(0, 0, 0): Fraction(1, 2), (1, 1, 0): Fraction(49, 100)})
    assert err.value.deficit == Fraction(1, 100)


def test_zero_entries_are_dropped():
    d = JointDist((honest("A"), eve()), {(0, 0): Fraction(1), (1, 0): Fraction(0)})
    assert list(d.entries) == [(0, 0)]


def test_arity_and_symbol_range_checked():
    with pytest.raises(ParseError):
        JointDist((honest("A"), eve()), {(0,): Fraction(1)})
    with pytest.raises(ParseError):
        JointDist((honest("A", 2), eve()), {(2, 0): Fraction(1)})


def test_marginal_keeps_order_and_unknown_party(trit_state):
    m = marginal(trit_state, ["B", "A"])
    assert m.labels == ("A", "B")
    with pytest.raises(UnknownPartyError):
        marginal(trit_state, ["Z"])


def test_is_product_exact():
    d = pure_state(SecrecySpectrum.parse("1/2,1/2"))
    assert is_product(d, (["A", "B"], ["E"]))
    assert not is_product(d, (["A"], ["B", "E"]))
    with pytest.raises(PartitionError):
        is_product(d, (["A"], ["A", "B", "E"]))
    with pytest.raises(PartitionError):
        is_product(d, (["A"], ["B"]))


def test_classify_pure_trit(trit_state):
    verdict = classify_pure(trit_state)
    assert verdict.kind == Verdict.PURE
    assert verdict.spectrum == SecrecySpectrum.uniform(3)


def test_classify_pure_relabeled():
    d = JointDist(
        (honest("A", 3), honest("B", 3), eve()),
        {(0, 2, 0): Fraction(1, 4), (1, 0, 0): Fraction(1, 2), (2, 1, 0): Fraction(1, 4)},
    )
    verdict = classify_pure(d)
    assert verdict.is_pure
    assert verdict.spectrum.weights == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    assert verdict.bijections["A"][1] == 0 and verdict.bijections["B"][0] == 0


def test_classify_block_pure_and_mixed():
    block = JointDist(
        (honest("A"), honest("B"), eve()),
        {(0, 0, 0): Fraction(1, 2), (0, 1, 0): Fraction(1, 4), (1, 0, 0): Fraction(1, 4)},
    )
    assert classify_pure(block).kind == Verdict.BLOCK_PURE
    mixed = JointDist(
        (honest("A"), honest("B"), eve("E", 2)),
        {(0, 0, 0): Fraction(1, 2), (1, 1, 1): Fraction(1, 2)},
    )
    assert classify_pure(mixed).kind == Verdict.MIXED


def test_classify_needs_two_honest_parties():
    with pytest.raises(ClassificationError):
        classify_pure(cat_state(3))


def test_information_measures_of_pure_state():
    p = SecrecySpectrum.parse("1/2,1/4,1/4")
    d = pure_state(p)
    assert entropy_of_secrecy(p) == pytest.approx(1.5)
    assert mutual_information(d, "A", "B") == pytest.approx(1.5)
    assert local_entropy(d, "A") == pytest.approx(1.5)
    assert mutual_information(d, ["A", "B"], "E") == 0.0
    assert mutual_information(d, "A", "B", given="E") == pytest.approx(1.5)


def test_correlated_spectrum_of_cat_state():
    assert correlated_spectrum(cat_state(3), ["A", "B", "C"]) == SecrecySpectrum.uniform(2)
    block = JointDist((honest("A"), honest("B"), eve()),
                      {(0, 0, 0): Fraction(1, 2), (0, 1, 0): Fraction(1, 2)})
    assert correlated_spectrum(block, ["A", "B"]) is None


def test_apply_local_map_merges_symbols(trit_state):
    d = apply_local_map(trit_state, "A", {2: 1}, alphabet=2)
    assert d.party("A").alphabet == 2
    assert d.probability((1, 2, 0)) == Fraction(1, 3)


def test_tensor_merges_eve_and_adds_entropy():
    d = tensor(shared_bit("A", "B1", holders=("A", "B")), shared_bit("B2", "C", holders=("B", "C")))
    assert d.labels == ("A", "B1", "B2", "C", "E")
    assert len(d.entries) == 4
    assert d.holders() == ["A", "B", "C"]
    with pytest.raises(PartitionError):
        tensor(shared_bit(), shared_bit())


@settings(max_examples=50, deadline=None)
@given(spectra(max_dim=3, max_denom=6), spectra(max_dim=3, max_denom=6))
def test_entropy_of_secrecy_is_additive(p, r):
    joint = tensor(pure_state(p), pure_state(r, a="A2", b="B2"))
    both = mutual_information(joint, ["A", "A2"], ["B", "B2"])
    assert both == pytest.approx(entropy_of_secrecy(p) + entropy_of_secrecy(r), abs=1e-9)


@pytest.mark.parametrize("outer,inner", [
    (["A", "B", "X"], ["B", "X"]),
    (["A", "C", "Y", "E"], ["C", "E"]),
    (["B", "C", "X", "Y"], ["X"]),
])
def test_marginal_of_marginal(outer, inner):
    d = tensor(cat_state(3), shared_bit("X", "Y"))
    assert marginal(marginal(d, outer), inner) == marginal(d, inner)


def _relabeled_pure_state(p, sigma_a, sigma_b):
    d = pure_state(p)
    d = apply_local_map(d, "A", dict(enumerate(sigma_a)))
    return apply_local_map(d, "B", dict(enumerate(sigma_b)))


@settings(max_examples=80, deadline=None)
@given(spectra(max_dim=4, max_denom=8), st.data())
def test_relabeled_pure_states_are_recognized(p, data):
    n = len(p)
    sigma_a = data.draw(st.permutations(range(n)))
    sigma_b = data.draw(st.permutations(range(n)))
    d = _relabeled_pure_state(p, sigma_a, sigma_b)
    verdict = classify_pure(d)
    assert verdict.kind == Verdict.PURE
    assert verdict.spectrum == p.trimmed()
    assert is_product(d, (["A", "B"], ["E"]))
    assert entropy_of_secrecy(verdict.spectrum) == pytest.approx(mutual_information(d, "A", "B"))

    canonical = apply_local_map(d, "A", verdict.bijections["A"])
    canonical = apply_local_map(canonical, "B", verdict.bijections["B"])
    support = set(marginal(canonical, ["A", "B"]).entries)
    assert support == {(i, i) for i in range(len(verdict.spectrum))}


def test_eve_holding_the_bit_leaves_nothing_secret():
    d = JointDist((honest("A"), honest("B"), eve("E", 2)), {(0, 0, 0): Fraction(1, 2), (1, 1, 1): Fraction(1, 2)})
    assert mutual_information(d, "A", "B") == pytest.approx(1.0)
    assert mutual_information(d, "A", "B", given="E") == pytest.approx(0.0)
    assert classify_pure(d).kind == Verdict.MIXED
