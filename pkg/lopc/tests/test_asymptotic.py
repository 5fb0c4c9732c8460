"""
Tests for block concentration and dilution.
"""

import math
from collections import defaultdict
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings

from lopc.core import asymptotic
from lopc.core.asymptotic import (
    bits_from_rank,
    block_state,
    class_yield,
    concentrate_block,
    concentration_protocol,
    dilute_block,
    dyadic_pieces,
    encode_bits,
    extract_bits,
    extraction_distribution,
    level_rank,
    level_sets,
    multinomial,
    rank_in_class,
    rate_report,
    type_classes,
)
from lopc.core.dist import SecrecySpectrum, entropy_of_secrecy
from lopc.core.engine import execute, verify_secrecy
from lopc.core.errors import DeltaTooSmall, ParseError
from lopc.tests.oracles import brute_force_extraction
from lopc.tests.strategies import spectra

SKEWED = SecrecySpectrum.parse("3/4,1/4")
H_SKEWED = 0.8112781244591328


def test_multinomial_and_type_classes():
    assert multinomial([2, 1, 1]) == 12
    classes = type_classes(SKEWED, 2)
    assert [tc.counts for tc in classes] == [(2, 0), (1, 1), (0, 2)]
    assert sum(tc.probability for tc in classes) == 1
    assert classes[1].size == 2 and classes[1].probability == Fraction(6, 16)


def test_rank_in_class_is_lexicographic():
    ranks = [rank_in_class(seq, 2) for seq in [(0, 0, 1), (0, 1, 0), (1, 0, 0)]]
    assert ranks == [0, 1, 2]


def test_dyadic_splitting():
    assert dyadic_pieces(6) == [2, 1]
    assert [bits_from_rank(r, 6) for r in range(6)] == ["00", "01", "10", "11", "0", "1"]
    assert class_yield(6) == Fraction(10, 6)
    assert class_yield(1) == 0


def test_encode_bits_separates_lengths():
    codes = [encode_bits(b) for b in ["", "0", "1", "00", "01", "10", "11"]]
    assert codes == list(range(7))


def test_skewed_pair_yields_three_eighths():
    report = concentrate_block(SKEWED, 2)
    assert report.exact_yield == Fraction(3, 8)
    assert report.rate == pytest.approx(3 / 16)


def test_shared_bit_is_already_one_bit(bit):
    assert concentrate_block(bit, 1).exact_yield == 1
    assert [r.rate for r in rate_report(bit, [1, 4, 9])] == [1.0, 1.0, 1.0]


def test_certain_symbol_yields_nothing():
    assert [r.rate for r in rate_report(SecrecySpectrum.parse("1"), [1, 5])] == [0.0, 0.0]


def test_equal_weights_merge_into_one_level_set():
    p = SecrecySpectrum.parse("1/2,1/4,1/4")
    sets = level_sets(p, 2)
    assert [ls.size for ls in sets] == [1, 4, 4]
    assert sum(ls.probability for ls in sets) == 1
    assert level_rank((1, 2), p) == (1, 4)
    assert level_rank((2, 1), p) == (2, 4)


def test_rate_converges_to_entropy_of_secrecy():
    rates = [r.rate for r in rate_report(SKEWED, [8, 16, 32, 64])]
    assert rates == sorted(rates)
    assert abs(rates[-1] - H_SKEWED) < 0.10
    assert all(rate <= H_SKEWED for rate in rates)


@pytest.mark.parametrize("source", ["1/2,1/2", "3/4,1/4", "2/3,1/3", "4/5,1/5"])
@pytest.mark.parametrize("n", range(1, 13))
def test_binary_extraction_is_uniform_per_length(source, n):
    _assert_sound(SecrecySpectrum.parse(source), n)


@pytest.mark.parametrize("source", ["1/3,1/3,1/3", "1/2,1/4,1/4", "1/2,1/3,1/6"])
@pytest.mark.parametrize("n", range(1, 7))
def test_ternary_extraction_is_uniform_per_length(source, n):
    _assert_sound(SecrecySpectrum.parse(source), n)


def _assert_sound(p, n):
    # Inside one level set every string of a produced length appears exactly once
    by_level = defaultdict(list)
    for seq in product(range(len(p)), repeat=n):
        weight = math.prod(p.weights[x] for x in seq)
        by_level[weight].append(extract_bits(seq, p))
    for weight, outputs in by_level.items():
        by_length = defaultdict(set)
        for bits in outputs:
            by_length[len(bits)].add(bits)
        assert sum(len(strings) for strings in by_length.values()) == len(outputs)
        for length, strings in by_length.items():
            assert len(strings) == 1 << length


@pytest.mark.parametrize("source,n", [("3/4,1/4", 5), ("1/2,1/4,1/4", 3), ("1/3,1/3,1/3", 4), ("3/5,2/5", 6)])
def test_extraction_law_matches_brute_force(source, n):
    p = SecrecySpectrum.parse(source)
    law = extraction_distribution(p, n)
    assert law == brute_force_extraction(p, n)
    assert sum(law.values()) == 1
    expected = sum((len(bits) * prob for bits, prob in law.items()), Fraction(0))
    assert expected == concentrate_block(p, n).exact_yield


@settings(max_examples=60, deadline=None)
@given(spectra(max_dim=3, max_denom=8))
def test_yield_never_exceeds_entropy_of_secrecy(p):
    for n in (1, 2, 3, 5):
        assert concentrate_block(p, n).rate <= entropy_of_secrecy(p) + 1e-9


def test_concentration_protocol_is_secret():
    p = SecrecySpectrum.parse("1/2,1/4,1/4")
    result = execute(concentration_protocol(p, 3), block_state(p, 3))
    report = verify_secrecy(result)
    assert report.is_secret
    assert report.ledger.public_bits_sent == 0.0


def test_block_length_must_be_positive():
    with pytest.raises(ParseError):
        concentrate_block(SKEWED, 0)


def test_uniform_dilution_uses_one_key_bit_per_copy(bit):
    report = dilute_block(bit, 6, 0.1)
    assert report.key_bits_used == 6
    assert report.failure_probability == 0
    assert report.verification == "engine"
    assert report.secret


def test_skewed_dilution_at_thirty_two_copies(monkeypatch):
    runs = []
    real_execute = asymptotic.execute

    def counting_execute(protocol, d):
        runs.append(protocol.name)
        return real_execute(protocol, d)

    monkeypatch.setattr(asymptotic, "execute", counting_execute)
    report = dilute_block(SKEWED, 32, 0.1)
    assert report.rate <= 0.92
    assert report.rate <= H_SKEWED + 0.15
    assert report.failure_probability <= Fraction(1, 5)
    assert report.expected_yield_bits == pytest.approx(32 * H_SKEWED)
    assert report.verification == "engine-reduced"
    verified = report.details["verified_block_length"]
    assert 1 <= verified < 32
    assert runs == [f"dilution-{verified}"]
    assert report.secret is True


def test_large_dilution_verdict_comes_from_the_engine(monkeypatch):
    class Leaky:
        is_secret = False

    monkeypatch.setattr(asymptotic, "verify_secrecy", lambda *args, **kwargs: Leaky())
    report = dilute_block(SKEWED, 32, 0.1)
    assert report.verification == "engine-reduced"
    assert report.secret is False


def test_dilution_without_room_to_execute_is_unverified(monkeypatch):
    monkeypatch.setenv("LOPC_MAX_JOINT_OUTCOMES", "1")
    report = dilute_block(SKEWED, 6, 0.2)
    assert report.verification == "unverified"
    assert report.secret is None
    assert "verified_block_length" not in report.details


@pytest.mark.parametrize("n,delta", [(1, 2.0), (4, 0.3), (6, 0.2), (8, 0.15)])
def test_small_dilutions_are_verified_exactly(n, delta):
    report = dilute_block(SKEWED, n, delta)
    assert report.verification == "engine"
    assert report.secret
    assert report.key_bits_used == (report.typical_set_size - 1).bit_length()


def test_single_copy_dilution_is_a_one_time_pad():
    report = dilute_block(SKEWED, 1, 2.0)
    assert report.typical_set_size == 2
    assert report.key_bits_used == 1
    assert report.failure_probability == 0


def test_two_sided_typicality_rejects_likely_sequences():
    one = dilute_block(SKEWED, 8, 0.15)
    both = dilute_block(SKEWED, 8, 0.15, two_sided=True)
    assert both.failure_probability > one.failure_probability
    assert both.typical_set_size < one.typical_set_size


def test_empty_typical_set():
    with pytest.raises(DeltaTooSmall):
        dilute_block(SKEWED, 1, 0.01, two_sided=True)


@pytest.mark.parametrize("source,n,delta", [
    ("3/4,1/4", 4, 0.3),
    ("3/4,1/4", 6, 0.2),
    ("1/2,1/4,1/4", 3, 0.3),
    ("1/2,1/2", 5, 0.1),
])
def test_dilution_delivers_no_more_than_its_key(monkeypatch, source, n, delta):
    results = []
    real_execute = asymptotic.execute

    def recording_execute(protocol, d):
        result = real_execute(protocol, d)
        results.append(result)
        return result

    monkeypatch.setattr(asymptotic, "execute", recording_execute)
    dilute_block(SecrecySpectrum.parse(source), n, delta)
    (result,) = results
    assert result.ledger.secret_bits_delivered <= result.ledger.shared_secret_bits_consumed + 1e-9
