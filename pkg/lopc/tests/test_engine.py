"""
Tests for exact protocol execution, secrecy verification and the ledger.
"""

import math
from fractions import Fraction
from itertools import islice, permutations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lopc.core.dist import JointDist, SecrecySpectrum, Verdict, classify_pure, eve, honest, pure_state
from lopc.core.engine import (
    SecrecyVerdict,
    build_otp_protocol,
    execute,
    otp_input,
    pure_reachable_single_copy,
    sample,
    single_copy_witness,
    verify_secrecy,
)
from lopc.core.errors import AlphabetMismatch, KeyTooSmall, NotBlockPure, StateSpaceTooLarge
from lopc.core.protocol import MessageRule, ProtocolIR, RelabelMap, Round
from lopc.storage.files import parse_distribution, read_protocol
from lopc.tests.strategies import spectra

F = Fraction


def _h2(x: float) -> float:
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def test_otp_with_perfect_key_is_secret(bit):
    result = execute(build_otp_protocol(bit), otp_input(bit))
    report = verify_secrecy(result, bit)
    assert report.verdict == SecrecyVerdict.SECRET
    assert report.eve_information == 0.0
    assert report.ledger.shared_secret_bits_consumed == pytest.approx(1.0)
    assert report.ledger.public_bits_sent == pytest.approx(1.0)
    assert report.ledger.secret_bits_delivered == pytest.approx(1.0)


def test_otp_with_biased_key_leaks(bit):
    key = SecrecySpectrum.parse("3/5,2/5")
    result = execute(build_otp_protocol(bit), otp_input(bit, key))
    report = verify_secrecy(result)
    assert report.verdict == SecrecyVerdict.LEAKY
    assert report.eve_information == pytest.approx(1 - _h2(0.6))
    assert "P(Y=" in report.counterexample


def test_otp_key_reuse_leaks_one_bit(bit):
    result = execute(build_otp_protocol(bit, n_messages=2), otp_input(bit, n_messages=2))
    report = verify_secrecy(result)
    assert not report.is_secret
    assert report.eve_information == pytest.approx(1.0)
    assert report.ledger.public_bits_sent == pytest.approx(2.0)


def test_otp_over_larger_alphabet(trit):
    result = execute(build_otp_protocol(trit, key_size=3), otp_input(trit, key_size=3))
    report = verify_secrecy(result, trit)
    assert report.is_secret
    assert report.ledger.secret_bits_delivered == pytest.approx(math.log2(3))


@settings(max_examples=60, deadline=None)
@given(spectra(max_dim=3, max_denom=6), spectra(max_dim=3, max_denom=6), st.integers(min_value=1, max_value=2))
def test_pad_never_delivers_more_than_the_key(message, key, n_messages):
    if len(message) > len(key):
        message, key = key, message
    protocol = build_otp_protocol(message, key_size=len(key), n_messages=n_messages)
    result = execute(protocol, otp_input(message, key, n_messages, key_size=len(key)))
    ledger = result.ledger
    assert ledger.secret_bits_delivered <= ledger.shared_secret_bits_consumed + 1e-9


def test_otp_key_too_small(trit):
    with pytest.raises(KeyTooSmall):
        build_otp_protocol(trit, key_size=2)


def test_announcing_the_symbol_leaks_everything(data_dir, trit_state):
    result = execute(read_protocol(data_dir / "protocols" / "leaky.json"), trit_state)
    report = verify_secrecy(result)
    assert report.verdict == SecrecyVerdict.LEAKY
    assert report.eve_information == pytest.approx(math.log2(3))
    assert report.ledger.public_bits_sent == pytest.approx(math.log2(3))


def test_protocol_without_rounds_keeps_state(trit_state, trit):
    outputs = (RelabelMap("A", "A", "Y_A", 3), RelabelMap("B", "B", "Y_B", 3))
    report = verify_secrecy(execute(ProtocolIR(outputs=outputs), trit_state), trit)
    assert report.is_secret
    assert report.ledger.public_bits_sent == 0.0


def test_non_local_read_is_rejected(trit_state):
    rule = MessageRule(("B",), {(x,): {0: F(1)} for x in range(3)})
    with pytest.raises(AlphabetMismatch):
        execute(ProtocolIR(rounds=(Round("A", rule),)), trit_state)


def test_missing_rule_row_is_rejected(trit_state):
    rule = MessageRule(("A",), {(0,): {0: F(1)}})
    with pytest.raises(AlphabetMismatch):
        execute(ProtocolIR(rounds=(Round("A", rule),)), trit_state)


def test_state_space_limit(monkeypatch, trit_state):
    monkeypatch.setenv("LOPC_MAX_JOINT_OUTCOMES", "2")
    rule = MessageRule(("A",), {(x,): {x: F(1)} for x in range(3)})
    with pytest.raises(StateSpaceTooLarge):
        execute(ProtocolIR(rounds=(Round("A", rule),)), trit_state)


def test_target_mismatch_is_reported(trit_state, bit):
    outputs = (RelabelMap("A", "A", "Y_A", 3), RelabelMap("B", "B", "Y_B", 3))
    report = verify_secrecy(execute(ProtocolIR(outputs=outputs), trit_state), bit)
    assert report.factorizes
    assert report.matches_target is False
    assert not report.is_secret
    assert "differs from target" in report.counterexample


GRID = [F(1, 5), F(1, 4), F(1, 3), F(2, 5), F(1, 2), F(3, 5), F(2, 3), F(3, 4), F(4, 5)]


def _two_by_two_block_pure():
    """Every 2x2 law on the grid with at least three positive cells."""
    return [
        cells for cells in product([F(0)] + GRID, repeat=4)
        if sum(cells) == 1 and cells.count(F(0)) <= 1
    ]


def test_two_by_two_grid_has_forty_five_laws():
    assert len(_two_by_two_block_pure()) == 45


@pytest.mark.parametrize("weights", _two_by_two_block_pure())
def test_block_pure_two_by_two_has_no_secret_bit(weights):
    cells = [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0)]
    d = JointDist((honest("A"), honest("B"), eve()), {c: w for c, w in zip(cells, weights) if w})
    assert classify_pure(d).kind == Verdict.BLOCK_PURE
    assert not pure_reachable_single_copy(d)


@pytest.mark.parametrize("order", list(islice(permutations(range(9)), 0, None, 40320)))
def test_full_support_three_by_three_has_no_secret_bit(order):
    cells = [(a, b) for a in range(3) for b in range(3)]
    weights = [F(k + 1, 45) for k in order]
    d = JointDist((honest("A", 3), honest("B", 3), eve()),
                  {(a, b, 0): w for (a, b), w in zip(cells, weights)})
    assert single_copy_witness(d) is None


def test_pure_state_reaches_a_secret_bit(trit_state):
    assert pure_reachable_single_copy(trit_state)
    rest_a, rest_b, f_a, f_b = single_copy_witness(trit_state)
    assert len(rest_a) == 2 and len(rest_b) == 2


def test_l_shaped_block_pure_state_does_not(data_dir):
    assert not pure_reachable_single_copy(parse_distribution(data_dir / "states" / "block_pure.json"))


def test_purity_search_needs_block_pure_input():
    mixed = JointDist((honest("A"), honest("B"), eve("E", 2)),
                      {(0, 0, 0): F(1, 2), (1, 1, 1): F(1, 2)})
    with pytest.raises(NotBlockPure):
        pure_reachable_single_copy(mixed)


def test_sample_is_reproducible(bit):
    result = execute(build_otp_protocol(bit), otp_input(bit))
    first = sample(result, np.random.default_rng(7))
    second = sample(result, np.random.default_rng(7))
    assert first == second
    assert first["Y_A"] == first["Y_B"]
    assert isinstance(first["M"], list)


def test_ledger_of_pure_state_run(trit, bit):
    from lopc.core.synthesis import synthesize_deterministic

    result = execute(synthesize_deterministic(trit, bit), pure_state(trit))
    assert result.ledger.shared_secret_bits_consumed == 0.0
    assert result.ledger.secret_bits_delivered == 0.0
    assert result.success_probability == 1
