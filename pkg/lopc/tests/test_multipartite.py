"""
Tests for multipartite conversions, partition entropies and the cat-state rate audit.
"""

from fractions import Fraction

import pytest
import sympy

from lopc.core.dist import JointDist, cat_state, classify_pure, eve, honest, marginal, shared_bit
from lopc.core.engine import verify_secrecy
from lopc.core.errors import EveCorrelated, PartitionError, WrongInputState
from lopc.core.multipartite import (
    Bipartition,
    all_cuts,
    cat_rate_feasibility,
    conversion_audit,
    double_epr,
    exact_partition_entropy,
    nonnegative_point,
    partition_entropy,
    run_epr2_to_ghz,
    run_ghz_to_epr,
    run_swap,
    with_idle,
)


def test_partition_entropies():
    ghz = cat_state(3)
    assert partition_entropy(ghz, Bipartition.of(ghz, ["A", "B"])) == pytest.approx(1.0)
    epr = with_idle(shared_bit(), ["C"])
    assert partition_entropy(epr, Bipartition.of(epr, ["A", "B"])) == 0.0
    pairs = double_epr()
    assert partition_entropy(pairs, Bipartition.of(pairs, ["A", "C"])) == pytest.approx(2.0)


def test_partition_entropy_needs_eve_independent_state():
    d = JointDist((honest("A"), honest("B"), eve("E", 2)), {(0, 0, 0): Fraction(1, 2), (1, 1, 1): Fraction(1, 2)})
    with pytest.raises(EveCorrelated):
        partition_entropy(d, Bipartition.of(d, ["A"]))


def test_bipartition_validation():
    with pytest.raises(PartitionError):
        Bipartition(frozenset(), frozenset({"A"}))
    with pytest.raises(PartitionError):
        Bipartition(frozenset({"A"}), frozenset({"A", "B"}))
    with pytest.raises(PartitionError):
        Bipartition.of(cat_state(3), ["Z"])


def test_all_cuts_lists_each_cut_once():
    cuts = all_cuts(["A", "B", "C", "D"])
    assert len(cuts) == 7
    assert all("A" in cut.left for cut in cuts)


def test_epr_pairs_make_a_ghz(bit):
    result = run_epr2_to_ghz(double_epr())
    report = verify_secrecy(result, bit)
    assert report.is_secret
    outputs = marginal(result.joint, ["Y_A", "Y_B", "Y_C"])
    assert dict(outputs.entries) == {(0, 0, 0): Fraction(1, 2), (1, 1, 1): Fraction(1, 2)}
    assert report.ledger.public_bits_sent == pytest.approx(1.0)


def test_ghz_gives_an_epr_pair(bit):
    result = run_ghz_to_epr(cat_state(3))
    report = verify_secrecy(result, bit)
    assert report.is_secret
    assert classify_pure(marginal(result.joint, ["Y_A", "Y_B", "E"])).is_pure


def test_secrecy_swapping(bit):
    result = run_swap(double_epr())
    report = verify_secrecy(result, bit)
    assert report.is_secret
    assert result.output_labels == ("Y_A", "Y_C")


def test_canned_protocols_check_their_input():
    with pytest.raises(WrongInputState):
        run_epr2_to_ghz(cat_state(3))
    with pytest.raises(WrongInputState):
        run_ghz_to_epr(double_epr())


def test_ghz_cannot_become_two_epr_pairs():
    witnesses = conversion_audit(cat_state(3), double_epr())
    assert [w["cut"] for w in witnesses] == ["AC|B"]
    assert witnesses[0]["source"] == pytest.approx(1.0)
    assert witnesses[0]["target"] == pytest.approx(2.0)
    assert conversion_audit(double_epr(), cat_state(3)) == []


def test_audit_needs_same_holders():
    with pytest.raises(PartitionError):
        conversion_audit(cat_state(3), cat_state(4))


def test_four_party_cat_is_infeasible():
    verdict = cat_rate_feasibility(4)
    assert not verdict.feasible
    assert verdict.certificate["aggregate_sums"] == ["4", "3"]
    assert len(verdict.problem.equations()) == 7
    assert verdict.to_dict()["verdict"] == "Infeasible"


def test_three_party_cat_is_feasible_at_half_rates():
    verdict = cat_rate_feasibility(3)
    assert verdict.feasible
    assert verdict.rates == {"n_AB": Fraction(1, 2), "n_AC": Fraction(1, 2), "n_BC": Fraction(1, 2)}


def test_two_party_cat_is_one_shared_bit():
    verdict = cat_rate_feasibility(2)
    assert verdict.feasible
    assert verdict.rates == {"n_AB": Fraction(1)}


def test_rate_audit_needs_two_parties():
    with pytest.raises(PartitionError):
        cat_rate_feasibility(1)


def test_exact_partition_entropies():
    for n in (2, 3, 4):
        state = cat_state(n)
        assert all(exact_partition_entropy(state, cut) == 1 for cut in all_cuts(state.holders()))
    pairs = double_epr()
    assert exact_partition_entropy(pairs, Bipartition.of(pairs, ["A", "C"])) == 2
    assert cat_rate_feasibility(4).problem.rhs == (Fraction(1),) * 7


t, s = sympy.symbols("t s")


def test_nonnegative_point_keeps_every_rate_nonnegative():
    assert nonnegative_point((t, 1 - t)) == {t: Fraction(0)}
    # zeroing t would give a rate of -1
    point = nonnegative_point((t - 1, t))
    assert point == {t: Fraction(1)}
    point = nonnegative_point((s + t - 3, 1 - s, s, t))
    assert point is not None
    assert all(expr.subs(point) >= 0 for expr in (s + t - 3, 1 - s, s, t))


def test_nonnegative_point_detects_infeasible_families():
    assert nonnegative_point((t - 2, 1 - t)) is None
    assert nonnegative_point((s + t - 3, 1 - s, 1 - t)) is None


def test_fixed_solution_needs_no_free_symbols():
    assert nonnegative_point((sympy.Rational(1, 2), sympy.Integer(0))) == {}
    assert nonnegative_point((sympy.Integer(-1),)) is None
