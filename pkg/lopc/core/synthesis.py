"""
Protocol synthesis for classical pure states.

Provides:
- ConversionReport: a protocol together with its success probability
- synthesize_deterministic: one-round protocol for majorizing pairs
- synthesize_probabilistic: optimal single-copy protocol with one fail message
- procrustean: keep-or-fail filter onto a uniform sub-block

Every synthesized protocol acts on the canonical pure state
``pure_state(p)`` (symbol i is the i-th largest weight) with variables
A and B and outputs Y_A, Y_B.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from lopc.core.dist import SecrecySpectrum, format_prob
from lopc.core.errors import MajorizationFails, NonUniformKeepSet
from lopc.core.majorization import (
    birkhoff,
    collapse_equivalent,
    majorizes,
    minimizing_index,
    optimal_conversion_probability,
    pad,
    transfer_matrix,
)
from lopc.core.protocol import (
    FailMessage,
    MessageRule,
    ProtocolIR,
    Round,
    constant_table,
    identity_table,
    permutation_maps,
)

logger = logging.getLogger(__name__)

# (holder, source, output label) of both sides of a pure state
PURE_OUTPUTS = (("A", "A", "Y_A"), ("B", "B", "Y_B"))


@dataclass(frozen=True)
class Shuffle:
    """One message of a deterministic conversion: weight w, relabeling sigma, vector P q."""
    weight: Fraction
    sigma: Tuple[int, ...]
    vector: Tuple[Fraction, ...]


@dataclass(frozen=True)
class ConversionReport:
    """
    Synthesized protocol with its success probability.

    Attributes:
        protocol: The protocol.
        success_probability: Probability of not announcing the fail message.
        target: Spectrum produced on success.
        minimizing_index: Prefix index attaining the optimum (probabilistic only).
    """
    protocol: ProtocolIR
    success_probability: Fraction
    target: SecrecySpectrum
    minimizing_index: int = 0

    @property
    def fail_probability(self) -> Fraction:
        return 1 - self.success_probability

    def to_dict(self) -> dict:
        return {
            "success_probability": format_prob(self.success_probability),
            "fail_probability": format_prob(self.fail_probability),
            "target": self.target.to_strings(),
            "messages": len(self.protocol.rounds[0].rule.messages) if self.protocol.rounds else 0,
            "minimizing_index": self.minimizing_index,
        }


def _shuffles(source: List[Fraction], target: List[Fraction]) -> List[Shuffle]:
    """
    Time-reversed shuffle decomposition of source <- target.

    Birkhoff terms whose permuted target vectors coincide are merged: the
    parties cannot tell those shuffles apart once they relabel.
    """
    n = max(len(source), len(target))
    source, target = pad(source, n), pad(target, n)
    mix = collapse_equivalent(birkhoff(transfer_matrix(target, source)), target)
    logger.debug(f"Shuffle decomposition with {len(mix)} messages")
    return [Shuffle(weight, sigma, tuple(target[sigma[x]] for x in range(n))) for sigma, weight in mix.terms]


def _shuffle_protocol(p: SecrecySpectrum, source: List[Fraction], target: List[Fraction], scale: Fraction,
                      extra: Optional[Dict[int, Fraction]] = None
                      ) -> Tuple[Dict[Tuple[int, ...], Dict[int, Fraction]], List[Shuffle]]:
    """
    Message table p(k|x) = scale * w_k * (P_k q)_x / p_x for the success messages.

    ``source`` is the normalized success sub-distribution (p itself when
    scale is 1); ``extra`` holds the fail weight per input symbol.
    """
    shuffles = _shuffles(source, target)
    table: Dict[Tuple[int, ...], Dict[int, Fraction]] = {}
    for x, px in enumerate(p.weights):
        if px == 0:
            continue
        row = {
            k: scale * s.weight * s.vector[x] / px
            for k, s in enumerate(shuffles)
            if s.vector[x] != 0
        }
        if extra and extra.get(x):
            row[len(shuffles)] = extra[x]
        table[(x,)] = row
    return table, shuffles


def _success_part(p: SecrecySpectrum, lam: Fraction) -> List[Fraction]:
    """
    Water-filled success sub-distribution s = min(p, c) with sum(s) = lam.

    Symbols are capped from the top; the tail below the cap is kept whole.
    """
    w = list(p.weights)
    n = len(w)
    for m in range(1, n + 1):
        tail = sum(w[m:], Fraction(0))
        cap = (lam - tail) / m
        lower = w[m] if m < n else Fraction(0)
        if lower <= cap <= w[m - 1]:
            return [min(x, cap) for x in w]
    raise MajorizationFails(f"No water level gives success probability {format_prob(lam)}.")


def synthesize_deterministic(p: SecrecySpectrum, q: SecrecySpectrum) -> ProtocolIR:
    """
    One-round Alice-only protocol turning pure_state(p) into q.

    The transfer matrix D with D q = p is decomposed into permutations; run
    backwards, Alice announces which shuffle to undo (message k with
    probability w_k (P_k q)_x / p_x) and both parties relabel x -> sigma_k[x].

    Args:
        p: Source spectrum.
        q: Target spectrum (must majorize p).

    Returns:
        ProtocolIR: The protocol; empty when p equals q.

    Raises:
        MajorizationFails: If q does not majorize p.
    """
    logger.info(f"Synthesizing deterministic conversion {p.to_strings()} -> {q.to_strings()}")
    if not majorizes(q, p):
        logger.error("Deterministic synthesis requested for a non-majorizing pair")
        raise MajorizationFails(
            f"({', '.join(q.to_strings())}) does not majorize ({', '.join(p.to_strings())})."
        )
    n = max(len(p), len(q))
    if pad(list(p.weights), n) == pad(list(q.weights), n):
        return ProtocolIR(
            outputs=permutation_maps(PURE_OUTPUTS, {}, n, default=identity_table(len(p))),
            name="identity",
        )

    table, shuffles = _shuffle_protocol(p, list(p.weights), list(q.weights), Fraction(1))
    maps = {(k,): s.sigma[:len(p)] for k, s in enumerate(shuffles)}
    return ProtocolIR(
        rounds=(Round("A", MessageRule(("A",), table)),),
        outputs=permutation_maps(PURE_OUTPUTS, maps, n),
        name="deterministic",
    )


def _always_fail(p: SecrecySpectrum, q: SecrecySpectrum) -> ConversionReport:
    table = {(x,): {0: Fraction(1)} for x, w in enumerate(p.weights) if w > 0}
    n = max(len(p), len(q))
    protocol = ProtocolIR(
        rounds=(Round("A", MessageRule(("A",), table)),),
        outputs=permutation_maps(PURE_OUTPUTS, {(0,): constant_table(len(p))}, n),
        fail=FailMessage(0, 0),
        name="always-fail",
    )
    return ConversionReport(protocol, Fraction(0), q, minimizing_index(p, q))


def synthesize_probabilistic(p: SecrecySpectrum, q: SecrecySpectrum) -> ConversionReport:
    """
    Optimal single-copy conversion of pure_state(p) into q.

    Alice splits p into a success part s = min(p, c) of total weight lambda
    and a fail remainder. On success she runs the deterministic protocol
    for s / lambda -> q; on failure she announces the single fail message
    and both parties output symbol 0.

    Args:
        p: Source spectrum.
        q: Target spectrum.

    Returns:
        ConversionReport: Protocol with success probability lambda equal to
        optimal_conversion_probability(p, q).
    """
    lam = optimal_conversion_probability(p, q)
    k = minimizing_index(p, q)
    logger.info(f"Probabilistic conversion {p.to_strings()} -> {q.to_strings()}: lambda={format_prob(lam)}")
    if lam == 1:
        return ConversionReport(synthesize_deterministic(p, q), Fraction(1), q, k)
    if lam == 0:
        return _always_fail(p, q)

    success = _success_part(p, lam)
    leftover = {x: (px - sx) / px for x, (px, sx) in enumerate(zip(p.weights, success)) if px > 0 and px != sx}
    table, shuffles = _shuffle_protocol(p, [s / lam for s in success], list(q.weights), lam, leftover)
    n = max(len(p), len(q))
    fail_id = len(shuffles)
    maps = {(j,): s.sigma[:len(p)] for j, s in enumerate(shuffles)}
    maps[(fail_id,)] = constant_table(len(p))
    protocol = ProtocolIR(
        rounds=(Round("A", MessageRule(("A",), table)),),
        outputs=permutation_maps(PURE_OUTPUTS, maps, n),
        fail=FailMessage(fail_id, 0),
        name="probabilistic",
    )
    return ConversionReport(protocol, lam, q, k)


def procrustean(p: SecrecySpectrum, keep: Iterable[int]) -> ConversionReport:
    """
    Keep-or-fail filter: Alice announces "OK" iff her symbol is in ``keep``.

    Args:
        p: Source spectrum.
        keep: 0-based symbols to keep; their weights must be equal and positive.

    Returns:
        ConversionReport: Two-message protocol whose success branch is
        uniform on len(keep) symbols.

    Raises:
        NonUniformKeepSet: If the kept weights differ, are zero or the set is empty.
    """
    keep = sorted(set(keep))
    if not keep:
        raise NonUniformKeepSet("Keep set cannot be empty.")
    if any(not 0 <= x < len(p) for x in keep):
        raise NonUniformKeepSet(f"Keep set {keep} refers to symbols outside 0..{len(p) - 1}.")
    kept = {p.weights[x] for x in keep}
    if len(kept) != 1 or 0 in kept:
        raise NonUniformKeepSet(
            f"Kept weights must be equal and positive, got {[format_prob(p.weights[x]) for x in keep]}."
        )

    table = {(x,): {0 if x in keep else 1: Fraction(1)} for x, w in enumerate(p.weights) if w > 0}
    relabel = [0] * len(p)
    for i, x in enumerate(keep):
        relabel[x] = i
    maps = {(0,): tuple(relabel), (1,): constant_table(len(p))}
    success = sum((p.weights[x] for x in keep), Fraction(0))
    fail = FailMessage(1, 0) if success != 1 else None
    logger.info(f"Procrustean filter on {p.to_strings()} keeping {keep}: success {format_prob(success)}")
    protocol = ProtocolIR(
        rounds=(Round("A", MessageRule(("A",), table)),),
        outputs=permutation_maps(PURE_OUTPUTS, maps, len(keep)),
        fail=fail,
        name="procrustean",
    )
    return ConversionReport(protocol, success, SecrecySpectrum.uniform(len(keep)))
