"""
Block protocols on many copies of a pure state.

Provides:
- TypeClass, LevelSet, BlockReport: type-class bookkeeping and block results
- concentrate_block: zero-communication extraction of uniform bits
- dilute_block: typical-set compression sent under a one-time pad
- rate_report: concentration rates for several block lengths
- extract_bits, extraction_distribution, concentration_protocol: the
  extraction map itself, its exact output law and its protocol form
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from lopc.core.dist import (
    JointDist,
    SecrecySpectrum,
    entropy_of_secrecy,
    eve,
    format_prob,
    honest,
)
from lopc.core.engine import execute, verify_secrecy
from lopc.core.errors import DeltaTooSmall, ParseError, StateSpaceTooLarge
from lopc.core.protocol import FailMessage, MessageRule, ProtocolIR, RelabelMap, Round
from lopc.settings import get_max_joint_outcomes

logger = logging.getLogger(__name__)


def multinomial(counts: Sequence[int]) -> int:
    """N! / prod(c_i!) computed with exact integers."""
    total, result = 0, 1
    for c in counts:
        total += c
        result *= math.comb(total, c)
    return result


@dataclass(frozen=True)
class TypeClass:
    """
    All length-N sequences with the same symbol counts.

    Attributes:
        counts: Occurrences of each symbol; they sum to N.
        size: Number of sequences in the class (multinomial coefficient).
        probability: Exact probability of landing in the class.
    """
    counts: Tuple[int, ...]
    size: int
    probability: Fraction

    @property
    def n(self) -> int:
        return sum(self.counts)

    def sample_entropy(self, p: SecrecySpectrum) -> float:
        """-(1/N) log2 P(x) of any sequence in the class."""
        bits = -sum(c * math.log2(w) for c, w in zip(self.counts, p.weights) if c)
        return bits / self.n


def _weak_compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def type_classes(p: SecrecySpectrum, n: int) -> List[TypeClass]:
    """Type classes of positive probability, most likely symbol counts first."""
    classes = []
    for counts in _weak_compositions(n, len(p)):
        prob = Fraction(1)
        for c, w in zip(counts, p.weights):
            prob *= w ** c
        if prob == 0:
            continue
        size = multinomial(counts)
        classes.append(TypeClass(counts, size, size * prob))
    return classes


def rank_in_class(sequence: Sequence[int], alphabet: int) -> int:
    """Lexicographic rank of a sequence among all sequences with its symbol counts."""
    counts = [0] * alphabet
    for x in sequence:
        counts[x] += 1
    rank = 0
    for x in sequence:
        for smaller in range(x):
            if counts[smaller]:
                counts[smaller] -= 1
                rank += multinomial(counts)
                counts[smaller] += 1
        counts[x] -= 1
    return rank


def dyadic_pieces(m: int) -> List[int]:
    """Exponents of the binary digits of m, largest first."""
    return [b for b in range(m.bit_length() - 1, -1, -1) if m >> b & 1]


def bits_from_rank(rank: int, m: int) -> str:
    """
    Uniform bits from a rank uniform on 0..m-1.

    The range is cut into blocks of size 2^b following the binary digits
    of m; a rank in a block of size 2^b yields its offset as b bits.
    """
    for b in dyadic_pieces(m):
        if rank < 1 << b:
            return format(rank, f"0{b}b") if b else ""
        rank -= 1 << b
    raise ParseError(f"Rank {rank} is outside 0..{m - 1}.")


def class_yield(m: int) -> Fraction:
    """Expected number of extracted bits from a uniform rank on m values."""
    return Fraction(sum((1 << b) * b for b in dyadic_pieces(m)), m)


@dataclass(frozen=True)
class LevelSet:
    """
    Type classes whose sequences share one probability.

    Every sequence of a level set is equally likely, so the parties rank
    inside the whole union rather than inside each type class.
    """
    classes: Tuple[TypeClass, ...]

    @property
    def size(self) -> int:
        return sum(tc.size for tc in self.classes)

    @property
    def probability(self) -> Fraction:
        return sum((tc.probability for tc in self.classes), Fraction(0))


def level_sets(p: SecrecySpectrum, n: int) -> List[LevelSet]:
    """Type classes grouped by per-sequence probability, in type-class order."""
    groups: Dict[Fraction, List[TypeClass]] = {}
    for tc in type_classes(p, n):
        groups.setdefault(tc.probability / tc.size, []).append(tc)
    return [LevelSet(tuple(group)) for group in groups.values()]


def level_rank(sequence: Sequence[int], p: SecrecySpectrum) -> Tuple[int, int]:
    """
    Rank of a sequence inside its level set, and the size of that set.

    Classes of the level set are laid out in type-class order; the rank
    is the offset of the sequence's class plus its rank inside the class.
    """
    counts = tuple(sum(1 for x in sequence if x == s) for s in range(len(p)))
    weight = _sequence_probability(p, sequence)
    offset, size = 0, 0
    for tc in type_classes(p, len(sequence)):
        if tc.probability != tc.size * weight:
            continue
        if tc.counts == counts:
            offset = size
        size += tc.size
    return offset + rank_in_class(sequence, len(p)), size


def extract_bits(sequence: Sequence[int], p: SecrecySpectrum) -> str:
    """
    Local extraction map applied by each party to the shared sequence.

    Args:
        sequence: The common sequence of symbols.
        p: Single-copy spectrum (fixes the level sets).

    Returns:
        str: The extracted bit-string (empty for impossible sequences).
    """
    if _sequence_probability(p, sequence) == 0:
        return ""
    rank, size = level_rank(sequence, p)
    return bits_from_rank(rank, size)


def encode_bits(bits: str) -> int:
    """Bit-strings of every length as one symbol: 2^len - 1 + value."""
    return (1 << len(bits)) - 1 + (int(bits, 2) if bits else 0)


@dataclass(frozen=True)
class BlockReport:
    """
    Result of a block protocol.

    Attributes:
        n: Block length N.
        expected_yield_bits: Expected secret bits produced (concentration) or
            N times the target entropy (dilution).
        rate: Bits per copy (yield / N, or key bits / N for dilution).
        target_entropy: Entropy of secrecy of the single-copy spectrum.
        key_bits_used: Shared key bits consumed (dilution).
        failure_probability: Probability of rejecting the sample (dilution).
        exact_yield: Exact expected yield.
        typical_set_size: |T| (dilution).
        verification: How secrecy was checked ("engine", "engine-reduced" or "unverified").
        secret: Secrecy verdict of the executed or certified protocol.
    """
    n: int
    expected_yield_bits: float
    rate: float
    target_entropy: float
    key_bits_used: Optional[int] = None
    failure_probability: Fraction = Fraction(0)
    exact_yield: Optional[Fraction] = None
    typical_set_size: Optional[int] = None
    verification: Optional[str] = None
    secret: Optional[bool] = None
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        report: Dict[str, Any] = {
            "N": self.n,
            "expected_yield_bits": self.expected_yield_bits,
            "rate": self.rate,
            "target_entropy": self.target_entropy,
            "failure_probability": format_prob(self.failure_probability),
        }
        if self.exact_yield is not None:
            report["exact_yield"] = format_prob(self.exact_yield) if self.exact_yield <= 1 else str(self.exact_yield)
        if self.key_bits_used is not None:
            report["key_bits_used"] = self.key_bits_used
            report["typical_set_size"] = self.typical_set_size
            report["verification"] = self.verification
            report["secret"] = self.secret
        report.update(self.details)
        return report


def concentrate_block(p: SecrecySpectrum, n: int) -> BlockReport:
    """
    Concentrate N copies of pure_state(p) into uniform secret bits.

    Both parties rank their common sequence inside its level set (the
    type classes sharing its probability) and cut the rank range into
    dyadic blocks; no message is sent. The expected yield is summed
    exactly over level sets.

    Args:
        p: Single-copy spectrum.
        n: Block length (>= 1).

    Returns:
        BlockReport: Exact expected yield and rate.
    """
    if n < 1:
        raise ParseError("Block length must be at least 1.")
    exact = sum((ls.probability * class_yield(ls.size) for ls in level_sets(p, n)), Fraction(0))
    h = entropy_of_secrecy(p)
    logger.info(f"Concentration of {p.to_strings()} with N={n}: yield {float(exact):.6f} bits")
    return BlockReport(n, float(exact), float(exact) / n, h, exact_yield=exact)


def rate_report(p: SecrecySpectrum, n_list: Sequence[int]) -> List[BlockReport]:
    """Concentration reports for several block lengths."""
    return [concentrate_block(p, n) for n in n_list]


def extraction_distribution(p: SecrecySpectrum, n: int) -> Dict[str, Fraction]:
    """
    Exact law of the extracted bit-string for N copies.

    Every dyadic block of a level set contributes P(set) / |set| to each
    string of its length.
    """
    law: Dict[str, Fraction] = {}
    for ls in level_sets(p, n):
        share = ls.probability / ls.size
        for b in dyadic_pieces(ls.size):
            for value in range(1 << b):
                bits = format(value, f"0{b}b") if b else ""
                law[bits] = law.get(bits, Fraction(0)) + share
    return law


def _check_enumerable(count: int, what: str) -> None:
    limit = get_max_joint_outcomes()
    if count > limit:
        raise StateSpaceTooLarge(f"{what} needs {count} outcomes, above the limit of {limit}.")


def _sequences(alphabet: int, n: int) -> List[Tuple[int, ...]]:
    return list(product(range(alphabet), repeat=n))


def _sequence_probability(p: SecrecySpectrum, seq: Sequence[int]) -> Fraction:
    prob = Fraction(1)
    for x in seq:
        prob *= p.weights[x]
    return prob


def block_state(p: SecrecySpectrum, n: int) -> JointDist:
    """
    N copies of pure_state(p) with each party's sequence as one variable.

    The symbol of a sequence is its base-|p| index (lexicographic order).
    """
    size = len(p) ** n
    _check_enumerable(size, f"The {n}-copy block state")
    entries = {}
    for idx, seq in enumerate(_sequences(len(p), n)):
        prob = _sequence_probability(p, seq)
        if prob:
            entries[(idx, idx, 0)] = prob
    return JointDist((honest("A", size), honest("B", size), eve()), entries)


def concentration_protocol(p: SecrecySpectrum, n: int) -> ProtocolIR:
    """
    The extraction as a zero-round protocol on ``block_state(p, n)``.

    Both parties output ``encode_bits(extract_bits(sequence, p))``.
    """
    sequences = _sequences(len(p), n)
    _check_enumerable(len(sequences), f"The {n}-copy extraction table")
    table = tuple(encode_bits(extract_bits(seq, p)) for seq in sequences)
    alphabet = max(table) + 1
    return ProtocolIR(
        outputs=(
            RelabelMap("A", "A", "Y_A", alphabet, {(): table}),
            RelabelMap("B", "B", "Y_B", alphabet, {(): table}),
        ),
        name=f"concentration-{n}",
    )


def _typical(tc: TypeClass, p: SecrecySpectrum, h: float, delta: float, two_sided: bool) -> bool:
    s = tc.sample_entropy(p)
    if s > h + delta + 1e-12:
        return False
    return not (two_sided and s < h - delta - 1e-12)


def dilution_input(p: SecrecySpectrum, n: int, key_bits: int) -> JointDist:
    """Alice's private sample X of N copies plus a perfect key over Z_{2^L}."""
    size = len(p) ** n
    key_size = 1 << key_bits
    _check_enumerable(size * key_size, "The dilution input")
    key_weight = Fraction(1, key_size)
    entries = {}
    for idx, seq in enumerate(_sequences(len(p), n)):
        prob = _sequence_probability(p, seq)
        if prob:
            for k in range(key_size):
                entries[(idx, k, k, 0)] = prob * key_weight
    parties = (honest("X", size, "A"), honest("KA", key_size, "A"), honest("KB", key_size, "B"), eve())
    return JointDist(parties, entries)


def dilution_protocol(p: SecrecySpectrum, n: int, typical_classes: Sequence[Tuple[int, ...]],
                      key_bits: int) -> ProtocolIR:
    """
    Compressed one-time pad on ``dilution_input``.

    Alice announces (index of X in the typical set + key) mod 2^L, or the
    fail message 2^L when X is atypical. Both parties output the sequence.
    """
    size = len(p) ** n
    key_size = 1 << key_bits
    kept = set(typical_classes)
    typical: List[int] = []
    for idx, seq in enumerate(_sequences(len(p), n)):
        counts = tuple(seq.count(x) for x in range(len(p)))
        if counts in kept:
            typical.append(idx)
    position = {idx: i for i, idx in enumerate(typical)}

    rule = {}
    for idx in range(size):
        for k in range(key_size):
            if idx in position:
                rule[(idx, k)] = {(position[idx] + k) % key_size: Fraction(1)}
            else:
                rule[(idx, k)] = {key_size: Fraction(1)}
    bob_maps = {}
    for m in range(key_size):
        bob_maps[(m,)] = tuple(
            typical[(m - k) % key_size] if (m - k) % key_size < len(typical) else 0
            for k in range(key_size)
        )
    bob_maps[(key_size,)] = tuple(0 for _ in range(key_size))
    alice_maps = {(m,): tuple(range(size)) for m in range(key_size)}
    alice_maps[(key_size,)] = tuple(0 for _ in range(size))
    return ProtocolIR(
        rounds=(Round("A", MessageRule(("X", "KA"), rule)),),
        outputs=(
            RelabelMap("A", "X", "Y_A", size, alice_maps),
            RelabelMap("B", "KB", "Y_B", size, bob_maps),
        ),
        fail=FailMessage(key_size, 0),
        keys=(("KA", "KB"),),
        payload=(("X",), ("Y_B",)),
        name=f"dilution-{n}",
    )


def _typical_set(p: SecrecySpectrum, n: int, h: float, delta: float,
                 two_sided: bool) -> Tuple[List[TypeClass], int, int]:
    """Typical classes, |T| and L = ceil(log2 |T|)."""
    classes = [tc for tc in type_classes(p, n) if _typical(tc, p, h, delta, two_sided)]
    size = sum(tc.size for tc in classes)
    return classes, size, (size - 1).bit_length() if size else 0


def _fits_engine(p: SecrecySpectrum, n: int, key_bits: int) -> bool:
    return len(p) ** n * (1 << key_bits) <= get_max_joint_outcomes()


def _run_dilution(p: SecrecySpectrum, n: int, classes: Sequence[TypeClass], key_bits: int) -> bool:
    protocol = dilution_protocol(p, n, [tc.counts for tc in classes], key_bits)
    result = execute(protocol, dilution_input(p, n, key_bits))
    return verify_secrecy(result, conditioned_on_success=True).is_secret


def dilute_block(p: SecrecySpectrum, n: int, delta: float, two_sided: bool = False) -> BlockReport:
    """
    Dilute shared key bits into N copies of pure_state(p).

    Alice samples N symbols privately, rejects sequences whose sample
    entropy exceeds H + delta (or, with ``two_sided``, falls below
    H - delta), and sends the index of the sequence in the typical set
    under a one-time pad of L = ceil(log2 |T|) key bits.

    When the N-copy protocol fits the engine limit it is executed and
    verified exactly ("engine"). Otherwise the same construction, with the
    same delta, is executed and verified at the largest block length that
    fits ("engine-reduced", with ``verified_block_length`` in the details);
    if no block length fits, ``secret`` stays None ("unverified").

    Args:
        p: Target single-copy spectrum.
        n: Block length (>= 1).
        delta: Typicality slack (> 0).
        two_sided: Also reject sequences that are too likely.

    Returns:
        BlockReport: Key bits used, exact failure probability and the verdict.

    Raises:
        DeltaTooSmall: If no type class is typical.
    """
    if n < 1:
        raise ParseError("Block length must be at least 1.")
    if delta <= 0:
        raise ParseError("delta must be positive.")
    h = entropy_of_secrecy(p)
    classes, size, key_bits = _typical_set(p, n, h, delta, two_sided)
    if size == 0:
        logger.error(f"Typical set is empty for N={n}, delta={delta}")
        raise DeltaTooSmall(f"No sequence of length {n} is within {delta} of the entropy {h:.6f}.")
    failure = 1 - sum((tc.probability for tc in classes), Fraction(0))
    logger.info(f"Dilution of {p.to_strings()} with N={n}: |T|={size}, L={key_bits}, "
                f"failure={float(failure):.6f}")

    details: Dict[str, Any] = {"two_sided": two_sided, "delta": delta}
    secret: Optional[bool] = None
    verification = "unverified"
    if _fits_engine(p, n, key_bits):
        secret = _run_dilution(p, n, classes, key_bits)
        verification = "engine"
    else:
        for m in range(n - 1, 0, -1):
            small, small_size, small_bits = _typical_set(p, m, h, delta, two_sided)
            if small_size == 0 or not _fits_engine(p, m, small_bits):
                continue
            logger.info(f"Dilution with N={n} too large to enumerate; verifying the N={m} construction")
            secret = _run_dilution(p, m, small, small_bits)
            verification = "engine-reduced"
            details["verified_block_length"] = m
            break
        else:
            logger.warning(f"No block length up to {n} fits the engine limit; dilution left unverified")
    return BlockReport(
        n,
        expected_yield_bits=h * n,
        rate=key_bits / n,
        target_entropy=h,
        key_bits_used=key_bits,
        failure_probability=failure,
        typical_set_size=size,
        verification=verification,
        secret=secret,
        details=details,
    )
