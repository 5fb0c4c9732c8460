"""
Exact joint distributions over named parties.

Provides:
- Role, PartyId: variable descriptors (owner, role, alphabet size)
- SecrecySpectrum: descending probability vector of a pure state
- JointDist: finitely supported exact distribution over outcome tuples
- marginal, is_product, classify_pure: structural queries
- entropy_of_secrecy, mutual_information: information measures (bits)
- tensor, pure_state, shared_bit, cat_state: constructors
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from lopc.core.errors import (
    ClassificationError,
    NormalizationError,
    ParseError,
    PartitionError,
    UnknownPartyError,
)

logger = logging.getLogger(__name__)

Prob = Fraction
Outcome = Tuple[int, ...]
Labels = Union[str, Sequence[str]]

# Tolerance for float information measures
EPSILON = 1e-9


def to_prob(value: Union[str, int, float, Fraction]) -> Fraction:
    """
    Parse a probability into an exact rational.

    Accepts "num/den" strings, decimal strings ("0.4" is 2/5 exactly), ints
    and Fractions. Floats are converted through their shortest decimal repr
    so that 0.4 also becomes 2/5.

    Args:
        value: The value to parse.

    Returns:
        Fraction: The exact probability.

    Raises:
        ParseError: If the value is malformed or outside [0, 1].
    """
    try:
        if isinstance(value, float):
            prob = Fraction(repr(value))
        elif isinstance(value, str):
            prob = Fraction(value.strip())
        else:
            prob = Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ParseError(f"Malformed probability {value!r}: {e}")
    if prob < 0 or prob > 1:
        raise ParseError(f"Probability {value!r} is outside [0, 1].")
    return prob


def parse_vector(text: str) -> List[Fraction]:
    """Parse a comma-separated list of rationals such as "1/3,1/3,1/3"."""
    parts = [part for part in text.split(",") if part.strip()]
    if not parts:
        raise ParseError("Empty probability vector.")
    return [to_prob(part) for part in parts]


def format_prob(prob: Fraction) -> str:
    """Render a probability as "num/den" (or "0"/"1")."""
    if prob.denominator == 1:
        return str(prob.numerator)
    return f"{prob.numerator}/{prob.denominator}"


class Role(str, Enum):
    """Role of a variable in a distribution."""
    HONEST = "honest"
    EAVESDROPPER = "eavesdropper"
    PUBLIC = "public"


@dataclass(frozen=True)
class PartyId:
    """
    A random variable held by one party.

    Attributes:
        label: Unique variable name (e.g. "A", "B2", "E").
        role: Honest party, eavesdropper, or public transcript.
        alphabet: Number of symbols; symbols are 0..alphabet-1.
        holder: The party owning the variable. Defaults to the label, so a
            party with a single variable needs no holder.
    """
    label: str
    role: Role = Role.HONEST
    alphabet: int = 2
    holder: Optional[str] = None

    def __post_init__(self):
        if not self.label:
            raise ParseError("Party label cannot be empty.")
        if self.alphabet < 1:
            raise ParseError(f"Party {self.label} must have a positive alphabet size.")
        object.__setattr__(self, "role", Role(self.role))
        if self.holder is None:
            object.__setattr__(self, "holder", self.label)

    @property
    def is_honest(self) -> bool:
        return self.role == Role.HONEST


def honest(label: str, alphabet: int = 2, holder: Optional[str] = None) -> PartyId:
    """Shorthand for an honest variable."""
    return PartyId(label, Role.HONEST, alphabet, holder)


def eve(label: str = "E", alphabet: int = 1) -> PartyId:
    """Shorthand for the eavesdropper variable."""
    return PartyId(label, Role.EAVESDROPPER, alphabet)


@dataclass(frozen=True)
class SecrecySpectrum:
    """
    Descending probability vector of a classical pure state.

    Attributes:
        weights: Exact probabilities, sorted descending, summing to 1.
    """
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if not weights:
            raise ParseError("A spectrum needs at least one weight.")
        if any(w < 0 for w in weights):
            raise ParseError("Spectrum weights must be nonnegative.")
        total = sum(weights, Fraction(0))
        if total != 1:
            raise NormalizationError(
                f"Spectrum sums to {format_prob(total)}, not 1 (deficit {format_prob(1 - total)}).",
                deficit=1 - total,
            )
        if any(weights[i] < weights[i + 1] for i in range(len(weights) - 1)):
            raise ParseError("Spectrum weights must be sorted descending; use SecrecySpectrum.of().")

    @classmethod
    def of(cls, values: Iterable[Union[str, int, float, Fraction]]) -> "SecrecySpectrum":
        """Build a spectrum from unsorted values; ties keep their input order."""
        probs = [to_prob(v) for v in values]
        order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
        return cls(tuple(probs[i] for i in order))

    @classmethod
    def parse(cls, text: str) -> "SecrecySpectrum":
        """Build a spectrum from a comma-separated rational string."""
        return cls.of(parse_vector(text))

    @classmethod
    def uniform(cls, n: int) -> "SecrecySpectrum":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    def __len__(self) -> int:
        return len(self.weights)

    def trimmed(self) -> "SecrecySpectrum":
        """Drop trailing zero weights."""
        weights = list(self.weights)
        while len(weights) > 1 and weights[-1] == 0:
            weights.pop()
        return SecrecySpectrum(tuple(weights))

    def to_strings(self) -> List[str]:
        return [format_prob(w) for w in self.weights]


@dataclass(frozen=True)
class JointDist:
    """
    Exact joint distribution over ordered variables.

    Zero-probability outcomes are dropped on construction, so ``entries`` is
    exactly the support.

    Attributes:
        parties: Ordered variable descriptors.
        entries: Mapping from outcome tuples to positive probabilities.
    """
    parties: Tuple[PartyId, ...]
    entries: Mapping[Outcome, Fraction] = field(compare=True)

    def __post_init__(self):
        parties = tuple(self.parties)
        object.__setattr__(self, "parties", parties)

        labels = [p.label for p in parties]
        if len(set(labels)) != len(labels):
            raise ParseError(f"Party labels must be unique: {labels}")
        if sum(1 for p in parties if p.role == Role.EAVESDROPPER) > 1:
            raise ParseError("A distribution has at most one eavesdropper variable.")

        cleaned: Dict[Outcome, Fraction] = {}
        for outcome, prob in self.entries.items():
            outcome = tuple(int(s) for s in outcome)
            if len(outcome) != len(parties):
                raise ParseError(
                    f"Outcome {list(outcome)} has arity {len(outcome)}, expected {len(parties)}."
                )
            for symbol, party in zip(outcome, parties):
                if not 0 <= symbol < party.alphabet:
                    raise ParseError(
                        f"Symbol {symbol} is outside the alphabet of {party.label} "
                        f"(size {party.alphabet})."
                    )
            prob = Fraction(prob)
            if prob < 0:
                raise ParseError(f"Negative probability for outcome {list(outcome)}.")
            if prob == 0:
                continue
            cleaned[outcome] = cleaned.get(outcome, Fraction(0)) + prob

        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            deficit = 1 - total
            raise NormalizationError(
                f"Entries sum to {format_prob(total) if total <= 1 else total}, "
                f"not 1 (deficit {deficit}).",
                deficit=deficit,
            )
        object.__setattr__(self, "entries", MappingProxyType(dict(sorted(cleaned.items()))))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(p.label for p in self.parties)

    def index(self, label: str) -> int:
        """
        Position of a variable.

        Raises:
            UnknownPartyError: If the label is not present.
        """
        for i, party in enumerate(self.parties):
            if party.label == label:
                return i
        raise UnknownPartyError(f"Unknown party '{label}'. Known parties: {', '.join(self.labels)}")

    def party(self, label: str) -> PartyId:
        return self.parties[self.index(label)]

    @property
    def honest_labels(self) -> Tuple[str, ...]:
        return tuple(p.label for p in self.parties if p.role == Role.HONEST)

    @property
    def eavesdropper(self) -> Optional[PartyId]:
        for party in self.parties:
            if party.role == Role.EAVESDROPPER:
                return party
        return None

    def holders(self) -> List[str]:
        """Honest holders in first-appearance order."""
        seen: List[str] = []
        for party in self.parties:
            if party.is_honest and party.holder not in seen:
                seen.append(party.holder)
        return seen

    def labels_of(self, holders: Iterable[str]) -> List[str]:
        """Honest variable labels owned by the given holders, in party order."""
        wanted = set(holders)
        return [p.label for p in self.parties if p.is_honest and p.holder in wanted]

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def probability(self, outcome: Sequence[int]) -> Fraction:
        return self.entries.get(tuple(outcome), Fraction(0))


def _as_labels(labels: Labels) -> List[str]:
    if isinstance(labels, str):
        return [labels]
    return list(labels)


def marginal(d: JointDist, keep: Iterable[str]) -> JointDist:
    """
    Exact marginal onto a subset of variables.

    The kept variables stay in their original order.

    Args:
        d: The distribution.
        keep: Labels to keep (nonempty).

    Returns:
        JointDist: The marginal distribution.

    Raises:
        PartitionError: If ``keep`` is empty.
        UnknownPartyError: If a label is not present.
    """
    keep = set(_as_labels(keep)) if isinstance(keep, str) else set(keep)
    if not keep:
        raise PartitionError("marginal needs at least one party to keep.")
    for label in keep:
        d.index(label)
    positions = [i for i, p in enumerate(d.parties) if p.label in keep]
    if len(positions) == len(d.parties):
        return d

    entries: Dict[Outcome, Fraction] = {}
    for outcome, prob in d.entries.items():
        key = tuple(outcome[i] for i in positions)
        entries[key] = entries.get(key, Fraction(0)) + prob
    return JointDist(tuple(d.parties[i] for i in positions), entries)


def is_product(d: JointDist, partition: Tuple[Iterable[str], Iterable[str]]) -> bool:
    """
    Exact test that ``d`` factorizes across a two-sided partition.

    Args:
        d: The distribution.
        partition: Two disjoint label sets covering all variables. An empty
            side is allowed and makes the test trivially true.

    Returns:
        bool: True iff P(x1, x2) = P(x1) P(x2) for every pair, as rationals.

    Raises:
        PartitionError: If the sides overlap or do not cover all variables.
    """
    left, right = set(partition[0]), set(partition[1])
    for label in left | right:
        d.index(label)
    if left & right:
        raise PartitionError(f"Partition sides overlap on {sorted(left & right)}.")
    if left | right != set(d.labels):
        missing = set(d.labels) - (left | right)
        raise PartitionError(f"Partition does not cover {sorted(missing)}.")
    if not left or not right:
        return True

    left_pos = [i for i, p in enumerate(d.parties) if p.label in left]
    right_pos = [i for i, p in enumerate(d.parties) if p.label in right]
    m_left = marginal(d, left)
    m_right = marginal(d, right)
    if len(d.entries) != len(m_left.entries) * len(m_right.entries):
        return False
    for outcome, prob in d.entries.items():
        x1 = tuple(outcome[i] for i in left_pos)
        x2 = tuple(outcome[i] for i in right_pos)
        if prob != m_left.entries[x1] * m_right.entries[x2]:
            return False
    return True


def eve_factors_out(d: JointDist) -> bool:
    """True iff the honest variables are independent of everything else."""
    honest_side = set(d.honest_labels)
    rest = set(d.labels) - honest_side
    return is_product(d, (honest_side, rest))


class Verdict(str, Enum):
    """Purity classification."""
    PURE = "Pure"
    BLOCK_PURE = "BlockPure"
    MIXED = "Mixed"


@dataclass(frozen=True)
class PureVerdict:
    """
    Result of ``classify_pure``.

    Attributes:
        kind: Pure, BlockPure or Mixed.
        spectrum: Descending spectrum (Pure only).
        bijections: Per honest label, the local relabeling symbol -> spectrum
            index that brings the state to delta_ij form (Pure only).
    """
    kind: Verdict
    spectrum: Optional[SecrecySpectrum] = None
    bijections: Optional[Dict[str, Dict[int, int]]] = None

    @property
    def is_pure(self) -> bool:
        return self.kind == Verdict.PURE


def classify_pure(d: JointDist) -> PureVerdict:
    """
    Classify a two-party distribution as Pure, BlockPure or Mixed.

    Pure means Eve factors out and the A-B support is the graph of a
    bijection between used symbols; BlockPure means only that Eve factors out.

    Args:
        d: Distribution with exactly two honest variables.

    Returns:
        PureVerdict: The verdict; Pure carries the spectrum and relabelings.

    Raises:
        ClassificationError: If ``d`` does not have exactly two honest variables.
    """
    honest_labels = d.honest_labels
    if len(honest_labels) != 2:
        raise ClassificationError(
            f"classify_pure needs exactly two honest parties, got {len(honest_labels)} "
            f"({', '.join(honest_labels)}); use the multipartite module."
        )
    if not eve_factors_out(d):
        return PureVerdict(Verdict.MIXED)

    a_label, b_label = honest_labels
    ab = marginal(d, honest_labels)
    a_partners: Dict[int, Set[int]] = {}
    b_partners: Dict[int, Set[int]] = {}
    for (a, b) in ab.entries:
        a_partners.setdefault(a, set()).add(b)
        b_partners.setdefault(b, set()).add(a)

    # Bijection graph: every used symbol on either side has exactly one partner
    if any(len(v) != 1 for v in a_partners.values()) or any(len(v) != 1 for v in b_partners.values()):
        return PureVerdict(Verdict.BLOCK_PURE)

    pairs = sorted(ab.entries.items(), key=lambda item: (-item[1], item[0][0]))
    spectrum = SecrecySpectrum(tuple(prob for _, prob in pairs))
    bijections = {
        a_label: {a: i for i, ((a, _), _) in enumerate(pairs)},
        b_label: {b: i for i, ((_, b), _) in enumerate(pairs)},
    }
    return PureVerdict(Verdict.PURE, spectrum, bijections)


def correlated_spectrum(d: JointDist, holders: Sequence[str]) -> Optional[SecrecySpectrum]:
    """
    Spectrum of a group of holders whose values determine each other.

    Each holder's value is the tuple of its variables. If every holder's
    value pins down the whole joint outcome of the group, the group is
    perfectly correlated and its outcome probabilities form a spectrum.

    Returns:
        Optional[SecrecySpectrum]: The spectrum, or None if some holder's
        value is compatible with two different joint outcomes.
    """
    labels = d.labels_of(holders)
    if not labels:
        return None
    m = marginal(d, labels)
    by_holder: Dict[str, List[int]] = {}
    for i, party in enumerate(m.parties):
        by_holder.setdefault(party.holder, []).append(i)

    for positions in by_holder.values():
        seen: Dict[Outcome, Outcome] = {}
        for outcome in m.entries:
            local = tuple(outcome[i] for i in positions)
            if seen.setdefault(local, outcome) != outcome:
                return None
    return SecrecySpectrum.of(m.entries[o] for o in sorted(m.entries))


def apply_local_map(d: JointDist, label: str, mapping: Mapping[int, int], alphabet: Optional[int] = None) -> JointDist:
    """
    Apply a local function to one variable.

    Args:
        d: The distribution.
        label: Variable to transform.
        mapping: Symbol map; symbols not listed are left unchanged.
        alphabet: New alphabet size (defaults to the old one).

    Returns:
        JointDist: The transformed distribution.
    """
    i = d.index(label)
    old = d.parties[i]
    size = alphabet if alphabet is not None else old.alphabet
    parties = list(d.parties)
    parties[i] = PartyId(old.label, old.role, size, old.holder)
    entries: Dict[Outcome, Fraction] = {}
    for outcome, prob in d.entries.items():
        new = list(outcome)
        new[i] = mapping.get(outcome[i], outcome[i])
        key = tuple(new)
        entries[key] = entries.get(key, Fraction(0)) + prob
    return JointDist(tuple(parties), entries)


def shannon_entropy(weights: Iterable[Fraction]) -> float:
    """Shannon entropy in bits of exact weights; 0 log 0 = 0."""
    arr = np.array([float(w) for w in weights if w > 0], dtype=float)
    if arr.size == 0:
        return 0.0
    h = float(-np.sum(arr * np.log2(arr)))
    return h if h > 0 else 0.0


def entropy_of_secrecy(s: SecrecySpectrum) -> float:
    """
    Entropy of secrecy, -sum p_i log2 p_i.

    Args:
        s: A secrecy spectrum.

    Returns:
        float: Entropy in bits.
    """
    return shannon_entropy(s.weights)


def joint_entropy(d: JointDist, labels: Labels) -> float:
    """Entropy in bits of the marginal on ``labels`` (0 for an empty set)."""
    labels = _as_labels(labels)
    if not labels:
        return 0.0
    return shannon_entropy(marginal(d, labels).entries.values())


def local_entropy(d: JointDist, label: str) -> float:
    return joint_entropy(d, [label])


def mutual_information(d: JointDist, a: Labels, b: Labels, given: Optional[Labels] = None) -> float:
    """
    Mutual information I(A;B) or I(A;B|given) in bits.

    Each argument may be a single label or a group of labels.

    Args:
        d: The distribution.
        a: First variable (or group).
        b: Second variable (or group).
        given: Optional conditioning variable (or group).

    Returns:
        float: Mutual information, clamped at 0.

    Raises:
        UnknownPartyError: If a label is not present.
        PartitionError: If the groups overlap.
    """
    a_labels, b_labels = _as_labels(a), _as_labels(b)
    g_labels = _as_labels(given) if given is not None else []
    for label in a_labels + b_labels + g_labels:
        d.index(label)
    if set(a_labels) & set(b_labels) or (set(a_labels) | set(b_labels)) & set(g_labels):
        raise PartitionError("mutual_information needs distinct parties.")

    value = (
        joint_entropy(d, a_labels + g_labels)
        + joint_entropy(d, b_labels + g_labels)
        - joint_entropy(d, a_labels + b_labels + g_labels)
        - joint_entropy(d, g_labels)
    )
    return value if value > EPSILON else 0.0


def tensor(d1: JointDist, d2: JointDist) -> JointDist:
    """
    Product of two independent distributions.

    Honest and public variables are concatenated (labels must be disjoint);
    the eavesdropper variables are merged into one variable, placed last,
    whose symbol encodes the pair (e1, e2) as e1 * |E2| + e2.

    Raises:
        PartitionError: If the two distributions share a non-Eve label.
    """
    eve1, eve2 = d1.eavesdropper, d2.eavesdropper
    rest1 = [i for i, p in enumerate(d1.parties) if p.role != Role.EAVESDROPPER]
    rest2 = [i for i, p in enumerate(d2.parties) if p.role != Role.EAVESDROPPER]
    shared = {d1.parties[i].label for i in rest1} & {d2.parties[i].label for i in rest2}
    if shared:
        raise PartitionError(f"Cannot tensor distributions sharing labels {sorted(shared)}.")

    parties = [d1.parties[i] for i in rest1] + [d2.parties[i] for i in rest2]
    if eve1 is not None or eve2 is not None:
        size1 = eve1.alphabet if eve1 else 1
        size2 = eve2.alphabet if eve2 else 1
        label = eve1.label if eve1 else eve2.label
        parties.append(PartyId(label, Role.EAVESDROPPER, size1 * size2))
    e1_pos = d1.index(eve1.label) if eve1 else None
    e2_pos = d2.index(eve2.label) if eve2 else None
    size2 = eve2.alphabet if eve2 else 1

    entries: Dict[Outcome, Fraction] = {}
    for (o1, p1), (o2, p2) in product(d1.entries.items(), d2.entries.items()):
        key = tuple(o1[i] for i in rest1) + tuple(o2[i] for i in rest2)
        if eve1 is not None or eve2 is not None:
            e1 = o1[e1_pos] if e1_pos is not None else 0
            e2 = o2[e2_pos] if e2_pos is not None else 0
            key += (e1 * size2 + e2,)
        entries[key] = entries.get(key, Fraction(0)) + p1 * p2
    return JointDist(tuple(parties), entries)


def pure_state(spectrum: SecrecySpectrum, a: str = "A", b: str = "B", eve_label: str = "E") -> JointDist:
    """
    Canonical classical pure state delta_ij p_i with a trivial Eve.

    Symbol i is the i-th largest weight.
    """
    n = len(spectrum)
    entries = {(i, i, 0): w for i, w in enumerate(spectrum.weights) if w > 0}
    return JointDist((honest(a, n), honest(b, n), eve(eve_label)), entries)


def shared_bit(a: str = "A", b: str = "B", holders: Optional[Tuple[str, str]] = None,
               eve_label: str = "E") -> JointDist:
    """A C-EPR: one uniformly random bit known to two parties, Eve independent."""
    holder_a, holder_b = holders if holders else (a, b)
    half = Fraction(1, 2)
    return JointDist(
        (honest(a, 2, holder_a), honest(b, 2, holder_b), eve(eve_label)),
        {(0, 0, 0): half, (1, 1, 0): half},
    )


def cat_state(n_parties: int, labels: Optional[Sequence[str]] = None, eve_label: str = "E") -> JointDist:
    """
    The n-party cat state: all zeros or all ones with probability 1/2.

    For n = 3 this is the C-GHZ, for n = 2 the C-EPR.
    """
    if n_parties < 1:
        raise ParseError("A cat state needs at least one party.")
    if labels is None:
        labels = [chr(ord("A") + i) for i in range(n_parties)]
    if len(labels) != n_parties:
        raise ParseError("Label count does not match the number of parties.")
    half = Fraction(1, 2)
    parties = tuple(honest(label, 2) for label in labels) + (eve(eve_label),)
    return JointDist(parties, {(0,) * n_parties + (0,): half, (1,) * n_parties + (0,): half})
