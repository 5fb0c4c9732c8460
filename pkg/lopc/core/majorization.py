"""
Majorization predicates and constructive machinery.

Provides:
- ProbVector, DoublyStochastic, PermutationMix: exact value types
- majorizes: prefix-sum majorization test
- transfer_matrix: doubly stochastic D with D q = p, built from T-transforms
- birkhoff: decomposition of D into weighted permutations
- collapse_equivalent: merge permutations with the same effect on a vector
- optimal_conversion_probability: best single-copy success probability
- tensor_spectrum: sorted pairwise products (used by catalysis)
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from lopc.core.dist import SecrecySpectrum, format_prob, to_prob
from lopc.core.errors import MajorizationFails, NormalizationError, NotDoublyStochastic

logger = logging.getLogger(__name__)

Matrix = List[List[Fraction]]


@dataclass(frozen=True)
class ProbVector:
    """
    Probability vector in arbitrary order.

    Attributes:
        weights: Nonnegative exact weights summing to 1.
    """
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(to_prob(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        total = sum(weights, Fraction(0))
        if total != 1:
            raise NormalizationError(f"Vector sums to {format_prob(total)}, not 1.", deficit=1 - total)


VectorLike = Union[ProbVector, SecrecySpectrum, Sequence[Union[str, int, Fraction]]]


def as_weights(v: VectorLike) -> List[Fraction]:
    """Exact weights of any vector-like value, validated to sum to 1."""
    if isinstance(v, (ProbVector, SecrecySpectrum)):
        return list(v.weights)
    return list(ProbVector(tuple(v)).weights)


def pad(weights: Sequence[Fraction], n: int) -> List[Fraction]:
    """Append zeros up to length n."""
    return list(weights) + [Fraction(0)] * (n - len(weights))


def descending(weights: Sequence[Fraction]) -> List[Fraction]:
    return sorted(weights, reverse=True)


def _prefix_sums(weights: Sequence[Fraction]) -> List[Fraction]:
    sums, running = [], Fraction(0)
    for w in weights:
        running += w
        sums.append(running)
    return sums


def majorizes(q: VectorLike, p: VectorLike) -> bool:
    """
    Exact majorization test: does q majorize p?

    Both vectors are zero-padded to a common length and sorted descending.

    Args:
        q: The (candidate) more ordered vector.
        p: The (candidate) more random vector.

    Returns:
        bool: True iff every descending prefix sum of q is >= that of p.
    """
    qw, pw = as_weights(q), as_weights(p)
    n = max(len(qw), len(pw))
    q_sums = _prefix_sums(descending(pad(qw, n)))
    p_sums = _prefix_sums(descending(pad(pw, n)))
    return all(qs >= ps for qs, ps in zip(q_sums, p_sums))


@dataclass(frozen=True)
class DoublyStochastic:
    """
    Square matrix of exact probabilities with unit row and column sums.

    Attributes:
        rows: Matrix rows.
    """
    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise NotDoublyStochastic("Matrix must be square and nonempty.")
        if any(x < 0 for row in rows for x in row):
            raise NotDoublyStochastic("Matrix entries must be nonnegative.")
        for i, row in enumerate(rows):
            if sum(row, Fraction(0)) != 1:
                raise NotDoublyStochastic(f"Row {i} sums to {format_prob(sum(row, Fraction(0)))}.")
        for j in range(n):
            col = sum((rows[i][j] for i in range(n)), Fraction(0))
            if col != 1:
                raise NotDoublyStochastic(f"Column {j} sums to {format_prob(col)}.")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "DoublyStochastic":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    def to_lists(self) -> Matrix:
        return [list(row) for row in self.rows]


def apply_matrix(D: DoublyStochastic, v: Sequence[Fraction]) -> List[Fraction]:
    """Exact product D v (v zero-padded to the matrix size)."""
    v = pad(v, D.n)
    return [sum((D.rows[i][j] * v[j] for j in range(D.n)), Fraction(0)) for i in range(D.n)]


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]


def transfer_matrix(q: VectorLike, p: VectorLike) -> DoublyStochastic:
    """
    Build a doubly stochastic D with D q = p from T-transforms.

    Working on the descending-sorted vectors, each step picks the largest
    index j where the current vector exceeds the target and the first index
    k > j where it falls short, then mixes the pair just enough to make one
    of them match. At most n-1 steps are needed. The product is permuted
    back to the input orders, decomposed, and the permutations that move q
    onto the same vector are collapsed into one (weights added), so
    (1/2, 1/2, 0) -> uniform comes out as a uniform mixture of three
    permutations.

    Args:
        q: Source vector (must majorize p).
        p: Target vector.

    Returns:
        DoublyStochastic: Matrix with D q = p exactly.

    Raises:
        MajorizationFails: If q does not majorize p.
    """
    qw, pw = as_weights(q), as_weights(p)
    n = max(len(qw), len(pw))
    qw, pw = pad(qw, n), pad(pw, n)
    if not majorizes(qw, pw):
        raise MajorizationFails(
            f"({', '.join(map(format_prob, qw))}) does not majorize "
            f"({', '.join(map(format_prob, pw))})."
        )

    q_order = sorted(range(n), key=lambda i: (-qw[i], i))
    p_order = sorted(range(n), key=lambda i: (-pw[i], i))
    x = [qw[i] for i in q_order]
    target = [pw[i] for i in p_order]

    sorted_d: Matrix = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    steps = 0
    while x != target:
        j = max(i for i in range(n) if x[i] > target[i])
        k = min(i for i in range(j + 1, n) if x[i] < target[i])
        delta = min(x[j] - target[j], target[k] - x[k])
        lam = 1 - delta / (x[j] - x[k])
        t: Matrix = [[Fraction(int(a == b)) for b in range(n)] for a in range(n)]
        t[j][j], t[j][k], t[k][j], t[k][k] = lam, 1 - lam, 1 - lam, lam
        sorted_d = _matmul(t, sorted_d)
        x[j], x[k] = x[j] - delta, x[k] + delta
        steps += 1
        logger.debug(f"T-transform {steps}: mix ({j}, {k}) with lambda={lam}")

    rows: Matrix = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            rows[p_order[a]][q_order[b]] = sorted_d[a][b]
    mix = collapse_equivalent(birkhoff(DoublyStochastic(tuple(tuple(row) for row in rows))), qw)
    matrix = DoublyStochastic(tuple(tuple(row) for row in mix.matrix()))
    if apply_matrix(matrix, qw) != pw:
        raise MajorizationFails("Internal error: transfer matrix does not map q onto p.")
    logger.info(f"Built transfer matrix of size {n} from {steps} T-transforms ({len(mix)} permutations)")
    return matrix


@dataclass(frozen=True)
class PermutationMix:
    """
    Convex mixture of permutation matrices.

    A permutation ``sigma`` stands for the matrix with ones at
    (i, sigma[i]), so (P v)_i = v[sigma[i]].

    Attributes:
        terms: (permutation, weight) pairs; weights sum to 1.
    """
    terms: Tuple[Tuple[Tuple[int, ...], Fraction], ...]

    def __post_init__(self):
        total = sum((w for _, w in self.terms), Fraction(0))
        if self.terms and total != 1:
            raise NormalizationError(f"Mixture weights sum to {format_prob(total)}.", deficit=1 - total)

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self) -> Matrix:
        """Reconstruct sum_k w_k P_k."""
        n = len(self.terms[0][0])
        out: Matrix = [[Fraction(0)] * n for _ in range(n)]
        for sigma, w in self.terms:
            for i, j in enumerate(sigma):
                out[i][j] += w
        return out


def _find_matching(m: Matrix, row: int, used: List[bool], sigma: List[int]) -> bool:
    """Depth-first search for the lexicographically smallest perfect matching on positive entries."""
    n = len(m)
    if row == n:
        return True
    for col in range(n):
        if m[row][col] > 0 and not used[col]:
            used[col] = True
            sigma.append(col)
            if _find_matching(m, row + 1, used, sigma):
                return True
            sigma.pop()
            used[col] = False
    return False


def birkhoff(D: DoublyStochastic) -> PermutationMix:
    """
    Birkhoff decomposition of a doubly stochastic matrix.

    Repeatedly takes the lexicographically smallest permutation supported on
    the positive entries, with weight equal to its smallest covered entry,
    and subtracts it. Every step zeroes at least one entry.

    Args:
        D: Exact doubly stochastic matrix.

    Returns:
        PermutationMix: Terms reconstructing D exactly.

    Raises:
        NotDoublyStochastic: If D is not doubly stochastic.
    """
    if not isinstance(D, DoublyStochastic):
        D = DoublyStochastic(tuple(tuple(row) for row in D))
    m = D.to_lists()
    n = D.n
    terms: List[Tuple[Tuple[int, ...], Fraction]] = []
    while any(x > 0 for row in m for x in row):
        sigma: List[int] = []
        if not _find_matching(m, 0, [False] * n, sigma):
            raise NotDoublyStochastic("No perfect matching on the remaining support.")
        weight = min(m[i][sigma[i]] for i in range(n))
        for i in range(n):
            m[i][sigma[i]] -= weight
        terms.append((tuple(sigma), weight))
        logger.debug(f"Birkhoff term {len(terms)}: {sigma} with weight {weight}")
    return PermutationMix(tuple(terms))


def collapse_equivalent(mix: PermutationMix, q: Sequence[Fraction]) -> PermutationMix:
    """
    Merge the terms of a mixture that send q to the same vector.

    The first permutation of each group is kept and carries the summed
    weight, so the mixture still maps q to the same result.
    """
    merged: Dict[Tuple[Fraction, ...], Tuple[Tuple[int, ...], Fraction]] = {}
    for sigma, weight in mix.terms:
        vector = tuple(q[sigma[i]] for i in range(len(sigma)))
        first, total = merged.get(vector, (sigma, Fraction(0)))
        merged[vector] = (first, total + weight)
    return PermutationMix(tuple(merged.values()))


def _conversion_ratios(p: VectorLike, q: VectorLike) -> List[Tuple[int, Fraction]]:
    pw, qw = as_weights(p), as_weights(q)
    n = max(len(pw), len(qw))
    p_sorted, q_sorted = descending(pad(pw, n)), descending(pad(qw, n))
    ratios = []
    p_run, q_run = Fraction(0), Fraction(0)
    for k in range(n):
        numerator, denominator = 1 - p_run, 1 - q_run
        if denominator != 0:
            ratios.append((k, numerator / denominator))
        p_run += p_sorted[k]
        q_run += q_sorted[k]
    return ratios


def optimal_conversion_probability(p: VectorLike, q: VectorLike) -> Fraction:
    """
    Largest probability of converting a single copy of p into q.

    lambda = min over prefix lengths k = 0..n-1 of
    (1 - sum_{i<k} p_i) / (1 - sum_{i<k} q_i) on the sorted vectors, skipping
    zero denominators, clamped into [0, 1].

    Args:
        p: Source spectrum.
        q: Target spectrum.

    Returns:
        Fraction: The optimal success probability.
    """
    value = min(ratio for _, ratio in _conversion_ratios(p, q))
    return max(Fraction(0), min(Fraction(1), value))


def minimizing_index(p: VectorLike, q: VectorLike) -> int:
    """Smallest prefix length attaining the minimum in optimal_conversion_probability."""
    ratios = _conversion_ratios(p, q)
    best = min(ratio for _, ratio in ratios)
    return next(k for k, ratio in ratios if ratio == best)


def tensor_spectrum(p: VectorLike, r: VectorLike) -> List[Fraction]:
    """All pairwise products of p and r, sorted descending."""
    return descending([a * b for a in as_weights(p) for b in as_weights(r)])


def pad_to_common(*vectors: VectorLike, length: Optional[int] = None) -> List[List[Fraction]]:
    """Zero-pad several vectors to a common length."""
    weights = [as_weights(v) for v in vectors]
    n = length if length is not None else max(len(w) for w in weights)
    return [pad(w, n) for w in weights]
