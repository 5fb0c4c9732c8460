"""
Secret correlations shared by more than two parties.

Provides:
- Bipartition: a cut of the honest holders into two groups
- partition_entropy: entropy of secrecy across a cut
- exact_partition_entropy: the same quantity as an exact sympy expression
- ghz_to_epr_protocol, epr2_to_ghz_protocol, swap_protocol: canned protocols
- run_ghz_to_epr, run_epr2_to_ghz, run_swap: input-checked executions
- conversion_audit: cuts on which a conversion would raise the entropy
- RateProblem, cat_rate_feasibility: pairwise-rate audit of the n-party cat state
- nonnegative_point: a nonnegative point of a linear solution family, if any
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

import sympy

from lopc.core.dist import (
    JointDist,
    cat_state,
    eve_factors_out,
    honest,
    marginal,
    mutual_information,
    shared_bit,
    tensor,
)
from lopc.core.engine import ExecutionResult, execute
from lopc.core.errors import EveCorrelated, PartitionError, WrongInputState
from lopc.core.protocol import MessageRule, ProtocolIR, RelabelMap, Round

logger = logging.getLogger(__name__)

FLIP_ON_ONE = {(0,): (0, 1), (1,): (1, 0)}


@dataclass(frozen=True)
class Bipartition:
    """
    Two disjoint nonempty groups of honest holders.

    Attributes:
        left: Holders on one side.
        right: Holders on the other side.
    """
    left: FrozenSet[str]
    right: FrozenSet[str]

    def __post_init__(self):
        left, right = frozenset(self.left), frozenset(self.right)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        if not left or not right:
            raise PartitionError("Both sides of a cut must be nonempty.")
        if left & right:
            raise PartitionError(f"Cut sides overlap on {sorted(left & right)}.")

    @classmethod
    def of(cls, d: JointDist, left: Iterable[str]) -> "Bipartition":
        """Cut ``left`` against every other honest holder of ``d``."""
        left = frozenset(left)
        holders = set(d.holders())
        unknown = left - holders
        if unknown:
            raise PartitionError(f"Unknown holders {sorted(unknown)}; known: {sorted(holders)}")
        return cls(left, frozenset(holders - left))

    def label(self) -> str:
        return f"{''.join(sorted(self.left))}|{''.join(sorted(self.right))}"


def _check_cut(d: JointDist, cut: Bipartition) -> None:
    if not eve_factors_out(d):
        raise EveCorrelated("Partition entropy needs a state that Eve is independent of.")
    if cut.left | cut.right != set(d.holders()):
        raise PartitionError(f"Cut {cut.label()} does not cover holders {d.holders()}.")


def partition_entropy(d: JointDist, cut: Bipartition) -> float:
    """
    Entropy of secrecy across a cut, I(left; right) in bits.

    For perfectly correlated states this equals the entropy of either side.

    Raises:
        EveCorrelated: If Eve does not factor out of ``d``.
        PartitionError: If the cut does not cover the honest holders.
    """
    _check_cut(d, cut)
    return mutual_information(d, d.labels_of(cut.left), d.labels_of(cut.right))


def _exact_entropy(d: JointDist, labels: List[str]) -> sympy.Expr:
    law = marginal(d, labels)
    return sum(
        (-sympy.Rational(p.numerator, p.denominator) * sympy.log(sympy.Rational(p.numerator, p.denominator), 2)
         for p in law.entries.values() if p),
        sympy.Integer(0),
    )


def exact_partition_entropy(d: JointDist, cut: Bipartition) -> sympy.Expr:
    """
    partition_entropy as an exact sympy expression (1 for every cut of a cat state).

    Raises:
        EveCorrelated: If Eve does not factor out of ``d``.
        PartitionError: If the cut does not cover the honest holders.
    """
    _check_cut(d, cut)
    left, right = d.labels_of(cut.left), d.labels_of(cut.right)
    value = _exact_entropy(d, left) + _exact_entropy(d, right) - _exact_entropy(d, left + right)
    return sympy.simplify(sympy.expand_log(value, force=True))


def all_cuts(holders: List[str]) -> List[Bipartition]:
    """Every cut once, the first holder always on the left."""
    first, rest = holders[0], holders[1:]
    cuts = []
    for size in range(0, len(rest)):
        for extra in combinations(rest, size):
            left = frozenset((first,) + extra)
            cuts.append(Bipartition(left, frozenset(holders) - left))
    return cuts


def with_idle(d: JointDist, labels: Iterable[str]) -> JointDist:
    """Add honest parties holding a constant (no correlation at all)."""
    idle = tuple(honest(label, 1) for label in labels)
    return tensor(d, JointDist(idle, {(0,) * len(idle): Fraction(1)}))


def double_epr() -> JointDist:
    """C-EPR between A and Bob's B1, tensored with C-EPR between Bob's B2 and C."""
    return tensor(shared_bit("A", "B1", holders=("A", "B")), shared_bit("B2", "C", holders=("B", "C")))


def ghz_to_epr_protocol() -> ProtocolIR:
    """Clare forgets her bit; A and B keep theirs (the weak form of the conversion)."""
    return ProtocolIR(
        outputs=(RelabelMap("A", "A", "Y_A", 2), RelabelMap("B", "B", "Y_B", 2)),
        name="ghz-to-epr",
    )


def _xor_round() -> Round:
    table = {(b1, b2): {b1 ^ b2: Fraction(1)} for b1 in (0, 1) for b2 in (0, 1)}
    return Round("B", MessageRule(("B1", "B2"), table))


def epr2_to_ghz_protocol() -> ProtocolIR:
    """
    Bob announces B1 xor B2, Clare flips her bit when it is 1, Bob keeps B1.

    Acts on ``double_epr()``.
    """
    return ProtocolIR(
        rounds=(_xor_round(),),
        outputs=(
            RelabelMap("A", "A", "Y_A", 2),
            RelabelMap("B", "B1", "Y_B", 2),
            RelabelMap("C", "C", "Y_C", 2, FLIP_ON_ONE),
        ),
        name="epr2-to-ghz",
    )


def swap_protocol() -> ProtocolIR:
    """
    Secrecy swapping: the same XOR announcement, but Bob keeps nothing.

    Leaves a C-EPR between A and C.
    """
    return ProtocolIR(
        rounds=(_xor_round(),),
        outputs=(
            RelabelMap("A", "A", "Y_A", 2),
            RelabelMap("C", "C", "Y_C", 2, FLIP_ON_ONE),
        ),
        name="swap",
    )


def _require(d: JointDist, expected: JointDist, name: str) -> None:
    if not eve_factors_out(d):
        raise WrongInputState(f"{name} needs a state Eve is independent of.")
    honest_d = [(p.label, p.holder) for p in d.parties if p.is_honest]
    honest_e = [(p.label, p.holder) for p in expected.parties if p.is_honest]
    if honest_d != honest_e:
        raise WrongInputState(f"{name} expects variables {honest_e}, got {honest_d}.")
    if marginal(d, d.honest_labels).entries != marginal(expected, expected.honest_labels).entries:
        raise WrongInputState(f"{name} got a different state than it expects.")


def run_ghz_to_epr(d: JointDist) -> ExecutionResult:
    _require(d, cat_state(3), "ghz_to_epr")
    return execute(ghz_to_epr_protocol(), d)


def run_epr2_to_ghz(d: JointDist) -> ExecutionResult:
    _require(d, double_epr(), "epr2_to_ghz")
    return execute(epr2_to_ghz_protocol(), d)


def run_swap(d: JointDist) -> ExecutionResult:
    _require(d, double_epr(), "swap")
    return execute(swap_protocol(), d)


def conversion_audit(source: JointDist, target: JointDist) -> List[Dict[str, Any]]:
    """
    Cuts on which the target carries more secrecy than the source.

    Any such cut proves the conversion impossible under LOPC; an empty list
    is only a necessary condition.

    Raises:
        PartitionError: If the two states have different holders.
    """
    holders = source.holders()
    if sorted(holders) != sorted(target.holders()):
        raise PartitionError(f"Holders differ: {holders} vs {target.holders()}.")
    witnesses = []
    for cut in all_cuts(holders):
        before = partition_entropy(source, cut)
        after = partition_entropy(target, Bipartition.of(target, cut.left))
        logger.debug(f"Cut {cut.label()}: {before:.6f} -> {after:.6f}")
        if after > before + 1e-9:
            witnesses.append({"cut": cut.label(), "source": before, "target": after})
    return witnesses


@dataclass(frozen=True)
class RateProblem:
    """
    Pairwise-rate equations for an n-party cat state.

    Attributes:
        parties: Holder labels.
        pairs: Unknown rates n_ij, one per pair.
        cuts: Left sides of the audited cuts.
        rhs: Partition entropy of each cut.
    """
    parties: Tuple[str, ...]
    pairs: Tuple[Tuple[str, str], ...]
    cuts: Tuple[FrozenSet[str], ...]
    rhs: Tuple[Fraction, ...]

    def crossing(self, cut: FrozenSet[str]) -> List[Tuple[str, str]]:
        return [(a, b) for a, b in self.pairs if (a in cut) != (b in cut)]

    def equations(self) -> List[str]:
        return [
            f"{' + '.join(f'n_{a}{b}' for a, b in self.crossing(cut))} = {value}"
            for cut, value in zip(self.cuts, self.rhs)
        ]


@dataclass(frozen=True)
class RateVerdict:
    """Feasible with exact rates, or Infeasible with a certificate."""
    feasible: bool
    problem: RateProblem
    rates: Optional[Dict[str, Fraction]] = None
    certificate: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        report: Dict[str, Any] = {
            "verdict": "Feasible" if self.feasible else "Infeasible",
            "parties": list(self.problem.parties),
            "equations": self.problem.equations(),
        }
        if self.rates is not None:
            report["rates"] = {k: str(v) for k, v in self.rates.items()}
        if self.certificate:
            report["certificate"] = self.certificate
        return report


def _audit_cuts(parties: List[str]) -> List[FrozenSet[str]]:
    """Cuts of size 1..n/2; balanced cuts only once (containing the first party)."""
    n = len(parties)
    cuts = []
    for size in range(1, n // 2 + 1):
        for left in combinations(parties, size):
            if 2 * size == n and parties[0] not in left:
                continue
            cuts.append(frozenset(left))
    return cuts


def _to_fraction(value: sympy.Expr) -> Fraction:
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise PartitionError(f"Expected an exact rational, got {value}.")
    return Fraction(int(value.p), int(value.q))


def _certificate(problem: RateProblem) -> Dict[str, Any]:
    """Two groups of equations whose sums give contradictory totals for sum(n_ij)."""
    groups: Dict[int, List[int]] = {}
    for i, cut in enumerate(problem.cuts):
        groups.setdefault(len(cut), []).append(i)
    implied = []
    for size, members in sorted(groups.items()):
        counts = {pair: 0 for pair in problem.pairs}
        for i in members:
            for pair in problem.crossing(problem.cuts[i]):
                counts[pair] += 1
        multipliers = set(counts.values())
        if len(multipliers) != 1:
            continue
        multiplier = multipliers.pop()
        rhs = sum((problem.rhs[i] for i in members), Fraction(0))
        name = "singleton cuts" if size == 1 else f"{size}-vs-{len(problem.parties) - size} cuts"
        implied.append((name, multiplier, rhs))
    for i in range(len(implied)):
        for j in range(i + 1, len(implied)):
            (n1, m1, r1), (n2, m2, r2) = implied[i], implied[j]
            if r1 / m1 != r2 / m2:
                return {
                    "reason": "two groups of cut equations imply different totals of all rates",
                    n1: {"equations_summed": str(r1), "sum_of_rates_multiplier": m1},
                    n2: {"equations_summed": str(r2), "sum_of_rates_multiplier": m2},
                    "aggregate_sums": [str(r1), str(r2)],
                }
    return {"reason": "the linear system has no solution"}


Constraint = Tuple[Dict[sympy.Symbol, Fraction], Fraction]


def _constraint(expr: sympy.Expr, free: List[sympy.Symbol]) -> Constraint:
    """expr >= 0 as (coefficients, constant) for an expression linear in ``free``."""
    expr = sympy.expand(expr)
    coeffs = {s: _to_fraction(expr.coeff(s)) for s in free if expr.coeff(s) != 0}
    return coeffs, _to_fraction(expr.subs({s: 0 for s in free}))


def _eliminate(constraints: List[Constraint], v: sympy.Symbol) -> List[Constraint]:
    """One Fourier-Motzkin step: drop v, keeping every pairwise consequence."""
    upper = [c for c in constraints if c[0].get(v, 0) < 0]
    lower = [c for c in constraints if c[0].get(v, 0) > 0]
    out = [c for c in constraints if c[0].get(v, 0) == 0]
    for lo_coeffs, lo_const in lower:
        for up_coeffs, up_const in upper:
            a, b = lo_coeffs[v], -up_coeffs[v]
            coeffs = {}
            for s in set(lo_coeffs) | set(up_coeffs):
                value = b * lo_coeffs.get(s, Fraction(0)) + a * up_coeffs.get(s, Fraction(0))
                if s != v and value != 0:
                    coeffs[s] = value
            out.append((coeffs, b * lo_const + a * up_const))
    return out


def nonnegative_point(solution: Iterable[sympy.Expr]) -> Optional[Dict[sympy.Symbol, Fraction]]:
    """
    Values of the free symbols making every expression nonnegative.

    The expressions are linear in their free symbols (a linsolve solution).
    Feasibility is decided exactly by Fourier-Motzkin elimination; each
    symbol is then set to the admissible value closest to 0.

    Returns:
        A point, or None when no choice of the free symbols works.
    """
    exprs = list(solution)
    free = sorted({s for expr in exprs for s in expr.free_symbols}, key=str)
    stages = [[_constraint(expr, free) for expr in exprs]]
    for v in free:
        stages.append(_eliminate(stages[-1], v))
    if any(const < 0 for _, const in stages[-1]):
        return None
    point: Dict[sympy.Symbol, Fraction] = {}
    for index in reversed(range(len(free))):
        v = free[index]
        low, high = None, None
        for coeffs, const in stages[index]:
            a = coeffs.get(v, Fraction(0))
            if a == 0:
                continue
            rest = const + sum((c * point[s] for s, c in coeffs.items() if s != v), Fraction(0))
            bound = -rest / a
            if a > 0:
                low = bound if low is None else max(low, bound)
            else:
                high = bound if high is None else min(high, bound)
        value = max(Fraction(0), low) if low is not None else Fraction(0)
        if high is not None and value > high:
            value = high
        point[v] = value
    return point


def cat_rate_feasibility(n_parties: int) -> RateVerdict:
    """
    Can the n-party cat state be built from pairwise shared bits at
    asymptotic rates n_ij?

    Each audited cut gives one equation: the rates of pairs crossing the
    cut sum to the cut's exact partition entropy. The system is solved
    exactly; when it leaves rates free, a nonnegative choice is searched
    for over the whole solution set.

    Args:
        n_parties: Number of parties (>= 2).

    Returns:
        RateVerdict: Feasible(rates) or Infeasible(certificate).
    """
    if n_parties < 2:
        raise PartitionError("The rate audit needs at least two parties.")
    state = cat_state(n_parties)
    parties = state.holders()
    pairs = tuple(combinations(parties, 2))
    cuts = _audit_cuts(parties)
    rhs = tuple(_to_fraction(exact_partition_entropy(state, Bipartition.of(state, cut))) for cut in cuts)
    problem = RateProblem(tuple(parties), pairs, tuple(cuts), rhs)
    logger.info(f"Rate audit for the {n_parties}-party cat state: {len(cuts)} cuts, {len(pairs)} rates")

    symbols = {pair: sympy.Symbol(f"n_{pair[0]}{pair[1]}") for pair in pairs}
    equations = [
        sympy.Eq(sum((symbols[pair] for pair in problem.crossing(cut)), sympy.Integer(0)),
                 sympy.Rational(value.numerator, value.denominator))
        for cut, value in zip(cuts, rhs)
    ]
    solutions = sympy.linsolve(equations, list(symbols.values()))
    if solutions is sympy.S.EmptySet:
        certificate = _certificate(problem)
        logger.info(f"Rate audit infeasible: {certificate.get('aggregate_sums')}")
        return RateVerdict(False, problem, certificate=certificate)

    solution = next(iter(solutions))
    point = nonnegative_point(solution)
    if point is None:
        logger.info("Rate audit infeasible: every solution has a negative rate")
        return RateVerdict(False, problem, certificate={
            "reason": "every solution of the cut equations has a negative rate",
            "solution": {f"n_{a}{b}": str(expr) for (a, b), expr in zip(pairs, solution)},
        })
    values = {s: sympy.Rational(v.numerator, v.denominator) for s, v in point.items()}
    rates = {f"n_{a}{b}": _to_fraction(expr.subs(values)) for (a, b), expr in zip(pairs, solution)}
    return RateVerdict(True, problem, rates=rates)
