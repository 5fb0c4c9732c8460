"""
Catalysed single-copy conversions.

Provides:
- CatalysisKind, CatalysisVerdict: verdict with an optional witness
- check_catalysis: does q (x) r majorize p (x) r?
- find_catalyst: bounded search over rational catalysts
- check_shuffling_catalysis: the same question for random shuffles
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Tuple

from lopc.core.dist import SecrecySpectrum, entropy_of_secrecy
from lopc.core.majorization import majorizes, tensor_spectrum
from lopc.core.errors import ParseError
from lopc.settings import get_catalyst_bounds

logger = logging.getLogger(__name__)


class CatalysisKind(str, Enum):
    DIRECTLY_POSSIBLE = "DirectlyPossible"
    CATALYZED_POSSIBLE = "CatalyzedPossible"
    NOT_WITH_THIS_CATALYST = "NotWithThisCatalyst"
    NONE_FOUND_WITHIN_BOUNDS = "NoneFoundWithinBounds"


@dataclass(frozen=True)
class CatalysisVerdict:
    """
    Outcome of a catalysis check or search.

    Attributes:
        kind: The verdict.
        catalyst: Witness catalyst (CatalyzedPossible) or the catalyst tried.
        bounds: (max_dim, denom_bound) of an unsuccessful search.
        candidates_checked: Number of catalysts examined by a search.
    """
    kind: CatalysisKind
    catalyst: Optional[SecrecySpectrum] = None
    bounds: Optional[Tuple[int, int]] = None
    candidates_checked: int = 0

    @property
    def possible(self) -> bool:
        return self.kind in (CatalysisKind.DIRECTLY_POSSIBLE, CatalysisKind.CATALYZED_POSSIBLE)

    def to_dict(self) -> Dict[str, Any]:
        report: Dict[str, Any] = {"verdict": self.kind.value, "possible": self.possible}
        if self.catalyst is not None:
            report["catalyst"] = self.catalyst.to_strings()
        if self.bounds is not None:
            report["bounds"] = {"max_dim": self.bounds[0], "denom_bound": self.bounds[1]}
        if self.candidates_checked:
            report["candidates_checked"] = self.candidates_checked
        return report


def check_catalysis(p: SecrecySpectrum, q: SecrecySpectrum, r: SecrecySpectrum) -> CatalysisVerdict:
    """
    Can pure_state(p) become q with the help of a catalyst r that is returned intact?

    Args:
        p: Source spectrum.
        q: Target spectrum.
        r: Candidate catalyst.

    Returns:
        CatalysisVerdict: DirectlyPossible, CatalyzedPossible(r) or NotWithThisCatalyst.
    """
    if majorizes(q, p):
        return CatalysisVerdict(CatalysisKind.DIRECTLY_POSSIBLE)
    if majorizes(tensor_spectrum(q, r), tensor_spectrum(p, r)):
        logger.info(f"Catalyst {r.to_strings()} enables {p.to_strings()} -> {q.to_strings()}")
        return CatalysisVerdict(CatalysisKind.CATALYZED_POSSIBLE, r)
    return CatalysisVerdict(CatalysisKind.NOT_WITH_THIS_CATALYST, r)


def _compositions(total: int, parts: int, cap: int) -> Iterator[List[int]]:
    """Nonincreasing positive compositions of ``total`` into ``parts`` parts, each <= cap, in lexicographic order."""
    if parts == 1:
        if 1 <= total <= cap:
            yield [total]
        return
    # Smallest admissible first part is ceil(total / parts)
    for first in range(-(-total // parts), min(cap, total - parts + 1) + 1):
        for rest in _compositions(total - first, parts - 1, first):
            yield [first] + rest


def candidate_catalysts(max_dim: int, denom_bound: int) -> Iterator[SecrecySpectrum]:
    """
    Rational catalysts in search order.

    Dimension ascending; within a dimension, descending spectra with every
    weight a/b for b <= denom_bound, distinct, in ascending lexicographic
    order of their weights. Uniform spectra never help and are skipped.
    """
    for dim in range(2, max_dim + 1):
        seen = set()
        for denom in range(dim, denom_bound + 1):
            for parts in _compositions(denom, dim, denom):
                weights = tuple(Fraction(c, denom) for c in parts)
                if len(set(weights)) == 1:
                    continue
                seen.add(weights)
        for weights in sorted(seen):
            yield SecrecySpectrum(weights)


def find_catalyst(p: SecrecySpectrum, q: SecrecySpectrum, max_dim: Optional[int] = None,
                  denom_bound: Optional[int] = None) -> CatalysisVerdict:
    """
    Search for the first catalyst within bounds.

    Args:
        p: Source spectrum.
        q: Target spectrum.
        max_dim: Largest catalyst dimension (default from LOPC_CATALYST_MAX_DIM).
        denom_bound: Largest denominator (default from LOPC_CATALYST_DENOM_BOUND).

    Returns:
        CatalysisVerdict: DirectlyPossible, the first CatalyzedPossible hit,
        or NoneFoundWithinBounds.
    """
    default_dim, default_denom = get_catalyst_bounds()
    max_dim = max_dim if max_dim is not None else default_dim
    denom_bound = denom_bound if denom_bound is not None else default_denom
    if max_dim < 2 or denom_bound < 2:
        raise ParseError("Catalyst search needs max_dim >= 2 and denom_bound >= 2.")
    logger.info(f"Catalyst search {p.to_strings()} -> {q.to_strings()} (max_dim={max_dim}, denom_bound={denom_bound})")
    if majorizes(q, p):
        return CatalysisVerdict(CatalysisKind.DIRECTLY_POSSIBLE)

    # Catalysis cannot raise the entropy of secrecy
    if entropy_of_secrecy(q) > entropy_of_secrecy(p) + 1e-9 or len(q.trimmed()) > len(p.trimmed()):
        logger.info("Target has more secrecy than the source; no catalyst can help")
        return CatalysisVerdict(CatalysisKind.NONE_FOUND_WITHIN_BOUNDS, bounds=(max_dim, denom_bound))

    checked = 0
    for r in candidate_catalysts(max_dim, denom_bound):
        checked += 1
        logger.debug(f"Trying catalyst {r.to_strings()}")
        if majorizes(tensor_spectrum(q, r), tensor_spectrum(p, r)):
            logger.info(f"Found catalyst {r.to_strings()} after {checked} candidates")
            return CatalysisVerdict(CatalysisKind.CATALYZED_POSSIBLE, r, candidates_checked=checked)
    logger.info(f"No catalyst within bounds after {checked} candidates")
    return CatalysisVerdict(CatalysisKind.NONE_FOUND_WITHIN_BOUNDS, bounds=(max_dim, denom_bound),
                            candidates_checked=checked)


def check_shuffling_catalysis(source: SecrecySpectrum, target: SecrecySpectrum,
                              r: SecrecySpectrum) -> CatalysisVerdict:
    """
    Can a random shuffle take source (x) r to target (x) r?

    A shuffle makes a distribution more random, so this holds iff
    source (x) r majorizes target (x) r, the secrecy question run backwards.
    """
    if majorizes(source, target):
        return CatalysisVerdict(CatalysisKind.DIRECTLY_POSSIBLE)
    if majorizes(tensor_spectrum(source, r), tensor_spectrum(target, r)):
        return CatalysisVerdict(CatalysisKind.CATALYZED_POSSIBLE, r)
    return CatalysisVerdict(CatalysisKind.NOT_WITH_THIS_CATALYST, r)
