"""
Distribution inspection commands.

Provides:
- info: parties, alphabets, purity verdict and pairwise mutual information
- pure-check: purity verdict plus the single-copy purity search
"""

import logging
from itertools import combinations

from pydantic import BaseModel, Field

from lopc.api.reports import EXIT_OK, CommandResult, verdict_code
from lopc.core.dist import Verdict, classify_pure, entropy_of_secrecy, local_entropy, mutual_information
from lopc.core.engine import pure_reachable_single_copy
from lopc.core.errors import ClassificationError
from lopc.storage.files import parse_distribution

logger = logging.getLogger(__name__)


class DistRequest(BaseModel):
    """
    Request naming a distribution file.

    Attributes:
        dist: Path to the JSON distribution file.
    """
    dist: str = Field(..., min_length=1, description="Distribution file")


def info(request: DistRequest) -> CommandResult:
    """
    Summarize a distribution.

    Returns:
        CommandResult: Parties, purity verdict (two-party states only) and
        mutual information between every pair of variables.
    """
    d = parse_distribution(request.dist)
    report = {
        "parties": [
            {"label": p.label, "role": p.role.value, "alphabet": p.alphabet, "holder": p.holder,
             "entropy_bits": local_entropy(d, p.label)}
            for p in d.parties
        ],
        "outcomes": len(d.entries),
    }
    try:
        verdict = classify_pure(d)
        report["purity"] = verdict.kind.value
        if verdict.is_pure:
            report["spectrum"] = verdict.spectrum.to_strings()
            report["entropy_of_secrecy"] = entropy_of_secrecy(verdict.spectrum)
    except ClassificationError as e:
        report["purity"] = f"n/a ({len(d.honest_labels)} honest variables)"
        logger.info(str(e))
    report["mutual_information"] = {
        f"{a};{b}": mutual_information(d, a, b) for a, b in combinations(d.labels, 2)
    }
    return CommandResult(report, EXIT_OK)


def pure_check(request: DistRequest) -> CommandResult:
    """
    Purity verdict of a two-party distribution.

    Exit 0 when the state is Pure or a shared secret bit can be obtained
    from one copy, 2 otherwise.
    """
    d = parse_distribution(request.dist)
    verdict = classify_pure(d)
    report = {"verdict": verdict.kind.value}
    if verdict.is_pure:
        report["spectrum"] = verdict.spectrum.to_strings()
        report["bijections"] = {label: {str(k): v for k, v in m.items()} for label, m in verdict.bijections.items()}
        return CommandResult(report, EXIT_OK)
    if verdict.kind == Verdict.MIXED:
        return CommandResult(report, verdict_code(False))
    reachable = pure_reachable_single_copy(d)
    report["pure_reachable_single_copy"] = reachable
    return CommandResult(report, verdict_code(reachable))
