"""
Catalysis commands.

Provides:
- catalysis-check: verdict for one catalyst (secrecy and shuffling views)
- catalysis-search: bounded catalyst search
"""

from typing import Any, Optional

from pydantic import Field, field_validator

from lopc.api.conversions import PairRequest
from lopc.api.reports import CommandResult, parse_spectrum, verdict_code
from lopc.core.catalysis import check_catalysis, check_shuffling_catalysis, find_catalyst
from lopc.core.dist import SecrecySpectrum, format_prob
from lopc.core.majorization import tensor_spectrum


class CatalysisCheckRequest(PairRequest):
    catalyst: SecrecySpectrum = Field(..., description="Catalyst spectrum")

    @field_validator("catalyst", mode="before")
    @classmethod
    def validate_catalyst(cls, v: Any) -> SecrecySpectrum:
        return parse_spectrum(v)


class CatalysisSearchRequest(PairRequest):
    """
    Bounded catalyst search.

    Attributes:
        max_dim: Largest catalyst dimension (environment default when omitted).
        denom_bound: Largest denominator (environment default when omitted).
    """
    max_dim: Optional[int] = Field(None, ge=2, le=6, description="Largest catalyst dimension")
    denom_bound: Optional[int] = Field(None, ge=2, le=40, description="Largest denominator")


def catalysis_check(request: CatalysisCheckRequest) -> CommandResult:
    """Exit 0 when the conversion is possible (directly or with the catalyst)."""
    p, q, r = request.source, request.target, request.catalyst
    verdict = check_catalysis(p, q, r)
    report = verdict.to_dict()
    report["source_tensor_catalyst"] = [format_prob(w) for w in tensor_spectrum(p, r)]
    report["target_tensor_catalyst"] = [format_prob(w) for w in tensor_spectrum(q, r)]
    report["shuffling_view"] = check_shuffling_catalysis(q, p, r).kind.value
    return CommandResult(report, verdict_code(verdict.possible))


def catalysis_search(request: CatalysisSearchRequest) -> CommandResult:
    verdict = find_catalyst(request.source, request.target, request.max_dim, request.denom_bound)
    return CommandResult(verdict.to_dict(), verdict_code(verdict.possible))
