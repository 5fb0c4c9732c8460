"""
Block protocol commands.

Provides:
- concentrate: concentration yields for one or more block lengths
- dilute: typical-set dilution with its secrecy check
"""

from typing import Any, List

from pydantic import Field, field_validator

from lopc.api.reports import EXIT_OK, CommandResult, SpectrumRequest, parse_spectrum, verdict_code
from lopc.core.asymptotic import dilute_block, rate_report
from lopc.core.dist import SecrecySpectrum


class ConcentrateRequest(SpectrumRequest):
    """
    Concentration request.

    Attributes:
        spectrum: Single-copy spectrum.
        n: Block lengths.
    """
    spectrum: SecrecySpectrum = Field(..., description="Single-copy spectrum")
    n: List[int] = Field(..., min_length=1, description="Block lengths")

    @field_validator("spectrum", mode="before")
    @classmethod
    def validate_spectrum(cls, v: Any) -> SecrecySpectrum:
        return parse_spectrum(v)

    @field_validator("n")
    @classmethod
    def validate_lengths(cls, v: List[int]) -> List[int]:
        if any(n < 1 or n > 512 for n in v):
            raise ValueError("Block lengths must be between 1 and 512")
        return v


class DiluteRequest(SpectrumRequest):
    spectrum: SecrecySpectrum = Field(..., description="Target single-copy spectrum")
    n: int = Field(..., ge=1, le=512, description="Block length")
    delta: float = Field(..., gt=0, description="Typicality slack")
    two_sided: bool = Field(default=False, description="Also reject sequences below H - delta")

    @field_validator("spectrum", mode="before")
    @classmethod
    def validate_spectrum(cls, v: Any) -> SecrecySpectrum:
        return parse_spectrum(v)


def concentrate(request: ConcentrateRequest) -> CommandResult:
    reports = rate_report(request.spectrum, request.n)
    if len(reports) == 1:
        return CommandResult(reports[0].to_dict(), EXIT_OK)
    return CommandResult({"rates": [r.to_dict() for r in reports]}, EXIT_OK)


def dilute(request: DiluteRequest) -> CommandResult:
    """Exit 2 if the dilution protocol fails its secrecy check."""
    report = dilute_block(request.spectrum, request.n, request.delta, request.two_sided)
    return CommandResult(report.to_dict(), verdict_code(bool(report.secret)))
