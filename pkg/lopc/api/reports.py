"""
Shared pieces of the command handlers.

Provides:
- EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE: the exit-code contract
- CommandResult: report plus exit code
- SpectrumRequest: base model that parses inline spectra
"""

from dataclasses import dataclass
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict

from lopc.core.dist import SecrecySpectrum

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


@dataclass(frozen=True)
class CommandResult:
    """
    Outcome of one command.

    Attributes:
        report: JSON-ready report.
        exit_code: 0 success, 2 negative verdict.
    """
    report: Dict[str, Any]
    exit_code: int = EXIT_OK


def verdict_code(positive: bool) -> int:
    return EXIT_OK if positive else EXIT_NEGATIVE


def parse_spectrum(v: Any) -> SecrecySpectrum:
    """Accept "1/3,1/3,1/3", a list of rationals or a spectrum."""
    if isinstance(v, SecrecySpectrum):
        return v
    if isinstance(v, str):
        return SecrecySpectrum.parse(v)
    return SecrecySpectrum.of(v)


class SpectrumRequest(BaseModel):
    """Base for requests carrying inline spectra."""
    model_config = ConfigDict(arbitrary_types_allowed=True)
