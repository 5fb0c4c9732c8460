"""
Multipartite audit command.

Provides:
- multi-audit --state cat: pairwise-rate feasibility of the n-party cat state
- multi-audit --state ghz: partition entropies, GHZ -> EPR and the reverse audit
- multi-audit --state epr2: EPR pair -> GHZ, secrecy swapping and the reverse audit
"""

from enum import Enum
from fractions import Fraction

from pydantic import BaseModel, Field, field_validator

from lopc.api.reports import CommandResult, verdict_code
from lopc.core.dist import JointDist, SecrecySpectrum, cat_state, marginal, shared_bit
from lopc.core.engine import verify_secrecy
from lopc.core.multipartite import (
    all_cuts,
    cat_rate_feasibility,
    conversion_audit,
    double_epr,
    partition_entropy,
    run_epr2_to_ghz,
    run_ghz_to_epr,
    run_swap,
    with_idle,
)

SHARED_BIT = SecrecySpectrum((Fraction(1, 2), Fraction(1, 2)))


class AuditState(str, Enum):
    CAT = "cat"
    GHZ = "ghz"
    EPR2 = "epr2"


class MultiAuditRequest(BaseModel):
    """
    Multipartite audit request.

    Attributes:
        state: cat, ghz or epr2.
        parties: Number of parties of the cat state.
    """
    state: str = Field(default=AuditState.CAT.value, description="cat, ghz or epr2")
    parties: int = Field(default=4, ge=2, le=8, description="Parties of the cat state")

    @field_validator("state")
    @classmethod
    def validate_state(cls, v: str) -> str:
        """Validate state value."""
        valid_states = [s.value for s in AuditState]
        if v.lower() not in valid_states:
            raise ValueError(f"State must be one of: {', '.join(valid_states)}")
        return v.lower()


def _entropies(d: JointDist) -> dict:
    return {cut.label(): partition_entropy(d, cut) for cut in all_cuts(d.holders())}


def multi_audit(request: MultiAuditRequest) -> CommandResult:
    """Exit 2 for an infeasible rate system or a leaky canned protocol."""
    if request.state == AuditState.CAT.value:
        verdict = cat_rate_feasibility(request.parties)
        report = verdict.to_dict()
        report["partition_entropies"] = _entropies(cat_state(request.parties))
        return CommandResult(report, verdict_code(verdict.feasible))

    if request.state == AuditState.GHZ.value:
        ghz = cat_state(3)
        result = run_ghz_to_epr(ghz)
        secrecy = verify_secrecy(result, SHARED_BIT)
        epr_with_c = with_idle(shared_bit(), ["C"])
        report = {
            "partition_entropies": _entropies(ghz),
            "ghz_to_epr": secrecy.to_dict(),
            "epr_to_ghz_impossible_on": conversion_audit(epr_with_c, ghz),
        }
        return CommandResult(report, verdict_code(secrecy.is_secret))

    source = double_epr()
    ghz_result = run_epr2_to_ghz(source)
    to_ghz = verify_secrecy(ghz_result, SHARED_BIT)
    swapped = verify_secrecy(run_swap(source), SHARED_BIT)
    ghz_outputs = marginal(ghz_result.joint, ["Y_A", "Y_B", "Y_C"])
    report = {
        "partition_entropies": _entropies(source),
        "epr2_to_ghz": to_ghz.to_dict(),
        "epr2_to_ghz_output_outcomes": {
            "".join(map(str, o)): str(p) for o, p in ghz_outputs.entries.items()
        },
        "swap": swapped.to_dict(),
        "ghz_to_epr2_impossible_on": conversion_audit(cat_state(3), source),
    }
    return CommandResult(report, verdict_code(to_ghz.is_secret and swapped.is_secret))
