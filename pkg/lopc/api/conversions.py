"""
Single-copy conversion commands.

Provides:
- majorize: majorization test with prefix sums
- synthesize: deterministic protocol, optionally written to a file
- convert-prob: optimal probabilistic protocol
- procrustean: keep-or-fail filter
- verify: run a protocol file on a distribution file and check secrecy
- otp-demo: one-time pad with resource accounting
"""

import logging
from typing import Any, List, Optional

import numpy as np
from pydantic import Field, field_validator

from lopc.api.reports import EXIT_OK, CommandResult, SpectrumRequest, parse_spectrum, verdict_code
from lopc.core.dist import SecrecySpectrum, entropy_of_secrecy, format_prob, pure_state
from lopc.core.engine import build_otp_protocol, execute, otp_input, sample, verify_secrecy
from lopc.core.majorization import (
    birkhoff,
    descending,
    majorizes,
    optimal_conversion_probability,
    pad_to_common,
    transfer_matrix,
)
from lopc.core.synthesis import ConversionReport, procrustean as procrustean_filter
from lopc.core.synthesis import synthesize_deterministic, synthesize_probabilistic
from lopc.settings import get_default_seed
from lopc.storage.files import parse_distribution, read_protocol, write_protocol

logger = logging.getLogger(__name__)


class PairRequest(SpectrumRequest):
    """
    Request with a source and a target spectrum.

    Attributes:
        source: Spectrum converted from ("--from").
        target: Spectrum converted to ("--to").
    """
    source: SecrecySpectrum = Field(..., description="Source spectrum, e.g. 1/3,1/3,1/3")
    target: SecrecySpectrum = Field(..., description="Target spectrum, e.g. 1/2,1/2")

    @field_validator("source", "target", mode="before")
    @classmethod
    def validate_spectrum(cls, v: Any) -> SecrecySpectrum:
        return parse_spectrum(v)


class SynthesizeRequest(PairRequest):
    out: Optional[str] = Field(None, description="Write the protocol to this file")


class ProcrusteanRequest(SpectrumRequest):
    source: SecrecySpectrum = Field(..., description="Source spectrum")
    keep: List[int] = Field(..., min_length=1, description="0-based symbols to keep")

    @field_validator("source", mode="before")
    @classmethod
    def validate_spectrum(cls, v: Any) -> SecrecySpectrum:
        return parse_spectrum(v)

    @field_validator("keep", mode="before")
    @classmethod
    def validate_keep(cls, v: Any) -> List[int]:
        if isinstance(v, str):
            return [int(part) for part in v.split(",") if part.strip()]
        return v


class VerifyRequest(SpectrumRequest):
    protocol: str = Field(..., min_length=1, description="Protocol file")
    dist: str = Field(..., min_length=1, description="Distribution file")
    target: Optional[SecrecySpectrum] = Field(None, description="Required output spectrum")
    conditioned: bool = Field(default=False, description="Check the success branch only")

    @field_validator("target", mode="before")
    @classmethod
    def validate_target(cls, v: Any) -> Optional[SecrecySpectrum]:
        return None if v is None else parse_spectrum(v)


class OTPRequest(SpectrumRequest):
    """
    One-time pad demo.

    Attributes:
        message: Distribution of each message.
        key: Key distribution (uniform over key_size when omitted).
        key_size: Key alphabet.
        messages: Number of messages sent under the one key.
        sample: Also draw one seeded run.
        seed: Seed for the sampled run.
    """
    message: SecrecySpectrum = Field(..., description="Message distribution")
    key: Optional[SecrecySpectrum] = Field(None, description="Key distribution")
    key_size: int = Field(default=2, ge=1, description="Key alphabet size")
    messages: int = Field(default=1, ge=1, le=4, description="Messages sent under one key")
    sample: bool = Field(default=False, description="Draw one seeded run")
    seed: Optional[int] = Field(None, description="Random seed")

    @field_validator("message", mode="before")
    @classmethod
    def validate_message(cls, v: Any) -> SecrecySpectrum:
        return parse_spectrum(v)

    @field_validator("key", mode="before")
    @classmethod
    def validate_key(cls, v: Any) -> Optional[SecrecySpectrum]:
        return None if v is None else parse_spectrum(v)


def _prefix_sums(weights) -> List[str]:
    running, sums = 0, []
    for w in weights:
        running += w
        sums.append(format_prob(running))
    return sums


def majorize(request: PairRequest) -> CommandResult:
    """Does the target majorize the source? Exit 2 when it does not."""
    p, q = request.source, request.target
    holds = majorizes(q, p)
    padded_p, padded_q = pad_to_common(p, q)
    report = {
        "majorizes": holds,
        "source_prefix_sums": _prefix_sums(descending(padded_p)),
        "target_prefix_sums": _prefix_sums(descending(padded_q)),
        "optimal_conversion_probability": format_prob(optimal_conversion_probability(p, q)),
        "entropy_of_secrecy": {"source": entropy_of_secrecy(p), "target": entropy_of_secrecy(q)},
    }
    if holds:
        mix = birkhoff(transfer_matrix(q, p))
        report["birkhoff_terms"] = len(mix)
    return CommandResult(report, verdict_code(holds))


def _describe(conversion: ConversionReport, p: SecrecySpectrum) -> dict:
    prot = conversion.protocol
    result = execute(prot, pure_state(p))
    secrecy = verify_secrecy(result, conversion.target, conditioned_on_success=prot.fail is not None)
    messages = []
    if prot.rounds:
        joint = result.joint
        m_index = joint.index("M")
        for m, transcript in enumerate(result.transcripts):
            weight = sum((pr for o, pr in joint.entries.items() if o[m_index] == m), 0)
            messages.append({
                "message": transcript[0],
                "probability": format_prob(weight),
                "map": list(prot.outputs[0].table_for(transcript) or []),
                "fail": m in result.fail_transcripts,
            })
    report = conversion.to_dict()
    report.update({"protocol": messages, "secrecy": secrecy.to_dict()})
    return report


def synthesize(request: SynthesizeRequest) -> CommandResult:
    """Deterministic conversion protocol, verified by execution."""
    p, q = request.source, request.target
    prot = synthesize_deterministic(p, q)
    if request.out:
        write_protocol(prot, request.out)
    report = _describe(ConversionReport(prot, optimal_conversion_probability(p, q), q), p)
    if request.out:
        report["written_to"] = request.out
    return CommandResult(report, verdict_code(report["secrecy"]["verdict"] == "SECRET"))


def convert_prob(request: PairRequest) -> CommandResult:
    """Optimal probabilistic conversion; exit 2 when it never succeeds."""
    conversion = synthesize_probabilistic(request.source, request.target)
    if conversion.success_probability == 0:
        return CommandResult(conversion.to_dict(), verdict_code(False))
    return CommandResult(_describe(conversion, request.source), EXIT_OK)


def procrustean(request: ProcrusteanRequest) -> CommandResult:
    conversion = procrustean_filter(request.source, request.keep)
    report = _describe(conversion, request.source)
    report["optimal_conversion_probability"] = format_prob(
        optimal_conversion_probability(request.source, conversion.target)
    )
    return CommandResult(report, EXIT_OK)


def verify(request: VerifyRequest) -> CommandResult:
    """Run a protocol file on a distribution file; exit 2 when LEAKY."""
    prot = read_protocol(request.protocol)
    d = parse_distribution(request.dist)
    secrecy = verify_secrecy(execute(prot, d), request.target, request.conditioned)
    return CommandResult(secrecy.to_dict(), verdict_code(secrecy.is_secret))


def otp_demo(request: OTPRequest) -> CommandResult:
    """
    One-time pad in exact mode, with an optional seeded sample run.

    The report includes the resource check "shared secret bits + public
    bits => secret bits" for this run.
    """
    key_size = len(request.key) if request.key is not None else request.key_size
    prot = build_otp_protocol(request.message, key_size, request.messages)
    d = otp_input(request.message, request.key, request.messages, key_size)
    result = execute(prot, d)
    secrecy = verify_secrecy(result)
    ledger = result.ledger
    report = secrecy.to_dict()
    report["resource_equation"] = {
        "consumed_shared_secret_bits": ledger.shared_secret_bits_consumed,
        "public_bits": ledger.public_bits_sent,
        "delivered_secret_bits": ledger.secret_bits_delivered,
        "holds": ledger.secret_bits_delivered <= ledger.shared_secret_bits_consumed + 1e-9,
    }
    if request.sample:
        seed = request.seed if request.seed is not None else get_default_seed()
        report["sample"] = sample(result, np.random.default_rng(seed))
        report["seed"] = seed
    return CommandResult(report, verdict_code(secrecy.is_secret))
