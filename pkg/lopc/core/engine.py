"""
Exact execution of LOPC protocols.

Provides:
- ExecutionResult, ResourceLedger, SecrecyReport: execution outputs
- execute: exact propagation over inputs, dice and transcripts
- verify_secrecy: exact factorization test against Eve's view
- build_otp_protocol, otp_input: one-time pad over Z_K
- pure_reachable_single_copy: single-copy purity no-go search
- sample: draw one run from an execution result
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lopc.core.dist import (
    JointDist,
    PartyId,
    Role,
    SecrecySpectrum,
    Verdict,
    classify_pure,
    correlated_spectrum,
    eve,
    format_prob,
    honest,
    is_product,
    marginal,
    mutual_information,
)
from lopc.core.errors import (
    AlphabetMismatch,
    KeyTooSmall,
    NotBlockPure,
    ParseError,
    StateSpaceTooLarge,
)
from lopc.core.protocol import MessageRule, ProtocolIR, RelabelMap, Round, Transcript, identity_table
from lopc.settings import get_max_joint_outcomes

logger = logging.getLogger(__name__)

TRANSCRIPT_LABEL = "M"


@dataclass(frozen=True)
class ResourceLedger:
    """
    Resources used and produced by one execution, in bits.

    Attributes:
        shared_secret_bits_consumed: I(K_A; K_B) summed over declared key pairs.
        public_bits_sent: Sum over rounds of log2(messages used).
        secret_bits_delivered: I(S; Y) - I(S; transcript, E) for the payload, at least 0.
    """
    shared_secret_bits_consumed: float = 0.0
    public_bits_sent: float = 0.0
    secret_bits_delivered: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        return {
            "shared_secret_bits_consumed": self.shared_secret_bits_consumed,
            "public_bits_sent": self.public_bits_sent,
            "secret_bits_delivered": self.secret_bits_delivered,
        }


@dataclass(frozen=True)
class ExecutionResult:
    """
    Exact outcome of running a protocol.

    Attributes:
        joint: Distribution over the outputs, the transcript variable M and Eve.
        transcripts: M symbol -> total transcript.
        fail_transcripts: M symbols of transcripts containing the fail message.
        ledger: Resource accounting.
        protocol: The executed protocol (public knowledge).
        full: Distribution over inputs, outputs and M (used by the ledger).
    """
    joint: JointDist
    transcripts: Tuple[Transcript, ...]
    fail_transcripts: frozenset
    ledger: ResourceLedger
    protocol: ProtocolIR
    full: JointDist = field(repr=False, compare=False)

    @property
    def output_labels(self) -> Tuple[str, ...]:
        return self.joint.honest_labels

    @property
    def success_probability(self) -> Fraction:
        m = self.joint.index(TRANSCRIPT_LABEL)
        return sum(
            (prob for outcome, prob in self.joint.entries.items() if outcome[m] not in self.fail_transcripts),
            Fraction(0),
        )


class SecrecyVerdict(str, Enum):
    SECRET = "SECRET"
    LEAKY = "LEAKY"


@dataclass(frozen=True)
class SecrecyReport:
    """
    Result of ``verify_secrecy``.

    Attributes:
        verdict: SECRET or LEAKY.
        eve_information: I(Y; M, E) in bits (exactly 0.0 when SECRET).
        output_spectrum: Spectrum of the outputs when perfectly correlated.
        factorizes: Whether P(y, m, e) = P(y) P(m, e) holds exactly.
        matches_target: Whether the output spectrum equals the target.
        counterexample: A witness of the first violation, if any.
        ledger: Ledger of the execution.
        success_probability: Probability of the branch that was checked.
    """
    verdict: SecrecyVerdict
    eve_information: float
    output_spectrum: Optional[SecrecySpectrum]
    factorizes: bool
    matches_target: Optional[bool]
    counterexample: Optional[str]
    ledger: ResourceLedger
    success_probability: Fraction

    @property
    def is_secret(self) -> bool:
        return self.verdict == SecrecyVerdict.SECRET

    def to_dict(self) -> Dict[str, Any]:
        report = {
            "verdict": self.verdict.value,
            "eve_information_bits": self.eve_information,
            "output_spectrum": self.output_spectrum.to_strings() if self.output_spectrum else None,
            "ledger": self.ledger.to_dict(),
            "factorizes": self.factorizes,
            "success_probability": format_prob(self.success_probability),
        }
        if self.matches_target is not None:
            report["matches_target"] = self.matches_target
        if self.counterexample:
            report["counterexample"] = self.counterexample
        return report


def _check_protocol(prot: ProtocolIR, d: JointDist) -> None:
    """Every read and output must be local to its party and fit the alphabets."""
    for r in prot.rounds:
        for label in r.rule.reads:
            party = d.party(label)
            if not party.is_honest or party.holder != r.speaker:
                raise AlphabetMismatch(f"Speaker {r.speaker} cannot read variable {label} held by {party.holder}.")
    for out in prot.outputs:
        party = d.party(out.source)
        if not party.is_honest or party.holder != out.holder:
            raise AlphabetMismatch(f"Party {out.holder} cannot map variable {out.source} held by {party.holder}.")
        for table in list(out.per_transcript.values()) + ([out.default] if out.default else []):
            if len(table) < party.alphabet:
                raise AlphabetMismatch(
                    f"Map for {out.label} covers {len(table)} symbols, {out.source} has {party.alphabet}."
                )
    taken = set(d.labels) - {p.label for p in d.parties if p.is_honest}
    clash = taken & ({out.label for out in prot.outputs} | {TRANSCRIPT_LABEL})
    if clash:
        raise AlphabetMismatch(f"Output labels clash with non-honest variables: {sorted(clash)}")


def _propagate(prot: ProtocolIR, d: JointDist) -> Dict[Tuple[Tuple[int, ...], Transcript], Fraction]:
    limit = get_max_joint_outcomes()
    state: Dict[Tuple[Tuple[int, ...], Transcript], Fraction] = {(o, ()): p for o, p in d.entries.items()}
    for step, r in enumerate(prot.rounds):
        positions = [d.index(label) for label in r.rule.reads]
        nxt: Dict[Tuple[Tuple[int, ...], Transcript], Fraction] = {}
        for (outcome, transcript), prob in state.items():
            inp = tuple(outcome[i] for i in positions)
            row = r.rule.table.get(inp)
            if row is None:
                raise AlphabetMismatch(f"Round {step} has no message rule for input {list(inp)} of {r.speaker}.")
            for message, weight in row.items():
                key = (outcome, transcript + (message,))
                nxt[key] = nxt.get(key, Fraction(0)) + prob * weight
        if len(nxt) > limit:
            logger.error(f"Execution exceeded {limit} joint outcomes at round {step}")
            raise StateSpaceTooLarge(
                f"Round {step} produces {len(nxt)} joint outcomes, above the limit of {limit} "
                f"(LOPC_MAX_JOINT_OUTCOMES)."
            )
        state = nxt
        logger.debug(f"Round {step} ({r.speaker}): {len(state)} joint outcomes")
    return state


def _ledger(prot: ProtocolIR, d: JointDist, full: JointDist, transcripts: Sequence[Transcript]) -> ResourceLedger:
    consumed = sum(mutual_information(d, a, b) for a, b in prot.keys)
    public = 0.0
    for step in range(len(prot.rounds)):
        used = {t[step] for t in transcripts}
        public += math.log2(len(used)) if len(used) > 1 else 0.0
    delivered = 0.0
    if prot.payload is not None:
        sources, outputs = prot.payload
        view = [TRANSCRIPT_LABEL] + ([d.eavesdropper.label] if d.eavesdropper else [])
        delivered = mutual_information(full, list(sources), list(outputs)) - mutual_information(
            full, list(sources), view
        )
        delivered = max(0.0, delivered)
    return ResourceLedger(consumed, public, delivered)


def execute(prot: ProtocolIR, d: JointDist) -> ExecutionResult:
    """
    Run a protocol exactly on a distribution.

    Every combination of input outcome and announced messages is tracked
    with its exact probability; nothing is sampled.

    Args:
        prot: The protocol.
        d: Input distribution; the protocol reads and maps its honest variables.

    Returns:
        ExecutionResult: Joint over (outputs..., M, E) plus the ledger.

    Raises:
        AlphabetMismatch: If the protocol does not fit the distribution.
        StateSpaceTooLarge: If the enumeration exceeds the configured limit.
    """
    logger.info(f"Executing protocol '{prot.name or 'unnamed'}' with {len(prot.rounds)} round(s) "
                f"on {len(d.entries)} input outcomes")
    _check_protocol(prot, d)
    state = _propagate(prot, d)

    transcripts = tuple(sorted({t for _, t in state}))
    index = {t: i for i, t in enumerate(transcripts)}
    fail = frozenset(i for i, t in enumerate(transcripts) if prot.fail is not None and prot.fail.matches(t))
    sources = [d.index(out.source) for out in prot.outputs]
    eve_party = d.eavesdropper
    eve_pos = d.index(eve_party.label) if eve_party else None

    out_parties = tuple(honest(out.label, out.alphabet, out.holder) for out in prot.outputs)
    m_party = PartyId(TRANSCRIPT_LABEL, Role.PUBLIC, max(1, len(transcripts)))
    joint_entries: Dict[Tuple[int, ...], Fraction] = {}
    full_entries: Dict[Tuple[int, ...], Fraction] = {}
    for (outcome, transcript), prob in state.items():
        ys = tuple(out.apply(transcript, outcome[pos]) for out, pos in zip(prot.outputs, sources))
        key = ys + (index[transcript],) + ((outcome[eve_pos],) if eve_party else ())
        joint_entries[key] = joint_entries.get(key, Fraction(0)) + prob
        full_key = outcome + ys + (index[transcript],)
        full_entries[full_key] = full_entries.get(full_key, Fraction(0)) + prob

    joint = JointDist(out_parties + (m_party,) + ((eve_party,) if eve_party else ()), joint_entries)
    full = JointDist(tuple(d.parties) + out_parties + (m_party,), full_entries)
    ledger = _ledger(prot, d, full, transcripts)
    logger.info(f"Execution finished: {len(transcripts)} transcript(s), {len(joint.entries)} joint outcomes")
    return ExecutionResult(joint, transcripts, fail, ledger, prot, full)


def _condition_on_success(res: ExecutionResult) -> Optional[JointDist]:
    m = res.joint.index(TRANSCRIPT_LABEL)
    kept = {o: p for o, p in res.joint.entries.items() if o[m] not in res.fail_transcripts}
    total = sum(kept.values(), Fraction(0))
    if total == 0:
        return None
    return JointDist(res.joint.parties, {o: p / total for o, p in kept.items()})


def _counterexample(joint: JointDist, ys: List[str], view: List[str], transcripts: Sequence[Transcript]) -> str:
    """First (y, view) pair, in sorted order, where the joint differs from the product."""
    y_dist, v_dist = marginal(joint, ys), marginal(joint, view)
    y_pos = [joint.index(label) for label in ys]
    v_pos = [joint.index(label) for label in view]
    m_at = view.index(TRANSCRIPT_LABEL) if TRANSCRIPT_LABEL in view else None
    by_pair: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Fraction] = {}
    for outcome, prob in joint.entries.items():
        by_pair[(tuple(outcome[i] for i in y_pos), tuple(outcome[i] for i in v_pos))] = prob
    for y, py in y_dist.entries.items():
        for v, pv in v_dist.entries.items():
            actual = by_pair.get((y, v), Fraction(0))
            if actual != py * pv:
                shown = dict(zip(view, v))
                if m_at is not None:
                    shown[TRANSCRIPT_LABEL] = list(transcripts[v[m_at]])
                return (f"P(Y={list(y)}, {shown}) = {format_prob(actual)} but "
                        f"P(Y) P(view) = {format_prob(py * pv)}")
    return ""


def verify_secrecy(res: ExecutionResult, target: Optional[SecrecySpectrum] = None,
                   conditioned_on_success: bool = False) -> SecrecyReport:
    """
    Exact secrecy check of an execution.

    The honest outputs Y (grouped by holder) must be independent of Eve's
    view (transcript M and Eve's variable), and when a target is given the
    outputs must form exactly that pure spectrum.

    Args:
        res: Execution result.
        target: Optional required output spectrum.
        conditioned_on_success: Drop fail transcripts and renormalize first.

    Returns:
        SecrecyReport: Verdict, leaked information and a counterexample.
    """
    joint = res.joint
    success = Fraction(1)
    if conditioned_on_success:
        success = res.success_probability
        conditioned = _condition_on_success(res)
        if conditioned is None:
            logger.info("Protocol never succeeds; nothing to verify")
            return SecrecyReport(SecrecyVerdict.LEAKY, 0.0, None, False, False if target else None,
                                 "The protocol never succeeds.", res.ledger, success)
        joint = conditioned

    ys = list(joint.honest_labels)
    view = [p.label for p in joint.parties if not p.is_honest]
    factorizes = is_product(joint, (ys, view)) if ys else True
    spectrum = correlated_spectrum(joint, joint.holders()) if ys else None
    matches = None
    if target is not None:
        matches = spectrum is not None and spectrum.trimmed() == target.trimmed()

    secret = factorizes and matches is not False
    eve_information = 0.0 if factorizes else mutual_information(joint, ys, view)
    counterexample = None
    if not factorizes:
        counterexample = _counterexample(joint, ys, view, res.transcripts)
    elif matches is False:
        got = ", ".join(spectrum.trimmed().to_strings()) if spectrum else "not perfectly correlated"
        counterexample = f"Output spectrum ({got}) differs from target ({', '.join(target.trimmed().to_strings())})."
    verdict = SecrecyVerdict.SECRET if secret else SecrecyVerdict.LEAKY
    logger.info(f"Secrecy verdict {verdict.value}: eve_information={eve_information:.6g} bits")
    return SecrecyReport(verdict, eve_information, spectrum, factorizes, matches, counterexample,
                         res.ledger, success)


def _message_labels(n_messages: int) -> List[str]:
    return ["S"] if n_messages == 1 else [f"S{i + 1}" for i in range(n_messages)]


def build_otp_protocol(message_source: SecrecySpectrum, key_size: int = 2, n_messages: int = 1) -> ProtocolIR:
    """
    One-time pad over Z_K.

    For each message S_i Alice announces (s_i + k) mod K; Bob outputs
    (m_i - k) mod K. With ``n_messages > 1`` the same key is reused.

    Args:
        message_source: Distribution of each message (alphabet <= key_size).
        key_size: Key alphabet K (2 gives XOR).
        n_messages: Number of messages sent under the one key.

    Returns:
        ProtocolIR: The pad, acting on ``otp_input`` variables S.., KA, KB.

    Raises:
        KeyTooSmall: If the message alphabet exceeds the key alphabet.
    """
    size = len(message_source)
    if size > key_size:
        raise KeyTooSmall(f"Message alphabet {size} exceeds key alphabet {key_size}.")
    if n_messages < 1:
        raise ParseError("n_messages must be at least 1.")

    labels = _message_labels(n_messages)
    rounds = tuple(
        Round("A", MessageRule(
            (label, "KA"),
            {(s, k): {(s + k) % key_size: Fraction(1)} for s in range(size) for k in range(key_size)},
        ))
        for label in labels
    )
    all_transcripts = list(product(range(key_size), repeat=n_messages))
    outputs: List[RelabelMap] = []
    for i, label in enumerate(labels):
        suffix = "" if n_messages == 1 else str(i + 1)
        outputs.append(RelabelMap("A", label, f"Y_A{suffix}", size, default=identity_table(size)))
        outputs.append(RelabelMap(
            "B", "KB", f"Y_B{suffix}", key_size,
            {t: tuple((t[i] - k) % key_size for k in range(key_size)) for t in all_transcripts},
        ))
    bob_outputs = tuple(out.label for out in outputs if out.holder == "B")
    logger.info(f"Built one-time pad: key size {key_size}, {n_messages} message(s)")
    return ProtocolIR(
        rounds=rounds,
        outputs=tuple(outputs),
        keys=(("KA", "KB"),),
        payload=(tuple(labels), bob_outputs),
        name="one-time-pad" if n_messages == 1 else "one-time-pad-reused",
    )


def otp_input(message_source: SecrecySpectrum, key: Optional[SecrecySpectrum] = None,
              n_messages: int = 1, key_size: Optional[int] = None) -> JointDist:
    """
    Input distribution for ``build_otp_protocol``.

    Messages are i.i.d. from ``message_source``; the key is shared perfectly
    (KA = KB) with distribution ``key`` (uniform over key_size by default).
    """
    if key is None:
        key = SecrecySpectrum.uniform(key_size or 2)
    size = len(message_source)
    k_size = len(key)
    labels = _message_labels(n_messages)
    parties = tuple(honest(label, size, "A") for label in labels) + (
        honest("KA", k_size, "A"), honest("KB", k_size, "B"), eve())
    entries: Dict[Tuple[int, ...], Fraction] = {}
    for messages in product(range(size), repeat=n_messages):
        pm = Fraction(1)
        for s in messages:
            pm *= message_source.weights[s]
        for k, pk in enumerate(key.weights):
            if pm * pk:
                entries[messages + (k, k, 0)] = pm * pk
    return JointDist(parties, entries)


def single_copy_witness(d: JointDist) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...], Dict[int, int], Dict[int, int]]]:
    """
    Search for a pair of local maps producing a shared secret bit from one copy.

    A one-round protocol amounts to each total message selecting a pair of
    local maps; the message restricts each side to a set of symbols and then
    maps it into {0, 1}. The search tries every restriction and every map.

    Returns:
        The first (A symbols, B symbols, A map, B map) whose image of the
        support is exactly {(0,0), (1,1)}, or None.
    """
    a_label, b_label = d.honest_labels
    ab = marginal(d, [a_label, b_label])
    support = list(ab.entries)
    a_used = sorted({a for a, _ in support})
    b_used = sorted({b for _, b in support})

    def subsets(symbols):
        for size in range(1, len(symbols) + 1):
            yield from combinations(symbols, size)

    for rest_a in subsets(a_used):
        for rest_b in subsets(b_used):
            block = [(a, b) for a, b in support if a in rest_a and b in rest_b]
            if not block:
                continue
            for bits_a in product((0, 1), repeat=len(rest_a)):
                f_a = dict(zip(rest_a, bits_a))
                for bits_b in product((0, 1), repeat=len(rest_b)):
                    f_b = dict(zip(rest_b, bits_b))
                    image = {(f_a[a], f_b[b]) for a, b in block}
                    if image == {(0, 0), (1, 1)}:
                        return rest_a, rest_b, f_a, f_b
    return None


def pure_reachable_single_copy(d: JointDist) -> bool:
    """
    Can one copy of a block-pure state be turned into a shared secret bit
    with positive probability?

    Raises:
        NotBlockPure: If Eve is correlated with the honest parties.
    """
    verdict = classify_pure(d)
    if verdict.kind == Verdict.MIXED:
        raise NotBlockPure("Input is not block-pure: Eve is correlated with the honest parties.")
    witness = single_copy_witness(d)
    logger.info(f"Single-copy purity search ({verdict.kind.value}): {'found' if witness else 'none'}")
    return witness is not None


def sample(result: ExecutionResult, rng: np.random.Generator) -> Dict[str, Any]:
    """Draw one run (outputs, transcript, Eve) from an execution result."""
    outcomes = list(result.joint.entries)
    probs = np.array([float(result.joint.entries[o]) for o in outcomes], dtype=float)
    choice = outcomes[int(rng.choice(len(outcomes), p=probs / probs.sum()))]
    run = dict(zip(result.joint.labels, choice))
    run[TRANSCRIPT_LABEL] = list(result.transcripts[run[TRANSCRIPT_LABEL]])
    return run
