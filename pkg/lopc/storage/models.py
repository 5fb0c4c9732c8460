"""
File schemas for distributions and protocols.

Models:
- PartyModel, EntryModel, DistributionFile: joint distribution files
- MessageWeight, RuleRow, RoundModel: public announcements
- TranscriptMap, OutputMapModel, FailModel, ProtocolFile: protocol files

Probabilities are stored as exact rational strings ("num/den").
"""

from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from lopc.core.dist import JointDist, PartyId, Role, format_prob, to_prob
from lopc.core.protocol import FailMessage, MessageRule, ProtocolIR, RelabelMap, Round


def _rational(v) -> str:
    """Validate a rational probability string and store it reduced."""
    return format_prob(to_prob(v))


class PartyModel(BaseModel):
    """
    One variable of a distribution file.

    Attributes:
        label: Unique variable name.
        role: honest, eavesdropper or public.
        alphabet: Number of symbols.
        holder: Owning party (defaults to the label).
    """
    label: str = Field(..., min_length=1, description="Variable label")
    role: str = Field(default=Role.HONEST.value, description="honest, eavesdropper or public")
    alphabet: int = Field(default=2, ge=1, description="Alphabet size")
    holder: Optional[str] = Field(None, description="Party holding the variable")

    @field_validator("role")
    @classmethod
    def validate_role(cls, v: str) -> str:
        """Validate role value."""
        valid_roles = [r.value for r in Role]
        if v.lower() not in valid_roles:
            raise ValueError(f"Role must be one of: {', '.join(valid_roles)}")
        return v.lower()


class EntryModel(BaseModel):
    """One outcome with its exact probability."""
    outcome: List[int] = Field(..., description="Symbol per party")
    prob: str = Field(..., description="Exact probability, e.g. '1/3'")

    @field_validator("prob", mode="before")
    @classmethod
    def validate_prob(cls, v) -> str:
        return _rational(v)


class DistributionFile(BaseModel):
    """
    Joint distribution file.

    Attributes:
        parties: Ordered variables.
        entries: Support with exact probabilities (must sum to 1).
    """
    parties: List[PartyModel] = Field(..., min_length=1, description="Ordered variables")
    entries: List[EntryModel] = Field(..., min_length=1, description="Outcomes with probabilities")

    def to_dist(self) -> JointDist:
        parties = tuple(PartyId(p.label, Role(p.role), p.alphabet, p.holder) for p in self.parties)
        entries = {}
        for entry in self.entries:
            key = tuple(entry.outcome)
            entries[key] = entries.get(key, Fraction(0)) + Fraction(entry.prob)
        return JointDist(parties, entries)

    @classmethod
    def from_dist(cls, d: JointDist) -> "DistributionFile":
        return cls(
            parties=[
                PartyModel(label=p.label, role=p.role.value, alphabet=p.alphabet,
                           holder=p.holder if p.holder != p.label else None)
                for p in d.parties
            ],
            entries=[EntryModel(outcome=list(o), prob=format_prob(pr)) for o, pr in d.entries.items()],
        )


class MessageWeight(BaseModel):
    message: int = Field(..., ge=0, description="Message id")
    prob: str = Field(..., description="p(message | input)")

    @field_validator("prob", mode="before")
    @classmethod
    def validate_prob(cls, v) -> str:
        return _rational(v)


class RuleRow(BaseModel):
    input: List[int] = Field(..., description="Values of the variables the speaker reads")
    messages: List[MessageWeight] = Field(..., min_length=1)


class RoundModel(BaseModel):
    """
    One public announcement.

    Attributes:
        speaker: Announcing party.
        reads: Variables the message depends on.
        table: Message weights per input.
    """
    speaker: str = Field(..., min_length=1, description="Announcing party")
    reads: List[str] = Field(..., description="Variables read by the speaker")
    table: List[RuleRow] = Field(..., min_length=1, description="Message weights per input")


class TranscriptMap(BaseModel):
    transcript: List[int] = Field(..., description="Total transcript")
    table: List[int] = Field(..., description="Output symbol per input symbol")


class OutputMapModel(BaseModel):
    holder: str = Field(..., min_length=1)
    source: str = Field(..., min_length=1)
    label: str = Field(..., min_length=1)
    alphabet: int = Field(..., ge=1)
    maps: List[TranscriptMap] = Field(default_factory=list)
    default: Optional[List[int]] = None


class FailModel(BaseModel):
    message: int = Field(..., ge=0, description="Fail message id")
    sink: int = Field(default=0, ge=0, description="Output symbol on failure")
    round: int = Field(default=0, ge=0)


class ProtocolFile(BaseModel):
    """
    Protocol file.

    Attributes:
        name: Description.
        rounds: Public announcements.
        maps: Output maps per party.
        fail: Optional fail message.
        keys: Variable pairs consumed as shared keys.
        payload: [sources, delivered outputs] of a carried secret message.
    """
    name: str = ""
    rounds: List[RoundModel] = Field(default_factory=list)
    maps: List[OutputMapModel] = Field(default_factory=list)
    fail: Optional[FailModel] = None
    keys: List[List[str]] = Field(default_factory=list)
    payload: Optional[List[List[str]]] = None

    @field_validator("keys")
    @classmethod
    def validate_keys(cls, v: List[List[str]]) -> List[List[str]]:
        if any(len(pair) != 2 for pair in v):
            raise ValueError("Each key entry must name exactly two variables")
        return v

    @field_validator("payload")
    @classmethod
    def validate_payload(cls, v: Optional[List[List[str]]]) -> Optional[List[List[str]]]:
        if v is not None and len(v) != 2:
            raise ValueError("Payload must be [sources, outputs]")
        return v

    def to_protocol(self) -> ProtocolIR:
        rounds = tuple(
            Round(r.speaker, MessageRule(
                tuple(r.reads),
                {tuple(row.input): {m.message: Fraction(m.prob) for m in row.messages} for row in r.table},
            ))
            for r in self.rounds
        )
        outputs = tuple(
            RelabelMap(
                m.holder, m.source, m.label, m.alphabet,
                {tuple(t.transcript): tuple(t.table) for t in m.maps},
                tuple(m.default) if m.default is not None else None,
            )
            for m in self.maps
        )
        fail = FailMessage(self.fail.message, self.fail.sink, self.fail.round) if self.fail else None
        payload = (tuple(self.payload[0]), tuple(self.payload[1])) if self.payload else None
        return ProtocolIR(rounds, outputs, fail, tuple(tuple(k) for k in self.keys), payload, self.name)

    @classmethod
    def from_protocol(cls, prot: ProtocolIR) -> "ProtocolFile":
        return cls(
            name=prot.name,
            rounds=[
                RoundModel(
                    speaker=r.speaker,
                    reads=list(r.rule.reads),
                    table=[
                        RuleRow(input=list(inp), messages=[
                            MessageWeight(message=m, prob=format_prob(w)) for m, w in row.items()
                        ])
                        for inp, row in r.rule.table.items()
                    ],
                )
                for r in prot.rounds
            ],
            maps=[
                OutputMapModel(
                    holder=out.holder, source=out.source, label=out.label, alphabet=out.alphabet,
                    maps=[TranscriptMap(transcript=list(t), table=list(tab)) for t, tab in out.per_transcript.items()],
                    default=list(out.default) if out.default is not None else None,
                )
                for out in prot.outputs
            ],
            fail=FailModel(message=prot.fail.message, sink=prot.fail.sink, round=prot.fail.round) if prot.fail else None,
            keys=[list(k) for k in prot.keys],
            payload=[list(prot.payload[0]), list(prot.payload[1])] if prot.payload else None,
        )
