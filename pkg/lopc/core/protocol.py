"""
Intermediate representation of LOPC protocols.

Provides:
- MessageRule: p(m | speaker's local variables)
- Round: one public announcement by one party
- RelabelMap: per-transcript local output map
- FailMessage: designated "fail" announcement with a fixed output symbol
- ProtocolIR: the whole protocol (public: Eve knows it)
"""

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from lopc.core.dist import format_prob
from lopc.core.errors import AlphabetMismatch, NormalizationError, ParseError

Transcript = Tuple[int, ...]


@dataclass(frozen=True)
class MessageRule:
    """
    Conditional message weights of one round.

    Attributes:
        reads: Variables the speaker looks at (all held by the speaker).
        table: Input tuple -> {message: probability}; each row sums to 1.
    """
    reads: Tuple[str, ...]
    table: Mapping[Tuple[int, ...], Mapping[int, Fraction]]

    def __post_init__(self):
        object.__setattr__(self, "reads", tuple(self.reads))
        cleaned: Dict[Tuple[int, ...], Mapping[int, Fraction]] = {}
        for inp, row in self.table.items():
            inp = tuple(int(x) for x in inp)
            if len(inp) != len(self.reads):
                raise ParseError(f"Message rule input {list(inp)} does not match reads {list(self.reads)}.")
            weights = {int(m): Fraction(w) for m, w in row.items() if Fraction(w) != 0}
            if any(w < 0 for w in weights.values()):
                raise ParseError(f"Negative message weight for input {list(inp)}.")
            total = sum(weights.values(), Fraction(0))
            if total != 1:
                raise NormalizationError(
                    f"Message weights for input {list(inp)} sum to {format_prob(total)}.",
                    deficit=1 - total,
                )
            cleaned[inp] = MappingProxyType(dict(sorted(weights.items())))
        object.__setattr__(self, "table", MappingProxyType(dict(sorted(cleaned.items()))))

    @property
    def messages(self) -> List[int]:
        return sorted({m for row in self.table.values() for m in row})


@dataclass(frozen=True)
class Round:
    """One public announcement."""
    speaker: str
    rule: MessageRule


@dataclass(frozen=True)
class RelabelMap:
    """
    Local output map of one party.

    The output symbol is ``per_transcript[t][x]`` where ``t`` is the total
    transcript and ``x`` the value of ``source``. Transcripts without an
    entry use ``default``; with no default the value passes through.

    Attributes:
        holder: Party applying the map.
        source: Input variable read by the map.
        label: Name of the output variable.
        alphabet: Output alphabet size.
        per_transcript: Transcript -> symbol table indexed by input symbol.
        default: Table used for transcripts not listed.
    """
    holder: str
    source: str
    label: str
    alphabet: int
    per_transcript: Mapping[Transcript, Tuple[int, ...]] = field(default_factory=dict)
    default: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        tables = {tuple(t): tuple(int(y) for y in table) for t, table in self.per_transcript.items()}
        for table in list(tables.values()) + ([tuple(self.default)] if self.default is not None else []):
            if any(not 0 <= y < self.alphabet for y in table):
                raise ParseError(f"Map for {self.label} targets a symbol outside its alphabet {self.alphabet}.")
        object.__setattr__(self, "per_transcript", MappingProxyType(dict(sorted(tables.items()))))
        if self.default is not None:
            object.__setattr__(self, "default", tuple(int(y) for y in self.default))

    def table_for(self, transcript: Transcript) -> Optional[Tuple[int, ...]]:
        return self.per_transcript.get(tuple(transcript), self.default)

    def apply(self, transcript: Transcript, symbol: int) -> int:
        """
        Output symbol for an input symbol under a transcript.

        Raises:
            AlphabetMismatch: If the symbol is outside the map.
        """
        table = self.table_for(transcript)
        if table is None:
            if symbol >= self.alphabet:
                raise AlphabetMismatch(f"Symbol {symbol} does not fit the output alphabet of {self.label}.")
            return symbol
        if symbol >= len(table):
            raise AlphabetMismatch(
                f"Map for {self.label} has no entry for symbol {symbol} under transcript {list(transcript)}."
            )
        return table[symbol]


@dataclass(frozen=True)
class FailMessage:
    """
    The single "fail" announcement.

    Attributes:
        message: Message id signalling failure.
        sink: Output symbol every party produces on failure (y_1).
        round: Round in which the fail message is sent.
    """
    message: int
    sink: int = 0
    round: int = 0

    def matches(self, transcript: Transcript) -> bool:
        return len(transcript) > self.round and transcript[self.round] == self.message


@dataclass(frozen=True)
class ProtocolIR:
    """
    An LOPC protocol.

    Attributes:
        rounds: Ordered public announcements.
        outputs: Local output maps; input variables without a map are forgotten.
        fail: Optional fail message (outputs forced to ``fail.sink``).
        keys: Pairs of variables consumed as a shared secret key.
        payload: (source variables, delivered output variables) of a secret
            message carried by the protocol.
        name: Free-form description.
    """
    rounds: Tuple[Round, ...] = ()
    outputs: Tuple[RelabelMap, ...] = ()
    fail: Optional[FailMessage] = None
    keys: Tuple[Tuple[str, str], ...] = ()
    payload: Optional[Tuple[Tuple[str, ...], Tuple[str, ...]]] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "keys", tuple(tuple(pair) for pair in self.keys))
        if self.payload is not None:
            sources, delivered = self.payload
            object.__setattr__(self, "payload", (tuple(sources), tuple(delivered)))
        labels = [out.label for out in self.outputs]
        if len(set(labels)) != len(labels):
            raise ParseError(f"Output labels must be unique: {labels}")
        if self.fail is not None:
            if self.fail.round >= len(self.rounds):
                raise ParseError("Fail message refers to a round the protocol does not have.")
            for out in self.outputs:
                for transcript, table in out.per_transcript.items():
                    if self.fail.matches(transcript) and any(y != self.fail.sink for y in table):
                        raise ParseError(
                            f"Output {out.label} must map everything to {self.fail.sink} on the fail message."
                        )

    @property
    def speakers(self) -> List[str]:
        return [r.speaker for r in self.rounds]

    def message_alphabets(self) -> List[List[int]]:
        return [r.rule.messages for r in self.rounds]


def permutation_maps(holders_sources: Sequence[Tuple[str, str, str]], per_transcript: Mapping[Transcript, Sequence[int]],
                     alphabet: int, default: Optional[Sequence[int]] = None) -> Tuple[RelabelMap, ...]:
    """Same relabeling table for several parties (both sides of a pure state apply identical maps)."""
    return tuple(
        RelabelMap(holder, source, label, alphabet, {t: tuple(m) for t, m in per_transcript.items()},
                   tuple(default) if default is not None else None)
        for holder, source, label in holders_sources
    )


def identity_table(n: int) -> Tuple[int, ...]:
    return tuple(range(n))


def constant_table(n: int, symbol: int = 0) -> Tuple[int, ...]:
    return tuple(symbol for _ in range(n))


def transcripts_of(rounds: Iterable[Round]) -> List[Transcript]:
    """Every combination of round messages (used to spell out per-transcript maps)."""
    combos: List[Transcript] = [()]
    for r in rounds:
        combos = [t + (m,) for t in combos for m in r.rule.messages]
    return combos
