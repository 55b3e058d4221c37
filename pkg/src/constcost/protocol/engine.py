"""Two-party execution with equality-oracle queries and exact query accounting.

Each party runs as a generator over its own ``PartyView``.  Whenever it needs the
oracle it yields a ``Query`` carrying its own argument; the channel waits for both
parties' queries, answers ``[alice_arg == bob_arg]`` to both, and logs the exchange.
Neither program ever receives the other party's input, so every oracle argument
is a function of one view.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Hashable


class _Bottom:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOT = _Bottom()
"""Result of a threshold protocol when the distance exceeds the threshold."""


class ProtocolError(RuntimeError):
    """The two parties fell out of step, or a protocol invariant broke."""


@dataclass(frozen=True)
class Query:
    value: Hashable
    note: str = ""
    tag: str = "EQ"


@dataclass(frozen=True)
class TranscriptEntry:
    tag: str
    note: str
    answer: int
    alice_arg: Any = None
    bob_arg: Any = None


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)

    def record(self, entry: TranscriptEntry):
        self.entries.append(entry)

    @property
    def counts(self) -> Counter:
        return Counter(e.tag for e in self.entries)

    @property
    def queries(self) -> int:
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    def answers(self) -> tuple[int, ...]:
        return tuple(e.answer for e in self.entries)

    def format(self) -> str:
        return "\n".join(f"{i:4d} {e.tag:3s} {e.answer} {e.note}" for i, e in enumerate(self.entries))


@dataclass
class PartyView:
    role: str  # "alice" or "bob"
    input: Any
    shared: Any
    answers: list[int] = field(default_factory=list)


Program = Callable[[PartyView], Generator[Query, int, Any]]


def _advance(gen, send):
    try:
        return gen.send(send), None, False
    except StopIteration as stop:
        return None, stop.value, True


def run_parties(program: Program, x, y, shared=None, bob_program: Program | None = None):
    """Run Alice on ``x`` and Bob on ``y``; returns (common output, Transcript)."""
    transcript = Transcript()
    va = PartyView("alice", x, shared)
    vb = PartyView("bob", y, shared)
    ga = program(va)
    gb = (bob_program or program)(vb)
    qa, out_a, done_a = _advance(ga, None)
    qb, out_b, done_b = _advance(gb, None)
    while not (done_a and done_b):
        if done_a != done_b:
            raise ProtocolError("one party halted while the other still queries")
        if qa.tag != qb.tag or qa.note != qb.note:
            raise ProtocolError(f"query mismatch: {qa.tag}/{qa.note!r} vs {qb.tag}/{qb.note!r}")
        answer = int(qa.value == qb.value)
        transcript.record(TranscriptEntry(qa.tag, qa.note, answer, qa.value, qb.value))
        va.answers.append(answer)
        vb.answers.append(answer)
        qa, out_a, done_a = _advance(ga, answer)
        qb, out_b, done_b = _advance(gb, answer)
    if out_a != out_b and not (out_a is BOT and out_b is BOT):
        raise ProtocolError(f"parties disagree on the output: {out_a!r} vs {out_b!r}")
    return out_a, transcript
