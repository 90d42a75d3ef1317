"""Operator feedback: an append-only ledger and its application to the model.

Accepted hints fold back into the knowledge graph by inserting the resolved
ticket as a new object whose attributes are the query features plus a
solution-link attribute naming the accepted hint.  Rejections are recorded
but never change the model.  Replaying a ledger from the same base state is
deterministic, so the ledger is the durable source of truth for learning.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterator, Sequence

from .context import AttributeId, AttributeKind, FuzzyContext, ObjectId, ObjectKind
from .errors import LedgerError
from .lattice import ConceptLattice, insert_object

VERDICTS = ("accepted", "rejected")

SOLUTION_LINK_PREFIX = "Solution_"


@dataclass(frozen=True)
class FeedbackEvent:
    query_id: str
    ticket_id: str
    hint_object: str
    verdict: str
    timestamp: str
    features: tuple[str, ...] = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise LedgerError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")
        if not self.query_id or not self.hint_object or not self.ticket_id:
            raise LedgerError("query_id, ticket_id and hint_object are required")
        try:
            datetime.fromisoformat(self.timestamp.replace("Z", "+00:00"))
        except ValueError as exc:
            raise LedgerError(f"timestamp not ISO-8601: {self.timestamp!r}") from exc
        object.__setattr__(self, "features", tuple(self.features))

    def to_dict(self) -> dict:
        return asdict(self) | {"features": list(self.features)}

    @classmethod
    def from_dict(cls, data: dict) -> "FeedbackEvent":
        return cls(
            query_id=data["query_id"],
            ticket_id=data["ticket_id"],
            hint_object=data["hint_object"],
            verdict=data["verdict"],
            timestamp=data["timestamp"],
            features=tuple(data.get("features", ())),
        )


class FeedbackLedger:
    """Append-only sequence of feedback events.

    One verdict per (query, hint) pair; timestamps must be monotone
    non-decreasing in append order so a replay reproduces history exactly.
    """

    def __init__(self, events: Sequence[FeedbackEvent] = ()):
        self._events: list[FeedbackEvent] = []
        self._judged: set[tuple[str, str]] = set()
        for event in events:
            self.record(event)

    def record(self, event: FeedbackEvent) -> "FeedbackLedger":
        key = (event.query_id, event.hint_object)
        if key in self._judged:
            raise LedgerError(f"verdict already recorded for query {event.query_id!r} hint {event.hint_object!r}")
        if self._events and _ts(event) < _ts(self._events[-1]):
            raise LedgerError("ledger timestamps must be monotone non-decreasing")
        self._events.append(event)
        self._judged.add(key)
        return self

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[FeedbackEvent]:
        return iter(self._events)

    def accepted(self) -> list[FeedbackEvent]:
        return [e for e in self._events if e.verdict == "accepted"]

    # -- persistence (JSON Lines, append-only) -----------------------------

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8") as handle:
            for event in self._events:
                handle.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")

    def append_to(self, path: str | Path, event: FeedbackEvent) -> None:
        """Record ``event`` and append it to the ledger file in one step."""
        self.record(event)
        with Path(path).open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "FeedbackLedger":
        path = Path(path)
        ledger = cls()
        if not path.exists():
            return ledger
        for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                ledger.record(FeedbackEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise LedgerError(f"{path} line {i}: invalid ledger entry ({exc})") from exc
        return ledger


def _ts(event: FeedbackEvent) -> datetime:
    return datetime.fromisoformat(event.timestamp.replace("Z", "+00:00"))


def apply_accepted(
    ledger: FeedbackLedger,
    ctx: FuzzyContext,
    lattice: ConceptLattice,
) -> tuple[FuzzyContext, ConceptLattice]:
    """Insert every accepted, not-yet-applied resolution into the model.

    An event is already applied when its ticket object exists in the
    context, which makes application idempotent and replays deterministic.
    Rejected events never reach the model.
    """
    for event in ledger.accepted():
        if event.ticket_id in ctx:
            continue
        memberships: dict[AttributeId, float] = {
            AttributeId(f, AttributeKind.OTHER): 1.0 for f in event.features
        }
        # keep attribute kinds already registered in the context
        memberships = {
            (ctx.get_attribute(a) if ctx.has_attribute(a) else a): v for a, v in memberships.items()
        }
        link = AttributeId(f"{SOLUTION_LINK_PREFIX}{event.hint_object}", AttributeKind.OTHER)
        memberships[link] = 1.0
        lattice, ctx = insert_object(lattice, ctx, ObjectId(event.ticket_id, ObjectKind.TICKET), memberships)
    return ctx, lattice


def replay(
    ledger: FeedbackLedger,
    base_ctx: FuzzyContext,
    base_lattice: ConceptLattice,
) -> tuple[FuzzyContext, ConceptLattice]:
    """Reconstruct the model state implied by a full ledger."""
    return apply_accepted(ledger, base_ctx, base_lattice)
