"""Ticket ingestion: raw records to feature sets and context rows.

Free-text problem descriptions are scanned against a taxonomy dictionary
(longest match first, case-insensitive); matched phrases become keyword
attributes carrying the dictionary confidence as membership.  Structured
fields (configuration, customer, country, year bucket) become attributes
with membership 1.0, filtered by the active maintenance-strategy preset.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .context import AttributeId, AttributeKind, FuzzyContext, ObjectId, ObjectKind
from .errors import IngestError
from .matching import FeatureSet, FeatureSource
from .names import canonical_name

log = logging.getLogger(__name__)

_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def _text_tokens(text: str) -> list[str]:
    return [t for t in _NON_ALNUM.split(text.lower()) if t]


@dataclass(frozen=True)
class Ticket:
    """A maintenance request.  The four core fields are always required;
    ``extras`` carries additional structured facts such as the country."""

    customer: str
    problem_description: str
    configuration: str
    timestamp: str
    extras: Mapping[str, str] = field(default_factory=dict)
    ticket_id: str | None = None

    def __post_init__(self):
        for name in ("customer", "problem_description", "configuration", "timestamp"):
            if not str(getattr(self, name)).strip():
                raise IngestError(f"ticket field {name!r} must be non-empty")
        self.parsed_timestamp()

    def parsed_timestamp(self) -> datetime:
        raw = self.timestamp.replace("Z", "+00:00")
        try:
            return datetime.fromisoformat(raw)
        except ValueError as exc:
            raise IngestError(f"timestamp not ISO-8601: {self.timestamp!r}") from exc


class TaxonomyDictionary:
    """Surface phrase -> (canonical attribute, confidence) lookup.

    Phrases are normalized to token sequences; extraction walks the
    description left to right preferring the longest phrase at each
    position, so entry order never matters.
    """

    def __init__(self, entries: Mapping[str, tuple[str, float]] | None = None):
        self._phrases: dict[tuple[str, ...], tuple[str, float]] = {}
        self._max_len = 0
        for phrase, (attribute, confidence) in (entries or {}).items():
            self.add(phrase, attribute, confidence)

    def add(self, phrase: str, attribute: str, confidence: float = 1.0) -> None:
        tokens = tuple(_text_tokens(phrase))
        if not tokens:
            raise IngestError(f"taxonomy phrase is empty: {phrase!r}")
        if not 0.0 <= confidence <= 1.0:
            raise IngestError(f"confidence {confidence} outside [0, 1] for {phrase!r}")
        self._phrases[tokens] = (canonical_name(attribute), float(confidence))
        self._max_len = max(self._max_len, len(tokens))

    def __len__(self) -> int:
        return len(self._phrases)

    def match(self, text: str) -> list[tuple[str, float]]:
        """Leftmost-longest phrase matches over normalized text."""
        tokens = _text_tokens(text)
        found: list[tuple[str, float]] = []
        i = 0
        while i < len(tokens):
            hit = None
            for length in range(min(self._max_len, len(tokens) - i), 0, -1):
                entry = self._phrases.get(tuple(tokens[i : i + length]))
                if entry is not None:
                    hit = (entry, length)
                    break
            if hit is not None:
                found.append(hit[0])
                i += hit[1]
            else:
                i += 1
        return found

    @classmethod
    def from_dict(cls, data: Mapping) -> "TaxonomyDictionary":
        taxonomy = cls()
        for phrase, entry in data.items():
            if isinstance(entry, str):
                taxonomy.add(phrase, entry, 1.0)
            else:
                taxonomy.add(phrase, entry["attribute"], float(entry.get("confidence", 1.0)))
        return taxonomy

    @classmethod
    def load(cls, path: str | Path) -> "TaxonomyDictionary":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestError(f"cannot read taxonomy {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class StrategyPreset:
    """Attribute kinds admitted under a maintenance strategy."""

    strategy: str
    included_kinds: frozenset[AttributeKind]

    def admits(self, kind: AttributeKind) -> bool:
        return kind in self.included_kinds


_BASE_KINDS = frozenset(
    {AttributeKind.SYMPTOM, AttributeKind.MODEL, AttributeKind.CLIENT, AttributeKind.COUNTRY, AttributeKind.OTHER}
)

# strategies are cumulative, ordered by increasing complexity
PRESETS: dict[str, StrategyPreset] = {
    "reactive": StrategyPreset("reactive", _BASE_KINDS),
    "planned": StrategyPreset("planned", _BASE_KINDS | {AttributeKind.TIME_BUCKET}),
    "proactive": StrategyPreset("proactive", _BASE_KINDS | {AttributeKind.TIME_BUCKET, AttributeKind.CAUSE}),
    "predictive": StrategyPreset(
        "predictive",
        _BASE_KINDS | {AttributeKind.TIME_BUCKET, AttributeKind.CAUSE, AttributeKind.SENSOR_OBSERVATION},
    ),
}

DEFAULT_PRESET = PRESETS["predictive"]


def get_preset(name: str) -> StrategyPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise IngestError(f"unknown strategy preset: {name!r}") from None


def _structured_attributes(ticket: Ticket, preset: StrategyPreset) -> list[AttributeId]:
    out = []
    if preset.admits(AttributeKind.MODEL):
        out.append(AttributeId(f"Model_{''.join(ticket.configuration.split())}", AttributeKind.MODEL))
    if preset.admits(AttributeKind.CLIENT):
        out.append(AttributeId(f"Client_{''.join(ticket.customer.split())}", AttributeKind.CLIENT))
    country = ticket.extras.get("country")
    if country and preset.admits(AttributeKind.COUNTRY):
        out.append(AttributeId(f"Country_{''.join(str(country).split())}", AttributeKind.COUNTRY))
    if preset.admits(AttributeKind.TIME_BUCKET):
        year = ticket.parsed_timestamp().year
        out.append(AttributeId(f"Year_{year}", AttributeKind.TIME_BUCKET))
    return out


def extract_features(
    ticket: Ticket,
    taxonomy: TaxonomyDictionary,
    preset: StrategyPreset = DEFAULT_PRESET,
) -> FeatureSet:
    """Feature set of a ticket: matched keywords plus structured fields."""
    if len(taxonomy) == 0:
        log.warning("taxonomy dictionary is empty; only structured features will be extracted")
    names: list[str] = []
    if preset.admits(AttributeKind.SYMPTOM):
        names.extend(name for name, _ in taxonomy.match(ticket.problem_description))
    names.extend(a.name for a in _structured_attributes(ticket, preset))
    return FeatureSet(frozenset(names), FeatureSource.TICKET)


def ticket_to_context_row(
    ticket: Ticket,
    taxonomy: TaxonomyDictionary,
    preset: StrategyPreset = DEFAULT_PRESET,
) -> tuple[ObjectId, dict[AttributeId, float]]:
    """Context row of a ticket: keyword confidences and 1.0 structured facts."""
    if ticket.ticket_id is None:
        raise IngestError("ticket has no id; assign ticket_id before building context rows")
    memberships: dict[AttributeId, float] = {}
    if preset.admits(AttributeKind.SYMPTOM):
        for name, confidence in taxonomy.match(ticket.problem_description):
            attr = AttributeId(name, AttributeKind.SYMPTOM)
            memberships[attr] = max(memberships.get(attr, 0.0), confidence)
    for attr in _structured_attributes(ticket, preset):
        memberships[attr] = 1.0
    return ObjectId(ticket.ticket_id, ObjectKind.TICKET), memberships


def build_context(
    tickets: Iterable[Ticket],
    taxonomy: TaxonomyDictionary,
    preset: StrategyPreset = DEFAULT_PRESET,
    chi: float = 0.6,
) -> FuzzyContext:
    """Ingest tickets in order into a fresh context.

    Tickets without an id are numbered ``ticket_<n>`` by arrival order.
    """
    ctx = FuzzyContext(chi=chi)
    for n, ticket in enumerate(tickets, start=1):
        if ticket.ticket_id is None:
            ticket = replace(ticket, ticket_id=f"ticket_{n}")
        obj, memberships = ticket_to_context_row(ticket, taxonomy, preset)
        ctx = ctx.add_object(obj, memberships)
    return ctx


# -- dataset loading ---------------------------------------------------------

CSV_COLUMNS = ("model", "selling_country", "selling_year", "client", "symptoms")


def load_dataset(path: str | Path, fmt: str | None = None) -> list[Ticket]:
    """Load tickets from a CSV or JSON dataset file.

    Malformed rows are skipped and reported (with line numbers) through the
    module logger; well-formed rows still load.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"dataset not found: {path}")
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "json":
        return _load_json(path)
    raise IngestError(f"unsupported dataset format: {fmt!r}")


def _load_csv(path: Path) -> list[Ticket]:
    tickets: list[Ticket] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            log.warning("%s: empty dataset file", path)
            return tickets
        missing = [c for c in CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise IngestError(f"{path}: missing columns {missing}; expected {list(CSV_COLUMNS)}")
        n = 0
        for record in reader:
            try:
                year = int(str(record.get("selling_year", "")).strip())
                ticket = Ticket(
                    customer=str(record.get("client") or ""),
                    problem_description=str(record.get("symptoms") or ""),
                    configuration=str(record.get("model") or ""),
                    timestamp=f"{year:04d}-01-01T00:00:00+00:00",
                    extras={"country": str(record.get("selling_country") or "").strip()},
                )
            except (IngestError, ValueError) as exc:
                log.warning("%s line %d: skipping row (%s)", path, reader.line_num, exc)
                continue
            n += 1
            tickets.append(replace(ticket, ticket_id=f"ticket_{n}"))
    if not tickets:
        log.warning("%s: no tickets loaded", path)
    return tickets


def _load_json(path: Path) -> list[Ticket]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise IngestError(f"{path}: expected a JSON array of tickets")
    tickets: list[Ticket] = []
    n = 0
    for i, record in enumerate(data, start=1):
        try:
            ticket = Ticket(
                customer=record["customer"],
                problem_description=record["problem_description"],
                configuration=record["configuration"],
                timestamp=record["timestamp"],
                extras=dict(record.get("extras", {})),
                ticket_id=record.get("ticket_id"),
            )
        except (IngestError, KeyError, TypeError) as exc:
            log.warning("%s entry %d: skipping record (%s)", path, i, exc)
            continue
        n += 1
        if ticket.ticket_id is None:
            ticket = replace(ticket, ticket_id=f"ticket_{n}")
        tickets.append(ticket)
    if not tickets:
        log.warning("%s: no tickets loaded", path)
    return tickets
