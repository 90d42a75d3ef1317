"""Fuzzy formal context: objects, attributes and graded incidence.

The context is the ground model everything else is computed from.  It keeps
a sparse object x attribute incidence with memberships in [0, 1] plus a
confidence threshold ``chi``; derivations only count pairs at or above
``chi`` while sub-threshold memberships stay stored (lowering ``chi`` later
must not lose data).

Context values are treated as immutable once built: ``add_object`` returns
a new context and never mutates the receiver, so a context can be shared
freely across concurrent readers.
"""
from __future__ import annotations

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateObjectError,
    MembershipRangeError,
    UnknownAttributeError,
    UnknownObjectError,
)
from .names import canonical_key, canonical_name

CONTEXT_FORMAT_VERSION = 1


class AttributeKind(str, Enum):
    SYMPTOM = "symptom"
    MODEL = "model"
    CLIENT = "client"
    COUNTRY = "country"
    TIME_BUCKET = "time-bucket"
    CAUSE = "cause"
    SENSOR_OBSERVATION = "sensor-observation"
    OTHER = "other"


class ObjectKind(str, Enum):
    TICKET = "ticket"
    TOOL = "tool"
    PROCEDURE = "procedure"
    CONFIGURATION = "configuration"
    DOCUMENT = "document"
    OTHER = "other"


class AttributeId:
    """Attribute identity.  Equality and hashing use the canonical key, so
    ``AttributeId("engine separation") == AttributeId("EngineSeparation")``.
    """

    __slots__ = ("name", "kind", "key")

    def __init__(self, name: str, kind: AttributeKind = AttributeKind.OTHER):
        display = canonical_name(name)
        if not display:
            raise ValueError("attribute name must be non-empty")
        self.name = display
        self.kind = AttributeKind(kind)
        self.key = canonical_key(display)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, AttributeId):
            return self.key == other.key
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.key)

    def __lt__(self, other: "AttributeId") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:
        return f"AttributeId({self.name!r}, {self.kind.value!r})"


class ObjectId:
    """Object identity; the exact name string is the identity."""

    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: ObjectKind = ObjectKind.OTHER):
        if not name:
            raise ValueError("object name must be non-empty")
        self.name = name
        self.kind = ObjectKind(kind)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ObjectId):
            return self.name == other.name
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.name)

    def __lt__(self, other: "ObjectId") -> bool:
        return self.name < other.name

    def __repr__(self) -> str:
        return f"ObjectId({self.name!r}, {self.kind.value!r})"


class FuzzyObjectRepresentation:
    """All nonzero-membership attributes of one object."""

    __slots__ = ("object", "memberships")

    def __init__(self, obj: ObjectId, memberships: Mapping[AttributeId, float]):
        self.object = obj
        self.memberships = dict(memberships)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FuzzyObjectRepresentation):
            return self.object == other.object and self.memberships == other.memberships
        return NotImplemented

    def __repr__(self) -> str:
        items = ", ".join(f"{a.name}:{m}" for a, m in sorted(self.memberships.items(), key=lambda p: p[0].key))
        return f"<{self.object.name} {{{items}}}>"


def _check_membership(value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise MembershipRangeError(f"membership {value} outside [0, 1]")
    return value


def _check_threshold(value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise MembershipRangeError(f"threshold {value} outside [0, 1]")
    return value


class FuzzyContext:
    """Ordered object and attribute sets plus sparse fuzzy incidence.

    Absent pairs mean membership 0 and are never stored.  ``chi`` is the
    confidence threshold used by derivations when no explicit one is given.
    """

    __slots__ = ("chi", "_objects", "_attributes", "_rows")

    def __init__(self, chi: float = 0.6):
        self.chi = _check_threshold(chi)
        self._objects: dict[str, ObjectId] = {}
        self._attributes: dict[str, AttributeId] = {}
        self._rows: dict[str, dict[str, float]] = {}

    # -- introspection -----------------------------------------------------

    @property
    def objects(self) -> tuple[ObjectId, ...]:
        return tuple(self._objects.values())

    @property
    def attributes(self) -> tuple[AttributeId, ...]:
        return tuple(self._attributes.values())

    def __len__(self) -> int:
        return len(self._objects)

    def __contains__(self, obj: ObjectId | str) -> bool:
        return self._object_name(obj, check=False) in self._objects

    def has_attribute(self, attr: AttributeId | str) -> bool:
        return self._attr_key(attr) in self._attributes

    def get_attribute(self, attr: AttributeId | str) -> AttributeId:
        key = self._attr_key(attr)
        try:
            return self._attributes[key]
        except KeyError:
            raise UnknownAttributeError(f"unknown attribute: {attr!r}") from None

    def get_object(self, obj: ObjectId | str) -> ObjectId:
        name = obj.name if isinstance(obj, ObjectId) else str(obj)
        try:
            return self._objects[name]
        except KeyError:
            raise UnknownObjectError(f"unknown object: {name!r}") from None

    def membership(self, obj: ObjectId | str, attr: AttributeId | str) -> float:
        """Membership of the (object, attribute) pair; 0.0 when absent."""
        name = self._object_name(obj)
        key = self._attr_key(attr)
        return self._rows[name].get(key, 0.0)

    # -- construction ------------------------------------------------------

    def add_object(
        self,
        obj: ObjectId | str,
        memberships: Mapping[AttributeId | str, float] | None = None,
    ) -> "FuzzyContext":
        """Return a new context extended with ``obj`` and its incidence row.

        Attributes referenced by the row are auto-created (kind ``other``
        for bare strings).  Zero memberships are dropped; values outside
        [0, 1] raise ``MembershipRangeError``; an existing object name
        raises ``DuplicateObjectError``.
        """
        oid = obj if isinstance(obj, ObjectId) else ObjectId(str(obj))
        if oid.name in self._objects:
            raise DuplicateObjectError(f"object already present: {oid.name!r}")

        new = FuzzyContext.__new__(FuzzyContext)
        new.chi = self.chi
        new._objects = dict(self._objects)
        new._attributes = dict(self._attributes)
        new._rows = dict(self._rows)

        row: dict[str, float] = {}
        for attr, value in (memberships or {}).items():
            aid = attr if isinstance(attr, AttributeId) else AttributeId(str(attr))
            value = _check_membership(value)
            if aid.key not in new._attributes:
                new._attributes[aid.key] = aid
            if value > 0.0:
                row[aid.key] = value
        new._objects[oid.name] = oid
        new._rows[oid.name] = row
        return new

    def add_attribute(self, attr: AttributeId | str) -> "FuzzyContext":
        """Return a new context that knows ``attr`` (no incidence changes)."""
        aid = attr if isinstance(attr, AttributeId) else AttributeId(str(attr))
        if aid.key in self._attributes:
            return self
        new = FuzzyContext.__new__(FuzzyContext)
        new.chi = self.chi
        new._objects = self._objects
        new._attributes = dict(self._attributes)
        new._attributes[aid.key] = aid
        new._rows = self._rows
        return new

    def with_chi(self, chi: float) -> "FuzzyContext":
        new = FuzzyContext.__new__(FuzzyContext)
        new.chi = _check_threshold(chi)
        new._objects = self._objects
        new._attributes = self._attributes
        new._rows = self._rows
        return new

    # -- derivation --------------------------------------------------------

    def derive_intent(
        self,
        objs: Iterable[ObjectId | str],
        chi: float | None = None,
    ) -> frozenset[AttributeId]:
        """Attributes whose membership is >= chi for *every* given object.

        The empty object set yields all attributes (vacuous quantifier).
        """
        chi = self.chi if chi is None else _check_threshold(chi)
        names = [self._object_name(o) for o in objs]
        if not names or chi <= 0.0:
            # vacuous quantifier, or a threshold every pair clears
            return frozenset(self._attributes.values())
        rows = [self._rows[n] for n in names]
        first = min(rows, key=len)
        out = []
        for key, value in first.items():
            if value >= chi and all(r.get(key, 0.0) >= chi for r in rows):
                out.append(self._attributes[key])
        return frozenset(out)

    def derive_extent(
        self,
        attrs: Iterable[AttributeId | str],
        chi: float | None = None,
    ) -> frozenset[ObjectId]:
        """Objects whose membership is >= chi for *every* given attribute."""
        chi = self.chi if chi is None else _check_threshold(chi)
        keys = []
        for attr in attrs:
            key = self._attr_key(attr)
            if key not in self._attributes:
                raise UnknownAttributeError(f"unknown attribute: {attr!r}")
            keys.append(key)
        if not keys or chi <= 0.0:
            return frozenset(self._objects.values())
        out = []
        for name, row in self._rows.items():
            if all(row.get(k, 0.0) >= chi for k in keys):
                out.append(self._objects[name])
        return frozenset(out)

    def object_representation(self, obj: ObjectId | str) -> FuzzyObjectRepresentation:
        """The nonzero-membership attribute map of one object."""
        name = self._object_name(obj)
        row = self._rows[name]
        return FuzzyObjectRepresentation(
            self._objects[name],
            {self._attributes[k]: v for k, v in row.items()},
        )

    def iter_rows(self) -> Iterator[tuple[ObjectId, dict[AttributeId, float]]]:
        for name, row in self._rows.items():
            yield self._objects[name], {self._attributes[k]: v for k, v in row.items()}

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": CONTEXT_FORMAT_VERSION,
            "chi": self.chi,
            "attributes": [
                {"name": a.name, "kind": a.kind.value} for a in self._attributes.values()
            ],
            "objects": [
                {
                    "name": o.name,
                    "kind": o.kind.value,
                    "incidence": {
                        self._attributes[k].name: v for k, v in self._rows[o.name].items()
                    },
                }
                for o in self._objects.values()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FuzzyContext":
        version = data.get("version")
        if version != CONTEXT_FORMAT_VERSION:
            raise ValueError(f"unsupported context format version: {version!r}")
        ctx = cls(chi=data.get("chi", 0.6))
        for entry in data.get("attributes", []):
            ctx = ctx.add_attribute(AttributeId(entry["name"], AttributeKind(entry.get("kind", "other"))))
        for entry in data.get("objects", []):
            oid = ObjectId(entry["name"], ObjectKind(entry.get("kind", "other")))
            row = {AttributeId(a): m for a, m in entry.get("incidence", {}).items()}
            # reuse registered ids so declared kinds win over the default
            row = {ctx._attributes.get(a.key, a): m for a, m in row.items()}
            ctx = ctx.add_object(oid, row)
        return ctx

    def to_json(self, path: str | Path | None = None, indent: int = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, text: str) -> "FuzzyContext":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "FuzzyContext":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def content_hash(self) -> str:
        """SHA-256 over the canonical JSON form (order-independent)."""
        data = self.to_dict()
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # -- internals ---------------------------------------------------------

    def _object_name(self, obj: ObjectId | str, check: bool = True) -> str:
        name = obj.name if isinstance(obj, ObjectId) else str(obj)
        if check and name not in self._objects:
            raise UnknownObjectError(f"unknown object: {name!r}")
        return name

    @staticmethod
    def _attr_key(attr: AttributeId | str) -> str:
        return attr.key if isinstance(attr, AttributeId) else canonical_key(str(attr))

    def __repr__(self) -> str:
        return (
            f"FuzzyContext({len(self._objects)} objects, "
            f"{len(self._attributes)} attributes, chi={self.chi})"
        )
