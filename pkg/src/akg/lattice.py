"""Concept lattice construction, traversal and incremental maintenance.

Construction takes the crisp chi-cut of the fuzzy incidence and enumerates
all formal concepts with a Close-by-One style search over attribute
bitmasks, then attaches graded extents (each object's membership is the
minimum of its incidences over the intent, 1.0 for the empty intent) and
supports (extent size over total object count).

The cover relation stored on the lattice is the transitive reduction of the
sub-concept order: an edge runs from each concept to its immediate
sub-concepts (larger intent, smaller extent).  Concept ids are assigned in
breadth-first order from the top at build time and stay stable across
incremental insertions; concepts that first appear during an insertion get
fresh ids.

Lattices are immutable snapshots: ``insert_object`` returns a new lattice
and context, leaving the originals untouched.
"""
from __future__ import annotations

import json
from collections import deque
from pathlib import Path
from typing import Iterable, Mapping

from .context import AttributeId, AttributeKind, FuzzyContext, ObjectId, ObjectKind
from .errors import MembershipRangeError, UnknownConceptError

LATTICE_FORMAT_VERSION = 1


class FuzzyConcept:
    """One lattice node: a crisp intent plus a graded extent.

    ``extent`` maps object names to memberships; ``intent`` is a frozenset
    of :class:`AttributeId`.  ``support`` is the fraction of all context
    objects that fall in the extent.
    """

    __slots__ = ("id", "intent", "intent_names", "extent", "support")

    def __init__(self, cid: int, intent: frozenset[AttributeId], extent: dict[str, float], support: float):
        self.id = cid
        self.intent = intent
        self.intent_names = frozenset(a.name for a in intent)
        self.extent = extent
        self.support = support

    def membership(self, obj: ObjectId | str) -> float:
        name = obj.name if isinstance(obj, ObjectId) else str(obj)
        return self.extent.get(name, 0.0)

    def __repr__(self) -> str:
        intent = ",".join(sorted(a.name for a in self.intent))
        return f"FuzzyConcept(id={self.id}, intent={{{intent}}}, |extent|={len(self.extent)})"


class ConceptLattice:
    """DAG of fuzzy concepts under the sub-concept order."""

    def __init__(
        self,
        concepts: dict[int, FuzzyConcept],
        covers: dict[int, tuple[int, ...]],
        top: int,
        bottom: int,
        chi: float,
        objects: dict[str, ObjectId],
        attributes: dict[str, AttributeId],
        context_hash: str,
        next_id: int,
    ):
        self.concepts = concepts
        self.covers = covers
        self.top = top
        self.bottom = bottom
        self.chi = chi
        self.objects = objects
        self.attributes = attributes
        self.context_hash = context_hash
        self.next_id = next_id
        self._parents: dict[int, tuple[int, ...]] | None = None

    def __len__(self) -> int:
        return len(self.concepts)

    def concept(self, cid: int) -> FuzzyConcept:
        try:
            return self.concepts[cid]
        except KeyError:
            raise UnknownConceptError(f"unknown concept id: {cid}") from None

    def support(self, cid: int) -> float:
        return self.concept(cid).support

    def frequent_concepts(self, minsupp: float) -> set[int]:
        """Ids of concepts whose support reaches ``minsupp``."""
        if not 0.0 <= minsupp <= 1.0:
            raise MembershipRangeError(f"minsupp {minsupp} outside [0, 1]")
        return {cid for cid, c in self.concepts.items() if c.support >= minsupp}

    def is_subconcept(self, c1: int, c2: int) -> bool:
        """True iff ``c1`` <= ``c2``, i.e. intent(c2) is contained in intent(c1)."""
        a = self.concept(c1)
        b = self.concept(c2)
        return b.intent <= a.intent

    def parents(self, cid: int) -> tuple[int, ...]:
        """Immediate super-concepts of ``cid``."""
        if self._parents is None:
            rev: dict[int, list[int]] = {c: [] for c in self.concepts}
            for parent, children in self.covers.items():
                for child in children:
                    rev[child].append(parent)
            self._parents = {c: tuple(sorted(ps)) for c, ps in rev.items()}
        self.concept(cid)
        return self._parents[cid]

    def traverse_top_down(self) -> list[int]:
        """Breadth-first concept order starting at the top.

        Every concept appears after at least one of its super-concepts.
        """
        order: list[int] = []
        seen = {self.top}
        queue = deque([self.top])
        while queue:
            cid = queue.popleft()
            order.append(cid)
            for child in sorted(self.covers.get(cid, ())):
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
        return order

    def concept_by_intent(self, intent: Iterable[AttributeId | str]) -> FuzzyConcept | None:
        """Find the concept with exactly this intent, if present."""
        wanted = frozenset(a if isinstance(a, AttributeId) else AttributeId(str(a)) for a in intent)
        for c in self.concepts.values():
            if c.intent == wanted:
                return c
        return None

    # -- derived annotations -------------------------------------------------

    def own_attributes(self, cid: int) -> frozenset[AttributeId]:
        """Attributes introduced at this concept (not present in any parent)."""
        c = self.concept(cid)
        inherited: set[AttributeId] = set()
        for p in self.parents(cid):
            inherited |= self.concepts[p].intent
        return frozenset(c.intent - inherited)

    def own_objects(self, cid: int) -> frozenset[str]:
        """Objects appearing here but in no child concept."""
        c = self.concept(cid)
        below: set[str] = set()
        for child in self.covers.get(cid, ()):
            below |= self.concepts[child].extent.keys()
        return frozenset(c.extent.keys() - below)

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": LATTICE_FORMAT_VERSION,
            "context-hash": self.context_hash,
            "chi": self.chi,
            "top": self.top,
            "bottom": self.bottom,
            "next-id": self.next_id,
            "objects": [{"name": o.name, "kind": o.kind.value} for o in self.objects.values()],
            "attributes": [{"name": a.name, "kind": a.kind.value} for a in self.attributes.values()],
            "concepts": [
                {
                    "id": c.id,
                    "intent": sorted(a.name for a in c.intent),
                    "extent": dict(sorted(c.extent.items())),
                    "support": c.support,
                }
                for _, c in sorted(self.concepts.items())
            ],
            "covers": sorted([parent, child] for parent, children in self.covers.items() for child in children),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConceptLattice":
        version = data.get("version")
        if version != LATTICE_FORMAT_VERSION:
            raise ValueError(f"unsupported lattice format version: {version!r}")
        attributes = {
            AttributeId(e["name"], AttributeKind(e.get("kind", "other"))).key: AttributeId(
                e["name"], AttributeKind(e.get("kind", "other"))
            )
            for e in data.get("attributes", [])
        }
        objects = {
            e["name"]: ObjectId(e["name"], ObjectKind(e.get("kind", "other")))
            for e in data.get("objects", [])
        }
        concepts: dict[int, FuzzyConcept] = {}
        for entry in data["concepts"]:
            intent = frozenset(attributes.get(AttributeId(n).key, AttributeId(n)) for n in entry["intent"])
            concepts[entry["id"]] = FuzzyConcept(
                entry["id"], intent, dict(entry["extent"]), float(entry["support"])
            )
        covers: dict[int, list[int]] = {cid: [] for cid in concepts}
        for parent, child in data.get("covers", []):
            covers[parent].append(child)
        return cls(
            concepts=concepts,
            covers={cid: tuple(children) for cid, children in covers.items()},
            top=data["top"],
            bottom=data["bottom"],
            chi=float(data.get("chi", 0.6)),
            objects=objects,
            attributes=attributes,
            context_hash=data.get("context-hash", ""),
            next_id=int(data.get("next-id", max(concepts) + 1 if concepts else 0)),
        )

    def to_json(self, path: str | Path | None = None, indent: int = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    @classmethod
    def from_json(cls, text: str) -> "ConceptLattice":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "ConceptLattice":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def to_dot(self) -> str:
        """GraphViz rendering of the cover DAG for visual inspection."""
        lines = [
            "digraph lattice {",
            "  rankdir=TB;",
            '  node [shape=box, fontname="Helvetica"];',
        ]
        for cid in self.traverse_top_down():
            c = self.concepts[cid]
            own_attrs = ",".join(sorted(a.name for a in self.own_attributes(cid)))
            own_objs = ",".join(sorted(self.own_objects(cid)))
            label_parts = [f"c{cid}"]
            if own_attrs:
                label_parts.append(f"+[{own_attrs}]")
            if own_objs:
                label_parts.append(f"({own_objs})")
            label_parts.append(f"supp={c.support:.2f}")
            label = "\\n".join(label_parts)
            lines.append(f'  n{cid} [label="{label}"];')
        for parent, children in sorted(self.covers.items()):
            for child in sorted(children):
                lines.append(f"  n{parent} -> n{child};")
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"ConceptLattice({len(self.concepts)} concepts, chi={self.chi})"


# -- construction ---------------------------------------------------------


def _cut_masks(ctx: FuzzyContext) -> tuple[list[str], list[str], list[int], list[int]]:
    """Object/attribute index orders and chi-cut row/column bitmasks."""
    obj_names = [o.name for o in ctx.objects]
    attr_keys = [a.key for a in ctx.attributes]
    attr_pos = {k: j for j, k in enumerate(attr_keys)}
    chi = ctx.chi
    rows = [0] * len(obj_names)
    cols = [0] * len(attr_keys)
    if chi <= 0.0:
        full = (1 << len(attr_keys)) - 1
        rows = [full] * len(obj_names)
        cols = [(1 << len(obj_names)) - 1] * len(attr_keys)
        return obj_names, attr_keys, rows, cols
    for i, (obj, row) in enumerate(zip(ctx.objects, (dict(r) for r in _raw_rows(ctx)))):
        mask = 0
        for key, value in row.items():
            if value >= chi:
                j = attr_pos[key]
                mask |= 1 << j
                cols[j] |= 1 << i
        rows[i] = mask
    return obj_names, attr_keys, rows, cols


def _raw_rows(ctx: FuzzyContext):
    # accesses the sparse storage directly; keys are canonical attribute keys
    for obj in ctx.objects:
        yield ctx._rows[obj.name]


def _enumerate_concepts(rows: list[int], cols: list[int], n_obj: int, n_attr: int) -> list[tuple[int, int]]:
    """All (extent-mask, intent-mask) fixpoints via Close-by-One.

    Concepts are generated canonically: a branch on attribute ``j`` is kept
    only when the closure adds no attribute below ``j``, so every concept
    appears exactly once.
    """
    all_obj = (1 << n_obj) - 1
    all_attr = (1 << n_attr) - 1

    def intent_of(emask: int) -> int:
        if emask == 0:
            return all_attr
        imask = all_attr
        e = emask
        while e:
            g = (e & -e).bit_length() - 1
            imask &= rows[g]
            e &= e - 1
        return imask

    out: list[tuple[int, int]] = []
    top_intent = intent_of(all_obj)

    # explicit stack; each frame is (extent, intent, next attribute index)
    stack = [(all_obj, top_intent, 0)]
    while stack:
        emask, imask, j0 = stack.pop()
        out.append((emask, imask))
        # queue children in reverse so lower attribute indexes pop first
        pending = []
        for j in range(j0, n_attr):
            if imask >> j & 1:
                continue
            e2 = emask & cols[j]
            i2 = intent_of(e2)
            if (i2 & ~imask) & ((1 << j) - 1):
                continue  # closure reached below j: generated elsewhere
            pending.append((e2, i2, j + 1))
        stack.extend(reversed(pending))
    return out


def _compute_covers(
    pairs: list[tuple[int, int]], cols: list[int], n_attr: int
) -> dict[int, list[int]]:
    """Immediate sub-concept adjacency (indexes into ``pairs``).

    For each concept, closing the intent with one extra attribute lands on a
    sub-concept; every immediate sub-concept is reachable this way, so the
    covers are the minimal intents among those candidates.
    """
    extent_to_idx = {emask: i for i, (emask, _) in enumerate(pairs)}
    covers: dict[int, list[int]] = {}
    for idx, (emask, imask) in enumerate(pairs):
        cands: dict[int, int] = {}
        for j in range(n_attr):
            if imask >> j & 1:
                continue
            child_idx = extent_to_idx[emask & cols[j]]
            cands[child_idx] = pairs[child_idx][1]
        if not cands:
            covers[idx] = []
            continue
        ordered = sorted(cands.items(), key=lambda kv: (_popcount(kv[1]), kv[1]))
        minimal: list[tuple[int, int]] = []
        for child_idx, child_intent in ordered:
            if any(mi & child_intent == mi for _, mi in minimal):
                continue
            minimal.append((child_idx, child_intent))
        covers[idx] = [ci for ci, _ in minimal]
    return covers


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _assemble(
    ctx: FuzzyContext,
    pairs: list[tuple[int, int]],
    covers_idx: dict[int, list[int]],
    obj_names: list[str],
    attr_keys: list[str],
    id_for_intent: dict[int, int] | None = None,
    next_id: int = 0,
) -> ConceptLattice:
    """Materialize FuzzyConcepts from masks and assign stable ids.

    Without ``id_for_intent`` ids follow the breadth-first order from the
    top.  With it, previously known intents keep their ids and new intents
    take fresh ones in a deterministic (intent size, mask) order.
    """
    n_obj = len(obj_names)
    all_obj = (1 << n_obj) - 1
    attr_ids = {a.key: a for a in ctx.attributes}
    membership = {name: dict(row) for name, row in ((o.name, ctx._rows[o.name]) for o in ctx.objects)}

    top_idx = next(i for i, (e, _) in enumerate(pairs) if e == all_obj)
    all_attr = (1 << len(attr_keys)) - 1
    bottom_idx = next(i for i, (_, im) in enumerate(pairs) if im == all_attr)

    if id_for_intent is None:
        # breadth-first numbering from the top; children visited in
        # (intent size, intent mask) order for determinism
        order: list[int] = []
        seen = {top_idx}
        queue = deque([top_idx])
        while queue:
            idx = queue.popleft()
            order.append(idx)
            children = sorted(covers_idx[idx], key=lambda i: (_popcount(pairs[i][1]), pairs[i][1]))
            for child in children:
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
        ids = {idx: n for n, idx in enumerate(order)}
        next_id = len(order)
    else:
        ids = {}
        fresh = []
        for idx, (_, imask) in enumerate(pairs):
            known = id_for_intent.get(imask)
            if known is None:
                fresh.append(idx)
            else:
                ids[idx] = known
        for idx in sorted(fresh, key=lambda i: (_popcount(pairs[i][1]), pairs[i][1])):
            ids[idx] = next_id
            next_id += 1

    concepts: dict[int, FuzzyConcept] = {}
    for idx, (emask, imask) in enumerate(pairs):
        intent = frozenset(attr_ids[attr_keys[j]] for j in _bits(imask))
        ikeys = [attr_keys[j] for j in _bits(imask)]
        extent: dict[str, float] = {}
        for g in _bits(emask):
            name = obj_names[g]
            if ikeys:
                row = membership[name]
                # absent pairs mean membership 0 (reachable when chi == 0)
                extent[name] = min(row.get(k, 0.0) for k in ikeys)
            else:
                extent[name] = 1.0
        support = len(extent) / n_obj if n_obj else 1.0
        concepts[ids[idx]] = FuzzyConcept(ids[idx], intent, extent, support)

    covers = {ids[idx]: tuple(sorted(ids[c] for c in children)) for idx, children in covers_idx.items()}
    return ConceptLattice(
        concepts=concepts,
        covers=covers,
        top=ids[top_idx],
        bottom=ids[bottom_idx],
        chi=ctx.chi,
        objects={o.name: o for o in ctx.objects},
        attributes=dict(attr_ids),
        context_hash=ctx.content_hash(),
        next_id=next_id,
    )


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def build_lattice(ctx: FuzzyContext) -> ConceptLattice:
    """Build the full concept lattice of a fuzzy context at its chi."""
    obj_names, attr_keys, rows, cols = _cut_masks(ctx)
    pairs = _enumerate_concepts(rows, cols, len(obj_names), len(attr_keys))
    covers_idx = _compute_covers(pairs, cols, len(attr_keys))
    return _assemble(ctx, pairs, covers_idx, obj_names, attr_keys)


def insert_object(
    lattice: ConceptLattice,
    ctx: FuzzyContext,
    obj: ObjectId | str,
    memberships: Mapping[AttributeId | str, float] | None = None,
) -> tuple[ConceptLattice, FuzzyContext]:
    """Insert one object and return the updated (lattice, context) pair.

    When the object only references known attributes the lattice is updated
    in place-style: the new intents are exactly the old ones intersected
    with the new row, so old concepts keep their ids and only new intents
    get fresh ones.  If the attribute set grows the lattice is rebuilt from
    the extended context with the same id-stability rule.  Either way the
    result is concept-for-concept identical to a batch rebuild.
    """
    memberships = dict(memberships or {})
    new_ctx = ctx.add_object(obj, memberships)

    known = {a.key for a in ctx.attributes}
    grew = any(
        (a.key if isinstance(a, AttributeId) else AttributeId(str(a)).key) not in known
        for a in memberships
    )

    obj_names, attr_keys, rows, cols = _cut_masks(new_ctx)
    if grew:
        pairs = _enumerate_concepts(rows, cols, len(obj_names), len(attr_keys))
    else:
        pairs = _intersect_intents(lattice, new_ctx, obj_names, attr_keys, rows, cols)
    covers_idx = _compute_covers(pairs, cols, len(attr_keys))

    id_for_intent = _intent_ids(lattice, attr_keys)
    new_lattice = _assemble(
        new_ctx, pairs, covers_idx, obj_names, attr_keys,
        id_for_intent=id_for_intent, next_id=lattice.next_id,
    )
    return new_lattice, new_ctx


def _intent_ids(lattice: ConceptLattice, attr_keys: list[str]) -> dict[int, int]:
    """Map old intents (as masks over the new attribute order) to their ids."""
    pos = {k: j for j, k in enumerate(attr_keys)}
    out: dict[int, int] = {}
    for cid, c in lattice.concepts.items():
        mask = 0
        usable = True
        for a in c.intent:
            j = pos.get(a.key)
            if j is None:
                usable = False
                break
            mask |= 1 << j
        if usable:
            out[mask] = cid
    return out


def _intersect_intents(
    lattice: ConceptLattice,
    new_ctx: FuzzyContext,
    obj_names: list[str],
    attr_keys: list[str],
    rows: list[int],
    cols: list[int],
) -> list[tuple[int, int]]:
    """Concept masks after adding one object to an unchanged attribute set.

    The closed intents of the extended context are the old intents plus
    their intersections with the new object's row; extents come from the
    old columns, plus the new object wherever its row covers the intent.
    """
    g = len(obj_names) - 1  # the new object is last
    g_bit = 1 << g
    b_mask = rows[g]
    all_old = (1 << g) - 1

    old_intents = {imask for imask in _intent_ids(lattice, attr_keys)}
    intents = set(old_intents)
    intents.update(imask & b_mask for imask in old_intents)

    pairs: list[tuple[int, int]] = []
    for imask in sorted(intents):
        emask = all_old
        for j in _bits(imask):
            emask &= cols[j]
        if imask & ~b_mask == 0:
            emask |= g_bit
        pairs.append((emask, imask))
    return pairs
