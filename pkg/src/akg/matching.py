"""Concept scoring by bipartite feature matching, and hint ranking.

A query is a set of feature strings.  Against each concept intent the
overlap is the maximum-cardinality matching of the bipartite graph whose
edges join features and attributes with relatedness >= the function's
threshold (0.7 by default).  Precision is overlap over intent size, recall
is overlap over query size, and concepts are ranked by the F-measure
2PR/(P+R).  Recommended objects inherit their concept's F-measure weighted
by their membership.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, NamedTuple

from .context import AttributeId, ObjectId
from .errors import AkgError, EmptyFeatureSetError
from .lattice import ConceptLattice, FuzzyConcept
from .names import canonical_key, canonical_name, split_tokens


class FeatureSource(str, Enum):
    TICKET = "ticket"
    SCHEDULE = "schedule"
    DETECTED_PROBLEM = "detected-problem"
    SENSOR_OBSERVATION = "sensor-observation"


@dataclass(frozen=True)
class FeatureSet:
    """Canonicalized query features plus their trigger source."""

    features: frozenset[str]
    source: FeatureSource = FeatureSource.TICKET

    def __post_init__(self):
        object.__setattr__(self, "features", frozenset(canonical_name(f) for f in self.features if f.strip()))
        object.__setattr__(self, "source", FeatureSource(self.source))

    @classmethod
    def of(cls, *features: str, source: FeatureSource = FeatureSource.TICKET) -> "FeatureSet":
        return cls(frozenset(features), source)

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(sorted(self.features))


def _exact(x: str, y: str) -> float:
    return 1.0 if canonical_key(x) == canonical_key(y) else 0.0


def _token_overlap(x: str, y: str) -> float:
    if canonical_key(x) == canonical_key(y):
        return 1.0
    tx, ty = split_tokens(x), split_tokens(y)
    if not tx or not ty:
        return 0.0
    return len(tx & ty) / len(tx | ty)


@dataclass(frozen=True)
class RelatednessFunction:
    """Symmetric [0, 1] similarity with the edge threshold attached.

    ``measure`` must return 1.0 for canonically equal strings; pairs at or
    above ``threshold`` become matching edges.
    """

    name: str
    measure: Callable[[str, str], float]
    threshold: float = 0.7

    def __call__(self, x: str, y: str) -> float:
        if not x or not y:
            raise ValueError("relatedness arguments must be non-empty")
        return self.measure(x, y)


_REGISTRY: dict[str, Callable[[str, str], float]] = {
    "exact": _exact,
    "token-overlap": _token_overlap,
}


def register_relatedness(name: str, measure: Callable[[str, str], float]) -> None:
    """Register a custom relatedness measure under ``name``."""
    _REGISTRY[name] = measure


def get_relatedness(name: str = "token-overlap", threshold: float = 0.7) -> RelatednessFunction:
    try:
        measure = _REGISTRY[name]
    except KeyError:
        raise AkgError(f"unknown relatedness function: {name!r}") from None
    if not 0.0 <= threshold <= 1.0:
        raise AkgError(f"relatedness threshold {threshold} outside [0, 1]")
    return RelatednessFunction(name=name, measure=measure, threshold=threshold)


DEFAULT_RELATEDNESS = get_relatedness()


def relatedness(x: str, y: str, fn: RelatednessFunction = DEFAULT_RELATEDNESS) -> float:
    """Relatedness of a feature and an attribute name under ``fn``."""
    return fn(x, y)


# -- maximum-cardinality matching -------------------------------------------


def _hopcroft_karp(adj: list[list[int]], n_right: int) -> tuple[int, list[int]]:
    """Maximum matching on a bipartite graph given as left adjacency lists.

    Returns the matching size and, for each left vertex, its matched right
    vertex (or -1).
    """
    INF = float("inf")
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0.0] * n_left

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0.0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] == -1 and dfs(u):
                size += 1
    return size, match_l


def intersection_size(
    features: FeatureSet | Iterable[str],
    intent: Iterable[AttributeId | str],
    fn: RelatednessFunction = DEFAULT_RELATEDNESS,
    _rel_cache: dict | None = None,
) -> tuple[int, tuple[tuple[str, str], ...]]:
    """Overlap of a feature set and an intent as a maximum bipartite matching.

    Edges join pairs with relatedness >= ``fn.threshold``.  Returns the
    matching cardinality and a witness as (feature, attribute) pairs; no
    endpoint repeats.  Inputs are sorted first so the result only depends on
    set contents, never on iteration order.
    """
    feats = sorted(features.features if isinstance(features, FeatureSet) else {canonical_name(f) for f in features})
    attrs = sorted({a.name if isinstance(a, AttributeId) else canonical_name(str(a)) for a in intent})
    if not feats or not attrs:
        return 0, ()

    threshold = fn.threshold
    adj: list[list[int]] = []
    contested = False
    owner: dict[int, int] = {}
    for i, f in enumerate(feats):
        row = []
        for j, a in enumerate(attrs):
            if _rel_cache is not None:
                key = (f, a)
                value = _rel_cache.get(key)
                if value is None:
                    value = fn(f, a)
                    _rel_cache[key] = value
            else:
                value = fn(f, a)
            if value >= threshold:
                row.append(j)
                if j in owner:
                    contested = True
                owner[j] = i
        adj.append(row)

    if not contested:
        # every attribute relates to at most one feature, so each feature
        # with any edge can be matched independently (always the case under
        # exact-match relatedness)
        pairs = tuple((feats[i], attrs[row[0]]) for i, row in enumerate(adj) if row)
        return len(pairs), pairs

    size, match_l = _hopcroft_karp(adj, len(attrs))
    pairs = tuple((feats[i], attrs[j]) for i, j in enumerate(match_l) if j != -1)
    return size, pairs


# -- scoring and ranking -----------------------------------------------------


class ConceptScore(NamedTuple):
    concept: int
    precision: float
    recall: float
    f_measure: float
    matching: tuple[tuple[str, str], ...] = ()
    support: float = 0.0


class RankedHint(NamedTuple):
    object: ObjectId
    concept: int
    f_measure: float
    membership: float
    score: float


def score_concept(
    features: FeatureSet,
    concept: FuzzyConcept,
    fn: RelatednessFunction = DEFAULT_RELATEDNESS,
    _rel_cache: dict | None = None,
) -> ConceptScore:
    """Precision, recall and F-measure of one concept against a query.

    An empty intent scores zero by definition; F is zero whenever P+R is.
    """
    if not features.features:
        raise EmptyFeatureSetError("query feature set is empty")
    n_attrs = len(concept.intent)
    if n_attrs == 0:
        return ConceptScore(concept.id, 0.0, 0.0, 0.0, (), concept.support)
    count, pairs = intersection_size(features, concept.intent, fn, _rel_cache=_rel_cache)
    precision = count / n_attrs
    recall = count / len(features.features)
    f = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ConceptScore(concept.id, precision, recall, f, pairs, concept.support)


def rank_concepts(
    lattice: ConceptLattice,
    features: FeatureSet,
    fn: RelatednessFunction = DEFAULT_RELATEDNESS,
    limit: int | None = None,
    prune: bool = False,
) -> list[ConceptScore]:
    """Score concepts in top-down visit order and sort by F-measure.

    Ties break on support (descending) then concept id.  With ``prune`` a
    sub-DAG is skipped once no descendant can beat the current ``limit``-th
    best F-measure (descendants only grow the intent, so their F is capped
    by 2|F| / (|intent|+1+|F|)); in that mode only the returned prefix is
    meaningful, so ``limit`` is required.
    """
    if not features.features:
        raise EmptyFeatureSetError("query feature set is empty")
    if limit is not None and limit < 1:
        raise AkgError("limit must be >= 1")
    if prune and limit is None:
        raise AkgError("pruned ranking needs a limit")

    rel_cache: dict = {}
    n_feats = len(features.features)
    scorer = _make_scorer(lattice, features, fn, rel_cache)
    scores: list[ConceptScore] = []

    if not prune:
        for cid in lattice.traverse_top_down():
            scores.append(scorer(lattice.concepts[cid]))
    else:
        best: list[float] = []
        seen = {lattice.top}
        queue = deque([lattice.top])
        while queue:
            cid = queue.popleft()
            concept = lattice.concepts[cid]
            scores.append(scorer(concept))
            best = sorted((s.f_measure for s in scores), reverse=True)[:limit]
            kth = best[-1] if len(best) == limit else 0.0
            bound = 2.0 * n_feats / (len(concept.intent) + 1 + n_feats)
            if bound < kth:
                continue
            for child in sorted(lattice.covers.get(cid, ())):
                if child not in seen:
                    seen.add(child)
                    queue.append(child)

    scores.sort(key=lambda s: (-s.f_measure, -s.support, s.concept))
    return scores[:limit] if limit is not None else scores


def _make_scorer(lattice: ConceptLattice, features: FeatureSet, fn: RelatednessFunction, rel_cache: dict):
    """Scorer specialized to one lattice and query.

    Feature-attribute relatedness is evaluated once against the lattice's
    whole attribute universe.  Concepts whose intents touch no contested
    attribute (one related to several features) are scored with set
    arithmetic; the rest fall back to the full matching.
    """
    feats = sorted(features.features)
    n_feats = len(feats)
    universe = sorted({a.name for a in lattice.attributes.values()})
    match_sets: dict[str, frozenset[str]] = {}
    touched: set[str] = set()
    contested: set[str] = set()
    for f in feats:
        related = frozenset(a for a in universe if fn(f, a) >= fn.threshold)
        match_sets[f] = related
        contested |= related & touched
        touched |= related

    def score(concept: FuzzyConcept) -> ConceptScore:
        names = concept.intent_names
        n_attrs = len(names)
        if n_attrs == 0:
            return ConceptScore(concept.id, 0.0, 0.0, 0.0, (), concept.support)
        reachable = names & touched
        if not reachable:
            return ConceptScore(concept.id, 0.0, 0.0, 0.0, (), concept.support)
        if reachable.isdisjoint(contested):
            # attrs are private to their features: every feature with an
            # edge is matchable independently
            pairs = []
            for f in feats:
                hit = match_sets[f] & names
                if hit:
                    pairs.append((f, min(hit)))
            count = len(pairs)
            precision = count / n_attrs
            recall = count / n_feats
            f_measure = 2.0 * precision * recall / (precision + recall) if count else 0.0
            return ConceptScore(concept.id, precision, recall, f_measure, tuple(pairs), concept.support)
        return score_concept(features, concept, fn, _rel_cache=rel_cache)

    return score


def recommend(
    lattice: ConceptLattice,
    features: FeatureSet,
    fn: RelatednessFunction = DEFAULT_RELATEDNESS,
    k: int = 10,
) -> list[RankedHint]:
    """Top-k objects across all concepts, scored F-measure x membership.

    Objects reachable through several concepts keep their single best
    score.  Zero-F concepts contribute nothing, so an all-miss query yields
    an empty list.
    """
    if k < 1:
        raise AkgError("k must be >= 1")
    best: dict[str, RankedHint] = {}
    for cs in rank_concepts(lattice, features, fn):
        if cs.f_measure <= 0.0:
            break  # sorted descending: nothing scoreable remains
        concept = lattice.concepts[cs.concept]
        for name, mu in concept.extent.items():
            score = cs.f_measure * mu
            prev = best.get(name)
            if prev is None or score > prev.score:
                best[name] = RankedHint(
                    object=lattice.objects[name],
                    concept=cs.concept,
                    f_measure=cs.f_measure,
                    membership=mu,
                    score=score,
                )
    hints = sorted(best.values(), key=lambda h: (-h.score, -h.f_measure, h.object.name))
    return hints[:k]
