"""Faceted narrowing of the object set with live per-attribute counts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .context import AttributeId, FuzzyContext


@dataclass(frozen=True)
class FacetState:
    """Selected filters, the objects satisfying all of them at chi, and the
    count each attribute would retain within that result set."""

    filters: tuple[str, ...]
    objects: tuple[str, ...]
    counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "filters": list(self.filters),
            "objects": list(self.objects),
            "counts": dict(sorted(self.counts.items())),
        }


def compute_facets(
    ctx: FuzzyContext,
    filters: Iterable[AttributeId | str] = (),
    chi: float | None = None,
) -> FacetState:
    """Apply conjunctive attribute filters and count the remaining facets.

    Unknown filter attributes raise ``UnknownAttributeError``.  Adding a
    filter can only shrink (never grow) the result set.
    """
    chosen = [ctx.get_attribute(f) for f in filters]
    result = ctx.derive_extent(chosen, chi)
    names = sorted(o.name for o in result)
    effective_chi = ctx.chi if chi is None else chi
    counts: dict[str, int] = {}
    for attr in ctx.attributes:
        if effective_chi <= 0:
            counts[attr.name] = len(names)
        else:
            counts[attr.name] = sum(1 for name in names if ctx.membership(name, attr) >= effective_chi)
    return FacetState(
        filters=tuple(a.name for a in chosen),
        objects=tuple(names),
        counts=counts,
    )
