"""Report rendering: lattice figures and CSV summaries written to a directory.

Produces a layered drawing of the concept DAG, a support histogram and a
``concepts.csv``; given a query it additionally renders the top concept
F-measures and writes the ranked hints as CSV.
"""
from __future__ import annotations

import csv
from collections import deque
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .lattice import ConceptLattice
from .matching import FeatureSet, RelatednessFunction, DEFAULT_RELATEDNESS, rank_concepts, recommend


def _depths(lattice: ConceptLattice) -> dict[int, int]:
    """Longest-path depth from the top, used as the drawing layer."""
    depth = {lattice.top: 0}
    order = lattice.traverse_top_down()
    # relax in topological passes; covers form a DAG so |V| passes suffice
    for _ in range(len(order)):
        changed = False
        for cid in order:
            d = depth.get(cid, 0)
            for child in lattice.covers.get(cid, ()):
                if depth.get(child, -1) < d + 1:
                    depth[child] = d + 1
                    changed = True
        if not changed:
            break
    return depth


def _intent_label(lattice: ConceptLattice, cid: int, limit: int = 3) -> str:
    names = sorted(a.name for a in lattice.concepts[cid].intent)
    if len(names) > limit:
        names = names[:limit] + [f"+{len(names) - limit}"]
    return f"c{cid}\n{{{','.join(names)}}}" if names else f"c{cid}\n{{}}"


def render_lattice_figure(lattice: ConceptLattice, path: Path) -> None:
    depth = _depths(lattice)
    layers: dict[int, list[int]] = {}
    for cid, d in depth.items():
        layers.setdefault(d, []).append(cid)
    pos: dict[int, tuple[float, float]] = {}
    for d, members in layers.items():
        members.sort()
        for i, cid in enumerate(members):
            pos[cid] = (i - (len(members) - 1) / 2.0, -d)

    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * max(len(m) for m in layers.values())),
                                    max(4.0, 1.5 * (max(layers) + 1))))
    for parent, children in lattice.covers.items():
        x0, y0 = pos[parent]
        for child in children:
            x1, y1 = pos[child]
            ax.plot([x0, x1], [y0, y1], color="0.7", linewidth=1.0, zorder=1)
    small = len(lattice) <= 40
    for cid, (x, y) in pos.items():
        c = lattice.concepts[cid]
        ax.scatter([x], [y], s=320, c="#4c72b0", alpha=0.45 + 0.5 * c.support, zorder=2)
        label = _intent_label(lattice, cid) if small else f"c{cid}"
        ax.annotate(label, (x, y), ha="center", va="center", fontsize=7, zorder=3)
    ax.set_axis_off()
    ax.set_title(f"Concept lattice ({len(lattice)} concepts, chi={lattice.chi})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_support_figure(lattice: ConceptLattice, path: Path) -> None:
    supports = [c.support for c in lattice.concepts.values()]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(supports, bins=min(20, max(5, len(supports) // 2)), color="#4c72b0", edgecolor="white")
    ax.set_xlabel("support")
    ax.set_ylabel("concepts")
    ax.set_title("Concept support distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_score_figure(lattice: ConceptLattice, features: FeatureSet,
                        fn: RelatednessFunction, path: Path, top_n: int = 12) -> None:
    scores = rank_concepts(lattice, features, fn)[:top_n]
    labels = [f"c{s.concept}" for s in scores]
    values = [s.f_measure for s in scores]
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(scores)), 4))
    ax.bar(labels, values, color="#55a868")
    ax.set_ylim(0, 1)
    ax.set_ylabel("F-measure")
    ax.set_title(f"Concept match scores for {{{', '.join(sorted(features.features))}}}")
    ax.tick_params(axis="x", rotation=45)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(
    lattice: ConceptLattice,
    out_dir: str | Path,
    features: FeatureSet | None = None,
    fn: RelatednessFunction = DEFAULT_RELATEDNESS,
    k: int = 10,
) -> list[Path]:
    """Write all report artifacts into ``out_dir`` and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    concepts_csv = out_dir / "concepts.csv"
    depth = _depths(lattice)
    with concepts_csv.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "depth", "intent", "extent_size", "support"])
        for cid in lattice.traverse_top_down():
            c = lattice.concepts[cid]
            writer.writerow([
                cid,
                depth[cid],
                ";".join(sorted(a.name for a in c.intent)),
                len(c.extent),
                f"{c.support:.6f}",
            ])
    written.append(concepts_csv)

    lattice_png = out_dir / "lattice.png"
    render_lattice_figure(lattice, lattice_png)
    written.append(lattice_png)

    supports_png = out_dir / "supports.png"
    render_support_figure(lattice, supports_png)
    written.append(supports_png)

    if features is not None and features.features:
        scores_png = out_dir / "scores.png"
        render_score_figure(lattice, features, fn, scores_png)
        written.append(scores_png)

        hints_csv = out_dir / "hints.csv"
        with hints_csv.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["object", "concept", "f_measure", "membership", "score"])
            for hint in recommend(lattice, features, fn, k=k):
                writer.writerow([
                    hint.object.name,
                    hint.concept,
                    f"{hint.f_measure:.6f}",
                    f"{hint.membership:.6f}",
                    f"{hint.score:.6f}",
                ])
        written.append(hints_csv)

    return written
