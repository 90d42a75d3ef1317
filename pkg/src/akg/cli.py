"""Command line interface: build, query, facets, feedback-apply, export-dot,
report and serve."""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .config import ServiceConfig, load_config
from .context import FuzzyContext
from .errors import AkgError
from .facets import compute_facets
from .feedback import apply_accepted
from .ingest import TaxonomyDictionary, build_context, get_preset, load_dataset
from .lattice import ConceptLattice, build_lattice
from .matching import FeatureSet, get_relatedness, recommend
from .report import write_report
from .store import SnapshotStore


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _load_store(data_dir: str) -> tuple[SnapshotStore, FuzzyContext, ConceptLattice]:
    store = SnapshotStore(data_dir)
    try:
        ctx, lattice = store.load()
    except AkgError as exc:
        raise _fail(str(exc)) from exc
    return store, ctx, lattice


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool):
    """Actionable knowledge graph: build it, query it, learn from feedback."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--input", "dataset", type=click.Path(exists=True, dir_okay=False), help="Ticket dataset (CSV or JSON).")
@click.option("--context", "context_file", type=click.Path(exists=True, dir_okay=False), help="Prebuilt context JSON instead of a dataset.")
@click.option("--taxonomy", type=click.Path(exists=True, dir_okay=False), help="Taxonomy dictionary JSON.")
@click.option("--preset", default="predictive", show_default=True, help="Maintenance strategy preset.")
@click.option("--chi", default=0.6, show_default=True, type=float, help="Confidence threshold.")
@click.option("--data-dir", default="./akg-data", show_default=True, help="Snapshot directory.")
def build(dataset, context_file, taxonomy, preset, chi, data_dir):
    """Build the lattice and write a snapshot."""
    if not dataset and not context_file:
        raise click.UsageError("provide either --input or --context")
    try:
        if context_file:
            ctx = FuzzyContext.load(context_file).with_chi(chi)
        else:
            tax = TaxonomyDictionary.load(taxonomy) if taxonomy else TaxonomyDictionary()
            tickets = load_dataset(dataset)
            ctx = build_context(tickets, tax, get_preset(preset), chi=chi)
        lattice = build_lattice(ctx)
        store = SnapshotStore(data_dir)
        pointer = store.save(ctx, lattice)
        if taxonomy:
            store.store_taxonomy(taxonomy)
    except AkgError as exc:
        raise _fail(str(exc)) from exc
    click.echo(
        f"snapshot {pointer['seq']} written to {data_dir}: "
        f"{len(ctx)} objects, {len(ctx.attributes)} attributes, {len(lattice)} concepts"
    )


@main.command()
@click.option("--features", help="Comma-separated query features.")
@click.option("--data-dir", default="./akg-data", show_default=True)
@click.option("--k", default=10, show_default=True, type=int)
@click.option("--relatedness", "rel_name", default="token-overlap", show_default=True)
@click.option("--rel-threshold", default=0.7, show_default=True, type=float)
@click.option("--json", "as_json", is_flag=True, help="Print hints as JSON instead of a table.")
def query(features, data_dir, k, rel_name, rel_threshold, as_json):
    """Rank past tickets against a set of features."""
    names = [f.strip() for f in (features or "").split(",") if f.strip()]
    if not names:
        raise click.UsageError("at least one feature is required (--features a,b,c)")
    _, _, lattice = _load_store(data_dir)
    try:
        fn = get_relatedness(rel_name, rel_threshold)
        fset = FeatureSet(frozenset(names))
        hints = recommend(lattice, fset, fn, k=k)
    except AkgError as exc:
        raise _fail(str(exc)) from exc
    if as_json:
        payload = [
            {
                "object": h.object.name,
                "concept": h.concept,
                "concept_intent": sorted(a.name for a in lattice.concepts[h.concept].intent),
                "f_measure": h.f_measure,
                "membership": h.membership,
                "score": h.score,
            }
            for h in hints
        ]
        click.echo(json.dumps(payload, indent=2))
        return
    if not hints:
        click.echo("no hints (no concept matched the query)")
        return
    click.echo(f"{'object':<20} {'concept':>7} {'F':>7} {'mu':>6} {'score':>7}  intent")
    for h in hints:
        intent = ",".join(sorted(a.name for a in lattice.concepts[h.concept].intent))
        click.echo(
            f"{h.object.name:<20} c{h.concept:<6} {h.f_measure:>7.3f} {h.membership:>6.2f} {h.score:>7.3f}  {{{intent}}}"
        )


@main.command()
@click.option("--filter", "filters", multiple=True, help="Attribute filter; repeatable.")
@click.option("--data-dir", default="./akg-data", show_default=True)
def facets(filters, data_dir):
    """Show the filtered object set and per-attribute counts."""
    _, ctx, _ = _load_store(data_dir)
    try:
        state = compute_facets(ctx, filters)
    except AkgError as exc:
        raise _fail(str(exc)) from exc
    click.echo(json.dumps(state.to_dict(), indent=2))


@main.command("feedback-apply")
@click.option("--data-dir", default="./akg-data", show_default=True)
def feedback_apply(data_dir):
    """Fold accepted ledger events into the model and snapshot the result."""
    store, ctx, lattice = _load_store(data_dir)
    ledger = store.load_ledger()
    before = len(ctx)
    try:
        ctx, lattice = apply_accepted(ledger, ctx, lattice)
    except AkgError as exc:
        raise _fail(str(exc)) from exc
    added = len(ctx) - before
    if added:
        store.save(ctx, lattice)
        click.echo(f"applied {added} accepted resolution(s); lattice now has {len(lattice)} concepts")
    else:
        click.echo("nothing to apply")


@main.command("export-dot")
@click.option("--data-dir", default="./akg-data", show_default=True)
@click.option("--out", default="lattice.dot", show_default=True, type=click.Path(dir_okay=False))
def export_dot(data_dir, out):
    """Write the lattice DAG in GraphViz DOT form."""
    _, _, lattice = _load_store(data_dir)
    Path(out).write_text(lattice.to_dot() + "\n", encoding="utf-8")
    click.echo(f"wrote {out}")


@main.command()
@click.option("--data-dir", default="./akg-data", show_default=True)
@click.option("--out-dir", default="./akg-report", show_default=True)
@click.option("--features", help="Optional comma-separated query to include score/hint artifacts.")
@click.option("--k", default=10, show_default=True, type=int)
def report(data_dir, out_dir, features, k):
    """Render lattice figures and CSV summaries into a directory."""
    _, _, lattice = _load_store(data_dir)
    fset = None
    if features:
        names = [f.strip() for f in features.split(",") if f.strip()]
        if names:
            fset = FeatureSet(frozenset(names))
    try:
        written = write_report(lattice, out_dir, features=fset, k=k)
    except AkgError as exc:
        raise _fail(str(exc)) from exc
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="JSON config file.")
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--data-dir", default=None)
@click.option("--dataset", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--taxonomy", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--chi", default=None, type=float)
def serve(config_path, host, port, data_dir, dataset, taxonomy, chi):
    """Start the HTTP service."""
    from .service import serve as run_service

    try:
        cfg = load_config(config_path)
        overrides = {"host": host, "port": port, "data_dir": data_dir,
                     "dataset": dataset, "taxonomy": taxonomy, "chi": chi}
        for name, value in overrides.items():
            if value is not None:
                setattr(cfg, name, value)
        cfg.validate()
        run_service(cfg)
    except AkgError as exc:
        raise _fail(str(exc)) from exc


if __name__ == "__main__":
    sys.exit(main())
