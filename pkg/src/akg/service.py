"""HTTP service exposing query, facet and feedback operations.

Reads run concurrently against an immutable (context, lattice) snapshot
reference; feedback application happens under a single writer lock that
saves a new snapshot generation and swaps the reference atomically.
"""
from __future__ import annotations

import logging
import threading
import uuid
from datetime import datetime, timezone
from typing import Any

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .config import ServiceConfig
from .context import AttributeKind, FuzzyContext
from .errors import AkgError, EmptyFeatureSetError, LedgerError, UnknownAttributeError
from .facets import compute_facets
from .feedback import FeedbackEvent, FeedbackLedger, apply_accepted
from .ingest import TaxonomyDictionary, Ticket, build_context, get_preset, load_dataset, ticket_to_context_row
from .lattice import ConceptLattice, build_lattice
from .matching import FeatureSet, RankedHint, get_relatedness, recommend
from .store import SnapshotStore

# kinds that describe the malfunction itself; ticket-driven queries match on
# these by default, mirroring how the worked symptom queries are scored
FAILURE_KINDS = frozenset(
    {AttributeKind.SYMPTOM, AttributeKind.CAUSE, AttributeKind.SENSOR_OBSERVATION}
)

log = logging.getLogger(__name__)


class QueryRequest(BaseModel):
    features: list[str] = Field(default_factory=list)
    k: int | None = None


class TicketRequest(BaseModel):
    customer: str
    problem_description: str
    configuration: str
    timestamp: str
    extras: dict[str, str] = Field(default_factory=dict)
    k: int | None = None


class FeedbackRequest(BaseModel):
    query_id: str
    hint_object: str
    verdict: str
    ticket_id: str | None = None
    apply: bool | None = None


class ServiceState:
    """Mutable service state: current snapshot, query log and counters."""

    def __init__(self, config: ServiceConfig, ctx: FuzzyContext, lattice: ConceptLattice,
                 store: SnapshotStore, taxonomy: TaxonomyDictionary):
        self.config = config
        self.store = store
        self.taxonomy = taxonomy
        self.relatedness = get_relatedness(config.relatedness, config.relatedness_threshold)
        self._snapshot = (ctx, lattice)
        self._write_lock = threading.Lock()
        self.ledger = store.load_ledger()
        self.queries: dict[str, dict[str, Any]] = {}
        self.counters = {
            "queries_served": 0,
            "hints_accepted": 0,
            "hints_rejected": 0,
            "tickets_resolved": 0,
        }
        self._accept_latency_total = 0.0

    @property
    def snapshot(self) -> tuple[FuzzyContext, ConceptLattice]:
        return self._snapshot

    def run_query(self, features: FeatureSet, k: int) -> dict:
        ctx, lattice = self._snapshot
        hints = recommend(lattice, features, self.relatedness, k=k)
        query_id = uuid.uuid4().hex
        self.queries[query_id] = {
            "features": sorted(features.features),
            "hints": {h.object.name for h in hints},
            "at": datetime.now(timezone.utc),
        }
        self.counters["queries_served"] += 1
        return {
            "query_id": query_id,
            "features": sorted(features.features),
            "hints": [_hint_json(h, lattice) for h in hints],
        }

    def record_feedback(self, req: FeedbackRequest) -> dict:
        query = self.queries.get(req.query_id)
        if query is None:
            raise HTTPException(status_code=404, detail=f"unknown query id {req.query_id!r}")
        if req.hint_object not in query["hints"]:
            raise HTTPException(status_code=404, detail=f"hint {req.hint_object!r} was not delivered for this query")
        if req.verdict not in ("accepted", "rejected"):
            raise HTTPException(status_code=400, detail="verdict must be 'accepted' or 'rejected'")
        ticket_id = req.ticket_id or f"resolved_{req.query_id[:12]}"
        now = datetime.now(timezone.utc)
        event = FeedbackEvent(
            query_id=req.query_id,
            ticket_id=ticket_id,
            hint_object=req.hint_object,
            verdict=req.verdict,
            timestamp=now.isoformat(),
            features=tuple(query["features"]),
        )
        try:
            self.ledger.append_to(self.store.ledger_path, event)
        except LedgerError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc

        applied = False
        if req.verdict == "accepted":
            self.counters["hints_accepted"] += 1
            self._accept_latency_total += (now - query["at"]).total_seconds()
            do_apply = self.config.apply_feedback_immediately if req.apply is None else req.apply
            if do_apply:
                self.apply_pending()
                applied = True
        else:
            self.counters["hints_rejected"] += 1
        return {"recorded": True, "applied": applied, "ticket_id": ticket_id}

    def apply_pending(self) -> tuple[FuzzyContext, ConceptLattice]:
        """Fold accepted events into the model and publish a new snapshot."""
        with self._write_lock:
            ctx, lattice = self._snapshot
            before = len(ctx)
            ctx, lattice = apply_accepted(self.ledger, ctx, lattice)
            if len(ctx) != before:
                self.counters["tickets_resolved"] += len(ctx) - before
                self.store.save(ctx, lattice)
                self._snapshot = (ctx, lattice)
            return self._snapshot

    def health(self) -> dict:
        ctx, lattice = self._snapshot
        accepted = self.counters["hints_accepted"]
        return {
            "status": "ok",
            "objects": len(ctx),
            "attributes": len(ctx.attributes),
            "concepts": len(lattice),
            "chi": ctx.chi,
            "counters": dict(self.counters),
            "avg_seconds_to_accept": (self._accept_latency_total / accepted) if accepted else None,
        }


def _hint_json(hint: RankedHint, lattice: ConceptLattice) -> dict:
    concept = lattice.concepts[hint.concept]
    return {
        "object": hint.object.name,
        "object_kind": hint.object.kind.value,
        "concept": hint.concept,
        "concept_intent": sorted(a.name for a in concept.intent),
        "f_measure": hint.f_measure,
        "membership": hint.membership,
        "score": hint.score,
    }


def bootstrap_state(config: ServiceConfig) -> ServiceState:
    """Load the latest snapshot, or build one from the configured dataset."""
    store = SnapshotStore(config.data_dir)
    if config.taxonomy:
        taxonomy = TaxonomyDictionary.load(config.taxonomy)
        store.store_taxonomy(config.taxonomy)
    elif store.taxonomy_path.exists():
        taxonomy = TaxonomyDictionary.load(store.taxonomy_path)
    else:
        taxonomy = TaxonomyDictionary()
        log.warning("no taxonomy configured or stored; ticket queries will only see structured features")
    if store.has_snapshot():
        ctx, lattice = store.load()
        log.info("loaded snapshot: %d objects, %d concepts", len(ctx), len(lattice))
    elif config.dataset:
        tickets = load_dataset(config.dataset)
        ctx = build_context(tickets, taxonomy, get_preset(config.preset), chi=config.chi)
        lattice = build_lattice(ctx)
        store.save(ctx, lattice)
        log.info("built lattice from %s: %d objects, %d concepts", config.dataset, len(ctx), len(lattice))
    else:
        raise AkgError(f"no snapshot in {config.data_dir} and no dataset configured")
    return ServiceState(config, ctx, lattice, store, taxonomy)


def create_app(config: ServiceConfig, state: ServiceState | None = None) -> FastAPI:
    """Build the FastAPI application (state may be injected for tests)."""
    app = FastAPI(title="akg", version="0.1.0")
    st = state or bootstrap_state(config)
    app.state.service = st

    @app.get("/health")
    def health():
        return st.health()

    @app.get("/lattice/summary")
    def lattice_summary():
        ctx, lattice = st.snapshot
        return {
            "chi": lattice.chi,
            "objects": len(ctx),
            "attributes": len(ctx.attributes),
            "concepts": len(lattice),
            "covers": sum(len(c) for c in lattice.covers.values()),
            "top": lattice.top,
            "bottom": lattice.bottom,
        }

    @app.post("/query")
    def query(req: QueryRequest):
        features = FeatureSet(frozenset(req.features))
        if not features.features:
            raise HTTPException(status_code=400, detail="query requires at least one feature")
        k = req.k or config.k_default
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        try:
            return st.run_query(features, k)
        except EmptyFeatureSetError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/tickets")
    def tickets(req: TicketRequest):
        try:
            ticket = Ticket(
                customer=req.customer,
                problem_description=req.problem_description,
                configuration=req.configuration,
                timestamp=req.timestamp,
                extras=req.extras,
                ticket_id="query",
            )
        except AkgError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        _, attrs = ticket_to_context_row(ticket, st.taxonomy, get_preset(config.preset))
        names = [a.name for a in attrs]
        if config.query_failure_kinds_only:
            failure = [a.name for a in attrs if a.kind in FAILURE_KINDS]
            names = failure or names  # structured-only tickets still query
        features = FeatureSet(frozenset(names))
        if not features.features:
            raise HTTPException(status_code=400, detail="no features could be extracted from the ticket")
        k = req.k or config.k_default
        return st.run_query(features, k)

    @app.get("/facets")
    def facets(filter: list[str] = Query(default=[])):
        ctx, _ = st.snapshot
        try:
            state_ = compute_facets(ctx, filter)
        except UnknownAttributeError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return state_.to_dict()

    @app.post("/feedback")
    def feedback(req: FeedbackRequest):
        return st.record_feedback(req)

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
