"""Actionable knowledge graph: a fuzzy concept lattice over maintenance
records, queried by bipartite-matching F-measure for ranked triage hints and
updated incrementally from operator feedback."""

from .context import (
    AttributeId,
    AttributeKind,
    FuzzyContext,
    FuzzyObjectRepresentation,
    ObjectId,
    ObjectKind,
)
from .errors import (
    AkgError,
    DuplicateObjectError,
    EmptyFeatureSetError,
    IngestError,
    LedgerError,
    MembershipRangeError,
    SnapshotError,
    UnknownAttributeError,
    UnknownConceptError,
    UnknownObjectError,
)
from .facets import FacetState, compute_facets
from .feedback import FeedbackEvent, FeedbackLedger, apply_accepted, replay
from .ingest import (
    DEFAULT_PRESET,
    PRESETS,
    StrategyPreset,
    TaxonomyDictionary,
    Ticket,
    build_context,
    extract_features,
    get_preset,
    load_dataset,
    ticket_to_context_row,
)
from .lattice import ConceptLattice, FuzzyConcept, build_lattice, insert_object
from .matching import (
    ConceptScore,
    FeatureSet,
    FeatureSource,
    RankedHint,
    RelatednessFunction,
    get_relatedness,
    intersection_size,
    rank_concepts,
    recommend,
    register_relatedness,
    relatedness,
    score_concept,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeId",
    "AttributeKind",
    "FuzzyContext",
    "FuzzyObjectRepresentation",
    "ObjectId",
    "ObjectKind",
    "ConceptLattice",
    "FuzzyConcept",
    "build_lattice",
    "insert_object",
    "FeatureSet",
    "FeatureSource",
    "RelatednessFunction",
    "ConceptScore",
    "RankedHint",
    "relatedness",
    "register_relatedness",
    "get_relatedness",
    "intersection_size",
    "score_concept",
    "rank_concepts",
    "recommend",
    "Ticket",
    "TaxonomyDictionary",
    "StrategyPreset",
    "PRESETS",
    "DEFAULT_PRESET",
    "get_preset",
    "extract_features",
    "ticket_to_context_row",
    "build_context",
    "load_dataset",
    "FeedbackEvent",
    "FeedbackLedger",
    "apply_accepted",
    "replay",
    "FacetState",
    "compute_facets",
    "AkgError",
    "DuplicateObjectError",
    "UnknownObjectError",
    "UnknownAttributeError",
    "UnknownConceptError",
    "MembershipRangeError",
    "EmptyFeatureSetError",
    "IngestError",
    "LedgerError",
    "SnapshotError",
    "__version__",
]
