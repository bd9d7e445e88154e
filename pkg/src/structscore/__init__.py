"""Composable evaluation metrics for structured prediction."""

from .errors import (
    ConfigurationError,
    DataError,
    InvalidComparisonError,
    SchemaError,
    SolverResourceError,
    StructScoreError,
)
from .similarity import (
    Normalizer,
    OverlapTriple,
    SimScore,
    discrete_sim,
    normalize,
    product_sim,
    threshold_sim,
)
from .matching import (
    MatchConstraint,
    Matching,
    WeightMatrix,
    match_score,
    self_overlap,
    set_match_triple,
    set_similarity,
)
from .latent import (
    AmrGraph,
    IlpInstance,
    LatentSolution,
    Prop,
    VarAlignment,
    VarId,
    build_ilp,
    smatch,
    smatch_solution,
    solve_ilp,
)
from .ordered import OrderedCollection, OrderKind, graph_match_score, seq_match_score
from .kernels import GramMatrix, gram, is_psd, is_strong, jacobi_eigenvalues
from .report import MetricResult, ProductResult
from .records import DatasetConfig, Ontology, TypePath
from .schema import (
    MetricDef,
    Schema,
    SolverOptions,
    check_document,
    derive_similarity,
    evaluate_metric,
    explain_metric,
    parse_schema,
)
from .presets import builtin_schema, schema_payload
from .corpus import (
    BUILTIN_METRICS,
    DocumentRecord,
    RunConfig,
    evaluate_builtins,
    explain_builtins,
    list_metrics,
    load_corpus,
    run_eval,
)
from . import zoo

__version__ = "0.1.0"

__all__ = [
    "AmrGraph",
    "BUILTIN_METRICS",
    "ConfigurationError",
    "DataError",
    "DatasetConfig",
    "DocumentRecord",
    "GramMatrix",
    "IlpInstance",
    "InvalidComparisonError",
    "LatentSolution",
    "MatchConstraint",
    "Matching",
    "MetricDef",
    "MetricResult",
    "Normalizer",
    "Ontology",
    "OrderKind",
    "OrderedCollection",
    "OverlapTriple",
    "ProductResult",
    "Prop",
    "RunConfig",
    "Schema",
    "SchemaError",
    "SimScore",
    "SolverOptions",
    "SolverResourceError",
    "StructScoreError",
    "TypePath",
    "VarAlignment",
    "VarId",
    "WeightMatrix",
    "builtin_schema",
    "build_ilp",
    "check_document",
    "derive_similarity",
    "discrete_sim",
    "evaluate_builtins",
    "evaluate_metric",
    "explain_builtins",
    "explain_metric",
    "graph_match_score",
    "gram",
    "is_psd",
    "is_strong",
    "jacobi_eigenvalues",
    "list_metrics",
    "load_corpus",
    "match_score",
    "normalize",
    "parse_schema",
    "product_sim",
    "run_eval",
    "schema_payload",
    "self_overlap",
    "seq_match_score",
    "set_match_triple",
    "set_similarity",
    "smatch",
    "smatch_solution",
    "solve_ilp",
    "threshold_sim",
    "zoo",
]
