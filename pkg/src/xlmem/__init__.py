"""Cross-lingual memorization analytics.

Score per-language memorization from model-output records, derive language
similarity from language-specific embedding subspaces, and correlate
memorization with training-data volume over thresholded language-similarity
graphs using a Laplacian-based correlation coefficient with intra- and
cross-topology decomposition.
"""

__version__ = "0.1.0"

from .corpus import (
    CandidatePassage,
    FilterConfig,
    FilterReason,
    FilterVerdict,
    SampleResult,
    filter_passage,
    sample_corpus,
    shuffle_stream,
)
from .correlation import (
    LanguageSignal,
    cross_smoothness,
    graph_correlation,
    pearson,
    smoothness,
)
from .errors import XlmemError
from .graph import ComponentPartition, LanguageGraph, build_graph, components, graph_to_json
from .memscore import (
    LanguageScore,
    MemorizationRecord,
    Metric,
    SpanSegment,
    bleu,
    em_rate,
    em_ratio,
    is_memorized,
    language_scores,
    load_records_jsonl,
    overall_scores,
    pm_score,
    rouge_l,
)
from .subspace import (
    LayerEmbeddings,
    SimilarityMatrix,
    SubspaceModel,
    identify_subspace,
    load_embeddings_jsonl,
    matrix_correlation,
    mean_embeddings,
    project_language,
    similarity_matrix,
)
from .topology import (
    SubgraphSummary,
    SweepRow,
    aggregate_subgraph,
    cross_topo_correlation,
    intra_topo_correlation,
    signal_consistency,
    threshold_sweep,
)

__all__ = [
    "__version__",
    "XlmemError",
    # subspace
    "LayerEmbeddings",
    "SubspaceModel",
    "SimilarityMatrix",
    "mean_embeddings",
    "identify_subspace",
    "project_language",
    "similarity_matrix",
    "matrix_correlation",
    "load_embeddings_jsonl",
    # graph
    "LanguageGraph",
    "ComponentPartition",
    "build_graph",
    "components",
    "graph_to_json",
    # correlation
    "LanguageSignal",
    "smoothness",
    "cross_smoothness",
    "graph_correlation",
    "pearson",
    # topology
    "SubgraphSummary",
    "SweepRow",
    "aggregate_subgraph",
    "intra_topo_correlation",
    "cross_topo_correlation",
    "threshold_sweep",
    "signal_consistency",
    # memscore
    "Metric",
    "MemorizationRecord",
    "SpanSegment",
    "LanguageScore",
    "em_ratio",
    "is_memorized",
    "em_rate",
    "bleu",
    "rouge_l",
    "pm_score",
    "language_scores",
    "overall_scores",
    "load_records_jsonl",
    # corpus
    "CandidatePassage",
    "FilterConfig",
    "FilterReason",
    "FilterVerdict",
    "filter_passage",
    "shuffle_stream",
    "sample_corpus",
    "SampleResult",
]
