"""Exception types raised by the analysis modules.

Every data-dependent failure derives from :class:`XlmemError` so callers
(and the CLI) can distinguish bad data from programming errors.
"""


class XlmemError(Exception):
    """Base class for all data and computation errors in this package."""


class SchemaError(XlmemError):
    """An input record or value violates its declared schema."""


class EmptyInput(XlmemError):
    """An operation received an empty collection where items are required."""


class DimensionMismatch(XlmemError):
    """Vector or matrix shapes are inconsistent."""


class RankError(XlmemError):
    """Requested subspace rank is outside the valid range."""


class NumericalError(XlmemError):
    """A numerical routine (e.g. SVD) failed to converge."""


class DegenerateProjection(XlmemError):
    """A projected embedding has (near-)zero norm, so cosine similarity is undefined."""


class InsufficientOverlap(XlmemError):
    """Two similarity matrices share fewer languages than required."""


class DegenerateVariance(XlmemError):
    """A signal has zero variance, so Pearson correlation is undefined."""


class DegenerateSmoothness(XlmemError):
    """A signal has zero graph smoothness, so the graph correlation is undefined."""


class InsufficientData(XlmemError):
    """Too few observations for the requested statistic."""


class InvalidSubgraph(XlmemError):
    """A member set does not form a single connected component."""


class InsufficientGroups(XlmemError):
    """Too few subgraph groups for a cross-group correlation."""


class LanguageSetMismatch(XlmemError):
    """Two language-indexed objects do not cover the same languages."""


class WrongArchitecture(XlmemError):
    """A record's architecture is not supported by the requested operation."""


class MissingLogprobs(XlmemError):
    """A record lacks the reference log-probabilities required for scoring."""


class RejectedMetric(XlmemError):
    """The requested metric is not meaningful for the given record type."""
