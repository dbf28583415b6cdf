"""Exception hierarchy shared across the package."""


class GraphVarError(Exception):
    """Base class for all package errors."""


class GraphFormatError(GraphVarError):
    """Malformed graph data: bad weights, duplicate edges, empty vertex set."""


class UnknownVertexError(GraphVarError, KeyError):
    """Vertex id not present in the graph."""


class AdjacencyError(GraphVarError):
    """Operation requested on a non-adjacent vertex pair."""


class BindingError(GraphVarError):
    """Functions bound to different graphs were mixed in one operation."""


class ParameterError(GraphVarError, ValueError):
    """Out-of-range exponent, order, or radius parameter."""


class ConstraintError(GraphVarError):
    """A function violates the support constraints of its space."""


class DegenerateDomainError(GraphVarError):
    """Dirichlet domain has no free vertices left after the collar."""


class HypothesisError(GraphVarError):
    """A structural hypothesis fails on the given graph (no minimizing vertex)."""
