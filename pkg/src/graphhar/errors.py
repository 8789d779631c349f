"""Exception types shared across the package."""


class GraphHarError(Exception):
    """Base class for all package errors."""


class ShapeError(GraphHarError, ValueError):
    """Array shapes incompatible with an operation's contract."""


class ContractError(GraphHarError, ValueError):
    """An operation was called outside its contract (e.g. backward on a non-scalar)."""


class LabelError(GraphHarError, ValueError):
    """A class or domain label is outside the allowed range."""


class DegenerateBatchError(GraphHarError, ValueError):
    """Batch statistics requested over fewer than two elements."""


class LayoutError(GraphHarError, ValueError):
    """A sensor layout violates its invariants."""


class SingularDegreeError(GraphHarError, ValueError):
    """Adjacency normalization hit a zero-degree node without self-loops."""


class GraphError(GraphHarError, ValueError):
    """An adjacency matrix is unusable (non-finite, wrong size)."""


class IngestError(GraphHarError, ValueError):
    """A dataset file does not match the documented distribution format."""


class TraceError(GraphHarError, RuntimeError):
    """A forward pass produced non-finite intermediate values."""


class DivergenceError(GraphHarError, RuntimeError):
    """Training hit a non-finite loss; carries a diagnostic snapshot."""

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = dict(snapshot or {})


class UndefinedCorrelationError(GraphHarError, ValueError):
    """Pearson correlation requested on a zero-variance series."""


class ConfigError(GraphHarError, ValueError):
    """Invalid or unknown configuration input."""


class CheckpointError(GraphHarError, ValueError):
    """A checkpoint or cache file cannot be read back."""
