"""Exception types shared across the engine."""


class CiterateError(Exception):
    """Base class for all engine errors."""


class IngestError(CiterateError):
    """Unrecoverable problem while reading a corpus source."""


class FetchError(CiterateError):
    """Paginated retrieval aborted; partial results are preserved.

    Attributes
    ----------
    records : list
        Records retrieved before the abort.
    status : int or None
        HTTP status that caused the abort, when applicable.
    """

    def __init__(self, message, records=None, status=None):
        super().__init__(message)
        self.records = records if records is not None else []
        self.status = status


class GraphError(CiterateError):
    """Invalid graph input or contract violation (e.g. cyclic view)."""


class SpellError(CiterateError):
    """Spell construction integrity failure."""


class FitError(CiterateError):
    """Estimation failure: degenerate design, separation, bad input."""


class ReportError(CiterateError):
    """Report assembly failure, usually a missing upstream artifact."""


class ConfigError(CiterateError):
    """Invalid pipeline configuration."""


class PipelineError(CiterateError):
    """A stage was invoked without its upstream artifacts."""
