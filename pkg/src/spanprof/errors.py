"""Exception hierarchy shared across the toolkit."""


class SpanprofError(Exception):
    """Base class for all spanprof errors."""


class UnsupportedPlatform(SpanprofError):
    """The requested cycle source is unavailable and no fallback is permitted."""


class IoFailure(SpanprofError):
    """A trace/model/report file could not be read or written."""


class MalformedTrace(SpanprofError):
    """A trace file or event sequence violates the format.

    reason is one of: "UnbalancedEnd", "NonMonotonicCycles", "Truncated",
    "BadMagic", "BadVersion", "UnknownTag".
    """

    def __init__(self, reason, message, path=None, offset=None):
        self.reason = reason
        self.path = path
        self.offset = offset
        detail = message
        if path is not None:
            detail += f" (file: {path}"
            if offset is not None:
                detail += f", byte offset: {offset}"
            detail += ")"
        super().__init__(detail)


class DuplicatePrimordial(SpanprofError):
    """A stream-id bucket holds != 1 primordial span after merging."""

    def __init__(self, stream_id, count):
        self.stream_id = stream_id
        self.count = count
        super().__init__(
            f"stream {stream_id} has {count} primordial spans (expected exactly 1)"
        )


class CyclicNesting(SpanprofError):
    """The outer-span chain revisits a span (corrupted data)."""


class MixedSourceError(SpanprofError):
    """Cost model and traces come from different cycle-source kinds."""


class DegenerateSamples(SpanprofError):
    """Fewer than half of the calibration samples survived outlier removal."""


class NoParallelWork(SpanprofError):
    """Load-balance analysis requested on a profile with no named spans."""


class ZeroBaseline(SpanprofError):
    """Accuracy evaluation against a zero baseline."""


class ZeroDenominator(SpanprofError):
    """Overhead evaluation with a zero plain-run time."""


class DegenerateVariance(SpanprofError):
    """Pearson correlation requested on inputs with zero variance."""
