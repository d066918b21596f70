"""Exception hierarchy shared by all flowcodec modules."""


class FlowCodecError(Exception):
    """Base class for all errors raised by this package."""


class BadMagic(FlowCodecError):
    """Stream does not start with the expected magic tag."""


class VersionMismatch(FlowCodecError):
    """Container version is not supported by this implementation."""


class TruncatedStream(FlowCodecError):
    """Stream ended before all declared data could be read."""


class NonFiniteValue(FlowCodecError):
    """Flow field contains NaN/Inf or an unknown-flow sentinel value."""


class MalformedStream(FlowCodecError):
    """Chain-code stream is inconsistent with the lattice dimensions."""


class OutOfRange(FlowCodecError):
    """Value outside the admissible quantisation range."""


class Underdetermined(FlowCodecError):
    """A connected component of the inpainting domain has no known pixel."""


class MaxIterationsExceeded(FlowCodecError):
    """Iterative solver did not reach the requested tolerance."""


class CorruptPayload(FlowCodecError):
    """Container payload fails entropy decoding or a consistency check."""


class DimensionMismatch(FlowCodecError):
    """Two flow fields that must share dimensions do not."""


class NoFeasiblePoint(FlowCodecError):
    """No parameter-grid point reaches the requested compression ratio."""
