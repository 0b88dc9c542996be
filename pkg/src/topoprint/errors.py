"""Exception hierarchy shared across the toolkit."""


class TopoprintError(Exception):
    """Base class for all errors raised by this package."""


class MeshParseError(TopoprintError):
    """Malformed PLY/STL input.

    ``byte_offset`` points at the first byte that could not be understood,
    when that position is known.
    """

    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (at byte {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class UnsupportedFormatError(MeshParseError):
    """Recognized but unsupported input variant (e.g. big-endian PLY)."""


class DensifyError(TopoprintError):
    """Mesh cannot be subdivided (no triangles, all-degenerate, or depth bound hit)."""


class GeometryError(TopoprintError):
    """Geometric precondition violated (flat cloud, empty cloud, bad extent)."""


class CoverError(TopoprintError):
    """Invalid vertical cover parameters (overlap vs thickness, missing extent)."""


class BudgetExceededError(TopoprintError):
    """A configured resource budget (simplex count, grid cells) would be exceeded."""


class MissingResultError(TopoprintError):
    """A per-component result expected by graph assembly is absent."""

    def __init__(self, message, missing_keys=()):
        super().__init__(message)
        self.missing_keys = tuple(missing_keys)


class BundleFormatError(TopoprintError):
    """Serialized analysis bundle violates the topoprint/1 schema."""


class PipelineError(TopoprintError):
    """A pipeline stage failed; carries the stage name and its parameters."""

    def __init__(self, stage, message, params=None):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
        self.params = dict(params or {})
