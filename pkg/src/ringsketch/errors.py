"""Exception hierarchy shared across the package."""


class RingSketchError(Exception):
    """Base class for all errors raised by this package."""


class ObjParseError(RingSketchError, ValueError):
    """Malformed Wavefront OBJ input. Carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MeshError(RingSketchError, ValueError):
    """Structurally invalid mesh (bad indices, too few vertices, NaNs)."""


class DegenerateMeshError(MeshError):
    """Mesh has no spatial extent and cannot be normalized."""


class ImageError(RingSketchError, ValueError):
    """Image does not satisfy an operation's input contract."""


class EmptySketchError(ImageError):
    """Sketch contains no content pixels."""


class IndexError_(RingSketchError, ValueError):
    """Gallery index is inconsistent or incompatible with the query."""


class TrainingError(RingSketchError, ValueError):
    """Training configuration or data cannot produce a model."""


class DataError(RingSketchError, ValueError):
    """Pipeline input files are missing or malformed."""
