"""ringsketch: sketch-based 3D shape retrieval.

Pipeline: OBJ mesh ingest -> normalized multi-view ring rendering ->
sketch-style edge maps -> descriptors / contrastive embeddings ->
ranked-list retrieval with standard IR metrics. A CLI and an HTTP query
service sit on top.
"""

__version__ = "0.1.0"

from .errors import (
    DataError,
    DegenerateMeshError,
    EmptySketchError,
    ImageError,
    MeshError,
    ObjParseError,
    RingSketchError,
    TrainingError,
)

__all__ = [
    "__version__",
    "RingSketchError",
    "ObjParseError",
    "MeshError",
    "DegenerateMeshError",
    "ImageError",
    "EmptySketchError",
    "TrainingError",
    "DataError",
]
