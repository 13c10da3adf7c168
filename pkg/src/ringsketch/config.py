"""Pipeline configuration.

One frozen dataclass carries every stage's settings — dataset locations,
camera/render parameters, sketch extraction, query augmentation, descriptor
and scorer choices, training hyperparameters, and the master seed.  Configs
load from TOML or JSON files with strict unknown-key checking, and single
values can be overridden from ``key=value`` strings (dotted keys reach the
nested sections).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import tomli

from .descriptors import DESCRIPTOR_TAGS
from .embed import TrainConfig
from .errors import DataError
from .render import RenderConfig
from .sketchify import AugmentParams, SketchParams

SCORER_CHOICES = ("min_l2", "top6", "embed", "fused")
FEATURE_CHOICES = tuple(t for t in DESCRIPTOR_TAGS if t != "embed")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for the full ingest-to-leaderboard pipeline."""

    mesh_dir: str = "meshes"
    output_dir: str = "out"
    master_seed: int = 0

    # camera / rendering
    rings: tuple = (2, 3, 4)
    resolution: int = 224
    distance: float = 3.0
    fov_degrees: float = 45.0
    style: str = "shaded"

    # per-mesh orientation fixes applied at ingest: id -> [[axis, degrees], ...]
    reorientations: dict = field(default_factory=dict)

    # featurization and retrieval
    descriptor: str = "grid"
    scorer: str = "min_l2"
    alpha: float = 0.7
    tta_flip: bool = False

    # evaluation
    cutoff: int = 10

    # number of descriptor-similarity training groups; 0 keeps one group
    # per object (no merging)
    train_groups: int = 0

    sketch: SketchParams = SketchParams()
    augment: AugmentParams = AugmentParams()
    train: TrainConfig = TrainConfig()

    def __post_init__(self):
        if self.descriptor not in FEATURE_CHOICES:
            raise DataError(
                f"descriptor must be one of {FEATURE_CHOICES}, got {self.descriptor!r}")
        if self.scorer not in SCORER_CHOICES:
            raise DataError(
                f"scorer must be one of {SCORER_CHOICES}, got {self.scorer!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise DataError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.cutoff < 1:
            raise DataError(f"cutoff must be >= 1, got {self.cutoff}")
        if self.train_groups < 0:
            raise DataError("train_groups must be >= 0")
        object.__setattr__(self, "rings", tuple(int(r) for r in self.rings))
        for oid, rotations in self.reorientations.items():
            for rot in rotations:
                if len(rot) != 2 or str(rot[0]).upper() not in ("X", "Y", "Z"):
                    raise DataError(
                        f"reorientation for {oid!r} must be [axis, degrees] pairs")

    def render_config(self) -> RenderConfig:
        return RenderConfig(rings=self.rings, resolution=self.resolution,
                            distance=self.distance, fov_degrees=self.fov_degrees,
                            style=self.style)

    def out_path(self, *parts) -> Path:
        return Path(self.output_dir).joinpath(*parts)


_SECTIONS = {"sketch": SketchParams, "augment": AugmentParams, "train": TrainConfig}


def _build_section(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise DataError(f"unknown {section} config keys: {sorted(unknown)}")
    coerced = dict(data)
    for f in fields(cls):
        if f.name in coerced and isinstance(coerced[f.name], list):
            coerced[f.name] = tuple(coerced[f.name])
    try:
        return cls(**coerced)
    except (ValueError, TypeError) as exc:
        raise DataError(f"bad {section} config: {exc}") from exc


def config_from_dict(data: dict) -> PipelineConfig:
    """Build a PipelineConfig from a parsed TOML/JSON mapping.

    Unknown keys raise DataError rather than being ignored, so typos in
    config files fail loudly.
    """
    if not isinstance(data, dict):
        raise DataError("config root must be a mapping")
    top = {f.name for f in fields(PipelineConfig)}
    unknown = set(data) - top
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise DataError(f"config section {key!r} must be a table")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        elif key == "reorientations":
            if not isinstance(value, dict):
                raise DataError("reorientations must map object id to rotation list")
            kwargs[key] = {
                str(oid): [[str(a).upper(), float(d)] for a, d in rots]
                for oid, rots in value.items()
            }
        elif key == "rings":
            kwargs[key] = tuple(int(r) for r in value)
        else:
            kwargs[key] = value
    try:
        return PipelineConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise DataError(f"bad config: {exc}") from exc


def load_config(path) -> PipelineConfig:
    """Read a .toml or .json config file."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"config file not found: {p}")
    text = p.read_bytes()
    if p.suffix.lower() == ".toml":
        try:
            data = tomli.loads(text.decode("utf-8"))
        except tomli.TOMLDecodeError as exc:
            raise DataError(f"invalid TOML in {p}: {exc}") from exc
    elif p.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid JSON in {p}: {exc}") from exc
    else:
        raise DataError(f"config must be .toml or .json, got {p.suffix!r}")
    return config_from_dict(data)


def _coerce_like(current, raw: str):
    """Parse a CLI override string to the type of the value it replaces."""
    if isinstance(current, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise DataError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        item_type = type(current[0]) if current else float
        return tuple(item_type(part) for part in raw.split(",") if part)
    return raw


def apply_overrides(config: PipelineConfig, overrides) -> PipelineConfig:
    """Apply ``key=value`` strings; dotted keys reach sketch/augment/train."""
    data = dataclasses.asdict(config)
    for item in overrides:
        if "=" not in item:
            raise DataError(f"override must look like key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        parts = key.split(".")
        if len(parts) == 1:
            scope, name = data, parts[0]
        elif len(parts) == 2 and parts[0] in _SECTIONS:
            scope, name = data[parts[0]], parts[1]
        else:
            raise DataError(f"unknown override key {key!r}")
        if name not in scope or isinstance(scope.get(name), dict):
            raise DataError(f"unknown override key {key!r}")
        try:
            scope[name] = _coerce_like(scope[name], raw)
        except ValueError as exc:
            raise DataError(f"bad value for {key!r}: {exc}") from exc
    return config_from_dict(data)
