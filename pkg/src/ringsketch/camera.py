"""Camera pose layouts for multi-view rendering.

Three layouts are provided:

* ``ring_camera_poses`` — 7 latitude rings x 12 azimuths (84 poses). Ring
  index runs bottom to top: ring 0 at elevation -90 (bottom pole), ring 3
  on the equator, ring 6 at +90. Azimuths step 30 degrees starting at 0.
* ``thp_camera_poses`` — 48 poses in 4 setups of 12: (a) a circle on the
  Oxy plane, (b) the same circle raised 30 degrees, (c) a circle on the
  Oyz plane, (d) that circle tilted 30 degrees out of Oyz. The setup
  number is stored in ``ring_index`` so it can serve as a group key.
* ``dh_camera_poses`` — 21 poses laid out as 3 rings (elevations -30, 0,
  +30) x 7 evenly spaced azimuths. Only the total count of 21 is fixed;
  the ring arrangement is this implementation's choice.

All cameras look at the origin. The vertical axis is +Z; up is +Z except
where the view direction is (anti)parallel to it, in which case up is +X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RING_COUNT = 7
VIEWS_PER_RING = 12
DEFAULT_DISTANCE = 3.0

_POLE_DOT = 1.0 - 1e-9


@dataclass(frozen=True)
class CameraPose:
    """A camera position looking at a target point.

    ring_index / azimuth_index identify the pose within its layout; for
    the 48-view layout ring_index holds the setup number (0..3).
    """

    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    ring_index: int
    azimuth_index: int

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        tgt = np.asarray(self.look_at, dtype=np.float64).reshape(3)
        up = np.asarray(self.up, dtype=np.float64).reshape(3)
        fwd = tgt - pos
        norm = np.linalg.norm(fwd)
        if norm == 0.0:
            raise ValueError("camera position coincides with look_at target")
        un = np.linalg.norm(up)
        if un == 0.0 or abs(np.dot(fwd / norm, up / un)) >= _POLE_DOT:
            raise ValueError("up vector is parallel to the view direction")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "look_at", tgt)
        object.__setattr__(self, "up", up / un)

    @property
    def forward(self) -> np.ndarray:
        f = self.look_at - self.position
        return f / np.linalg.norm(f)


def _pose_at(elevation_deg: float, azimuth_deg: float, distance: float,
             ring_index: int, azimuth_index: int) -> CameraPose:
    e = np.deg2rad(elevation_deg)
    a = np.deg2rad(azimuth_deg)
    pos = distance * np.array([np.cos(e) * np.cos(a),
                               np.cos(e) * np.sin(a),
                               np.sin(e)])
    up = np.array([1.0, 0.0, 0.0]) if abs(elevation_deg) >= 90.0 - 1e-9 else np.array([0.0, 0.0, 1.0])
    return CameraPose(pos, np.zeros(3), up, ring_index, azimuth_index)


def ring_elevation(ring_index: int) -> float:
    """Elevation in degrees of a latitude ring: -90 + 30*k for k in 0..6."""
    if not 0 <= ring_index < RING_COUNT:
        raise ValueError(f"ring index must be in 0..{RING_COUNT - 1}, got {ring_index}")
    return -90.0 + 30.0 * ring_index


def ring_camera_poses(distance: float = DEFAULT_DISTANCE,
                      rings=None) -> list[CameraPose]:
    """All poses of the 7x12 ring layout (or a subset of rings), ordered
    by (ring_index, azimuth_index)."""
    if distance <= 0:
        raise ValueError(f"camera distance must be positive, got {distance}")
    if rings is None:
        rings = range(RING_COUNT)
    poses = []
    for k in rings:
        elev = ring_elevation(int(k))
        for j in range(VIEWS_PER_RING):
            poses.append(_pose_at(elev, 30.0 * j, distance, int(k), j))
    return poses


def thp_camera_poses(distance: float = DEFAULT_DISTANCE) -> list[CameraPose]:
    """48 poses: 4 camera setups x 12 azimuths, setup stored in ring_index."""
    if distance <= 0:
        raise ValueError(f"camera distance must be positive, got {distance}")
    up_z = np.array([0.0, 0.0, 1.0])
    up_x = np.array([1.0, 0.0, 0.0])
    c30, s30 = np.cos(np.deg2rad(30.0)), np.sin(np.deg2rad(30.0))

    def circle(j):
        a = np.deg2rad(30.0 * j)
        return np.cos(a), np.sin(a)

    setups = [
        # (a) circle on the Oxy plane
        (lambda ca, sa: np.array([ca, sa, 0.0]), up_z),
        # (b) raised 30 degrees above Oxy
        (lambda ca, sa: np.array([c30 * ca, c30 * sa, s30]), up_z),
        # (c) circle on the Oyz plane; ring axis is X, so up must be +X
        (lambda ca, sa: np.array([0.0, ca, sa]), up_x),
        # (d) setup (c) tilted 30 degrees toward +X
        (lambda ca, sa: np.array([s30, c30 * ca, c30 * sa]), up_x),
    ]
    poses = []
    for setup, (place, up) in enumerate(setups):
        for j in range(12):
            ca, sa = circle(j)
            poses.append(CameraPose(distance * place(ca, sa), np.zeros(3), up, setup, j))
    return poses


def dh_camera_poses(distance: float = DEFAULT_DISTANCE) -> list[CameraPose]:
    """21 poses: rings 2..4 (elevations -30, 0, +30) x 7 azimuths."""
    if distance <= 0:
        raise ValueError(f"camera distance must be positive, got {distance}")
    poses = []
    for k in (2, 3, 4):
        for j in range(7):
            poses.append(_pose_at(ring_elevation(k), 360.0 * j / 7.0, distance, k, j))
    return poses
