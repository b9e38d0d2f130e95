"""Capsule-chain limb geometry and end-effector relative pose.

A limb is a chain of capsules (line segments swept by spheres). Segments are
ordered along the direction of end-effector travel, with each segment's axis
pointing from its first endpoint toward its second.

The local frame at a point on the limb axis is built from the segment axis
direction and world up:

    x_hat = segment axis direction (unit, along travel)
    z_hat = world up with the x_hat component removed, normalized
    y_hat = z_hat x x_hat          (right-handed: x_hat x y_hat = z_hat)

The 4-vector relative pose (p_y, p_z, theta_y, theta_z) is expressed in this
frame: p_y is the lateral offset of the end effector from the vertical plane
through the axis, p_z is its height above the top of the limb surface
(axis offset along z_hat minus the segment radius), and (theta_y, theta_z)
are the spherical pitch/yaw of the end effector's X axis relative to x_hat:

    X_ee = cos(ty)cos(tz) x_hat + cos(ty)sin(tz) y_hat + sin(ty) z_hat
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WORLD_UP = np.array([0.0, 0.0, 1.0])

# Angle (rad) between a segment axis and world up below which the local
# frame is undefined.
DEGENERATE_AXIS_TOL = 1e-6


class DegenerateFrame(ValueError):
    """Segment axis is too close to world up to define a local frame."""


@dataclass(frozen=True)
class Capsule:
    a: np.ndarray  # first endpoint (3,), meters
    b: np.ndarray  # second endpoint (3,), meters
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.radius <= 0.0:
            raise ValueError(f"capsule radius must be > 0, got {self.radius}")

    @property
    def axis_dir(self) -> np.ndarray:
        d = self.b - self.a
        return d / np.linalg.norm(d)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


@dataclass(frozen=True)
class LimbModel:
    """Articulated capsule chain. Consecutive segments share an endpoint."""

    segments: tuple[Capsule, ...]
    joint_angle: float = 0.0  # bend (rad) at the shared endpoint
    kind: str = "arm"  # "arm" or "leg"

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        for prev, cur in zip(self.segments, self.segments[1:]):
            if not np.allclose(prev.b, cur.a, atol=1e-12):
                raise ValueError("consecutive segments must share an endpoint")

    @property
    def chain_length(self) -> float:
        return float(sum(s.length for s in self.segments))

    def axis_point_at(self, arclength: float) -> tuple[np.ndarray, int]:
        """Point on the central axis at the given arclength from the start.

        Returns (point, segment_index). Arclength is clamped to the chain.
        """
        s = float(np.clip(arclength, 0.0, self.chain_length))
        acc = 0.0
        for i, seg in enumerate(self.segments):
            if s <= acc + seg.length or i == len(self.segments) - 1:
                t = (s - acc) / seg.length
                return seg.a + np.clip(t, 0.0, 1.0) * (seg.b - seg.a), i
            acc += seg.length
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class EePose:
    """End-effector pose. Rotation columns are the ee axes in world frame:
    X = travel direction, Z = away from the limb (up), Y = lateral."""

    position: np.ndarray  # (3,), meters
    rotation: np.ndarray  # (3, 3), columns [X_ee, Y_ee, Z_ee]

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        R = np.asarray(self.rotation, dtype=float)
        object.__setattr__(self, "rotation", R)
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation determinant is not +1")

    @property
    def x_axis(self) -> np.ndarray:
        return self.rotation[:, 0]

    @property
    def y_axis(self) -> np.ndarray:
        return self.rotation[:, 1]

    @property
    def z_axis(self) -> np.ndarray:
        return self.rotation[:, 2]


@dataclass(frozen=True)
class RelPose:
    """Local limb pose: lateral/vertical offsets (m) and pitch/yaw (rad)."""

    p_y: float
    p_z: float
    theta_y: float
    theta_z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_y, self.p_z, self.theta_y, self.theta_z])

    @staticmethod
    def from_array(v) -> "RelPose":
        v = np.asarray(v, dtype=float)
        return RelPose(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


def _closest_on_segment(a: np.ndarray, b: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = b - a
    t = np.dot(q - a, d) / np.dot(d, d)
    return a + np.clip(t, 0.0, 1.0) * d


def limb_frame(axis_dir: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build the (x_hat, y_hat, z_hat) limb-local frame for an axis direction.

    Raises DegenerateFrame when the axis is within DEGENERATE_AXIS_TOL rad
    of world up (z_hat undefined).
    """
    x_hat = np.asarray(axis_dir, dtype=float)
    x_hat = x_hat / np.linalg.norm(x_hat)
    z = WORLD_UP - np.dot(WORLD_UP, x_hat) * x_hat
    n = np.linalg.norm(z)
    # |sin(angle to up)| == n; degenerate when the axis is nearly vertical
    if n < DEGENERATE_AXIS_TOL:
        raise DegenerateFrame("limb axis is within tolerance of world up")
    z_hat = z / n
    y_hat = np.cross(z_hat, x_hat)
    return x_hat, y_hat, z_hat


def closest_point(limb: LimbModel, query) -> tuple[np.ndarray, np.ndarray, int]:
    """Nearest point on the union-of-capsules surface to a query point.

    Returns (surface_point, axis_dir, segment_index) where axis_dir is the
    owning segment's axis direction (unit, along travel). Total function:
    interior queries return the nearest surface point under the same contract.
    """
    q = np.asarray(query, dtype=float)
    candidates = []
    axis_pts = []
    for i, seg in enumerate(limb.segments):
        p = _closest_on_segment(seg.a, seg.b, q)
        axis_pts.append(p)
        v = q - p
        d = np.linalg.norm(v)
        if d < 1e-12:
            # query on the axis: push out along any direction normal to it
            try:
                _, _, z_hat = limb_frame(seg.axis_dir)
                n = z_hat
            except DegenerateFrame:
                n = np.array([1.0, 0.0, 0.0])
                n = n - np.dot(n, seg.axis_dir) * seg.axis_dir
                n = n / np.linalg.norm(n)
            surf = p + seg.radius * n
        else:
            surf = p + seg.radius * (v / d)
        candidates.append((surf, i))

    # the union surface excludes candidate points strictly inside another capsule
    best = None
    for surf, i in candidates:
        inside_other = False
        for j, seg in enumerate(limb.segments):
            if j == i:
                continue
            dj = np.linalg.norm(surf - axis_pts_for(seg, surf))
            if dj < seg.radius - 1e-9:
                inside_other = True
                break
        if inside_other:
            continue
        dist = np.linalg.norm(q - surf)
        if best is None or dist < best[0]:
            best = (dist, surf, i)
    if best is None:
        # every candidate buried (heavily overlapping chain): fall back to nearest
        dists = [(np.linalg.norm(q - surf), surf, i) for surf, i in candidates]
        best = min(dists, key=lambda t: t[0])
    _, surf, i = best
    return surf, limb.segments[i].axis_dir, i


def axis_pts_for(seg: Capsule, q: np.ndarray) -> np.ndarray:
    return _closest_on_segment(seg.a, seg.b, q)


def distance_to_limb_axis(limb: LimbModel, query) -> float:
    """Euclidean distance from a point to the nearest central-axis segment.

    Ignores the capsule radii; this is the post-hoc traversal metric.
    """
    q = np.asarray(query, dtype=float)
    return min(
        float(np.linalg.norm(q - _closest_on_segment(s.a, s.b, q)))
        for s in limb.segments
    )


def surface_gap(limb: LimbModel, query) -> float:
    """Signed distance from a point to the limb surface: positive outside,
    negative when penetrating. Unlike the frame-projected p_z it stays
    continuous when the nearest point crosses a joint."""
    q = np.asarray(query, dtype=float)
    return min(
        float(np.linalg.norm(q - _closest_on_segment(s.a, s.b, q)) - s.radius)
        for s in limb.segments
    )


def _owning_segment(limb: LimbModel, q: np.ndarray) -> tuple[int, np.ndarray]:
    """Segment with the smallest signed surface distance to q, plus the
    closest point on its axis."""
    best = None
    for i, seg in enumerate(limb.segments):
        p = _closest_on_segment(seg.a, seg.b, q)
        signed = np.linalg.norm(q - p) - seg.radius
        if best is None or signed < best[0]:
            best = (signed, i, p)
    return best[1], best[2]


def relative_pose(limb: LimbModel, ee: EePose) -> RelPose:
    """Relative pose of the end effector in the limb-local frame at the
    closest point (see module docstring for conventions)."""
    i, axis_pt = _owning_segment(limb, ee.position)
    seg = limb.segments[i]
    x_hat, y_hat, z_hat = limb_frame(seg.axis_dir)
    offset = ee.position - axis_pt
    p_y = float(np.dot(offset, y_hat))
    p_z = float(np.dot(offset, z_hat)) - seg.radius
    u = np.array(
        [np.dot(ee.x_axis, x_hat), np.dot(ee.x_axis, y_hat), np.dot(ee.x_axis, z_hat)]
    )
    theta_z = float(np.arctan2(u[1], u[0]))
    theta_y = float(np.arctan2(u[2], np.hypot(u[0], u[1])))
    return RelPose(p_y, p_z, theta_y, theta_z)


def orientation_from_x(x_ee: np.ndarray) -> np.ndarray:
    """Roll-free ee orientation: Z_ee from world up orthogonalized against
    X_ee, Y_ee completing the right-handed frame."""
    x = np.asarray(x_ee, dtype=float)
    x = x / np.linalg.norm(x)
    z = WORLD_UP - np.dot(WORLD_UP, x) * x
    n = np.linalg.norm(z)
    if n < DEGENERATE_AXIS_TOL:
        raise DegenerateFrame("end-effector X axis is within tolerance of world up")
    z = z / n
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def x_from_angles(x_hat, y_hat, z_hat, theta_y: float, theta_z: float) -> np.ndarray:
    """End-effector X axis from pitch/yaw relative to a limb frame."""
    cy = np.cos(theta_y)
    return (
        cy * np.cos(theta_z) * x_hat
        + cy * np.sin(theta_z) * y_hat
        + np.sin(theta_y) * z_hat
    )


def pose_from_rel(limb: LimbModel, anchor_arclength: float, rel: RelPose) -> EePose:
    """End-effector pose whose relative_pose at the anchor equals ``rel``.

    The anchor is an arclength along the central axis chain; the position is
    placed at p_y laterally and (radius + p_z) along z_hat from the axis
    point, and the orientation is the roll-free frame for the commanded
    pitch/yaw.
    """
    if not 0.0 <= anchor_arclength <= limb.chain_length:
        raise ValueError(
            f"anchor arclength {anchor_arclength} outside [0, {limb.chain_length}]"
        )
    axis_pt, i = limb.axis_point_at(anchor_arclength)
    seg = limb.segments[i]
    x_hat, y_hat, z_hat = limb_frame(seg.axis_dir)
    position = axis_pt + rel.p_y * y_hat + (seg.radius + rel.p_z) * z_hat
    x_ee = x_from_angles(x_hat, y_hat, z_hat, rel.theta_y, rel.theta_z)
    return EePose(position, orientation_from_x(x_ee))
