"""Synthetic six-channel capacitive proximity sensor.

Each electrode reading averages the single-plate kernel C(d) = alpha/(d+beta)
over a small quadrature grid across the electrode face, where d is the
distance from the quadrature point to the limb surface. Channels are then
mixed by a fixed crosstalk matrix M = I + kappa * A (A: grid adjacency,
row-normalized), offset by a baseline, and perturbed by Gaussian noise.

Channel order is row-major over the 3x2 grid: front row (+X_ee) left to
right, then back row left to right, where "left" is -Y_ee.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import EePose, LimbModel

H_WINDOW = 50  # time-window length (samples)
N_CHANNELS = 6
D_MIN = 0.001  # distance clamp (m), keeps the kernel finite at contact


@dataclass(frozen=True)
class SensorLayout:
    electrode_size: float = 0.03  # square edge (m)
    pitch: float = 0.035  # center-to-center spacing (m)
    samples_per_electrode: int = 3  # k: quadrature grid is k x k

    def __post_init__(self):
        if self.pitch < self.electrode_size:
            raise ValueError("electrode pitch must be >= electrode edge")
        if self.samples_per_electrode < 1:
            raise ValueError("samples_per_electrode must be >= 1")

    def electrode_centers(self) -> np.ndarray:
        """(6, 3) electrode centers in the end-effector frame (z = 0 plane)."""
        p = self.pitch
        rows_x = [p / 2.0, -p / 2.0]  # front row first
        cols_y = [-p, 0.0, p]  # left to right
        return np.array([[x, y, 0.0] for x in rows_x for y in cols_y])

    def quadrature_offsets(self) -> np.ndarray:
        """(k*k, 3) cell-center offsets across one electrode face."""
        k = self.samples_per_electrode
        e = self.electrode_size
        c = (np.arange(k) + 0.5) / k * e - e / 2.0
        xx, yy = np.meshgrid(c, c, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel(), np.zeros(k * k)])

    def sample_points(self) -> np.ndarray:
        """(6, k*k, 3) quadrature points in the end-effector frame."""
        return _sample_points_cached(self)


@lru_cache(maxsize=8)
def _sample_points_cached(layout: "SensorLayout") -> np.ndarray:
    pts = layout.electrode_centers()[:, None, :] + layout.quadrature_offsets()[None, :, :]
    pts.flags.writeable = False
    return pts


@lru_cache(maxsize=1)
def grid_adjacency() -> np.ndarray:
    """Row-normalized 4-neighbor adjacency of the 2x3 electrode grid."""
    coords = [(r, c) for r in range(2) for c in range(3)]
    A = np.zeros((N_CHANNELS, N_CHANNELS))
    for i, (ri, ci) in enumerate(coords):
        for j, (rj, cj) in enumerate(coords):
            if abs(ri - rj) + abs(ci - cj) == 1:
                A[i, j] = 1.0
    A /= A.sum(axis=1, keepdims=True)
    A.flags.writeable = False
    return A


@dataclass(frozen=True)
class MaterialMode:
    """Per-material sensor constants for the synthetic kernel."""

    name: str  # "air_gown" or "wet_cloth"
    alpha: float  # pF * m
    beta: float  # m
    baseline: float  # pF
    noise_sigma: float  # pF
    crosstalk_kappa: float = 0.1

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0.0 <= self.crosstalk_kappa < 0.5:
            raise ValueError("crosstalk_kappa must be in [0, 0.5)")


def air_gown(**overrides) -> MaterialMode:
    cfg = dict(name="air_gown", alpha=2.0e-2, beta=0.01, baseline=1.0,
               noise_sigma=0.005, crosstalk_kappa=0.1)
    cfg.update(overrides)
    return MaterialMode(**cfg)


def wet_cloth(**overrides) -> MaterialMode:
    cfg = dict(name="wet_cloth", alpha=6.0e-2, beta=0.005, baseline=3.0,
               noise_sigma=0.02, crosstalk_kappa=0.1)
    cfg.update(overrides)
    return MaterialMode(**cfg)


def mode_by_name(name: str, **overrides) -> MaterialMode:
    try:
        return {"air_gown": air_gown, "wet_cloth": wet_cloth}[name](**overrides)
    except KeyError:
        raise ValueError(f"unknown material mode {name!r}") from None


@dataclass(frozen=True)
class CapSample:
    c: np.ndarray  # (6,) pF
    t: int  # time step index

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)
        if c.shape != (N_CHANNELS,) or not np.all(np.isfinite(c)):
            raise ValueError("capacitance sample must be 6 finite values")


def surface_distances(limb: LimbModel, points: np.ndarray) -> np.ndarray:
    """Distance from each world point to the limb surface, clamped at D_MIN.

    points: (..., 3). Vectorized over all points and segments.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 3)
    best = np.full(flat.shape[0], np.inf)
    for seg in limb.segments:
        d = seg.b - seg.a
        t = np.clip((flat - seg.a) @ d / np.dot(d, d), 0.0, 1.0)
        closest = seg.a + t[:, None] * d
        best = np.minimum(best, np.linalg.norm(flat - closest, axis=1) - seg.radius)
    return np.maximum(best, D_MIN).reshape(pts.shape[:-1])


def measure(
    limb: LimbModel,
    ee: EePose,
    layout: SensorLayout,
    mode: MaterialMode,
    rng_seed,
    t: int = 0,
) -> CapSample:
    """One six-channel reading for the current pose. Deterministic given
    (limb, ee, layout, mode, rng_seed).

    rng_seed may be an int or anything np.random.default_rng accepts
    (e.g. a SeedSequence for per-step derived streams).
    """
    pts_local = layout.sample_points()  # (6, k^2, 3)
    pts_world = ee.position + pts_local @ ee.rotation.T
    d = surface_distances(limb, pts_world)  # (6, k^2)
    ideal = (mode.alpha / (d + mode.beta)).mean(axis=1)
    mixed = ideal + mode.crosstalk_kappa * (grid_adjacency() @ ideal)
    c = mixed + mode.baseline
    if mode.noise_sigma > 0:
        rng = np.random.default_rng(rng_seed)
        c = c + rng.normal(0.0, mode.noise_sigma, size=N_CHANNELS)
    return CapSample(c, t)


class CapWindow:
    """Rolling buffer of the last H_WINDOW six-channel samples.

    Emits the flattened 300-vector (time-major, oldest first) only once
    H_WINDOW samples have been pushed.
    """

    def __init__(self, h: int = H_WINDOW):
        self.h = h
        self._buf = np.zeros((h, N_CHANNELS))
        self._count = 0

    @property
    def full(self) -> bool:
        return self._count >= self.h

    def push(self, sample: CapSample) -> np.ndarray | None:
        self._buf = np.roll(self._buf, -1, axis=0)
        self._buf[-1] = sample.c
        self._count += 1
        if not self.full:
            return None
        return self._buf.reshape(-1).copy()

    def reset(self):
        self._buf[:] = 0.0
        self._count = 0


def push_and_window(buf: CapWindow, s: CapSample) -> np.ndarray | None:
    return buf.push(s)
