"""Training-data collection: random target sweeps over limb sites.

Each iteration samples a target relative pose inside the bounded target
space and a pair of velocity norms, then steps the simulated end effector
along a straight line in (p_y, p_z, theta_y, theta_z) space at the sensing
rate, recording (capacitance window, ground-truth relative pose) pairs.

The end effector moves continuously from one target to the next, so the
rolling window stays valid across iterations; recording is gated on the
session step counter reaching the window length.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import dataio
from .geometry import LimbModel, pose_from_rel, relative_pose, RelPose, Capsule
from .sensor import CapWindow, MaterialMode, SensorLayout, measure, mode_by_name

SITES = ("wrist", "forearm", "upper_arm", "ankle", "shin", "knee")
SITE_CODES = {name: i for i, name in enumerate(SITES)}
# Anchor locations as fractions of limb arclength measured from the distal end.
SITE_FRACTIONS = {
    "wrist": 0.15, "forearm": 0.45, "upper_arm": 0.80,
    "ankle": 0.15, "shin": 0.45, "knee": 0.80,
}

POS_TOL = 0.002  # m, "close enough to target" per position component
ANG_TOL = 0.01  # rad, per angle component


class AnchorOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class TargetSpace:
    p_y: tuple[float, float] = (-0.10, 0.10)
    p_z: tuple[float, float] = (0.0, 0.15)
    theta_y: tuple[float, float] = (-np.pi / 8, np.pi / 8)
    theta_z: tuple[float, float] = (-np.pi / 8, np.pi / 8)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([
            rng.uniform(*self.p_y),
            rng.uniform(*self.p_z),
            rng.uniform(*self.theta_y),
            rng.uniform(*self.theta_z),
        ])

    def clip(self, y: np.ndarray, slack: float = 0.0) -> np.ndarray:
        """Clip a pose 4-vector to the envelope, expanded by ``slack`` times
        each range. NaN entries pass through unchanged."""
        bounds = (self.p_y, self.p_z, self.theta_y, self.theta_z)
        lo = np.array([l - slack * (h - l) for l, h in bounds])
        hi = np.array([h + slack * (h - l) for l, h in bounds])
        return np.clip(np.asarray(y, dtype=float), lo, hi)

    def contains(self, y: np.ndarray, slack: float = 0.0) -> bool:
        for val, (lo, hi) in zip(y, (self.p_y, self.p_z, self.theta_y, self.theta_z)):
            pad = slack * (hi - lo)
            if not (lo - pad <= val <= hi + pad):
                return False
        return True


@dataclass(frozen=True)
class VelocitySpec:
    """Velocity sampling ranges: translational norm in m/s, angular in rad/s."""

    v_p_norm: tuple[float, float] = (0.03, 0.10)
    v_theta_norm: tuple[float, float] = (np.pi / 20, np.pi / 8)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Sample (v_p, v_theta) 2-vectors: direction uniform on the circle,
        norm uniform in range."""
        out = []
        for lo, hi in (self.v_p_norm, self.v_theta_norm):
            ang = rng.uniform(0.0, 2 * np.pi)
            norm = rng.uniform(lo, hi)
            out.append(norm * np.array([np.cos(ang), np.sin(ang)]))
        return out[0], out[1]


@dataclass
class Dataset:
    windows: np.ndarray  # (n, 300) float32
    y: np.ndarray  # (n, 4) float64
    sites: np.ndarray  # (n,) uint8, index into SITES
    iteration: np.ndarray  # (n,) uint32, collection iteration of each record
    mode: str
    metadata: dict  # seed, n_iters, sample_rate_hz, ...

    def __len__(self) -> int:
        return self.windows.shape[0]

    def split_groups(self) -> np.ndarray:
        """Group labels for the train/validation split: the iteration rank
        within each site. Holding out the highest-valued groups then holds
        out the same fraction of iterations at every site, instead of the
        tail of whichever site was merged last."""
        out = np.zeros(len(self), dtype=np.int64)
        for s in np.unique(self.sites):
            m = self.sites == s
            _, ranks = np.unique(self.iteration[m], return_inverse=True)
            out[m] = ranks
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.metadata == other.metadata
            and all(
                a.dtype == b.dtype and np.array_equal(a, b)
                for a, b in (
                    (self.windows, other.windows),
                    (self.y, other.y),
                    (self.sites, other.sites),
                    (self.iteration, other.iteration),
                )
            )
        )


def merge_datasets(parts: list[Dataset]) -> Dataset:
    if not parts:
        raise ValueError("no datasets to merge")
    mode = parts[0].mode
    if any(p.mode != mode for p in parts):
        raise ValueError("cannot merge datasets with mixed material modes")
    # keep iteration ids disjoint so group-wise splits stay leak-free
    iters = []
    offset = 0
    for p in parts:
        iters.append(p.iteration.astype(np.uint32) + offset)
        offset += int(p.iteration.max()) + 1 if len(p) else 0
    return Dataset(
        windows=np.concatenate([p.windows for p in parts]),
        y=np.concatenate([p.y for p in parts]),
        sites=np.concatenate([p.sites for p in parts]),
        iteration=np.concatenate(iters),
        mode=mode,
        metadata={"merged": [p.metadata for p in parts]},
    )


def _traj_steps(y0, y_t, v_p: float, v_th: float, rate_hz: float) -> int:
    dp = np.linalg.norm(y_t[:2] - y0[:2])
    dth = np.linalg.norm(y_t[2:] - y0[2:])
    duration = max(dp / v_p, dth / v_th)
    return max(1, int(np.ceil(duration * rate_hz)))


def sweep_steps(space: TargetSpace, vel: VelocitySpec, n_iters: int,
                rng: np.random.Generator, rate_hz: float = 100.0):
    """Yield (iteration, y) for every sensing step of a collection run.

    Each iteration sweeps linearly from the current pose toward a sampled
    target until every position component is within POS_TOL and every angle
    within ANG_TOL; the pose is continuous across iterations.
    """
    y = np.zeros(4)
    for i in range(n_iters):
        y_target = space.sample(rng)
        v_p, v_th = vel.sample(rng)
        steps = _traj_steps(y, y_target, np.linalg.norm(v_p),
                            np.linalg.norm(v_th), rate_hz)
        y_start = y.copy()
        for k in range(steps):
            if (np.max(np.abs(y[:2] - y_target[:2])) < POS_TOL
                    and np.max(np.abs(y[2:] - y_target[2:])) < ANG_TOL):
                break
            yield i, y.copy()
            frac = min(1.0, (k + 1) / steps)
            y = y_start + frac * (y_target - y_start)


def count_records(n_iters: int, seed: int, h: int = 50,
                  space: TargetSpace | None = None,
                  vel: VelocitySpec | None = None,
                  rate_hz: float = 100.0) -> tuple[int, int]:
    """(total_steps, recorded_pairs) for a seeded run, without the sensor.

    Consumes the same RNG draws as collect_site, so counts match exactly.
    """
    space = space or TargetSpace()
    vel = vel or VelocitySpec()
    rng = np.random.default_rng(seed)
    steps = sum(1 for _ in sweep_steps(space, vel, n_iters, rng, rate_hz))
    return steps, max(0, steps - h)


def collect_site(
    limb: LimbModel,
    site_anchor: float,
    space: TargetSpace,
    n_iters: int,
    mode: MaterialMode,
    seed: int,
    site: str = "forearm",
    layout: SensorLayout | None = None,
    vel: VelocitySpec | None = None,
    rate_hz: float = 100.0,
) -> Dataset:
    """Run the data-collection loop at one limb site.

    The end effector starts on the limb surface at the anchor with zero
    relative pose and sweeps to successive random targets. Ground truth is
    read back from the simulation geometry at each step.
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    if not 0.0 <= site_anchor <= limb.chain_length:
        raise AnchorOutOfRange(
            f"anchor {site_anchor} outside [0, {limb.chain_length}]"
        )
    layout = layout or SensorLayout()
    vel = vel or VelocitySpec()
    rng = np.random.default_rng(seed)
    noise_seeds = np.random.SeedSequence(seed)
    window = CapWindow()

    windows, ys, iter_ids = [], [], []
    t = 0
    for i, y in sweep_steps(space, vel, n_iters, rng, rate_hz):
        ee = pose_from_rel(limb, site_anchor, RelPose.from_array(y))
        sample = measure(limb, ee, layout, mode, noise_seeds.spawn(1)[0], t=t)
        w = window.push(sample)
        if w is not None and t >= window.h:
            windows.append(w.astype(np.float32))
            ys.append(relative_pose(limb, ee).as_array())
            iter_ids.append(i)
        t += 1

    n = len(windows)
    return Dataset(
        windows=np.array(windows, dtype=np.float32).reshape(n, -1),
        y=np.array(ys, dtype=np.float64).reshape(n, 4),
        sites=np.full(n, SITE_CODES[site], dtype=np.uint8),
        iteration=np.array(iter_ids, dtype=np.uint32),
        mode=mode.name,
        metadata={
            "seed": seed, "n_iters": n_iters, "sample_rate_hz": rate_hz,
            "site": site, "anchor": site_anchor, "total_steps": t,
        },
    )


def straight_limb(kind: str = "arm") -> LimbModel:
    """Straight two-segment limb used for data collection, distal end at the
    origin, axis along +X at shoulder height z=0."""
    if kind == "arm":
        lengths, radii = (0.28, 0.30), (0.04, 0.05)  # forearm, upper arm
    elif kind == "leg":
        lengths, radii = (0.42, 0.44), (0.05, 0.07)  # shin, thigh
    else:
        raise ValueError(f"unknown limb kind {kind!r}")
    a = np.zeros(3)
    segs = []
    for length, r in zip(lengths, radii):
        b = a + np.array([length, 0.0, 0.0])
        segs.append(Capsule(a, b, r))
        a = b
    return LimbModel(tuple(segs), joint_angle=0.0, kind=kind)


def collect_limb(
    kind: str,
    n_iters: int,
    mode: MaterialMode,
    seed: int,
    rate_hz: float = 100.0,
) -> Dataset:
    """Collect all three sites of one limb with derived per-site seeds."""
    limb = straight_limb(kind)
    sites = SITES[:3] if kind == "arm" else SITES[3:]
    space = TargetSpace()
    parts = []
    for j, site in enumerate(sites):
        anchor = SITE_FRACTIONS[site] * limb.chain_length
        parts.append(collect_site(
            limb, anchor, space, n_iters, mode, seed + j,
            site=site, rate_hz=rate_hz,
        ))
    return merge_datasets(parts)


def save_dataset(d: Dataset, path) -> None:
    dataio.write_container(
        path, dataio.DATASET_MAGIC,
        {"mode": d.mode, **{k: v for k, v in d.metadata.items()}},
        {"windows": d.windows, "y": d.y, "sites": d.sites,
         "iteration": d.iteration},
    )


def load_dataset(path) -> Dataset:
    meta, arrays = dataio.read_container(path, dataio.DATASET_MAGIC)
    mode = meta.pop("mode")
    return Dataset(
        windows=arrays["windows"], y=arrays["y"], sites=arrays["sites"],
        iteration=arrays["iteration"], mode=mode, metadata=meta,
    )


def export_csv(d: Dataset, path) -> None:
    """Flat CSV export: one row per record, window columns then targets."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            [f"c{i}" for i in range(d.windows.shape[1])]
            + ["p_y", "p_z", "theta_y", "theta_z", "site", "iteration"]
        )
        for i in range(len(d)):
            w.writerow(
                list(d.windows[i]) + list(d.y[i])
                + [SITES[d.sites[i]], int(d.iteration[i])]
            )
