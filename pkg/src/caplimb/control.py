"""PD contour following along a limb from estimated relative pose.

The loop senses at 100 Hz and updates actions every tau sensing steps from
the estimator's output. Actions are incremental displacements/rotations
applied in the end effector's own up-based frame (X along the ee heading,
Z toward world up); the end effector additionally advances at a constant
traversal speed along its own X axis. Force is checked every sensing step;
a breach latches the abort flag and no further action is issued.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DegenerateFrame,
    EePose,
    LimbModel,
    RelPose,
    limb_frame,
    orientation_from_x,
    pose_from_rel,
    relative_pose,
    distance_to_limb_axis,
    surface_gap,
    x_from_angles,
)
from .datagen import TargetSpace
from .mlp import MlpParams, predict
from .sensor import CapWindow, MaterialMode, SensorLayout, measure


class ModelNonFinite(RuntimeError):
    pass


@dataclass(frozen=True)
class Gains:
    kp: np.ndarray  # diagonal entries, (4,)
    kd: np.ndarray  # diagonal entries, (4,)

    def __post_init__(self):
        kp = np.asarray(self.kp, dtype=float)
        kd = np.asarray(self.kd, dtype=float)
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "kd", kd)
        if kp.shape != (4,) or kd.shape != (4,) or (kp < 0).any() or (kd < 0).any():
            raise ValueError("gains must be 4 non-negative diagonal entries")


def smooth_gains() -> Gains:
    return Gains(np.array([0.025, 0.025, 0.1, 0.1]),
                 np.array([0.0125, 0.0125, 0.025, 0.025]))


def responsive_gains() -> Gains:
    return Gains(np.array([0.2, 0.2, 0.1, 0.1]),
                 np.array([0.0125, 0.0125, 0.025, 0.025]))


GAIN_PRESETS = {"smooth": smooth_gains, "responsive": responsive_gains}


@dataclass(frozen=True)
class ClothParams:
    """Linear-spring washcloth contact model."""

    stiffness: float = 600.0  # N/m
    rest_thickness: float = 0.015  # m


@dataclass(frozen=True)
class ControlConfig:
    y_desired: RelPose
    traversal_speed: float = 0.02  # m/s along X_ee
    sense_rate_hz: float = 100.0
    tau: int = 10  # sensing steps between action updates
    force_threshold: float = 10.0  # N (10 dressing, 20 bathing)

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.force_threshold <= 0:
            raise ValueError("force_threshold must be > 0")

    @property
    def dt_sense(self) -> float:
        return 1.0 / self.sense_rate_hz

    @property
    def dt_action(self) -> float:
        return self.tau / self.sense_rate_hz


# Error bounds for poses within the (10%-expanded) data-collection target
# space; used to clamp actions as a runtime safety bound.
E_MAX = np.array([0.20, 0.15, np.pi / 4, np.pi / 4])


def compute_error(y_desired: RelPose, y_hat: np.ndarray) -> np.ndarray:
    return y_desired.as_array() - np.asarray(y_hat, dtype=float)


def compute_action(e: np.ndarray, e_prev: np.ndarray, dt: float, g: Gains) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be > 0")
    return g.kp * e + g.kd * (e - e_prev) / dt


def action_bound(g: Gains, dt: float) -> np.ndarray:
    return g.kp * E_MAX + g.kd * (2 * E_MAX) / dt


def clamp_action(u: np.ndarray, g: Gains, dt: float) -> np.ndarray:
    b = action_bound(g, dt)
    return np.clip(u, -b, b)


def transform_action(
    u: np.ndarray,
    ee: EePose,
    frame: tuple[np.ndarray, np.ndarray, np.ndarray],
    travel: float = 0.0,
) -> EePose:
    """Apply a frame-relative action (dy, dz, dtheta_y, dtheta_z) to the
    pose, plus a traversal advance along the current X_ee."""
    x_hat, y_hat, z_hat = frame
    pos = ee.position + u[0] * y_hat + u[1] * z_hat + travel * ee.x_axis
    ux = np.array([np.dot(ee.x_axis, x_hat), np.dot(ee.x_axis, y_hat),
                   np.dot(ee.x_axis, z_hat)])
    tz = np.arctan2(ux[1], ux[0])
    ty = np.arctan2(ux[2], np.hypot(ux[0], ux[1]))
    x_new = x_from_angles(x_hat, y_hat, z_hat, ty + u[2], tz + u[3])
    return EePose(pos, orientation_from_x(x_new))


def contact_force(limb: LimbModel, ee: EePose, cloth: ClothParams) -> float:
    """Spring force from washcloth compression against the limb surface."""
    gap = surface_gap(limb, ee.position)
    return cloth.stiffness * max(0.0, cloth.rest_thickness - gap)


class ModelEstimator:
    """Estimator backed by the trained regressor.

    Raw network outputs are clipped to the data-collection envelope plus its
    10% transit slack: outside that region the regressor extrapolates and a
    wrong-signed estimate can drive the orientation loop divergently."""

    def __init__(self, params: MlpParams, envelope: TargetSpace | None = None):
        self.params = params
        self.envelope = envelope or TargetSpace()

    def __call__(self, window: np.ndarray, limb: LimbModel, ee: EePose) -> np.ndarray:
        y = np.asarray(predict(self.params, window), dtype=float)
        return self.envelope.clip(y, slack=0.1)


class OracleEstimator:
    """Test double returning ground-truth relative pose."""

    def __call__(self, window: np.ndarray, limb: LimbModel, ee: EePose) -> np.ndarray:
        return relative_pose(limb, ee).as_array()


@dataclass
class TrialLog:
    """Per-sensing-step trace of one trial plus a summary."""

    t: np.ndarray  # (n,) seconds
    position: np.ndarray  # (n, 3)
    x_axis: np.ndarray  # (n, 3)
    gt: np.ndarray  # (n, 4) ground-truth relative pose
    pred: np.ndarray  # (n, 4) latest estimate (NaN until window fills)
    cap: np.ndarray  # (n, 6)
    force: np.ndarray  # (n,)
    action: np.ndarray  # (n, 4) latest action
    axis_dist: np.ndarray  # (n,) distance to limb central axis
    travel: np.ndarray  # (n,) accumulated traversal arclength
    summary: dict

    COLUMNS = (
        ["t", "pos_x", "pos_y", "pos_z", "xax_x", "xax_y", "xax_z"]
        + ["gt_p_y", "gt_p_z", "gt_theta_y", "gt_theta_z"]
        + ["pred_p_y", "pred_p_z", "pred_theta_y", "pred_theta_z"]
        + [f"c{i}" for i in range(6)]
        + ["force", "u_y", "u_z", "u_theta_y", "u_theta_z", "axis_dist", "travel"]
    )

    def matrix(self) -> np.ndarray:
        return np.column_stack([
            self.t, self.position, self.x_axis, self.gt, self.pred,
            self.cap, self.force, self.action, self.axis_dist, self.travel,
        ])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.matrix(), delimiter=",", fmt="%.17g",
                   header=",".join(self.COLUMNS), comments="")

    @classmethod
    def from_csv(cls, path, summary: dict | None = None) -> "TrialLog":
        m = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(
            t=m[:, 0], position=m[:, 1:4], x_axis=m[:, 4:7], gt=m[:, 7:11],
            pred=m[:, 11:15], cap=m[:, 15:21], force=m[:, 21],
            action=m[:, 22:26], axis_dist=m[:, 26], travel=m[:, 27],
            summary=summary or {},
        )

    def __len__(self) -> int:
        return len(self.t)

    def recompute_summary(self) -> dict:
        # contact maintenance is judged from first touch, so the initial
        # descent from the hover start does not count against it
        contact = self.force > 0.0
        if contact.any():
            fraction = float(np.mean(contact[int(np.argmax(contact)):]))
        else:
            fraction = 0.0
        out = dict(self.summary)
        out.update(
            mean_axis_dist=float(np.mean(self.axis_dist)) if len(self) else np.nan,
            std_axis_dist=float(np.std(self.axis_dist)) if len(self) else np.nan,
            mean_force=float(np.mean(self.force)) if len(self) else np.nan,
            contact_fraction=fraction,
            completion_arclength=float(self.travel[-1]) if len(self) else 0.0,
        )
        return out


class ControlLoop:
    """Stepable contour-following simulation (one sensing step at a time)."""

    def __init__(
        self,
        limb_provider,  # t (s) -> LimbModel
        estimator,  # (window, limb, ee) -> (4,) estimate
        cfg: ControlConfig,
        gains: Gains,
        mode: MaterialMode,
        seed: int,
        layout: SensorLayout | None = None,
        cloth: ClothParams | None = None,
        start_arclength: float = 0.02,
    ):
        self.limb_provider = limb_provider
        self.estimator = estimator
        self.cfg = cfg
        self.gains = gains
        self.mode = mode
        self.layout = layout or SensorLayout()
        self.cloth = cloth
        limb0 = limb_provider(0.0)
        self.travel_goal = limb0.chain_length - start_arclength
        self.ee = pose_from_rel(limb0, start_arclength, cfg.y_desired)
        self.window = CapWindow()
        self._noise_seeds = np.random.SeedSequence(seed)
        self.i = 0
        self.travelled = 0.0
        self.aborted = False
        self.abort_reason: str | None = None
        self.done = False
        self._e_prev: np.ndarray | None = None
        self._last_pred = np.full(4, np.nan)
        self._last_u = np.zeros(4)
        self._rows = []

    @property
    def t(self) -> float:
        return self.i * self.cfg.dt_sense

    def step(self) -> bool:
        """Advance one sensing step. Returns True while the trial is live."""
        if self.done:
            return False
        cfg = self.cfg
        limb = self.limb_provider(self.t)
        sample = measure(limb, self.ee, self.layout, self.mode,
                         self._noise_seeds.spawn(1)[0], t=self.i)
        w = self.window.push(sample)
        force = contact_force(limb, self.ee, self.cloth) if self.cloth else 0.0
        gt = relative_pose(limb, self.ee).as_array()

        self._rows.append((
            self.t, self.ee.position.copy(), self.ee.x_axis.copy(), gt,
            self._last_pred.copy(), sample.c.copy(), force,
            self._last_u.copy(), distance_to_limb_axis(limb, self.ee.position),
            self.travelled,
        ))

        # force guard runs at the sensing rate, ahead of any action
        if force >= cfg.force_threshold:
            self._abort("force_breach")
            return False

        acted = False
        if w is not None and self.i % cfg.tau == 0 and not self.aborted:
            y_hat = np.asarray(self.estimator(w, limb, self.ee), dtype=float)
            if not np.all(np.isfinite(y_hat)):
                self._abort("model_non_finite")
                return False
            self._last_pred = y_hat
            e = compute_error(cfg.y_desired, y_hat)
            e_prev = e if self._e_prev is None else self._e_prev
            u = clamp_action(
                compute_action(e, e_prev, cfg.dt_action, self.gains),
                self.gains, cfg.dt_action,
            )
            self._e_prev = e
            self._last_u = u
            frame = limb_frame(self.ee.x_axis)
            self.ee = transform_action(u, self.ee, frame)
            acted = True

        advance = cfg.traversal_speed * cfg.dt_sense
        self.ee = EePose(self.ee.position + advance * self.ee.x_axis,
                         self.ee.rotation)
        self.travelled += advance
        self.i += 1
        if self.travelled >= self.travel_goal:
            self.done = True
        return not self.done

    def _abort(self, reason: str):
        self.aborted = True
        self.abort_reason = reason
        self.done = True

    def action_step_due(self) -> bool:
        return self.window.full and self.i % self.cfg.tau == 0

    def finish(self) -> TrialLog:
        rows = self._rows
        n = len(rows)
        log = TrialLog(
            t=np.array([r[0] for r in rows]),
            position=np.array([r[1] for r in rows]).reshape(n, 3),
            x_axis=np.array([r[2] for r in rows]).reshape(n, 3),
            gt=np.array([r[3] for r in rows]).reshape(n, 4),
            pred=np.array([r[4] for r in rows]).reshape(n, 4),
            cap=np.array([r[5] for r in rows]).reshape(n, 6),
            force=np.array([r[6] for r in rows]),
            action=np.array([r[7] for r in rows]).reshape(n, 4),
            axis_dist=np.array([r[8] for r in rows]),
            travel=np.array([r[9] for r in rows]),
            summary={
                "aborted": self.aborted,
                "abort_reason": self.abort_reason,
                "completed": self.done and not self.aborted,
            },
        )
        log.summary = log.recompute_summary()
        return log


def run_control_loop(
    limb_provider,
    estimator,
    cfg: ControlConfig,
    gains: Gains,
    mode: MaterialMode,
    seed: int,
    layout: SensorLayout | None = None,
    cloth: ClothParams | None = None,
    start_arclength: float = 0.02,
    max_steps: int = 200_000,
) -> TrialLog:
    """Run a full trial to completion (end of limb, abort, or step cap)."""
    loop = ControlLoop(limb_provider, estimator, cfg, gains, mode, seed,
                       layout=layout, cloth=cloth,
                       start_arclength=start_arclength)
    while loop.step():
        if loop.i >= max_steps:
            loop._abort("step_cap")
            break
    return loop.finish()
