"""Configured evaluation trials: limb animation, metrics, and reports.

Scenarios rebuild the evaluation conditions as seeded simulation trials:
static traversal of a bent arm, vertical and lateral arm motion during
dressing, and wet-cloth bathing passes over the leg and arm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from .control import (
    ClothParams,
    ControlConfig,
    GAIN_PRESETS,
    ModelEstimator,
    OracleEstimator,
    TrialLog,
    run_control_loop,
)
from .geometry import Capsule, LimbModel, RelPose
from .mlp import MlpParams
from .sensor import mode_by_name

ARM_LENGTHS = (0.28, 0.30)  # forearm, upper arm (total 0.58 m)
ARM_RADII = (0.04, 0.05)
LEG_LENGTHS = (0.44, 0.42)  # thigh, shin (total 0.86 m, travel hip->ankle)
LEG_RADII = (0.07, 0.05)


class ModeMismatch(ValueError):
    pass


def build_arm(
    elbow_angle: float = 0.0,
    forearm_tilt: float = 0.0,
    shoulder_tilt: float = 0.0,
    shoulder_yaw: float = 0.0,
) -> LimbModel:
    """Arm as forearm+upper-arm capsules, ordered hand to shoulder (+X).

    elbow_angle bends the forearm horizontally; forearm_tilt drops the hand
    below the elbow. shoulder_tilt/yaw rotate the whole limb about the
    shoulder (pitch about world Y, yaw about world up).
    """
    lf, lu = ARM_LENGTHS
    shoulder = np.array([lf + lu, 0.0, 0.0])
    elbow = shoulder - np.array([lu, 0.0, 0.0])
    d_f = np.array([
        np.cos(forearm_tilt) * np.cos(elbow_angle),
        np.cos(forearm_tilt) * np.sin(elbow_angle),
        np.sin(forearm_tilt),
    ])
    hand = elbow - lf * d_f
    pts = [_rotate_about(p, shoulder, shoulder_tilt, shoulder_yaw)
           for p in (hand, elbow, shoulder)]
    return LimbModel(
        (Capsule(pts[0], pts[1], ARM_RADII[0]),
         Capsule(pts[1], pts[2], ARM_RADII[1])),
        joint_angle=elbow_angle, kind="arm",
    )


def build_leg(
    knee_angle: float = 0.0,
    hip_tilt: float = 0.0,
    hip_yaw: float = 0.0,
) -> LimbModel:
    """Leg as thigh+shin capsules, ordered hip to ankle (+X, the bathing
    travel direction)."""
    lt, ls = LEG_LENGTHS
    hip = np.zeros(3)
    knee = hip + np.array([lt, 0.0, 0.0])
    d_s = np.array([np.cos(knee_angle), np.sin(knee_angle), 0.0])
    ankle = knee + ls * d_s
    pts = [_rotate_about(p, hip, hip_tilt, hip_yaw) for p in (hip, knee, ankle)]
    return LimbModel(
        (Capsule(pts[0], pts[1], LEG_RADII[0]),
         Capsule(pts[1], pts[2], LEG_RADII[1])),
        joint_angle=knee_angle, kind="leg",
    )


def _rotate_about(p: np.ndarray, pivot: np.ndarray, tilt: float, yaw: float):
    v = p - pivot
    ct, st = np.cos(tilt), np.sin(tilt)
    v = np.array([ct * v[0] + st * v[2], v[1], -st * v[0] + ct * v[2]])
    cy, sy = np.cos(yaw), np.sin(yaw)
    v = np.array([cy * v[0] - sy * v[1], sy * v[0] + cy * v[1], v[2]])
    return pivot + v


@dataclass(frozen=True)
class Scenario:
    name: str
    limb_kind: str = "arm"  # "arm" or "leg"
    task: str = "dressing"  # "dressing" or "bathing"
    motion: str = "static"  # "static", "vertical", "lateral", "live"
    mode: str = "air_gown"
    bend_angle_deg: float = 30.0  # elbow or knee bend
    forearm_tilt_deg: float = 0.0
    amplitude: float = 0.20  # m, hand motion envelope
    period: float = 16.0  # s, motion period
    gains: str = "smooth"  # "smooth" or "responsive"
    y_desired: tuple = (0.0, 0.05, 0.0, 0.0)
    force_threshold: float = 10.0
    trials: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.amplitude > 0.20 + 1e-12:
            raise ValueError("motion amplitude must be <= 0.20 m")
        if self.motion not in ("static", "vertical", "lateral", "live"):
            raise ValueError(f"unknown motion {self.motion!r}")

    def control_config(self) -> ControlConfig:
        return ControlConfig(
            y_desired=RelPose.from_array(self.y_desired),
            force_threshold=self.force_threshold,
        )

    def cloth(self) -> ClothParams | None:
        return ClothParams() if self.task == "bathing" else None

    def to_file(self, path) -> None:
        with open(path, "w") as f:
            yaml.safe_dump(
                {k: (list(v) if isinstance(v, tuple) else v)
                 for k, v in asdict(self).items()},
                f, sort_keys=False,
            )

    @classmethod
    def from_file(cls, path) -> "Scenario":
        with open(path) as f:
            raw = yaml.safe_load(f)
        if "y_desired" in raw:
            raw["y_desired"] = tuple(raw["y_desired"])
        return cls(**raw)


def static_arm_dressing(**kw) -> Scenario:
    return Scenario(name="static_arm_dressing", **kw)


def vertical_dressing(**kw) -> Scenario:
    return Scenario(name="vertical_dressing", motion="vertical",
                    gains="responsive", **kw)


def lateral_dressing(**kw) -> Scenario:
    return Scenario(name="lateral_dressing", motion="lateral",
                    gains="responsive", **kw)


def leg_bathing(**kw) -> Scenario:
    return Scenario(name="leg_bathing", limb_kind="leg", task="bathing",
                    mode="wet_cloth", gains="responsive",
                    y_desired=(0.0, 0.01, 0.0, 0.0),
                    force_threshold=20.0, **kw)


def arm_bathing(**kw) -> Scenario:
    return Scenario(name="arm_bathing", task="bathing", mode="wet_cloth",
                    gains="responsive", bend_angle_deg=90.0,
                    forearm_tilt_deg=60.0, y_desired=(0.0, 0.01, 0.0, 0.0),
                    force_threshold=20.0, **kw)


BUILTIN_SCENARIOS = {
    "static_arm_dressing": static_arm_dressing,
    "vertical_dressing": vertical_dressing,
    "lateral_dressing": lateral_dressing,
    "leg_bathing": leg_bathing,
    "arm_bathing": arm_bathing,
}


def _base_limb(s: Scenario, tilt: float = 0.0, yaw: float = 0.0,
               bend_delta: float = 0.0) -> LimbModel:
    bend = np.deg2rad(s.bend_angle_deg) + bend_delta
    if s.limb_kind == "arm":
        return build_arm(elbow_angle=bend,
                         forearm_tilt=np.deg2rad(s.forearm_tilt_deg),
                         shoulder_tilt=tilt, shoulder_yaw=yaw)
    return build_leg(knee_angle=bend, hip_tilt=tilt, hip_yaw=yaw)


def _hand_offset(s: Scenario) -> np.ndarray:
    """Distal-end offset from the pivot in the canonical (unrotated) pose."""
    limb = _base_limb(s)
    if s.limb_kind == "arm":
        pivot = limb.segments[-1].b  # shoulder
        hand = limb.segments[0].a
    else:
        pivot = limb.segments[0].a  # hip
        hand = limb.segments[-1].b  # ankle
    return hand - pivot


def animate_limb(s: Scenario, t: float) -> LimbModel:
    """Limb pose at time t for the scenario's scripted motion."""
    if s.motion == "static":
        return _base_limb(s)
    target = s.amplitude * np.sin(2 * np.pi * t / s.period)
    if s.motion == "vertical":
        off = _hand_offset(s)
        # pivot tilt that puts the hand exactly `target` above its start height
        tilt = np.arcsin(target / abs(off[0]))
        if off[0] > 0:
            tilt = -tilt
        return _base_limb(s, tilt=tilt)
    if s.motion == "lateral":
        bend_delta = np.deg2rad(5.0) * np.sin(2 * np.pi * t / s.period)
        off0 = _hand_offset(s)
        off = _hand_offset_with_bend(s, bend_delta)
        r = np.hypot(off[0], off[1])
        phi0 = np.arctan2(off[1], off[0])
        # yaw placing the hand's lateral coordinate exactly at start + target;
        # the arcsin branch must keep cos(yaw + phi0) the sign of cos(phi0)
        val = np.arcsin(np.clip((off0[1] + target) / r, -1.0, 1.0))
        theta = val if off[0] >= 0 else np.pi - val
        yaw = (theta - phi0 + np.pi) % (2 * np.pi) - np.pi
        return _base_limb(s, yaw=yaw, bend_delta=bend_delta)
    raise ValueError(f"animate_limb cannot script motion {s.motion!r}")


def _hand_offset_with_bend(s: Scenario, bend_delta: float) -> np.ndarray:
    limb = _base_limb(s, bend_delta=bend_delta)
    if s.limb_kind == "arm":
        return limb.segments[0].a - limb.segments[-1].b
    return limb.segments[-1].b - limb.segments[0].a


def run_scenario(
    s: Scenario,
    model: MlpParams | None,
    model_mode: str | None = None,
    oracle: bool = False,
    trials: int | None = None,
) -> tuple[list[TrialLog], dict]:
    """Execute seeded trials and summarize them.

    With oracle=True a ground-truth estimator replaces the model (controller
    diagnostics). Otherwise model_mode must match the scenario's material
    mode.
    """
    if not oracle:
        if model is None:
            raise ValueError("model required unless oracle=True")
        if model_mode is not None and model_mode != s.mode:
            raise ModeMismatch(
                f"model trained for {model_mode!r}, scenario uses {s.mode!r}"
            )
    mode = mode_by_name(s.mode)
    cfg = s.control_config()
    gains = GAIN_PRESETS[s.gains]()
    estimator = OracleEstimator() if oracle else ModelEstimator(model)
    n_trials = trials if trials is not None else s.trials
    logs = []
    for k in range(n_trials):
        trial_seed = int(np.random.SeedSequence([s.seed, k]).generate_state(1)[0])
        log = run_control_loop(
            lambda t: animate_limb(s, t), estimator, cfg, gains, mode,
            trial_seed, cloth=s.cloth(),
        )
        log.summary["trial"] = k
        log.summary["success"] = trial_success(s, log)
        logs.append(log)
    return logs, summarize(s, logs)


def trial_success(s: Scenario, log: TrialLog) -> bool:
    if s.task == "dressing":
        return bool(log.summary["completed"])
    return bool(
        log.summary["completed"]
        and log.summary["contact_fraction"] >= 0.95
    )


def summarize(s: Scenario, logs: list[TrialLog]) -> dict:
    succ = sum(1 for log in logs if log.summary["success"])
    mean_pred_pz = [float(np.nanmean(log.pred[:, 1])) for log in logs]
    mean_abs_pred_py = [float(np.nanmean(np.abs(log.pred[:, 0]))) for log in logs]
    return {
        "scenario": s.name,
        "trials": len(logs),
        "successes": succ,
        "mean_axis_dist": float(np.mean([log.summary["mean_axis_dist"] for log in logs])),
        "mean_force": float(np.mean([log.summary["mean_force"] for log in logs])),
        "contact_fraction": float(np.mean([log.summary["contact_fraction"] for log in logs])),
        "mean_est_height": float(np.mean(mean_pred_pz)),
        "mean_abs_est_lateral": float(np.mean(mean_abs_pred_py)),
        "per_trial": [log.summary for log in logs],
    }


def resample_traces(logs: list[TrialLog], n_points: int = 200):
    """Mean +- std of the axis-distance trace on a common arclength axis.

    The common axis spans the overlap of all trials; np.interp hits recorded
    samples exactly, so shared endpoints are preserved.
    """
    if not logs:
        raise ValueError("no trial logs")
    lo = max(log.travel[0] for log in logs)
    hi = min(log.travel[-1] for log in logs)
    grid = np.linspace(lo, hi, n_points)
    traces = np.array([np.interp(grid, log.travel, log.axis_dist) for log in logs])
    return grid, traces.mean(axis=0), traces.std(axis=0)


def emit_report(logs: list[TrialLog], out_dir, summary: dict | None = None):
    """Write per-trial CSVs, a JSON summary, and the mean+-std trace."""
    if not logs:
        raise ValueError("no trial logs to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, log in enumerate(logs):
        log.to_csv(out / f"trial_{i:02d}.csv")
    grid, mean, std = resample_traces(logs)
    np.savetxt(out / "axis_dist_trace.csv",
               np.column_stack([grid, mean, std]), delimiter=",",
               fmt="%.17g", header="travel,mean_axis_dist,std_axis_dist",
               comments="")
    payload = {
        "per_trial": [log.recompute_summary() for log in logs],
    }
    if summary is not None:
        payload["summary"] = summary
    (out / "summary.json").write_text(json.dumps(payload, indent=2, default=str))
    return out
