"""Live steering service: WebSocket state stream + limb-pose commands.

Wraps the control loop in a session whose limb pose is driven by inbound
commands instead of a scripted trajectory. State updates are published once
per action step as JSON text frames; inbound frames are JSON commands.
Commands are funneled through one ordered queue and consumed once per
sensing step, with angle clamps and a rate limiter so a burst of messages
cannot teleport the limb.
"""

from __future__ import annotations

import asyncio
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, ValidationError

from .control import GAIN_PRESETS, ControlLoop, ModelEstimator, OracleEstimator, TrialLog
from .geometry import LimbModel
from .mlp import MlpParams
from .scenarios import Scenario, _base_limb, _hand_offset
from .sensor import mode_by_name

PROTOCOL_VERSION = 1
# Hand-speed envelope for inbound motion: +-0.20 m at an 8 s period.
ENVELOPE_HAND_SPEED = 0.20 * 2 * np.pi / 8.0  # m/s


class LimbCommand(BaseModel):
    type: Literal["limb_command"] = "limb_command"
    version: int = PROTOCOL_VERSION
    shoulder_tilt: float = 0.0  # rad, pivot pitch target
    shoulder_yaw: float = 0.0  # rad, pivot yaw target
    bend_delta: float = 0.0  # rad, elbow/knee bend offset target
    timestamp: Optional[float] = None


class SessionControl(BaseModel):
    type: Literal["session_control"] = "session_control"
    version: int = PROTOCOL_VERSION
    action: Literal["start", "pause", "reset"]
    scenario: Optional[str] = None
    gains: Optional[Literal["smooth", "responsive"]] = None


class StateUpdate(BaseModel):
    type: Literal["state_update"] = "state_update"
    version: int = PROTOCOL_VERSION
    t: float
    step: int
    ee_position: list[float]
    ee_x_axis: list[float]
    limb_joints: list[list[float]]  # chain joint positions, start to end
    limb_radii: list[float]
    limb_angles: list[float]  # applied (tilt, yaw, bend_delta)
    pred: list[float]  # latest estimate, NaN-free (zeros until window fills)
    gt: list[float]
    force: float
    travel: float
    running: bool
    aborted: bool
    abort_reason: Optional[str] = None
    done: bool = False


class ErrorFrame(BaseModel):
    type: Literal["error"] = "error"
    version: int = PROTOCOL_VERSION
    message: str


@dataclass
class LimbState:
    """Rate-limited live limb angles."""

    tilt: float = 0.0
    yaw: float = 0.0
    bend_delta: float = 0.0
    target_tilt: float = 0.0
    target_yaw: float = 0.0
    target_bend: float = 0.0

    def advance(self, max_step: float, bend_max_step: float):
        self.tilt += np.clip(self.target_tilt - self.tilt, -max_step, max_step)
        self.yaw += np.clip(self.target_yaw - self.yaw, -max_step, max_step)
        self.bend_delta += np.clip(self.target_bend - self.bend_delta,
                                   -bend_max_step, bend_max_step)


class LiveSession:
    """Control loop whose limb pose follows inbound commands."""

    def __init__(self, scenario: Scenario, model: MlpParams | None, seed: int,
                 oracle: bool = False, gains: str | None = None):
        self.scenario = scenario
        self.model = model
        self.seed = seed
        self.oracle = oracle
        self.gains_name = gains or scenario.gains
        self.running = True
        self.command_log: list[tuple[int, dict]] = []
        self._queue: list[dict] = []
        self._lock = threading.Lock()
        self._init_limits()
        self.reset()

    def _init_limits(self):
        off = _hand_offset(self.scenario)
        r = float(np.hypot(off[0], off[1]))
        self.angle_clamp = float(np.arcsin(min(1.0, self.scenario.amplitude / r)))
        self.max_angle_speed = ENVELOPE_HAND_SPEED / r  # rad/s
        self.bend_clamp = np.pi / 18
        self._dt = 0.01

    def reset(self):
        self.limb_state = LimbState()
        estimator = (OracleEstimator() if self.oracle
                     else ModelEstimator(self.model))
        self.loop = ControlLoop(
            self._limb, estimator, self.scenario.control_config(),
            GAIN_PRESETS[self.gains_name](), mode_by_name(self.scenario.mode),
            self.seed, cloth=self.scenario.cloth(),
        )
        self.command_log = []
        with self._lock:
            self._queue = []

    def _limb(self, t: float) -> LimbModel:
        st = self.limb_state
        return _base_limb(self.scenario, tilt=st.tilt, yaw=st.yaw,
                          bend_delta=st.bend_delta)

    def submit(self, cmd: LimbCommand):
        with self._lock:
            self._queue.append(cmd.model_dump(exclude={"timestamp"}))

    def control(self, msg: SessionControl):
        if msg.action == "start":
            self.running = True
        elif msg.action == "pause":
            self.running = False
        elif msg.action == "reset":
            if msg.gains:
                self.gains_name = msg.gains
            self.reset()
            self.running = True

    def _consume_command(self):
        with self._lock:
            pending, self._queue = self._queue, []
        if not pending:
            return
        cmd = pending[-1]  # latest command wins
        self.command_log.append((self.loop.i, cmd))
        st = self.limb_state
        st.target_tilt = float(np.clip(cmd["shoulder_tilt"],
                                       -self.angle_clamp, self.angle_clamp))
        st.target_yaw = float(np.clip(cmd["shoulder_yaw"],
                                      -self.angle_clamp, self.angle_clamp))
        st.target_bend = float(np.clip(cmd["bend_delta"],
                                       -self.bend_clamp, self.bend_clamp))

    def step_sense(self) -> bool:
        """One sensing step: consume a command, move the limb, step control."""
        if not self.running or self.loop.done:
            return False
        self._consume_command()
        max_step = self.max_angle_speed * self._dt
        self.limb_state.advance(max_step, max_step)
        return self.loop.step()

    def step_action(self) -> StateUpdate:
        """Advance one action period (tau sensing steps) and snapshot."""
        for _ in range(self.loop.cfg.tau):
            if not self.step_sense():
                break
        return self.snapshot()

    def snapshot(self) -> StateUpdate:
        loop = self.loop
        limb = self._limb(loop.t)
        joints = [limb.segments[0].a.tolist()] + [s.b.tolist() for s in limb.segments]
        gt = loop._rows[-1][3] if loop._rows else np.zeros(4)
        force = loop._rows[-1][6] if loop._rows else 0.0
        pred = np.nan_to_num(loop._last_pred, nan=0.0)
        st = self.limb_state
        return StateUpdate(
            t=loop.t, step=loop.i,
            ee_position=loop.ee.position.tolist(),
            ee_x_axis=loop.ee.x_axis.tolist(),
            limb_joints=joints,
            limb_radii=[s.radius for s in limb.segments],
            limb_angles=[st.tilt, st.yaw, st.bend_delta],
            pred=pred.tolist(), gt=np.asarray(gt).tolist(),
            force=float(force), travel=loop.travelled,
            running=self.running, aborted=loop.aborted,
            abort_reason=loop.abort_reason, done=loop.done,
        )

    def finish(self) -> TrialLog:
        log = self.loop.finish()
        log.summary["live"] = True
        return log

    def record_session(self, out_dir) -> TrialLog:
        """Persist the trial log and inbound command stream for replay."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        log = self.finish()
        log.to_csv(out / "trial.csv")
        (out / "commands.json").write_text(json.dumps({
            "version": PROTOCOL_VERSION,
            "seed": self.seed,
            "gains": self.gains_name,
            "commands": [
                {"step": s, **cmd} for s, cmd in self.command_log
            ],
        }, indent=2))
        return log


def replay_session(scenario: Scenario, model: MlpParams | None, seed: int,
                   commands: list[tuple[int, dict]], oracle: bool = False,
                   gains: str | None = None, max_steps: int = 200_000) -> TrialLog:
    """Re-run a session from a recorded command stream; deterministic."""
    session = LiveSession(scenario, model, seed, oracle=oracle, gains=gains)
    by_step: dict[int, dict] = {int(s): dict(c) for s, c in commands}
    while not session.loop.done and session.loop.i < max_steps:
        if session.loop.i in by_step:
            session.submit(LimbCommand(**{
                k: v for k, v in by_step[session.loop.i].items()
                if k in ("shoulder_tilt", "shoulder_yaw", "bend_delta")
            }))
        if not session.step_sense():
            break
    return session.finish()


def load_commands(path) -> list[tuple[int, dict]]:
    raw = json.loads(Path(path).read_text())
    return [(c["step"], c) for c in raw["commands"]]


def create_app(scenario: Scenario, model: MlpParams | None = None,
               seed: int = 0, oracle: bool = False,
               realtime: bool = True) -> FastAPI:
    app = FastAPI(title="caplimb live service")
    session = LiveSession(scenario, model, seed, oracle=oracle)
    app.state.session = session

    @app.get("/status")
    def status():
        return session.snapshot()

    @app.post("/session")
    def session_control(msg: SessionControl):
        session.control(msg)
        return session.snapshot()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        try:
            while True:
                # drain inbound frames without blocking the stream
                while True:
                    try:
                        raw = await asyncio.wait_for(ws.receive_text(), timeout=1e-3)
                    except asyncio.TimeoutError:
                        break
                    try:
                        parsed = json.loads(raw)
                        kind = parsed.get("type")
                        if kind == "limb_command":
                            session.submit(LimbCommand(**parsed))
                        elif kind == "session_control":
                            session.control(SessionControl(**parsed))
                        else:
                            raise ValueError(f"unknown message type {kind!r}")
                    except (ValueError, ValidationError) as e:
                        # fault isolation: report, close, keep simulating
                        await ws.send_text(
                            ErrorFrame(message=str(e)).model_dump_json())
                        await ws.close(code=1003)
                        return
                update = await asyncio.to_thread(session.step_action)
                await ws.send_text(update.model_dump_json())
                if update.done:
                    await ws.close()
                    return
                if realtime:
                    await asyncio.sleep(session.loop.cfg.dt_action)
        except WebSocketDisconnect:
            pass

    return app
