// Pointer-drag steering: map a drag on the side view to clamped limb
// commands. Dragging up/down tilts the limb pivot, left/right yaws it.

import { LimbCommand, limbCommand } from "./protocol.js";
import { StateUpdate } from "./protocol.js";

// Motion envelope mirrored from the service: hand excursion is capped at
// +-0.20 m, so pivot angles are capped at asin(0.20 / hand radius). The
// service clamps authoritatively; this keeps the UI honest.
export const MAX_HAND_EXCURSION = 0.2; // m
export const BEND_CLAMP = Math.PI / 18; // rad

export interface DragState {
  tilt: number;
  yaw: number;
  bend: number;
}

/** Pivot-to-hand horizontal radius from the current limb joints. The pivot
 * is the chain end farthest from the end effector (shoulder or hip). */
export function handRadius(u: StateUpdate): number {
  const joints = u.limb_joints;
  const first = joints[0];
  const last = joints[joints.length - 1];
  const d = (a: number[], b: number[]) =>
    Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  const ee = u.ee_position;
  const hand = d(first, ee) < d(last, ee) ? first : last;
  const pivot = hand === first ? last : first;
  return Math.hypot(hand[0] - pivot[0], hand[1] - pivot[1]);
}

export function angleClamp(u: StateUpdate): number {
  const r = handRadius(u);
  if (!(r > 0)) return 0;
  return Math.asin(Math.min(1, MAX_HAND_EXCURSION / r));
}

export function clampAngle(value: number, limit: number): number {
  return Math.max(-limit, Math.min(limit, value));
}

/** Convert a drag displacement (CSS px) into a command relative to the
 * drag-start angles. pxPerRadian sets the drag sensitivity. */
export function dragToCommand(
  start: DragState,
  dxPx: number,
  dyPx: number,
  u: StateUpdate,
  pxPerRadian = 300
): LimbCommand {
  const limit = angleClamp(u);
  // dragging up (negative dy) raises the hand: positive tilt
  const tilt = clampAngle(start.tilt - dyPx / pxPerRadian, limit);
  const yaw = clampAngle(start.yaw + dxPx / pxPerRadian, limit);
  const bend = clampAngle(start.bend, BEND_CLAMP);
  return limbCommand(tilt, yaw, bend);
}

export function bendCommand(state: DragState, delta: number): LimbCommand {
  const bend = clampAngle(state.bend + delta, BEND_CLAMP);
  return limbCommand(state.tilt, state.yaw, bend);
}
