// Scene-graph construction: turn a StateUpdate into plain drawable shapes
// for two orthographic views. Pure data in, pure data out, so the whole
// projection pipeline is testable without a canvas.

import { StateUpdate } from "./protocol.js";

export type Vec3 = [number, number, number];
export type Vec2 = [number, number];

export type View = "side" | "top";

export interface Viewport {
  width: number;
  height: number;
  /** world meters per CSS pixel */
  scale: number;
  /** world point mapped to the viewport center */
  center: Vec2;
}

export interface CapsuleShape {
  kind: "capsule";
  a: Vec2; // projected axis endpoints, px
  b: Vec2;
  radiusPx: number;
}

export interface MarkerShape {
  kind: "marker";
  at: Vec2;
  label: "ee" | "closest_pred" | "closest_gt";
}

export interface ArrowShape {
  kind: "arrow";
  from: Vec2;
  to: Vec2;
  label: "x_axis";
}

export type Shape = CapsuleShape | MarkerShape | ArrowShape;

export interface Scene {
  view: View;
  shapes: Shape[];
}

/** Orthographic world->view-plane projection: side = (x, z), top = (x, y). */
export function projectWorld(p: Vec3, view: View): Vec2 {
  return view === "side" ? [p[0], p[2]] : [p[0], p[1]];
}

export function toPixels(p: Vec2, vp: Viewport): Vec2 {
  const x = vp.width / 2 + (p[0] - vp.center[0]) / vp.scale;
  // +y/+z world goes up on screen
  const y = vp.height / 2 - (p[1] - vp.center[1]) / vp.scale;
  return [x, y];
}

/** Nearest point on the segment chain to a query, plus the surface point
 * below the query (used to mark where the controller thinks the limb is). */
export function closestOnChain(
  joints: Vec3[],
  radii: number[],
  q: Vec3
): { surface: Vec3; dist: number } {
  let best: { surface: Vec3; dist: number } | null = null;
  for (let i = 0; i + 1 < joints.length; i++) {
    const a = joints[i];
    const b = joints[i + 1];
    const d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    const qa = [q[0] - a[0], q[1] - a[1], q[2] - a[2]];
    const dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let t = (qa[0] * d[0] + qa[1] * d[1] + qa[2] * d[2]) / dd;
    t = Math.max(0, Math.min(1, t));
    const p: Vec3 = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
    const v: Vec3 = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    const n = Math.hypot(v[0], v[1], v[2]);
    if (n === 0) continue;
    const r = radii[i];
    const surface: Vec3 = [
      p[0] + (r / n) * v[0],
      p[1] + (r / n) * v[1],
      p[2] + (r / n) * v[2],
    ];
    const dist = n - r;
    if (best === null || dist < best.dist) best = { surface, dist };
  }
  if (best === null) {
    return { surface: q, dist: 0 };
  }
  return best;
}

export function buildScene(u: StateUpdate, view: View, vp: Viewport): Scene {
  const shapes: Shape[] = [];
  const px = (p: Vec3) => toPixels(projectWorld(p, view), vp);

  for (let i = 0; i + 1 < u.limb_joints.length; i++) {
    shapes.push({
      kind: "capsule",
      a: px(u.limb_joints[i]),
      b: px(u.limb_joints[i + 1]),
      radiusPx: u.limb_radii[i] / vp.scale,
    });
  }

  const ee = u.ee_position;
  shapes.push({ kind: "marker", at: px(ee), label: "ee" });

  const tip: Vec3 = [
    ee[0] + 0.06 * u.ee_x_axis[0],
    ee[1] + 0.06 * u.ee_x_axis[1],
    ee[2] + 0.06 * u.ee_x_axis[2],
  ];
  shapes.push({ kind: "arrow", from: px(ee), to: px(tip), label: "x_axis" });

  // ground-truth closest surface point under the end effector
  const gt = closestOnChain(u.limb_joints, u.limb_radii, ee);
  shapes.push({ kind: "marker", at: px(gt.surface), label: "closest_gt" });

  // the model's belief: the surface sits pred.p_z below the end effector
  // along world up (adequate for display; the exact frame lives server-side)
  const predSurface: Vec3 = [ee[0], ee[1], ee[2] - u.pred[1]];
  shapes.push({
    kind: "marker",
    at: px(predSurface),
    label: "closest_pred",
  });

  return { view, shapes };
}

/** Viewport that fits the whole limb with a margin, for a square canvas. */
export function fitViewport(
  u: StateUpdate,
  view: View,
  width: number,
  height: number
): Viewport {
  const pts = [...u.limb_joints, u.ee_position].map((p) =>
    projectWorld(p, view)
  );
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const margin = 0.15;
  const spanX = Math.max(...xs) - Math.min(...xs) + 2 * margin;
  const spanY = Math.max(...ys) - Math.min(...ys) + 2 * margin;
  const scale = Math.max(spanX / width, spanY / height);
  const center: Vec2 = [
    (Math.max(...xs) + Math.min(...xs)) / 2,
    (Math.max(...ys) + Math.min(...ys)) / 2,
  ];
  return { width, height, scale, center };
}
