import { describe, expect, it } from "vitest";
import {
  Vec3,
  buildScene,
  closestOnChain,
  fitViewport,
  projectWorld,
  toPixels,
} from "./scene.js";
import { validUpdate } from "./protocol.test.js";

describe("projection", () => {
  it("side view drops y, top view drops z", () => {
    const p: Vec3 = [1, 2, 3];
    expect(projectWorld(p, "side")).toEqual([1, 3]);
    expect(projectWorld(p, "top")).toEqual([1, 2]);
  });

  it("toPixels maps the center to the canvas center with +y up", () => {
    const vp = { width: 400, height: 300, scale: 0.001, center: [1, 2] as [number, number] };
    expect(toPixels([1, 2], vp)).toEqual([200, 150]);
    const [x, y] = toPixels([1.1, 2.1], vp);
    expect(x).toBeCloseTo(300, 9);
    expect(y).toBeCloseTo(50, 9);
  });
});

describe("closestOnChain", () => {
  const joints: Vec3[] = [
    [0, 0, 0],
    [1, 0, 0],
    [2, 0, 0],
  ];
  const radii = [0.1, 0.1];

  it("finds the surface point straight below a query above the axis", () => {
    const { surface, dist } = closestOnChain(joints, radii, [0.5, 0, 0.5]);
    expect(dist).toBeCloseTo(0.4, 12);
    expect(surface[0]).toBeCloseTo(0.5, 12);
    expect(surface[1]).toBeCloseTo(0, 12);
    expect(surface[2]).toBeCloseTo(0.1, 12);
  });

  it("clamps to segment endpoints past the chain end", () => {
    const { dist } = closestOnChain(joints, radii, [3, 0, 0]);
    expect(dist).toBeCloseTo(0.9, 12);
  });

  it("uses the radius of the nearer segment", () => {
    const r2 = [0.1, 0.3];
    const { dist } = closestOnChain(joints, r2, [1.5, 0, 1]);
    expect(dist).toBeCloseTo(0.7, 12);
  });

  it("reports negative distance inside the capsule", () => {
    const { dist } = closestOnChain(joints, radii, [0.5, 0, 0.05]);
    expect(dist).toBeCloseTo(-0.05, 12);
  });
});

describe("buildScene", () => {
  it("produces one capsule per segment plus three markers and an arrow", () => {
    const u = validUpdate();
    const vp = fitViewport(u, "side", 460, 340);
    const scene = buildScene(u, "side", vp);
    const kinds = scene.shapes.map((s) => s.kind);
    expect(kinds.filter((k) => k === "capsule")).toHaveLength(2);
    expect(kinds.filter((k) => k === "marker")).toHaveLength(3);
    expect(kinds.filter((k) => k === "arrow")).toHaveLength(1);
  });

  it("matches a snapshot for a fixed state update", () => {
    const u = validUpdate();
    const vp = fitViewport(u, "side", 460, 340);
    const scene = buildScene(u, "side", vp);
    const rounded = scene.shapes.map((s) =>
      JSON.parse(JSON.stringify(s, (_k, v) =>
        typeof v === "number" ? Number(v.toFixed(3)) : v
      ))
    );
    expect(rounded).toMatchSnapshot();
  });

  it("places the predicted surface marker pred.p_z below the end effector", () => {
    const u = validUpdate();
    const vp = fitViewport(u, "side", 460, 340);
    const scene = buildScene(u, "side", vp);
    const pred = scene.shapes.find(
      (s) => s.kind === "marker" && s.label === "closest_pred"
    );
    const ee = scene.shapes.find(
      (s) => s.kind === "marker" && s.label === "ee"
    );
    if (pred?.kind !== "marker" || ee?.kind !== "marker") throw new Error();
    expect(pred.at[0]).toBeCloseTo(ee.at[0], 9);
    // lower in the world means larger pixel y
    expect(pred.at[1]).toBeCloseTo(ee.at[1] + u.pred[1] / vp.scale, 9);
  });
});

describe("fitViewport", () => {
  it("keeps every limb point inside the canvas", () => {
    const u = validUpdate();
    for (const view of ["side", "top"] as const) {
      const vp = fitViewport(u, view, 460, 340);
      for (const p of [...u.limb_joints, u.ee_position]) {
        const [x, y] = toPixels(projectWorld(p, view), vp);
        expect(x).toBeGreaterThanOrEqual(0);
        expect(x).toBeLessThanOrEqual(460);
        expect(y).toBeGreaterThanOrEqual(0);
        expect(y).toBeLessThanOrEqual(340);
      }
    }
  });
});
