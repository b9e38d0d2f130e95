import { describe, expect, it } from "vitest";
import {
  BEND_CLAMP,
  MAX_HAND_EXCURSION,
  angleClamp,
  bendCommand,
  clampAngle,
  dragToCommand,
  handRadius,
} from "./input.js";
import { validUpdate } from "./protocol.test.js";

describe("handRadius", () => {
  it("measures the horizontal pivot-to-hand distance", () => {
    const u = validUpdate();
    // joints run (0,0,.25) -> (0.58,0,.25); ee sits near x=0.1, so the hand
    // end is the first joint and the pivot the last
    expect(handRadius(u)).toBeCloseTo(0.58, 12);
  });

  it("ignores the vertical component", () => {
    const u = validUpdate();
    u.limb_joints = [
      [0, 0, 0.9],
      [0.3, 0.4, 0.25],
    ];
    u.ee_position = [0, 0, 1.0];
    expect(handRadius(u)).toBeCloseTo(0.5, 12);
  });
});

describe("angleClamp", () => {
  it("is asin(excursion / radius) for a long limb", () => {
    const u = validUpdate();
    expect(angleClamp(u)).toBeCloseTo(Math.asin(MAX_HAND_EXCURSION / 0.58), 12);
  });

  it("saturates at a quarter turn for short limbs", () => {
    const u = validUpdate();
    u.limb_joints = [
      [0, 0, 0.25],
      [0.1, 0, 0.25],
    ];
    u.limb_radii = [0.04];
    u.ee_position = [0, 0, 0.3];
    expect(angleClamp(u)).toBeCloseTo(Math.PI / 2, 12);
  });
});

describe("clampAngle", () => {
  it("is the identity inside the limit and saturates outside", () => {
    expect(clampAngle(0.1, 0.3)).toBe(0.1);
    expect(clampAngle(0.5, 0.3)).toBe(0.3);
    expect(clampAngle(-0.5, 0.3)).toBe(-0.3);
  });
});

describe("dragToCommand", () => {
  const start = { tilt: 0, yaw: 0, bend: 0 };

  it("maps an upward drag to positive tilt", () => {
    const cmd = dragToCommand(start, 0, -60, validUpdate());
    expect(cmd.shoulder_tilt).toBeCloseTo(0.2, 12);
    expect(cmd.shoulder_yaw).toBe(0);
  });

  it("clamps a large drag to the motion envelope", () => {
    const u = validUpdate();
    const cmd = dragToCommand(start, 0, -150, u);
    expect(cmd.shoulder_tilt).toBeCloseTo(angleClamp(u), 12);
  });

  it("maps a rightward drag to positive yaw", () => {
    const cmd = dragToCommand(start, 60, 0, validUpdate());
    expect(cmd.shoulder_yaw).toBeCloseTo(0.2, 12);
    expect(cmd.shoulder_tilt).toBe(0);
  });

  it("is relative to the drag-start angles", () => {
    const cmd = dragToCommand({ tilt: 0.1, yaw: -0.05, bend: 0.02 }, 30, -30, validUpdate());
    expect(cmd.shoulder_tilt).toBeCloseTo(0.2, 12);
    expect(cmd.shoulder_yaw).toBeCloseTo(0.05, 12);
    expect(cmd.bend_delta).toBeCloseTo(0.02, 12);
  });

  it("never exceeds the motion envelope under random drags", () => {
    const u = validUpdate();
    const limit = angleClamp(u);
    let seed = 42;
    const rand = () => {
      // small deterministic LCG, plenty for a fuzz sweep
      seed = (seed * 1664525 + 1013904223) % 4294967296;
      return seed / 4294967296 - 0.5;
    };
    for (let i = 0; i < 500; i++) {
      const s = { tilt: rand() * 4, yaw: rand() * 4, bend: rand() };
      const cmd = dragToCommand(s, rand() * 4000, rand() * 4000, u);
      expect(Math.abs(cmd.shoulder_tilt)).toBeLessThanOrEqual(limit);
      expect(Math.abs(cmd.shoulder_yaw)).toBeLessThanOrEqual(limit);
      expect(Math.abs(cmd.bend_delta)).toBeLessThanOrEqual(BEND_CLAMP);
    }
  });
});

describe("bendCommand", () => {
  it("adds the delta and clamps to the bend envelope", () => {
    const cmd = bendCommand({ tilt: 0.1, yaw: 0, bend: 0.1 }, 1.0);
    expect(cmd.bend_delta).toBeCloseTo(BEND_CLAMP, 12);
    expect(cmd.shoulder_tilt).toBe(0.1);
  });
});
