import { describe, expect, it } from "vitest";
import {
  PROTOCOL_VERSION,
  ProtocolError,
  StateUpdate,
  limbCommand,
  parseInbound,
  sessionControl,
} from "./protocol.js";

export function validUpdate(): StateUpdate {
  return {
    type: "state_update",
    version: PROTOCOL_VERSION,
    t: 1.25,
    step: 125,
    ee_position: [0.1, 0.02, 0.31],
    ee_x_axis: [1, 0, 0],
    limb_joints: [
      [0, 0, 0.25],
      [0.29, 0, 0.25],
      [0.58, 0, 0.25],
    ],
    limb_radii: [0.05, 0.04],
    limb_angles: [0.0, 0.0, 0.0],
    pred: [0.001, 0.06, 0.01, -0.02],
    gt: [0.0, 0.058, 0.0, 0.0],
    force: 0.0,
    travel: 0.025,
    running: true,
    aborted: false,
    abort_reason: null,
    done: false,
  };
}

describe("parseInbound", () => {
  it("accepts a well formed state update", () => {
    const u = validUpdate();
    const parsed = parseInbound(JSON.stringify(u));
    expect(parsed).toEqual(u);
  });

  it("accepts an error frame", () => {
    const frame = {
      type: "error",
      version: PROTOCOL_VERSION,
      message: "nope",
    };
    const parsed = parseInbound(JSON.stringify(frame));
    expect(parsed.type).toBe("error");
    if (parsed.type === "error") expect(parsed.message).toBe("nope");
  });

  it("rejects non JSON", () => {
    expect(() => parseInbound("{nope")).toThrow(ProtocolError);
  });

  it("rejects non object JSON", () => {
    expect(() => parseInbound("42")).toThrow(ProtocolError);
    expect(() => parseInbound("null")).toThrow(ProtocolError);
    expect(() => parseInbound("[1,2]")).toThrow(ProtocolError);
  });

  it("rejects wrong protocol version", () => {
    const u = { ...validUpdate(), version: 2 };
    expect(() => parseInbound(JSON.stringify(u))).toThrow(/version/);
  });

  it("rejects unknown frame type", () => {
    const u = { ...validUpdate(), type: "telemetry" };
    expect(() => parseInbound(JSON.stringify(u))).toThrow(/unknown frame/);
  });

  it("rejects an error frame without a message", () => {
    const frame = { type: "error", version: PROTOCOL_VERSION };
    expect(() => parseInbound(JSON.stringify(frame))).toThrow(ProtocolError);
  });

  it("rejects malformed vectors and missing fields", () => {
    const cases: Partial<Record<keyof StateUpdate, unknown>>[] = [
      { ee_position: [0.1, 0.02] },
      { ee_position: [0.1, 0.02, "x"] },
      { ee_x_axis: null },
      { pred: [1, 2, 3] },
      { gt: [1, 2, 3, NaN] },
      { limb_joints: [[0, 0, 0]] },
      { limb_joints: "not an array" },
      { limb_radii: [0.05] },
      { force: "strong" },
      { running: 1 },
      { t: NaN },
      { step: 1.5 },
    ];
    for (const patch of cases) {
      const u = { ...validUpdate(), ...patch };
      expect(() => parseInbound(JSON.stringify(u))).toThrow(ProtocolError);
    }
  });
});

describe("outbound builders", () => {
  it("limbCommand carries the version and angles", () => {
    const cmd = limbCommand(0.1, -0.2, 0.05);
    expect(cmd).toEqual({
      type: "limb_command",
      version: PROTOCOL_VERSION,
      shoulder_tilt: 0.1,
      shoulder_yaw: -0.2,
      bend_delta: 0.05,
    });
  });

  it("sessionControl omits gains unless given", () => {
    expect(sessionControl("pause")).toEqual({
      type: "session_control",
      version: PROTOCOL_VERSION,
      action: "pause",
    });
    expect(sessionControl("reset", "responsive").gains).toBe("responsive");
  });
});
