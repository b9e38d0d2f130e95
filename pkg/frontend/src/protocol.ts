// Wire types for the live steering service (JSON text frames, version 1).

export const PROTOCOL_VERSION = 1;

export interface StateUpdate {
  type: "state_update";
  version: number;
  t: number;
  step: number;
  ee_position: [number, number, number];
  ee_x_axis: [number, number, number];
  limb_joints: [number, number, number][];
  limb_radii: number[];
  limb_angles: [number, number, number]; // tilt, yaw, bend delta (rad)
  pred: [number, number, number, number]; // p_y, p_z, theta_y, theta_z
  gt: [number, number, number, number];
  force: number;
  travel: number;
  running: boolean;
  aborted: boolean;
  abort_reason: string | null;
  done: boolean;
}

export interface LimbCommand {
  type: "limb_command";
  version: number;
  shoulder_tilt: number;
  shoulder_yaw: number;
  bend_delta: number;
}

export interface SessionControl {
  type: "session_control";
  version: number;
  action: "start" | "pause" | "reset";
  gains?: "smooth" | "responsive";
}

export interface ErrorFrame {
  type: "error";
  version: number;
  message: string;
}

export type Inbound = StateUpdate | ErrorFrame;

export class ProtocolError extends Error {}

function isVec3(v: unknown): v is [number, number, number] {
  return Array.isArray(v) && v.length === 3 && v.every(Number.isFinite);
}

function isVec4(v: unknown): v is [number, number, number, number] {
  return Array.isArray(v) && v.length === 4 && v.every(Number.isFinite);
}

/** Parse one inbound frame, throwing ProtocolError on anything malformed. */
export function parseInbound(raw: string): Inbound {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new ProtocolError("frame is not valid JSON");
  }
  if (typeof data !== "object" || data === null) {
    throw new ProtocolError("frame is not an object");
  }
  const obj = data as Record<string, unknown>;
  if (obj.version !== PROTOCOL_VERSION) {
    throw new ProtocolError(`unsupported protocol version ${obj.version}`);
  }
  if (obj.type === "error") {
    if (typeof obj.message !== "string") {
      throw new ProtocolError("error frame without message");
    }
    return obj as unknown as ErrorFrame;
  }
  if (obj.type !== "state_update") {
    throw new ProtocolError(`unknown frame type ${String(obj.type)}`);
  }
  if (
    !Number.isFinite(obj.t) ||
    !Number.isInteger(obj.step) ||
    !isVec3(obj.ee_position) ||
    !isVec3(obj.ee_x_axis) ||
    !Array.isArray(obj.limb_joints) ||
    obj.limb_joints.length < 2 ||
    !obj.limb_joints.every(isVec3) ||
    !Array.isArray(obj.limb_radii) ||
    obj.limb_radii.length !== obj.limb_joints.length - 1 ||
    !isVec3(obj.limb_angles) ||
    !isVec4(obj.pred) ||
    !isVec4(obj.gt) ||
    !Number.isFinite(obj.force) ||
    typeof obj.running !== "boolean" ||
    typeof obj.done !== "boolean"
  ) {
    throw new ProtocolError("state_update has missing or malformed fields");
  }
  return obj as unknown as StateUpdate;
}

export function limbCommand(
  tilt: number,
  yaw: number,
  bend: number
): LimbCommand {
  return {
    type: "limb_command",
    version: PROTOCOL_VERSION,
    shoulder_tilt: tilt,
    shoulder_yaw: yaw,
    bend_delta: bend,
  };
}

export function sessionControl(
  action: SessionControl["action"],
  gains?: SessionControl["gains"]
): SessionControl {
  const msg: SessionControl = {
    type: "session_control",
    version: PROTOCOL_VERSION,
    action,
  };
  if (gains) msg.gains = gains;
  return msg;
}
