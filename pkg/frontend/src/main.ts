// Entry point: render the live simulation on two canvases, stream strip
// charts of estimated height and contact force, and steer the limb by
// dragging on the side view.

import { StripChart, samplePixel } from "./charts.js";
import { LiveClient } from "./client.js";
import { DragState, dragToCommand } from "./input.js";
import {
  Inbound,
  StateUpdate,
  sessionControl,
} from "./protocol.js";
import { Scene, buildScene, fitViewport } from "./scene.js";

const SIDE = document.getElementById("side") as HTMLCanvasElement;
const TOP = document.getElementById("top") as HTMLCanvasElement;
const HEIGHT_CHART = document.getElementById("height") as HTMLCanvasElement;
const FORCE_CHART = document.getElementById("force") as HTMLCanvasElement;
const STATUS = document.getElementById("status") as HTMLElement;
const READOUT = document.getElementById("readout") as HTMLElement;

const heightChart = new StripChart(600, [
  { name: "estimated", color: "#2c7fb8" },
  { name: "ground truth", color: "#aaaaaa" },
]);
const forceChart = new StripChart(600, [{ name: "force", color: "#d7301f" }]);

let latest: StateUpdate | null = null;
let drag: { start: DragState; x0: number; y0: number } | null = null;
const angles: DragState = { tilt: 0, yaw: 0, bend: 0 };

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${
  location.host
}/ws`;

const client = new LiveClient(wsUrl, {
  onUpdate(frame: Inbound) {
    if (frame.type === "error") {
      STATUS.textContent = `protocol error: ${frame.message}`;
      return;
    }
    latest = frame;
    angles.tilt = frame.limb_angles[0];
    angles.yaw = frame.limb_angles[1];
    angles.bend = frame.limb_angles[2];
    heightChart.push(frame.t, [frame.pred[1], frame.gt[1]]);
    forceChart.push(frame.t, [frame.force]);
    render(frame);
  },
  onStatus(status) {
    STATUS.textContent = status;
  },
});

function drawScene(canvas: HTMLCanvasElement, scene: Scene): void {
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const shape of scene.shapes) {
    if (shape.kind === "capsule") {
      ctx.strokeStyle = "#444";
      ctx.fillStyle = "#e8e4da";
      ctx.lineWidth = 1.5;
      const [ax, ay] = shape.a;
      const [bx, by] = shape.b;
      const ang = Math.atan2(by - ay, bx - ax);
      ctx.beginPath();
      ctx.arc(ax, ay, shape.radiusPx, ang + Math.PI / 2, ang - Math.PI / 2);
      ctx.arc(bx, by, shape.radiusPx, ang - Math.PI / 2, ang + Math.PI / 2);
      ctx.closePath();
      ctx.fill();
      ctx.stroke();
    } else if (shape.kind === "marker") {
      const colors = {
        ee: "#2c7fb8",
        closest_gt: "#888888",
        closest_pred: "#d7301f",
      } as const;
      ctx.fillStyle = colors[shape.label];
      ctx.beginPath();
      ctx.arc(shape.at[0], shape.at[1], shape.label === "ee" ? 6 : 4, 0, 7);
      ctx.fill();
    } else {
      ctx.strokeStyle = "#2c7fb8";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(shape.from[0], shape.from[1]);
      ctx.lineTo(shape.to[0], shape.to[1]);
      ctx.stroke();
    }
  }
}

function drawChart(
  canvas: HTMLCanvasElement,
  chart: StripChart,
  unit: string
): void {
  const ctx = canvas.getContext("2d")!;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const tr = chart.timeRange();
  const vr = chart.valueRange();
  for (const s of chart.series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.t.forEach((t, i) => {
      const [x, y] = samplePixel(t, s.v[i], tr, vr, width, height);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  ctx.fillStyle = "#666";
  ctx.font = "11px sans-serif";
  ctx.fillText(`${vr[1].toFixed(3)} ${unit}`, 4, 12);
  ctx.fillText(`${vr[0].toFixed(3)} ${unit}`, 4, height - 4);
}

function render(u: StateUpdate): void {
  for (const [canvas, view] of [
    [SIDE, "side"],
    [TOP, "top"],
  ] as const) {
    const vp = fitViewport(u, view, canvas.width, canvas.height);
    drawScene(canvas, buildScene(u, view, vp));
  }
  drawChart(HEIGHT_CHART, heightChart, "m");
  drawChart(FORCE_CHART, forceChart, "N");
  const state = u.aborted
    ? `aborted (${u.abort_reason})`
    : u.done
    ? "done"
    : u.running
    ? "running"
    : "paused";
  READOUT.textContent =
    `t=${u.t.toFixed(1)}s travel=${u.travel.toFixed(3)}m ` +
    `est height=${u.pred[1].toFixed(3)}m force=${u.force.toFixed(1)}N ` +
    `[${state}]`;
}

SIDE.addEventListener("pointerdown", (ev) => {
  SIDE.setPointerCapture(ev.pointerId);
  drag = { start: { ...angles }, x0: ev.clientX, y0: ev.clientY };
});
SIDE.addEventListener("pointermove", (ev) => {
  if (drag === null || latest === null) return;
  client.send(
    dragToCommand(
      drag.start,
      ev.clientX - drag.x0,
      ev.clientY - drag.y0,
      latest
    )
  );
});
SIDE.addEventListener("pointerup", () => {
  drag = null;
});

for (const action of ["start", "pause"] as const) {
  document.getElementById(action)!.addEventListener("click", () => {
    client.send(sessionControl(action));
  });
}
for (const gains of ["smooth", "responsive"] as const) {
  document.getElementById(`reset-${gains}`)!.addEventListener("click", () => {
    heightChart.clear();
    forceChart.clear();
    client.send(sessionControl("reset", gains));
  });
}

client.connect();
