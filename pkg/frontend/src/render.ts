/**
 * 2D orthographic stick-figure rendering. Two camera toggles: "side"
 * projects the y-z plane (walking left to right), "front" the x-z plane.
 * The active prompt's bones are tinted with saturation tracking progress
 * through the action.
 */

import { boneList, framePositions } from "./fk.js";
import type { MotionFile } from "./types.js";
import type { Vec3 } from "./fk.js";

export type ViewName = "side" | "front";

export interface RenderOptions {
  view: ViewName;
  scale: number; // pixels per meter
  progress: number; // 0..1 within the active span
}

export function project(p: Vec3, view: ViewName): [number, number] {
  // canvas y grows downward; world z is up
  return view === "side" ? [p[1], -p[2]] : [-p[0], -p[2]];
}

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  motion: MotionFile,
  frameIndex: number,
  options: RenderOptions,
): void {
  const clamped = Math.min(Math.max(frameIndex, 0), motion.frames.length - 1);
  const positions = framePositions(motion, clamped);
  const bones = boneList(motion.skeleton);
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);

  // ground line at z = 0
  const groundY = height * 0.85;
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(0, groundY);
  ctx.lineTo(width, groundY);
  ctx.stroke();

  const root = project(positions[0], options.view);
  const offsetX = width / 2 - root[0] * options.scale;
  const offsetY = groundY; // ground (z=0) maps here

  const saturation = Math.round(40 + 55 * Math.min(Math.max(options.progress, 0), 1));
  ctx.strokeStyle = `hsl(200, ${saturation}%, 45%)`;
  ctx.lineWidth = 3;
  ctx.lineCap = "round";
  for (const [parent, child] of bones) {
    const a = project(positions[parent], options.view);
    const b = project(positions[child], options.view);
    ctx.beginPath();
    ctx.moveTo(a[0] * options.scale + offsetX, a[1] * options.scale + offsetY);
    ctx.lineTo(b[0] * options.scale + offsetX, b[1] * options.scale + offsetY);
    ctx.stroke();
  }

  ctx.fillStyle = "#333";
  for (const p of positions) {
    const q = project(p, options.view);
    ctx.beginPath();
    ctx.arc(q[0] * options.scale + offsetX, q[1] * options.scale + offsetY, 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}
