/**
 * Client-side forward kinematics, same convention as the server:
 * 6D rotations are the first two rotation-matrix columns (Gram-Schmidt
 * orthonormalized), each joint sits at its parent's position plus the
 * parent's global rotation applied to the joint offset, and the root sits
 * at the frame's root translation. Coordinates are z-up, forward +y.
 */

import type { MotionFile, SkeletonSpec } from "./types.js";

export type Vec3 = [number, number, number];
export type Mat3 = number[]; // row-major, length 9

function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]);
  return [v[0] / n, v[1] / n, v[2] / n];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

/** Gram-Schmidt the 6D vector into a row-major 3x3 rotation matrix. */
export function rot6dToMatrix(r6: number[]): Mat3 {
  const a: Vec3 = [r6[0], r6[1], r6[2]];
  const b: Vec3 = [r6[3], r6[4], r6[5]];
  const x = normalize(a);
  const d = dot(x, b);
  const y = normalize([b[0] - d * x[0], b[1] - d * x[1], b[2] - d * x[2]]);
  const z = cross(x, y);
  // columns are x, y, z
  return [x[0], y[0], z[0], x[1], y[1], z[1], x[2], y[2], z[2]];
}

export function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Array(9).fill(0);
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      out[3 * i + j] =
        a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
    }
  }
  return out;
}

export function matApply(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
    m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
    m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
  ];
}

/** Global joint positions for one frame of a motion file. */
export function framePositions(motion: MotionFile, frameIndex: number): Vec3[] {
  const frame = motion.frames[frameIndex];
  if (!frame) {
    throw new Error(`frame ${frameIndex} out of range (${motion.frames.length})`);
  }
  return jointPositions(motion.skeleton, frame.rot6d, frame.root_t as Vec3);
}

export function jointPositions(
  skeleton: SkeletonSpec,
  rot6d: number[][],
  rootT: Vec3,
): Vec3[] {
  const joints = skeleton.joints;
  if (rot6d.length !== joints.length) {
    throw new Error(`pose has ${rot6d.length} joints, skeleton has ${joints.length}`);
  }
  const globalRot: Mat3[] = new Array(joints.length);
  const positions: Vec3[] = new Array(joints.length);
  globalRot[0] = rot6dToMatrix(rot6d[0]);
  positions[0] = [rootT[0], rootT[1], rootT[2]];
  for (let j = 1; j < joints.length; j++) {
    const parent = joints[j].parent;
    if (parent === null || parent >= j) {
      throw new Error(`joint ${j} has invalid parent`);
    }
    const local = rot6dToMatrix(rot6d[j]);
    globalRot[j] = matMul(globalRot[parent], local);
    const off = matApply(globalRot[parent], joints[j].offset);
    const p = positions[parent];
    positions[j] = [p[0] + off[0], p[1] + off[1], p[2] + off[2]];
  }
  return positions;
}

/** Parent->child index pairs for drawing bones. */
export function boneList(skeleton: SkeletonSpec): [number, number][] {
  const bones: [number, number][] = [];
  skeleton.joints.forEach((joint, index) => {
    if (joint.parent !== null) {
      bones.push([joint.parent, index]);
    }
  });
  return bones;
}
