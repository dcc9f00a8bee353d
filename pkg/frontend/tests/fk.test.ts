import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { boneList, framePositions, jointPositions, rot6dToMatrix } from "../src/fk.js";
import type { MotionFile } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const dump = JSON.parse(readFileSync(join(here, "fixtures", "fk_dump.json"), "utf-8")) as {
  motion: MotionFile;
  frames: number[];
  positions: Record<string, number[][]>;
};

describe("rot6dToMatrix", () => {
  it("maps the identity 6D vector to the identity matrix", () => {
    const m = rot6dToMatrix([1, 0, 0, 0, 1, 0]);
    expect(m).toEqual([1, 0, 0, 0, 1, 0, 0, 0, 1]);
  });

  it("orthonormalizes a skewed second column", () => {
    const m = rot6dToMatrix([1, 0, 0, 1, 1, 0]);
    for (let i = 0; i < 9; i++) {
      expect(m[i]).toBeCloseTo([1, 0, 0, 0, 1, 0, 0, 0, 1][i], 12);
    }
  });
});

describe("jointPositions", () => {
  it("places identity-rotation joints at cumulative offsets", () => {
    const skeleton = {
      joints: [
        { name: "root", parent: null, offset: [0, 0, 0] as [number, number, number] },
        { name: "a", parent: 0, offset: [0, 1, 0] as [number, number, number] },
        { name: "b", parent: 1, offset: [0, 0, 1] as [number, number, number] },
      ],
    };
    const identity = [1, 0, 0, 0, 1, 0];
    const pos = jointPositions(skeleton, [identity, identity, identity], [1, 2, 3]);
    expect(pos[0]).toEqual([1, 2, 3]);
    expect(pos[1]).toEqual([1, 3, 3]);
    expect(pos[2]).toEqual([1, 3, 4]);
  });

  it("rejects joint-count mismatches", () => {
    expect(() =>
      jointPositions({ joints: [{ name: "r", parent: null, offset: [0, 0, 0] }] }, [], [0, 0, 0]),
    ).toThrow();
  });
});

describe("server FK parity", () => {
  it("matches the server dump within 1e-4 on 10 random frames", () => {
    for (const frame of dump.frames) {
      const got = framePositions(dump.motion, frame);
      const expected = dump.positions[String(frame)];
      expect(got.length).toBe(expected.length);
      for (let j = 0; j < expected.length; j++) {
        for (let c = 0; c < 3; c++) {
          expect(Math.abs(got[j][c] - expected[j][c])).toBeLessThan(1e-4);
        }
      }
    }
  });

  it("rejects out-of-range frames", () => {
    expect(() => framePositions(dump.motion, dump.motion.frames.length)).toThrow();
  });
});

describe("boneList", () => {
  it("emits one parent->child bone per non-root joint", () => {
    const bones = boneList(dump.motion.skeleton);
    expect(bones.length).toBe(dump.motion.skeleton.joints.length - 1);
    for (const [parent, child] of bones) {
      expect(parent).toBeLessThan(child);
    }
  });
});
