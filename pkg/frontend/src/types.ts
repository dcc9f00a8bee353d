/** Wire types mirroring the motion file format and the session API. */

export interface JointSpec {
  name: string;
  parent: number | null;
  offset: [number, number, number];
}

export interface SkeletonSpec {
  joints: JointSpec[];
}

export interface MotionFrame {
  root_t: number[];
  rot6d: number[][];
}

export interface MotionFile {
  fps: number;
  skeleton: SkeletonSpec;
  frames: MotionFrame[];
  labels?: { text: string; start_frame: number; end_frame: number }[];
}

export interface Span {
  start: number;
  end: number;
}

export interface AppendResponse {
  span: Span;
  frames: MotionFrame[];
}

export interface SessionMetadata {
  id: string;
  created_at: string;
  seed: number;
  prompts: { text: string; duration_s: number }[];
  spans: Span[];
  total_frames: number;
  fps: number;
}
