"""Positional and variance error metrics plus the pair-evaluation harness.

All metrics operate on joint positions from forward kinematics. The four
positional variants: root_joint (full root xyz), global_traj (horizontal
root path), mean_global (all non-root joints in world coordinates), and
mean_local (non-root joints with root translation and root yaw removed).
Variance errors compare per-joint temporal position variances in the same
coordinate systems. Transition distance measures the joint-position gap
between consecutive actions, with or without yaw/translation alignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compose import align_second
from .motion import Motion, heading_angle, write_json_atomic

APE_VARIANTS = ("root_joint", "global_traj", "mean_local", "mean_global")


@dataclass(frozen=True)
class MetricReport:
    ape: dict[str, float]
    ave: dict[str, float]
    transition_with_align: float | None
    transition_without_align: float | None
    sample_count: int
    seed: int | None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ape": dict(self.ape),
            "ave": dict(self.ave),
            "transition_dist": {
                "with_align": self.transition_with_align,
                "without_align": self.transition_without_align,
            },
            "sample_count": self.sample_count,
            "seed": self.seed,
            "config": dict(self.config),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricReport":
        return cls(
            ape=dict(doc["ape"]),
            ave=dict(doc["ave"]),
            transition_with_align=doc["transition_dist"]["with_align"],
            transition_without_align=doc["transition_dist"]["without_align"],
            sample_count=int(doc["sample_count"]),
            seed=doc.get("seed"),
            config=doc.get("config", {}),
        )

    def save(self, path: str) -> None:
        write_json_atomic(path, self.to_dict())


def _check_comparable(gt: Motion, gen: Motion) -> None:
    if gt.skeleton != gen.skeleton:
        raise ValueError("skeleton mismatch")
    if gt.num_frames != gen.num_frames:
        raise ValueError(f"frame count mismatch: {gt.num_frames} vs {gen.num_frames}")


def _local_positions(motion: Motion, positions: np.ndarray) -> np.ndarray:
    """Positions relative to the root with the root yaw removed (pitch/roll kept)."""
    yaw = heading_angle(motion.rot6d[:, 0])  # (F,)
    c, s = np.cos(-yaw), np.sin(-yaw)
    rel = positions - positions[:, :1]
    out = np.empty_like(rel)
    out[..., 0] = c[:, None] * rel[..., 0] - s[:, None] * rel[..., 1]
    out[..., 1] = s[:, None] * rel[..., 0] + c[:, None] * rel[..., 1]
    out[..., 2] = rel[..., 2]
    return out


def _variant_positions(motion: Motion, variant: str) -> np.ndarray:
    """Per-variant coordinate series: (F, K, C) with K joints and C coords."""
    positions = motion.joint_positions()
    if variant == "root_joint":
        return positions[:, :1, :]
    if variant == "global_traj":
        return positions[:, :1, :2]
    if variant == "mean_global":
        return positions[:, 1:, :]
    if variant == "mean_local":
        return _local_positions(motion, positions)[:, 1:, :]
    raise ValueError(f"unknown variant {variant!r}")


def ape(gt: Motion, gen: Motion, variant: str) -> float:
    """Average positional error in meters for one variant."""
    _check_comparable(gt, gen)
    diff = _variant_positions(gt, variant) - _variant_positions(gen, variant)
    per_joint = np.linalg.norm(diff, axis=-1)  # (F, K)
    return float(per_joint.mean())


def ave(gt: Motion, gen: Motion, variant: str) -> float:
    """Average variance error: distance between temporal position variances."""
    _check_comparable(gt, gen)
    if gt.num_frames < 2:
        raise ValueError("variance needs at least 2 frames")
    var_gt = _variant_positions(gt, variant).var(axis=0)  # (K, C), population
    var_gen = _variant_positions(gen, variant).var(axis=0)
    per_joint = np.linalg.norm(var_gt - var_gen, axis=-1)  # (K,)
    return float(per_joint.mean())


def ape_all(gt: Motion, gen: Motion) -> dict[str, float]:
    return {v: ape(gt, gen, v) for v in APE_VARIANTS}


def ave_all(gt: Motion, gen: Motion) -> dict[str, float]:
    return {v: ave(gt, gen, v) for v in APE_VARIANTS}


def transition_distance(first: Motion, second: Motion, align: bool = True) -> float:
    """Mean joint-position gap between first's last and second's first frame."""
    if first.skeleton != second.skeleton:
        raise ValueError("skeleton mismatch")
    if align:
        second = align_second(first, second)
    pa = first.slice_frames(first.num_frames - 1, first.num_frames).joint_positions()[0]
    pb = second.slice_frames(0, 1).joint_positions()[0]
    return float(np.linalg.norm(pa - pb, axis=-1).mean())


def evaluate(compose_pair_fn, pairs, seed: int, config: dict | None = None) -> MetricReport:
    """Score a pair-composition strategy against ground-truth pairs.

    compose_pair_fn(texts, durations, seed) must return (actions, composed)
    where actions are the raw per-action motions and composed spans exactly
    the ground-truth frame count. One seeded stochastic sample per pair;
    metrics averaged in pair order.
    """
    from .dataset import concat_motions

    if not pairs:
        raise ValueError("empty validation set")
    pair_seeds = np.random.SeedSequence(seed).generate_state(len(pairs))

    ape_sums = {v: 0.0 for v in APE_VARIANTS}
    ave_sums = {v: 0.0 for v in APE_VARIANTS}
    t_with = 0.0
    t_without = 0.0
    have_transitions = True
    for pair, pair_seed in zip(pairs, pair_seeds):
        gt = concat_motions(pair.motion_1, pair.motion_2)
        durations = (
            pair.motion_1.num_frames / pair.motion_1.fps,
            pair.motion_2.num_frames / pair.motion_2.fps,
        )
        actions, composed = compose_pair_fn(
            (pair.text_1, pair.text_2), durations, int(pair_seed)
        )
        for v in APE_VARIANTS:
            ape_sums[v] += ape(gt, composed, v)
            ave_sums[v] += ave(gt, composed, v)
        if actions is not None and len(actions) == 2:
            t_with += transition_distance(actions[0], actions[1], align=True)
            t_without += transition_distance(actions[0], actions[1], align=False)
        else:
            have_transitions = False

    n = len(pairs)
    return MetricReport(
        ape={v: ape_sums[v] / n for v in APE_VARIANTS},
        ave={v: ave_sums[v] / n for v in APE_VARIANTS},
        transition_with_align=t_with / n if have_transitions else None,
        transition_without_align=t_without / n if have_transitions else None,
        sample_count=n,
        seed=seed,
        config=config or {},
    )
