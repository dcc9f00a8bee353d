"""Training loop: epoch iteration, loss CSV, checkpoint cadence, resume.

Three training modes share the loop: "pairs" runs the two-pass past-
conditioned iteration, "singles" trains on individually canonicalized
segments (independent baseline), and "joint" trains on comma-joined pair
text over the concatenated motion.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np
import torch

from .dataset import (
    batch_iterator,
    load_corpus,
    load_manifest,
    prepare_pairs,
    prepare_singles,
)
from .metrics import ape
from .model import (
    CheckpointError,
    ModelConfig,
    SequenceGenerator,
    PastConditionedVae,
    collate_joint,
    collate_pairs,
    collate_singles,
    load_checkpoint,
    make_optimizer,
    save_checkpoint,
    training_step,
    training_step_single,
)
from .motion import FeatureStats, motion_features
from .text import Vocabulary

TRAIN_MODES = ("pairs", "singles", "joint")
LOSS_COLUMNS = ("step", "total", "recon", "kl", "cross_kl", "latent_l1")


@dataclass
class RunConfig:
    """Full training-run description, loadable from a JSON file."""

    manifest: str
    checkpoint_dir: str
    model: ModelConfig = field(default_factory=ModelConfig)
    mode: str = "pairs"
    epochs: int = 200
    base_seed: int = 0
    eval_seeds: tuple[int, ...] = (0,)
    ablation_grid: tuple[int, ...] = (1, 5, 10, 15)

    def __post_init__(self):
        if not os.path.exists(self.manifest):
            raise FileNotFoundError(f"manifest not found: {self.manifest}")
        if any(p < 0 for p in self.ablation_grid):
            raise ValueError("ablation grid values must be >= 0")
        if self.mode not in TRAIN_MODES:
            raise ValueError(f"unknown training mode {self.mode!r}")

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        import json

        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
        model = ModelConfig(**doc.get("model", {}))
        manifest = doc["manifest"]
        if not os.path.isabs(manifest):
            manifest = os.path.join(base, manifest)
        ckpt_dir = doc.get("checkpoint_dir", "runs")
        if not os.path.isabs(ckpt_dir):
            ckpt_dir = os.path.join(base, ckpt_dir)
        return cls(
            manifest=manifest,
            checkpoint_dir=ckpt_dir,
            model=model,
            mode=doc.get("mode", "pairs"),
            epochs=int(doc.get("epochs", 200)),
            base_seed=int(doc.get("base_seed", 0)),
            eval_seeds=tuple(doc.get("eval_seeds", [0])),
            ablation_grid=tuple(doc.get("ablation_grid", [1, 5, 10, 15])),
        )


def _step_seed(base_seed: int, epoch: int, step: int) -> int:
    return (base_seed * 1_000_003 + epoch * 10_007 + step) % (2**31 - 1)


def _prepare_items(records, mode: str, target_fps: float, crop_seed: int):
    if mode == "pairs" or mode == "joint":
        return prepare_pairs(records, target_fps=target_fps)
    return prepare_singles(records, target_fps=target_fps, crop_seed=crop_seed)


def _texts_of(items, mode: str) -> list[str]:
    if mode == "singles":
        return [s.text for s in items]
    texts = []
    for p in items:
        texts.extend([p.text_1, p.text_2])
    return texts


def _features_of(items, mode: str) -> np.ndarray:
    feats = []
    for item in items:
        if mode == "singles":
            feats.append(motion_features(item.motion))
        else:
            feats.append(motion_features(item.motion_1))
            feats.append(motion_features(item.motion_2))
    return np.concatenate(feats, axis=0)


def validate_ape(generator: SequenceGenerator, items, mode: str, seed: int) -> float:
    """Mean global APE of one stochastic sample per validation item."""
    if not items:
        return float("nan")
    item_seeds = np.random.SeedSequence(seed).generate_state(len(items))
    total = 0.0
    count = 0
    for item, s in zip(items, item_seeds):
        if mode == "singles":
            gen = generator.generate_single(
                item.text, item.motion.duration_seconds, mode="stochastic", seed=int(s)
            )
            total += ape(item.motion, gen, "mean_global")
        elif mode == "joint":
            from .dataset import concat_motions

            gt = concat_motions(item.motion_1, item.motion_2)
            gen = generator.generate_joint(
                [item.text_1, item.text_2], gt.duration_seconds, mode="stochastic", seed=int(s)
            )
            total += ape(gt, gen, "mean_global")
        else:
            from .dataset import concat_motions

            gt = concat_motions(item.motion_1, item.motion_2)
            motions = generator.generate_sequence(
                [
                    (item.text_1, item.motion_1.duration_seconds),
                    (item.text_2, item.motion_2.duration_seconds),
                ],
                mode="stochastic",
                seed=int(s),
            )
            gen = concat_motions(motions[0], motions[1])
            total += ape(gt, gen, "mean_global")
        count += 1
    return total / count


def train(
    manifest_path: str,
    out_dir: str,
    mode: str = "pairs",
    config: ModelConfig | None = None,
    epochs: int = 200,
    base_seed: int = 0,
    checkpoint_every: int = 10,
    val_every: int = 5,
    resume: str | None = None,
    quiet: bool = False,
) -> dict:
    """Train one model over a corpus manifest; returns paths and final metrics."""
    if mode not in TRAIN_MODES:
        raise ValueError(f"unknown training mode {mode!r}")
    os.makedirs(out_dir, exist_ok=True)
    manifest = load_manifest(manifest_path)
    corpus = load_corpus(manifest, base_dir=os.path.dirname(os.path.abspath(manifest_path)))

    train_items = _prepare_items(corpus["train"], mode, manifest.fps, crop_seed=base_seed)
    val_items = _prepare_items(corpus["val"], mode, manifest.fps, crop_seed=base_seed + 1)
    if not train_items:
        raise ValueError("no training items after preparation")
    skeleton = corpus["train"][0].motion.skeleton

    loss_path = os.path.join(out_dir, "loss.csv")
    last_path = os.path.join(out_dir, "last.ckpt")
    best_path = os.path.join(out_dir, "best.ckpt")

    if resume is not None:
        bundle = load_checkpoint(resume)
        if bundle.optimizer_state is None:
            raise CheckpointError(f"{resume} carries no optimizer state; cannot resume")
        model = bundle.model
        config = model.config
        vocab = bundle.vocab
        stats = bundle.stats
        optimizer = make_optimizer(model)
        optimizer.load_state_dict(bundle.optimizer_state)
        start_epoch = bundle.epoch
        global_step = int(bundle.extra.get("global_step", 0))
        best_val = float(bundle.extra.get("best_val", np.inf))
        mode = bundle.extra.get("mode", mode)
    else:
        vocab = Vocabulary.build(_texts_of(train_items, mode) + [","])
        stats = FeatureStats.from_features(_features_of(train_items, mode))
        config = config or ModelConfig()
        config = replace(config, feature_dim=skeleton.feature_dim, fps=manifest.fps)
        torch.manual_seed(base_seed)
        model = PastConditionedVae(config, vocab_size=len(vocab))
        optimizer = make_optimizer(model)
        start_epoch = 0
        global_step = 0
        best_val = np.inf
        with open(loss_path, "w", newline="") as fh:
            csv.writer(fh).writerow(LOSS_COLUMNS)

    generator = SequenceGenerator(model, vocab, stats, skeleton)
    started = time.time()

    for epoch in range(start_epoch, epochs):
        epoch_rows = []
        for step_idx, batch_items in enumerate(
            batch_iterator(train_items, config.batch_size, shuffle_seed=_step_seed(base_seed, epoch, 0))
        ):
            seed = _step_seed(base_seed, epoch, step_idx + 1)
            if mode == "pairs":
                batch = collate_pairs(batch_items, stats, vocab)
                report = training_step(model, batch, optimizer, seed=seed)
            elif mode == "joint":
                batch = collate_joint(batch_items, stats, vocab)
                report = training_step_single(model, batch, optimizer, seed=seed)
            else:
                batch = collate_singles(batch_items, stats, vocab)
                report = training_step_single(model, batch, optimizer, seed=seed)
            global_step += 1
            epoch_rows.append(
                [global_step, report["total"], report["recon"], report["kl"],
                 report["cross_kl"], report["latent_l1"]]
            )
        with open(loss_path, "a", newline="") as fh:
            csv.writer(fh).writerows(epoch_rows)

        is_val_epoch = val_items and ((epoch + 1) % val_every == 0 or epoch + 1 == epochs)
        val_metric = None
        if is_val_epoch:
            val_metric = validate_ape(generator, val_items, mode, seed=_step_seed(base_seed, epoch, 999))
            if val_metric < best_val:
                best_val = val_metric
                save_checkpoint(
                    best_path, model, vocab, stats, skeleton, optimizer=optimizer,
                    epoch=epoch + 1,
                    extra={"global_step": global_step, "best_val": best_val, "mode": mode},
                )
        if not quiet:
            tail = f" val_ape={val_metric:.4f}" if val_metric is not None else ""
            print(
                f"epoch {epoch + 1}/{epochs} loss={epoch_rows[-1][1]:.4f} "
                f"recon={epoch_rows[-1][2]:.4f}{tail}"
            )

        extra = {"global_step": global_step, "best_val": best_val, "mode": mode}
        save_checkpoint(last_path, model, vocab, stats, skeleton, optimizer=optimizer,
                        epoch=epoch + 1, extra=extra)
        if (epoch + 1) % checkpoint_every == 0:
            save_checkpoint(
                os.path.join(out_dir, f"epoch_{epoch + 1:04d}.ckpt"),
                model, vocab, stats, skeleton, optimizer=optimizer, epoch=epoch + 1, extra=extra,
            )

    if not os.path.exists(best_path):
        save_checkpoint(best_path, model, vocab, stats, skeleton, optimizer=optimizer,
                        epoch=epochs, extra={"global_step": global_step, "best_val": best_val, "mode": mode})
    if not quiet:
        print(f"trained {epochs - start_epoch} epochs in {time.time() - started:.1f}s; "
              f"checkpoints in {out_dir}")
    return {
        "last": last_path,
        "best": best_path,
        "loss_csv": loss_path,
        "epochs": epochs,
        "global_step": global_step,
        "best_val": None if np.isinf(best_val) else best_val,
    }


def run_ablation(
    manifest_path: str,
    out_dir: str,
    grid: list[int],
    config: ModelConfig | None = None,
    epochs: int = 20,
    base_seed: int = 0,
    eval_seed: int = 0,
    quiet: bool = False,
) -> str:
    """Sweep the past-frame count; one trained model and report per value.

    Emits an ablation.csv with one row
    per past-frame grid value carrying the four APE and four AVE columns.
    """
    from .compose import pair_composer
    from .metrics import APE_VARIANTS, evaluate

    if any(p < 0 for p in grid):
        raise ValueError("grid values must be >= 0")
    os.makedirs(out_dir, exist_ok=True)
    manifest = load_manifest(manifest_path)
    corpus = load_corpus(manifest, base_dir=os.path.dirname(os.path.abspath(manifest_path)))
    val_pairs = prepare_pairs(corpus["val"], target_fps=manifest.fps)
    if not val_pairs:
        raise ValueError("ablation needs a non-empty validation split")

    rows = []
    for p in grid:
        cfg = replace(config or ModelConfig(), past_frames=p)
        run_dir = os.path.join(out_dir, f"past_{p}")
        result = train(
            manifest_path, run_dir, mode="pairs", config=cfg, epochs=epochs,
            base_seed=base_seed, quiet=quiet,
        )
        bundle = load_checkpoint(result["best"])
        composer = pair_composer("teach", bundle.generator(), mode="stochastic")
        report = evaluate(composer, val_pairs, seed=eval_seed, config={"past_frames": p})
        report.save(os.path.join(run_dir, "report.json"))
        rows.append((p, report))

    csv_path = os.path.join(out_dir, "ablation.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["past_frames"]
            + [f"ape_{v}" for v in APE_VARIANTS]
            + [f"ave_{v}" for v in APE_VARIANTS]
        )
        for p, report in rows:
            writer.writerow(
                [p]
                + [f"{report.ape[v]:.6f}" for v in APE_VARIANTS]
                + [f"{report.ave[v]:.6f}" for v in APE_VARIANTS]
            )
    return csv_path
