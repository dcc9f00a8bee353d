"""Command-line entry point: synth, pairs, train, compose, eval, ablate, serve."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from .model import ModelConfig


def _config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--downsized", action="store_true", help="tiny config for smoke runs")
    p.add_argument("--layers", type=int)
    p.add_argument("--heads", type=int)
    p.add_argument("--latent-dim", type=int)
    p.add_argument("--feedforward", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--past-frames", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--lambda-kl", type=float)


def _model_config(args) -> ModelConfig:
    cfg = ModelConfig.downsized() if args.downsized else ModelConfig()
    overrides = {
        "layers": args.layers,
        "heads": args.heads,
        "latent_dim": args.latent_dim,
        "feedforward": args.feedforward,
        "dropout": args.dropout,
        "batch_size": args.batch_size,
        "past_frames": args.past_frames,
        "learning_rate": args.lr,
        "lambda_kl": args.lambda_kl,
    }
    from dataclasses import replace

    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def cmd_synth(args) -> int:
    from .dataset import generate_corpus

    action_specs = None
    if args.actions:
        with open(args.actions, encoding="utf-8") as fh:
            doc = json.load(fh)
        records = doc["records"] if isinstance(doc, dict) else doc
        if records and isinstance(records[0], dict):
            records = [records]  # a single record spec
        action_specs = [
            [(a["action"], float(a["duration_s"])) for a in record] for record in records
        ]
    manifest = generate_corpus(
        args.out,
        seed=args.seed,
        num_records=args.records if action_specs is None else None,
        action_specs=action_specs,
        fps=args.fps,
        val_fraction=args.val_fraction,
    )
    print(f"wrote corpus manifest {manifest}")
    return 0


def cmd_pairs(args) -> int:
    from .dataset import extract_pairs, load_corpus, load_manifest

    manifest = load_manifest(args.manifest)
    corpus = load_corpus(manifest, base_dir=os.path.dirname(os.path.abspath(args.manifest)))
    counts = {"train": 0, "val": 0}
    durations = []
    sources = {"overlap": 0, "transition-bridge": 0}
    for split in ("train", "val"):
        for record in corpus[split]:
            pairs = extract_pairs(record)
            counts[split] += len(pairs)
            for p in pairs:
                durations.append(p.total_frames / p.motion_1.fps)
                sources[p.source] += 1
    print(f"pairs: train={counts['train']} val={counts['val']}")
    if args.stats and durations:
        durations = np.array(durations)
        print(
            f"duration s: mean={durations.mean():.2f} std={durations.std():.2f} "
            f"median={np.median(durations):.2f} min={durations.min():.2f} max={durations.max():.2f}"
        )
        print(f"sources: overlap={sources['overlap']} transition-bridge={sources['transition-bridge']}")
    return 0


def cmd_train(args) -> int:
    from .training import RunConfig, train

    if args.config:
        run = RunConfig.from_file(args.config)
        result = train(
            run.manifest, run.checkpoint_dir, mode=run.mode, config=run.model,
            epochs=run.epochs, base_seed=run.base_seed,
            checkpoint_every=args.checkpoint_every, val_every=args.val_every,
            resume=args.resume,
        )
    else:
        if not args.manifest or not args.out:
            print("either --config or both --manifest and --out are required", file=sys.stderr)
            return 2
        result = train(
            args.manifest,
            args.out,
            mode=args.mode,
            config=None if args.resume else _model_config(args),
            epochs=args.epochs,
            base_seed=args.seed,
            checkpoint_every=args.checkpoint_every,
            val_every=args.val_every,
            resume=args.resume,
        )
    print(f"final checkpoint: {result['last']}")
    print(f"best checkpoint:  {result['best']}")
    return 0


def cmd_compose(args) -> int:
    from .compose import CompositionRequest, compose
    from .model import load_checkpoint
    from .motion import motion_to_dict, write_json_atomic

    with open(args.prompts, encoding="utf-8") as fh:
        prompt_doc = json.load(fh)
    prompts = tuple((p["text"], float(p["duration_s"])) for p in prompt_doc)

    bundle = load_checkpoint(args.checkpoint)
    single = None
    if args.single_checkpoint:
        single = load_checkpoint(args.single_checkpoint).generator()
    request = CompositionRequest(
        prompts=prompts,
        strategy=args.strategy,
        slerp_frames=args.slerp_frames,
        stitch_mode=args.stitch_mode,
        mode="deterministic" if args.deterministic else "stochastic",
        seed=args.seed,
    )
    result = compose(request, bundle.generator(), single)
    labels = [
        {"text": text, "start_frame": start, "end_frame": end}
        for (text, _), (start, end) in zip(prompts, result.spans)
    ]
    write_json_atomic(args.out, motion_to_dict(result.motion, labels))
    print(f"wrote {result.motion.num_frames} frames ({len(prompts)} actions) to {args.out}")
    return 0


def cmd_eval(args) -> int:
    from dataclasses import asdict

    from .compose import pair_composer
    from .dataset import load_corpus, load_manifest, prepare_pairs
    from .metrics import evaluate
    from .model import load_checkpoint

    bundle = load_checkpoint(args.checkpoint)
    single = None
    if args.single_checkpoint:
        single = load_checkpoint(args.single_checkpoint).generator()
    manifest = load_manifest(args.manifest)
    corpus = load_corpus(manifest, base_dir=os.path.dirname(os.path.abspath(args.manifest)))
    val_pairs = prepare_pairs(corpus["val"] or corpus["train"], target_fps=manifest.fps)
    if not val_pairs:
        print("no validation pairs in manifest", file=sys.stderr)
        return 1

    slerp_frames = 0 if args.no_slerp else 8
    composer = pair_composer(
        args.strategy, bundle.generator(), single, slerp_frames=slerp_frames, mode="stochastic"
    )
    config_echo = {
        "strategy": args.strategy,
        "slerp_frames": slerp_frames,
        "checkpoint": os.path.abspath(args.checkpoint),
        "model": asdict(bundle.model.config),
    }
    config_echo["config_hash"] = _config_hash(config_echo["model"])
    report = evaluate(composer, val_pairs, seed=args.seed, config=config_echo)
    report.save(args.out)
    print(f"evaluated {report.sample_count} pairs -> {args.out}")
    for name, values in (("APE", report.ape), ("AVE", report.ave)):
        row = " ".join(f"{k}={v:.4f}" for k, v in values.items())
        print(f"{name}: {row}")
    if report.transition_with_align is not None:
        print(
            f"transition dist: with_align={report.transition_with_align:.4f} "
            f"without_align={report.transition_without_align:.4f}"
        )
    return 0


def cmd_ablate(args) -> int:
    from .training import run_ablation

    grid = [int(v) for v in args.grid.split(",") if v.strip()]
    csv_path = run_ablation(
        args.manifest,
        args.out,
        grid=grid,
        config=_model_config(args),
        epochs=args.epochs,
        base_seed=args.seed,
        eval_seed=args.eval_seed,
    )
    print(f"ablation table: {csv_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .model import load_checkpoint
    from .service import create_app

    if not args.checkpoint:
        print("no checkpoint given (flag --checkpoint or MOTION_COMPOSE_CHECKPOINT)", file=sys.stderr)
        return 1
    bundle = load_checkpoint(args.checkpoint)
    app = create_app(bundle.generator(), slerp_frames=args.slerp_frames)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motion-compose",
        description="Temporal composition of text-conditioned skeletal motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--records", type=int, help="number of random records")
    group.add_argument("--actions", help="JSON action spec file")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("pairs", help="report pair-extraction statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--stats", action="store_true")
    p.set_defaults(fn=cmd_pairs)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.add_argument("--config", help="JSON run configuration (overrides flags)")
    p.add_argument("--mode", choices=["pairs", "singles", "joint"], default="pairs")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=10)
    p.add_argument("--val-every", type=int, default=5)
    p.add_argument("--resume")
    _add_model_args(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("compose", help="compose a motion from prompts")
    p.add_argument("--strategy", choices=["independent", "joint", "teach"], default="teach")
    p.add_argument("--prompts", required=True, help="JSON [{text, duration_s}, ...]")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--single-checkpoint", help="separate single-action model for independent")
    p.add_argument("--out", required=True)
    p.add_argument("--slerp-frames", type=int, default=8)
    p.add_argument("--stitch-mode", choices=["overwrite", "insert"], default="overwrite")
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("eval", help="evaluate a checkpoint on validation pairs")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--single-checkpoint")
    p.add_argument("--manifest", required=True)
    p.add_argument("--strategy", choices=["independent", "joint", "teach"], default="teach")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-slerp", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="past-frame-count ablation sweep")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid", default="1,5,10,15")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-seed", type=int, default=0)
    _add_model_args(p)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--checkpoint", default=os.environ.get("MOTION_COMPOSE_CHECKPOINT"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("MOTION_COMPOSE_PORT", "7860")))
    p.add_argument("--slerp-frames", type=int, default=8)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
