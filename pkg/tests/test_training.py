import csv
import os

import numpy as np
import pytest

from motion_compose.dataset import generate_corpus
from motion_compose.model import CheckpointError, ModelConfig, load_checkpoint, save_checkpoint
from motion_compose.training import run_ablation, train


def small_config(**overrides):
    defaults = dict(batch_size=4, past_frames=3)
    defaults.update(overrides)
    return ModelConfig.downsized(**defaults)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    manifest = generate_corpus(str(out), seed=11, num_records=8, min_duration=0.8, max_duration=1.4)
    return manifest


def read_loss(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestTrain:
    def test_one_epoch_artifacts(self, corpus, tmp_path):
        out = str(tmp_path / "run")
        result = train(corpus, out, mode="pairs", config=small_config(), epochs=1, quiet=True)
        assert os.path.exists(result["last"])
        assert os.path.exists(result["best"])
        rows = read_loss(result["loss_csv"])
        assert len(rows) >= 1
        assert set(rows[0]) == {"step", "total", "recon", "kl", "cross_kl", "latent_l1"}

    def test_resume_continues_without_gaps(self, corpus, tmp_path):
        out = str(tmp_path / "run")
        train(corpus, out, mode="pairs", config=small_config(), epochs=2, quiet=True)
        steps_before = [int(r["step"]) for r in read_loss(os.path.join(out, "loss.csv"))]

        result = train(corpus, out, resume=os.path.join(out, "last.ckpt"), epochs=4, quiet=True)
        steps_after = [int(r["step"]) for r in read_loss(result["loss_csv"])]
        assert steps_after[: len(steps_before)] == steps_before
        assert steps_after == list(range(1, len(steps_after) + 1))
        assert load_checkpoint(result["last"]).epoch == 4

    def test_resume_requires_optimizer_state(self, corpus, tmp_path):
        out = str(tmp_path / "run")
        result = train(corpus, out, mode="pairs", config=small_config(), epochs=1, quiet=True)
        bundle = load_checkpoint(result["last"])
        stripped = str(tmp_path / "stripped.ckpt")
        save_checkpoint(
            stripped, bundle.model, bundle.vocab, bundle.stats, bundle.skeleton,
            optimizer=None, epoch=bundle.epoch,
        )
        with pytest.raises(CheckpointError):
            train(corpus, str(tmp_path / "r2"), resume=stripped, epochs=2, quiet=True)

    def test_singles_and_joint_modes(self, corpus, tmp_path):
        for mode in ("singles", "joint"):
            out = str(tmp_path / mode)
            result = train(corpus, out, mode=mode, config=small_config(), epochs=1, quiet=True)
            assert os.path.exists(result["last"])
            bundle = load_checkpoint(result["last"])
            assert bundle.extra["mode"] == mode

    def test_deterministic_given_seed(self, corpus, tmp_path):
        r1 = train(corpus, str(tmp_path / "a"), config=small_config(), epochs=1, base_seed=5, quiet=True)
        r2 = train(corpus, str(tmp_path / "b"), config=small_config(), epochs=1, base_seed=5, quiet=True)
        rows1 = read_loss(r1["loss_csv"])
        rows2 = read_loss(r2["loss_csv"])
        assert rows1 == rows2

    def test_validate_ape_finite(self, corpus, tmp_path):
        out = str(tmp_path / "run")
        result = train(corpus, out, mode="pairs", config=small_config(), epochs=1, quiet=True)
        assert result["best_val"] is None or np.isfinite(result["best_val"])


class TestRunConfig:
    def test_from_file(self, corpus, tmp_path):
        import json

        from motion_compose.training import RunConfig

        doc = {
            "manifest": corpus,
            "checkpoint_dir": str(tmp_path / "ckpts"),
            "model": {"layers": 2, "heads": 2, "latent_dim": 32, "feedforward": 64},
            "mode": "pairs",
            "epochs": 3,
            "ablation_grid": [1, 5],
        }
        path = str(tmp_path / "run.json")
        with open(path, "w") as fh:
            json.dump(doc, fh)
        run = RunConfig.from_file(path)
        assert run.model.layers == 2
        assert run.epochs == 3
        assert run.ablation_grid == (1, 5)

    def test_validation(self, corpus, tmp_path):
        from motion_compose.training import RunConfig

        with pytest.raises(FileNotFoundError):
            RunConfig(manifest=str(tmp_path / "missing.json"), checkpoint_dir=str(tmp_path))
        with pytest.raises(ValueError):
            RunConfig(manifest=corpus, checkpoint_dir=str(tmp_path), ablation_grid=(-1,))
        with pytest.raises(ValueError):
            RunConfig(manifest=corpus, checkpoint_dir=str(tmp_path), mode="nope")


class TestAblation:
    def test_grid_report_shape(self, corpus, tmp_path):
        out = str(tmp_path / "ablate")
        csv_path = run_ablation(
            corpus, out, grid=[1, 3], config=small_config(), epochs=1, quiet=True
        )
        rows = read_loss(csv_path)
        assert [r["past_frames"] for r in rows] == ["1", "3"]
        for row in rows:
            for key in row:
                if key != "past_frames":
                    assert np.isfinite(float(row[key]))

    def test_negative_grid_rejected(self, corpus, tmp_path):
        with pytest.raises(ValueError):
            run_ablation(corpus, str(tmp_path / "x"), grid=[-1], epochs=1)
