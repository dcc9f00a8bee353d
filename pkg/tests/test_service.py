import numpy as np
import pytest
import torch
from fastapi.testclient import TestClient

from motion_compose.model import ModelConfig, SequenceGenerator, PastConditionedVae
from motion_compose.motion import FeatureStats, motion_from_dict
from motion_compose.service import create_app
from motion_compose.skeleton import default_skeleton
from motion_compose.text import Vocabulary


@pytest.fixture(scope="module")
def client():
    torch.manual_seed(0)
    vocab = Vocabulary.build(["walk forward", "sit down", "turn left"])
    config = ModelConfig.downsized(feature_dim=default_skeleton().feature_dim)
    model = PastConditionedVae(config, vocab_size=len(vocab))
    stats = FeatureStats.identity(config.feature_dim)
    generator = SequenceGenerator(model, vocab, stats, default_skeleton())
    return TestClient(create_app(generator))


def create_session(client, seed=1234):
    resp = client.post("/sessions", json={"seed": seed})
    assert resp.status_code == 200
    return resp.json()["id"]


class TestSessionLifecycle:
    def test_create_returns_id(self, client):
        resp = client.post("/sessions", json={"seed": 7})
        assert resp.status_code == 200
        body = resp.json()
        assert body["seed"] == 7
        assert isinstance(body["id"], str) and body["id"]

    def test_first_append_span(self, client):
        sid = create_session(client)
        resp = client.post(f"/sessions/{sid}/actions", json={"text": "walk forward", "duration_s": 2.0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["span"] == {"start": 0, "end": 60}
        assert len(body["frames"]) == 60
        assert set(body["frames"][0]) == {"root_t", "rot6d"}

    def test_appends_are_contiguous(self, client):
        sid = create_session(client)
        r1 = client.post(f"/sessions/{sid}/actions", json={"text": "walk forward", "duration_s": 1.0})
        r2 = client.post(f"/sessions/{sid}/actions", json={"text": "sit down", "duration_s": 1.0})
        s1, s2 = r1.json()["span"], r2.json()["span"]
        assert s2["start"] == s1["end"]
        meta = client.get(f"/sessions/{sid}").json()
        assert meta["total_frames"] == s2["end"]
        assert meta["spans"] == [s1, s2]
        assert len(meta["prompts"]) == 2

    def test_export_roundtrip(self, client):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/actions", json={"text": "walk forward", "duration_s": 1.0})
        client.post(f"/sessions/{sid}/actions", json={"text": "turn left", "duration_s": 1.0})
        doc = client.get(f"/sessions/{sid}/motion").json()
        motion, labels = motion_from_dict(doc)
        assert motion.num_frames == 60
        assert len(labels) == 2  # one label per prompt
        assert labels[0]["start_frame"] == 0
        assert labels[1]["end_frame"] == 60
        # re-import is frame-identical
        again, _ = motion_from_dict(doc)
        np.testing.assert_array_equal(motion.rot6d, again.rot6d)

    def test_empty_session_export_is_error(self, client):
        sid = create_session(client)
        resp = client.get(f"/sessions/{sid}/motion")
        assert resp.status_code == 409

    def test_delete(self, client):
        sid = create_session(client)
        assert client.delete(f"/sessions/{sid}").status_code == 200
        assert client.get(f"/sessions/{sid}").status_code == 404
        assert client.delete(f"/sessions/{sid}").status_code == 404


class TestErrors:
    def test_unknown_session(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert (
            client.post("/sessions/nope/actions", json={"text": "walk forward", "duration_s": 1.0}).status_code
            == 404
        )

    def test_invalid_prompt_422(self, client):
        sid = create_session(client)
        assert (
            client.post(f"/sessions/{sid}/actions", json={"text": "   ", "duration_s": 1.0}).status_code
            == 422
        )
        assert (
            client.post(f"/sessions/{sid}/actions", json={"text": "walk", "duration_s": -2.0}).status_code
            == 422
        )
        # failed appends leave the session unchanged
        meta = client.get(f"/sessions/{sid}").json()
        assert meta["total_frames"] == 0


class TestIdempotency:
    def test_retry_returns_same_response(self, client):
        sid = create_session(client)
        payload = {"text": "walk forward", "duration_s": 1.0, "idempotency_key": "abc"}
        r1 = client.post(f"/sessions/{sid}/actions", json=payload)
        r2 = client.post(f"/sessions/{sid}/actions", json=payload)
        assert r1.json() == r2.json()
        meta = client.get(f"/sessions/{sid}").json()
        assert len(meta["prompts"]) == 1  # no duplicate append

    def test_key_reuse_conflict(self, client):
        sid = create_session(client)
        client.post(
            f"/sessions/{sid}/actions",
            json={"text": "walk forward", "duration_s": 1.0, "idempotency_key": "k"},
        )
        resp = client.post(
            f"/sessions/{sid}/actions",
            json={"text": "sit down", "duration_s": 1.0, "idempotency_key": "k"},
        )
        assert resp.status_code == 409


class TestDeterminism:
    def test_seeded_replay_identical(self, client):
        prompts = [("walk forward", 1.0), ("sit down", 1.0), ("turn left", 0.5)]
        exports = []
        for _ in range(2):
            sid = create_session(client, seed=999)
            for text, dur in prompts:
                resp = client.post(
                    f"/sessions/{sid}/actions", json={"text": text, "duration_s": dur}
                )
                assert resp.status_code == 200
            exports.append(client.get(f"/sessions/{sid}/motion").json())
        m1, _ = motion_from_dict(exports[0])
        m2, _ = motion_from_dict(exports[1])
        np.testing.assert_array_equal(m1.rot6d, m2.rot6d)
        np.testing.assert_array_equal(m1.root_translation, m2.root_translation)

    def test_different_seeds_differ(self, client):
        bodies = []
        for seed in (1, 2):
            sid = create_session(client, seed=seed)
            client.post(f"/sessions/{sid}/actions", json={"text": "walk forward", "duration_s": 1.0})
            bodies.append(client.get(f"/sessions/{sid}/motion").json())
        m1, _ = motion_from_dict(bodies[0])
        m2, _ = motion_from_dict(bodies[1])
        assert not np.array_equal(m1.rot6d, m2.rot6d)
