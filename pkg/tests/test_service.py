"""HTTP surface: generation, annotation posting/validation, gamma curve."""

import pytest
from fastapi.testclient import TestClient

from affectgen.annotations import AnnotationStore
from affectgen.corpus import save_vocabulary
from affectgen.decoding import RerankWeights
from affectgen.emotions import save_lexicon
from affectgen.model import ModelVariant, save_checkpoint
from affectgen.service import GenerationEngine, create_app, resolve_emotion

from util import toy_model, toy_vocab_and_lexicon


@pytest.fixture()
def engine(tmp_path):
    vocab, lex = toy_vocab_and_lexicon()
    fwd, _, _ = toy_model(variant=ModelVariant(wi=True, we=True), vocab=vocab,
                          lexicon=lex, max_length=8, seed=1)
    rev, _, _ = toy_model(variant=ModelVariant(wi=True), vocab=vocab,
                          lexicon=lex, max_length=8, seed=2)
    save_checkpoint(tmp_path / "fwd.npz", fwd)
    save_checkpoint(tmp_path / "rev.npz", rev)
    save_vocabulary(vocab, tmp_path / "vocab.txt")
    save_lexicon(lex, tmp_path / "lexicon.tsv")
    return GenerationEngine.load(tmp_path / "fwd.npz", tmp_path / "vocab.txt",
                                 tmp_path / "lexicon.tsv", rev_path=tmp_path / "rev.npz",
                                 default_beam=4)


@pytest.fixture()
def client(tmp_path, engine):
    app = create_app(AnnotationStore(tmp_path / "store.jsonl"), engine)
    return TestClient(app)


ANNOTATION = {
    "prompt": "hello",
    "response": "wa wb",
    "target_emotion": "anger",
    "gamma_used": 4.2,
    "annotated_vad": [0.0, 1.0, 1.0],
}


class TestResolveEmotion:
    def test_name_one_hot(self):
        assert resolve_emotion("anger").p == (1, 0, 0, 0, 0, 0)

    def test_vector(self):
        assert resolve_emotion([0, 0, 1, 0, 0, 0]).argmax() == "joy"

    def test_bad_name(self):
        with pytest.raises(ValueError):
            resolve_emotion("melancholy")


class TestHealth:
    def test_ok(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json()["status"] == "ok"


class TestGenerate:
    def test_basic_generation(self, client):
        r = client.post("/generate", json={"prompt": "wa wb", "emotion": "anger"})
        assert r.status_code == 200
        body = r.json()
        assert body["emotion"] == [1, 0, 0, 0, 0, 0]
        assert body["gamma"] == 4.2  # default when omitted
        assert isinstance(body["response"], str)
        assert 1 <= len(body["candidates"]) <= 4
        top = body["candidates"][0]
        assert {"ids", "fwd_logprob", "rev_logprob", "length",
                "emotion_distance", "final_score"} <= set(top)

    def test_gamma_and_beam_override(self, client):
        r = client.post("/generate", json={"prompt": "wa", "emotion": "joy",
                                           "gamma": 0.0, "beam_size": 1})
        assert r.status_code == 200
        body = r.json()
        assert body["gamma"] == 0.0
        assert len(body["candidates"]) == 1

    def test_explicit_vector_emotion(self, client):
        r = client.post("/generate", json={"prompt": "wa",
                                           "emotion": [0, 0, 0, 1, 0, 0]})
        assert r.status_code == 200
        assert r.json()["emotion"] == [0, 0, 0, 1, 0, 0]

    def test_unknown_emotion_is_400(self, client):
        r = client.post("/generate", json={"prompt": "wa", "emotion": "wistful"})
        assert r.status_code == 400

    def test_deterministic(self, client):
        req = {"prompt": "wa wb wc", "emotion": "fear", "beam_size": 3}
        a = client.post("/generate", json=req).json()
        b = client.post("/generate", json=req).json()
        assert a == b

    def test_no_engine_is_503(self, tmp_path):
        app = create_app(AnnotationStore(tmp_path / "s.jsonl"), None)
        c = TestClient(app)
        assert c.post("/generate", json={"prompt": "x", "emotion": "joy"}).status_code == 503


class TestAnnotations:
    def test_post_and_list_round_trip(self, client):
        r = client.post("/annotations", json=ANNOTATION)
        assert r.status_code == 200
        body = r.json()
        assert body["delta_e"] == pytest.approx(0.0)
        listed = client.get("/annotations").json()
        assert len(listed) == 1
        rec = listed[0]
        assert rec["id"] == body["id"]
        assert rec["prompt"] == "hello"
        assert rec["target_emotion"] == [1, 0, 0, 0, 0, 0]
        assert rec["annotated_vad"] == [0.0, 1.0, 1.0]
        assert rec["gamma_used"] == 4.2
        assert rec["timestamp"]

    def test_client_delta_validated(self, client):
        good = dict(ANNOTATION, delta_e=0.0)
        assert client.post("/annotations", json=good).status_code == 200
        bad = dict(ANNOTATION, delta_e=0.7)
        r = client.post("/annotations", json=bad)
        assert r.status_code == 400
        assert "delta_e" in r.json()["detail"]

    def test_vad_outside_cube_rejected(self, client):
        bad = dict(ANNOTATION, annotated_vad=[1.2, 0.0, 0.0])
        assert client.post("/annotations", json=bad).status_code == 400

    def test_vector_target_emotion(self, client):
        body = dict(ANNOTATION, target_emotion=[0, 0, 1, 0, 0, 0],
                    annotated_vad=[1.0, 1.0, 1.0])
        r = client.post("/annotations", json=body)
        assert r.status_code == 200
        assert r.json()["delta_e"] == pytest.approx(0.0)


class TestGammaCurve:
    def test_empty_is_404(self, client):
        assert client.get("/gamma-curve").status_code == 404

    def test_curve_shape(self, client):
        client.post("/annotations", json=ANNOTATION)
        client.post("/annotations", json=dict(ANNOTATION, gamma_used=0.0,
                                              annotated_vad=[1.0, 1.0, 1.0]))
        r = client.get("/gamma-curve")
        assert r.status_code == 200
        body = r.json()
        assert len(body["grid"]) == 20
        assert body["counts"][0] == 1
        assert body["mean_delta_e"][0] == pytest.approx(1.0)
        assert body["mean_delta_e"][8] == pytest.approx(0.0)  # 4.2 snaps to bin 8

    def test_emotion_filter_param(self, client):
        client.post("/annotations", json=ANNOTATION)
        r = client.get("/gamma-curve", params={"emotion": "joy"})
        assert r.status_code == 200
        assert all(c == 0 for c in r.json()["counts"])


def test_engine_rerank_weight_defaults():
    w = RerankWeights()
    assert (w.alpha, w.beta, w.gamma) == (50.0, 0.001, 4.2)
