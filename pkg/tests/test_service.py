import numpy as np
import pytest
from fastapi.testclient import TestClient

from shotsearch.bundle import build_bundle, load_bundle
from shotsearch.service import create_app

from test_bundle import make_inputs


@pytest.fixture
def bundle(tmp_path):
    manifest, codes_sem, codes_low, annotations, text = make_inputs(
        tmp_path, n_shots=40, with_low=True, seed=11
    )
    return build_bundle(
        tmp_path / "bundle", manifest,
        codes_semantic=codes_sem, codes_low_level=codes_low,
        annotations_path=annotations, text_path=text,
    )


@pytest.fixture
def client(bundle):
    return TestClient(create_app(bundle))


class TestShots:
    def test_known_shot_has_five_keyframes(self, client, bundle):
        ref = bundle.table.shot_ref(3)
        r = client.get(f"/api/shots/{ref.video_id}/{ref.shot_index}")
        assert r.status_code == 200
        body = r.json()
        assert body["shot_id"] == ref.shot_id
        assert len(body["keyframes"]) == 5
        assert [kf["position"] for kf in body["keyframes"]] == [0, 1, 2, 3, 4]
        assert all(kf["thumb_url"].startswith("/api/thumbs/") for kf in body["keyframes"])

    def test_unknown_shot_404(self, client):
        assert client.get("/api/shots/nope/0").status_code == 404

    def test_malformed_shot_index_400(self, client):
        assert client.get("/api/shots/v000/notanint").status_code == 400


class TestConceptEndpoints:
    def test_concept_scores_descending(self, client):
        r = client.get("/api/search/concept", params={"label": "applause", "k": 100})
        assert r.status_code == 200
        body = r.json()
        assert body["query_kind"] == "concept"
        scores = [row["score"] for row in body["results"]]
        assert scores == sorted(scores, reverse=True)
        assert body["results"][0]["rank"] == 1

    def test_unknown_label_404(self, client):
        r = client.get("/api/search/concept", params={"label": "submarine"})
        assert r.status_code == 404

    def test_person_endpoint(self, client):
        r = client.get("/api/search/person", params={"label": "erich honecker"})
        assert r.status_code == 200
        assert r.json()["results"][0]["score"] == 0.97

    def test_pagination(self, client):
        full = client.get("/api/search/concept", params={"label": "applause", "k": 2}).json()
        page = client.get(
            "/api/search/concept", params={"label": "applause", "k": 1, "offset": 1}
        ).json()
        assert page["results"][0]["shot_id"] == full["results"][1]["shot_id"]
        assert page["results"][0]["rank"] == 2

    def test_labels_listing(self, client):
        r = client.get("/api/labels", params={"kind": "person"})
        assert r.status_code == 200
        assert [row["label"] for row in r.json()["labels"]] == ["erich honecker"]
        assert client.get("/api/labels", params={"kind": "animal"}).status_code == 400


class TestTextEndpoint:
    def test_text_query(self, client):
        r = client.get("/api/search/text", params={"q": "planerfüllung"})
        assert r.status_code == 200
        body = r.json()
        assert body["query_kind"] == "text"
        assert body["results"][0]["score"] == 1.0

    def test_empty_query_400(self, client):
        assert client.get("/api/search/text", params={"q": "   "}).status_code == 400


class TestSimilarEndpoint:
    def test_self_hit_rank_one(self, client, bundle):
        ref = bundle.table.shot_ref(5)
        r = client.post("/api/search/similar", json={
            "shot": ref.shot_id, "position": 2, "alpha": 1.0, "k": 10,
        })
        assert r.status_code == 200
        body = r.json()
        assert body["results"][0]["shot_id"] == ref.shot_id
        assert body["results"][0]["score"] == 1.0

    def test_position_defaults_to_middle_keyframe(self, client, bundle):
        ref = bundle.table.shot_ref(5)
        explicit = client.post("/api/search/similar", json={
            "shot": ref.shot_id, "position": 2, "k": 5,
        }).json()
        defaulted = client.post("/api/search/similar", json={
            "shot": ref.shot_id, "k": 5,
        }).json()
        assert explicit["results"] == defaulted["results"]

    def test_vector_query(self, client, bundle):
        rng = np.random.default_rng(0)
        vector = list(rng.normal(size=bundle.hasher.dim))
        r = client.post("/api/search/similar", json={"vector": vector, "k": 5})
        assert r.status_code == 200
        assert len(r.json()["results"]) == 5

    def test_blended_query(self, client, bundle):
        ref = bundle.table.shot_ref(9)
        r = client.post("/api/search/similar", json={
            "shot": ref.shot_id, "alpha": 0.5, "k": 5,
        })
        assert r.status_code == 200
        assert r.json()["results"][0]["shot_id"] == ref.shot_id

    def test_shot_and_vector_together_400(self, client, bundle):
        ref = bundle.table.shot_ref(0)
        r = client.post("/api/search/similar", json={
            "shot": ref.shot_id, "vector": [0.0] * bundle.hasher.dim,
        })
        assert r.status_code == 400
        assert client.post("/api/search/similar", json={}).status_code == 400

    def test_alpha_out_of_range_400(self, client, bundle):
        ref = bundle.table.shot_ref(0)
        r = client.post("/api/search/similar", json={"shot": ref.shot_id, "alpha": 1.5})
        assert r.status_code == 400

    def test_unknown_shot_404(self, client):
        r = client.post("/api/search/similar", json={"shot": "ghost#7"})
        assert r.status_code == 404

    def test_matches_direct_library_call(self, client, bundle):
        ref = bundle.table.shot_ref(12)
        api = client.post("/api/search/similar", json={
            "shot": ref.shot_id, "position": 1, "alpha": 1.0, "k": 8,
        }).json()
        lib = bundle.searcher.query_by_shot(ref.video_id, ref.shot_index, 1, alpha=1.0, k=8)
        assert [row["shot_id"] for row in api["results"]] == [
            s.shot_id for s, _ in lib.entries
        ]
        assert [row["score"] for row in api["results"]] == pytest.approx(
            [sc for _, sc in lib.entries]
        )


class TestHealthAndIntegrity:
    def test_health_reports_metadata(self, client, bundle):
        r = client.get("/api/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["metadata"]["counts"]["shots"] == bundle.table.n_shots

    def test_tampering_after_load_yields_409(self, tmp_path):
        manifest, codes_sem, _, _, _ = make_inputs(tmp_path, n_shots=10, seed=3)
        bundle = build_bundle(tmp_path / "bundle", manifest, codes_semantic=codes_sem)
        client = TestClient(create_app(bundle))
        assert client.get("/api/health").status_code == 200
        target = tmp_path / "bundle" / "codes_semantic.shgc"
        blob = bytearray(target.read_bytes())
        blob[-1] ^= 0xFF
        target.write_bytes(bytes(blob))
        assert client.get("/api/health").status_code == 409

    def test_restart_yields_identical_responses(self, tmp_path):
        manifest, codes_sem, _, annotations, text = make_inputs(tmp_path, n_shots=12, seed=4)
        build_bundle(
            tmp_path / "bundle", manifest, codes_semantic=codes_sem,
            annotations_path=annotations, text_path=text,
        )
        c1 = TestClient(create_app(load_bundle(tmp_path / "bundle")))
        c2 = TestClient(create_app(load_bundle(tmp_path / "bundle")))
        for call in (
            lambda c: c.get("/api/search/concept", params={"label": "applause"}).json(),
            lambda c: c.get("/api/search/text", params={"q": "rauchen"}).json(),
            lambda c: c.post("/api/search/similar", json={"shot": "v000#0"}).json(),
        ):
            assert call(c1) == call(c2)


class TestThumbs:
    def test_placeholder_when_missing(self, client):
        r = client.get("/api/thumbs/v000/0/2.jpg")
        assert r.status_code == 200
        assert r.headers["content-type"] == "image/jpeg"
        assert r.content[:2] == b"\xff\xd8"  # JPEG SOI

    def test_served_from_static_dir(self, bundle, tmp_path):
        thumb_dir = tmp_path / "thumbs"
        target = thumb_dir / "v000" / "0"
        target.mkdir(parents=True)
        payload = b"\xff\xd8fakejpeg"
        (target / "2.jpg").write_bytes(payload)
        client = TestClient(create_app(bundle, thumbs_dir=thumb_dir))
        r = client.get("/api/thumbs/v000/0/2.jpg")
        assert r.content == payload
        # absent file still degrades to the placeholder
        r2 = client.get("/api/thumbs/v000/0/3.jpg")
        assert r2.status_code == 200 and r2.content != payload
