"""Tests for the HTTP query service."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from ringsketch import pipeline
from ringsketch.imgio import decode_image, encode_png
from ringsketch.service import create_app
from ringsketch.sketchify import invert, sketchify_view


@pytest.fixture(scope="module")
def client(built_workspace):
    app = create_app(built_workspace)
    with TestClient(app) as c:
        yield c


def sketch_png(built_workspace, object_id="shape02", ring=3, view=0) -> bytes:
    """A dark-on-light sketch PNG of one gallery view."""
    ring_set = pipeline.load_ring_set(built_workspace, object_id)
    _, img = ring_set.rings[ring][view]
    edges = sketchify_view(img.pixels, built_workspace.sketch)
    return encode_png(invert(edges).pixels)


def post_query(client, png_bytes, **form):
    return client.post("/api/query", files={"file": ("sketch.png", png_bytes, "image/png")},
                       data=form)


class TestHealth:
    def test_health_ok(self, client):
        resp = client.get("/api/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok"}


class TestQuery:
    def test_sketchified_view_ranks_source_first(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace, "shape02"))
        assert resp.status_code == 200
        body = resp.json()
        assert body["results"][0]["object_id"] == "shape02"
        assert body["scorer"] == "min_l2"
        assert body["gallery_size"] == 4

    def test_results_sorted_descending(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace))
        scores = [r["score"] for r in resp.json()["results"]]
        assert scores == sorted(scores, reverse=True)

    def test_top_k_truncates(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace), top_k="2")
        assert len(resp.json()["results"]) == 2

    def test_each_result_links_a_thumbnail(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace))
        for entry in resp.json()["results"]:
            assert entry["thumbnail"] == f"/api/objects/{entry['object_id']}/views/3/0"
            thumb = client.get(entry["thumbnail"])
            assert thumb.status_code == 200

    def test_scorer_switch_rescores(self, client, built_workspace):
        png = sketch_png(built_workspace)
        default = post_query(client, png)
        top6 = post_query(client, png, scorer="top6")
        assert top6.status_code == 200
        assert top6.json()["scorer"] == "top6"
        d_scores = {r["object_id"]: r["score"] for r in default.json()["results"]}
        t_scores = {r["object_id"]: r["score"] for r in top6.json()["results"]}
        assert d_scores != t_scores

    def test_embed_scorer_available_after_training(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace), scorer="embed")
        assert resp.status_code == 200
        assert resp.json()["scorer"] == "embed"

    def test_unknown_scorer_rejected(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace), scorer="psychic")
        assert resp.status_code == 400

    def test_blank_png_rejected_as_empty_sketch(self, client):
        blank = encode_png(np.full((224, 224), 255, dtype=np.uint8))
        resp = post_query(client, blank)
        assert resp.status_code == 400
        assert resp.json()["detail"] == "empty sketch"

    def test_malformed_bytes_rejected(self, client):
        resp = post_query(client, b"this is not a png")
        assert resp.status_code == 400
        assert "decode" in resp.json()["detail"]

    def test_missing_file_field_rejected(self, client):
        resp = client.post("/api/query", data={"top_k": "3"})
        assert resp.status_code == 422

    def test_bad_top_k_rejected(self, client, built_workspace):
        resp = post_query(client, sketch_png(built_workspace), top_k="0")
        assert resp.status_code == 400


class TestObjectViews:
    def test_view_png_round_trip(self, client):
        resp = client.get("/api/objects/shape00/views/3/0")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        img = decode_image(resp.content)
        assert img.shape == (224, 224)

    def test_unknown_object_404(self, client):
        assert client.get("/api/objects/nothere/views/3/0").status_code == 404

    def test_unknown_view_404(self, client):
        assert client.get("/api/objects/shape00/views/3/99").status_code == 404
        assert client.get("/api/objects/shape00/views/9/0").status_code == 404


class TestApiCliParity:
    def test_api_matches_direct_engine_ranking(self, client, built_workspace):
        png = sketch_png(built_workspace, "shape01", ring=4, view=7)
        api = post_query(client, png).json()["results"]
        engine = pipeline.QueryEngine(built_workspace)
        from ringsketch.sketchify import crop_to_content

        cropped = crop_to_content(decode_image(png),
                                  out_size=built_workspace.resolution)
        direct = engine.rank_image(cropped).ranking
        assert [r["object_id"] for r in api] == [oid for oid, _ in direct]
        for entry, (_, score) in zip(api, direct):
            assert entry["score"] == pytest.approx(score, abs=1e-12)
