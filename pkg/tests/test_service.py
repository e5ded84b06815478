import json
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from emoblend.model import SLIDER_EMOTIONS, UNIVERSAL_EMOTIONS
from emoblend.service import (
    MAX_ANNOTATIONS_PER_IMAGE,
    MAX_SESSION_SIZE,
    MIN_SESSION_SIZE,
    AnnotationError,
    AnnotationStore,
    CapReached,
    DuplicateAnnotation,
    NotAssigned,
    PoolExhausted,
    UnknownSession,
    create_app,
    discover_image_ids,
    load_auto_labels,
    normalize_annotation,
)


def scores(**kw):
    base = {e: 0.0 for e in SLIDER_EMOTIONS}
    base.update(kw)
    return base


class TestNormalization:
    def test_all_zero_is_pure_neutral(self):
        p = normalize_annotation(scores()).probs
        assert p[0] == 1.0
        assert np.all(p[1:] == 0.0)

    def test_oversubscribed_normalizes_neutral_zero(self):
        p = normalize_annotation(scores(happy=0.8, surprised=0.4)).probs
        assert p[0] == 0.0
        idx_h = UNIVERSAL_EMOTIONS.index("happy")
        idx_s = UNIVERSAL_EMOTIONS.index("surprised")
        assert p[idx_h] == pytest.approx(2.0 / 3.0)
        assert p[idx_s] == pytest.approx(1.0 / 3.0)

    def test_undersubscribed_kept_verbatim(self):
        p = normalize_annotation(scores(sad=0.3, fearful=0.2)).probs
        assert p[UNIVERSAL_EMOTIONS.index("sad")] == pytest.approx(0.3)
        assert p[UNIVERSAL_EMOTIONS.index("fearful")] == pytest.approx(0.2)
        assert p[0] == pytest.approx(0.5)

    def test_boundary_sum_one_takes_normalizing_branch(self):
        p = normalize_annotation(scores(happy=0.6, sad=0.4)).probs
        assert p[0] == 0.0
        assert p[UNIVERSAL_EMOTIONS.index("happy")] == pytest.approx(0.6)
        assert p[UNIVERSAL_EMOTIONS.index("sad")] == pytest.approx(0.4)

    def test_class_order_neutral_first(self):
        p = normalize_annotation(scores(contempt=0.25)).probs
        assert p.size == 8
        assert p[UNIVERSAL_EMOTIONS.index("contempt")] == pytest.approx(0.25)

    def test_missing_and_extra_keys_rejected(self):
        bad = scores()
        del bad["angry"]
        with pytest.raises(AnnotationError, match="missing"):
            normalize_annotation(bad)
        extra = scores()
        extra["neutral"] = 0.2
        with pytest.raises(AnnotationError):
            normalize_annotation(extra)

    @pytest.mark.parametrize("value", [-0.1, 1.1, float("nan")])
    def test_out_of_range_rejected(self, value):
        with pytest.raises(AnnotationError):
            normalize_annotation(scores(happy=value))

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=7,
                    max_size=7))
    @settings(max_examples=100, deadline=None)
    def test_case_arithmetic(self, vals):
        raw = dict(zip(SLIDER_EMOTIONS, vals))
        p = normalize_annotation(raw).probs
        total = sum(vals)
        assert float(p.sum()) == pytest.approx(1.0, abs=1e-9)
        if total >= 1.0:
            assert p[0] == 0.0
            for i, e in enumerate(SLIDER_EMOTIONS):
                assert p[1 + i] == pytest.approx(vals[i] / total, abs=1e-9)
        else:
            assert p[0] == pytest.approx(1.0 - total, abs=1e-9)
            for i, e in enumerate(SLIDER_EMOTIONS):
                assert p[1 + i] == pytest.approx(vals[i], abs=1e-12)


class TestStoreSessions:
    def test_pool_validation(self, tmp_path):
        with pytest.raises(AnnotationError):
            AnnotationStore([], tmp_path)
        with pytest.raises(AnnotationError):
            AnnotationStore(["a", "a"], tmp_path)

    def test_session_size_within_protocol_bounds(self, tmp_path):
        store = AnnotationStore([f"img{i}" for i in range(40)], tmp_path, seed=3)
        for k in range(30):
            s = store.assign_session(f"ann{k}")
            assert MIN_SESSION_SIZE <= len(s.image_ids) <= MAX_SESSION_SIZE
            assert len(set(s.image_ids)) == len(s.image_ids)

    def test_empty_annotator_rejected(self, tmp_path):
        store = AnnotationStore(["a"], tmp_path, seed=1)
        with pytest.raises(AnnotationError):
            store.assign_session("")

    def test_never_assigns_already_annotated_image(self, tmp_path):
        store = AnnotationStore(["x", "y"], tmp_path, seed=5)
        while True:
            s = store.assign_session("ann")
            if "x" in s.image_ids:
                break
        store.submit(s.session_id, "x", scores(happy=0.5))
        for _ in range(20):
            try:
                s2 = store.assign_session("ann")
            except PoolExhausted:
                break
            assert "x" not in s2.image_ids

    def test_pool_exhausted_for_finished_annotator(self, tmp_path):
        store = AnnotationStore(["only"], tmp_path, seed=2)
        s = store.assign_session("ann")
        store.submit(s.session_id, "only", scores(sad=0.4))
        with pytest.raises(PoolExhausted):
            store.assign_session("ann")

    def test_pool_exhausted_when_all_images_capped(self, tmp_path):
        store = AnnotationStore(["only"], tmp_path, seed=2)
        for k in range(MAX_ANNOTATIONS_PER_IMAGE):
            s = store.assign_session(f"ann{k}")
            store.submit(s.session_id, "only", scores(happy=0.9))
        with pytest.raises(PoolExhausted):
            store.assign_session("late")


class TestStoreSubmit:
    def test_returns_normalized_label(self, tmp_path):
        store = AnnotationStore(["img"], tmp_path, seed=1)
        s = store.assign_session("ann")
        label = store.submit(s.session_id, "img", scores(happy=0.8,
                                                         surprised=0.4))
        assert label.probs[UNIVERSAL_EMOTIONS.index("happy")] == pytest.approx(
            2.0 / 3.0)

    def test_duplicate_rejected(self, tmp_path):
        store = AnnotationStore(["img", "other"], tmp_path, seed=1)
        while True:
            s = store.assign_session("ann")
            if "img" in s.image_ids:
                break
        store.submit(s.session_id, "img", scores(happy=0.5))
        with pytest.raises(DuplicateAnnotation):
            store.submit(s.session_id, "img", scores(happy=0.5))

    def test_unknown_session_rejected(self, tmp_path):
        store = AnnotationStore(["img"], tmp_path, seed=1)
        with pytest.raises(UnknownSession):
            store.submit("nope", "img", scores())

    def test_unassigned_image_rejected(self, tmp_path):
        # sessions hold at most 4 images, so one of five stays unassigned
        pool = [f"img{i}" for i in range(5)]
        store = AnnotationStore(pool, tmp_path, seed=4)
        s = store.assign_session("ann")
        outside = next(i for i in pool if i not in s.image_ids)
        with pytest.raises(NotAssigned):
            store.submit(s.session_id, outside, scores())

    def test_cap_reached_at_submit_time(self, tmp_path):
        store = AnnotationStore(["img"], tmp_path, seed=1)
        sessions = [store.assign_session(f"ann{k}") for k in range(4)]
        for s in sessions[:MAX_ANNOTATIONS_PER_IMAGE]:
            store.submit(s.session_id, "img", scores(angry=0.7))
        with pytest.raises(CapReached):
            store.submit(sessions[3].session_id, "img", scores(angry=0.7))

    def test_cap_holds_under_concurrency(self, tmp_path):
        store = AnnotationStore(["img"], tmp_path, seed=1)
        n_threads = 8
        sessions = [store.assign_session(f"ann{k}") for k in range(n_threads)]
        barrier = threading.Barrier(n_threads)
        outcomes = []
        lock = threading.Lock()

        def worker(session):
            barrier.wait()
            try:
                store.submit(session.session_id, "img", scores(happy=1.0))
                result = "ok"
            except CapReached:
                result = "capped"
            with lock:
                outcomes.append(result)

        threads = [threading.Thread(target=worker, args=(s,)) for s in sessions]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert outcomes.count("ok") == MAX_ANNOTATIONS_PER_IMAGE
        assert outcomes.count("capped") == n_threads - MAX_ANNOTATIONS_PER_IMAGE
        assert store.counts["img"] == MAX_ANNOTATIONS_PER_IMAGE


class TestPersistence:
    def test_log_lines_are_json_events(self, tmp_path):
        store = AnnotationStore(["img"], tmp_path, seed=1)
        s = store.assign_session("ann")
        store.submit(s.session_id, "img", scores(fearful=0.2))
        lines = (tmp_path / "annotations.jsonl").read_text().splitlines()
        events = [json.loads(l) for l in lines]
        assert [e["event"] for e in events] == ["session", "annotation"]
        assert events[1]["image_id"] == "img"
        assert len(events[1]["normalized"]) == 8

    def test_replay_restores_state(self, tmp_path):
        store = AnnotationStore(["a", "b"], tmp_path, seed=7)
        s = store.assign_session("ann")
        img = s.image_ids[0]
        store.submit(s.session_id, img, scores(disgusted=0.6, angry=0.6))

        reborn = AnnotationStore(["a", "b"], tmp_path, seed=7)
        assert reborn.counts[img] == 1
        assert ("ann", img) in reborn.annotated
        assert s.session_id in reborn.sessions
        assert img in reborn.sessions[s.session_id].submitted
        with pytest.raises(DuplicateAnnotation):
            reborn.submit(s.session_id, img, scores(disgusted=0.6, angry=0.6))

    def test_log_is_authoritative_over_snapshot(self, tmp_path):
        store = AnnotationStore(["a"], tmp_path, seed=7)
        s = store.assign_session("ann")
        store.submit(s.session_id, "a", scores(happy=1.0))
        (tmp_path / "state.json").unlink()
        reborn = AnnotationStore(["a"], tmp_path, seed=7)
        assert reborn.counts["a"] == 1

    def test_corrupt_log_rejected(self, tmp_path):
        (tmp_path / "annotations.jsonl").write_text("not json\n")
        with pytest.raises(AnnotationError):
            AnnotationStore(["a"], tmp_path)

    def test_snapshot_is_valid_json(self, tmp_path):
        store = AnnotationStore(["a"], tmp_path, seed=7)
        s = store.assign_session("ann")
        store.submit(s.session_id, "a", scores(sad=0.1))
        state = json.loads((tmp_path / "state.json").read_text())
        assert state["counts"]["a"] == 1
        assert s.session_id in state["sessions"]


class TestAgreement:
    @staticmethod
    def filled_store(tmp_path):
        store = AnnotationStore(["img1", "img2", "img3"], tmp_path, seed=11)
        targets = {"img1": scores(happy=0.9), "img2": scores(sad=0.5)}
        for ann in ("a", "b"):
            done = set()
            while len(done) < 2:
                try:
                    s = store.assign_session(ann)
                except PoolExhausted:
                    break
                for img in s.image_ids:
                    if img in targets and img not in done:
                        store.submit(s.session_id, img, targets[img])
                        done.add(img)
        return store

    def test_empty_report(self, tmp_path):
        store = AnnotationStore(["img"], tmp_path, seed=1)
        report = store.agreement_report({})
        assert report["n_images"] == 0
        assert report["means"] is None
        assert report["per_image"] == []

    def test_divergences_match_direct_recomputation(self, tmp_path):
        store = self.filled_store(tmp_path)
        uniform = [1.0 / 8.0] * 8
        auto = {"img1": uniform, "img2": uniform}
        report = store.agreement_report(auto)
        assert report["n_images"] == 2
        eps = 1e-10
        for row in report["per_image"]:
            rows = [p for _, p in store.by_image[row["image_id"]]]
            mean = np.mean(np.asarray(rows), axis=0)
            mean = mean / mean.sum()
            assert row["js"] == pytest.approx(
                oracles.direct_js(mean, uniform, eps), abs=1e-9)
            assert row["kl_human_auto"] == pytest.approx(
                oracles.direct_kl(mean, uniform, eps), abs=1e-9)
            assert row["kl_auto_human"] == pytest.approx(
                oracles.direct_kl(uniform, mean, eps), abs=1e-9)
        assert report["means"]["js"] == pytest.approx(
            np.mean([r["js"] for r in report["per_image"]]))

    def test_annotated_image_without_auto_label_skipped(self, tmp_path):
        store = self.filled_store(tmp_path)
        report = store.agreement_report({"img1": [1.0 / 8.0] * 8})
        assert "img2" in report["skipped"]

    def test_wrong_length_auto_label_rejected(self, tmp_path):
        store = self.filled_store(tmp_path)
        with pytest.raises(AnnotationError):
            store.agreement_report({"img1": [0.5, 0.5]})


class TestHelpers:
    def test_load_auto_labels(self, tmp_path):
        p = tmp_path / "auto.csv"
        header = "id," + ",".join(UNIVERSAL_EMOTIONS)
        p.write_text(header + "\nimg1," + ",".join(["0.125"] * 8) + "\n")
        labels = load_auto_labels(p)
        assert labels["img1"] == [0.125] * 8

    def test_load_auto_labels_bad_header(self, tmp_path):
        p = tmp_path / "auto.csv"
        p.write_text("id,happy\nimg1,1.0\n")
        with pytest.raises(AnnotationError):
            load_auto_labels(p)

    def test_discover_image_ids(self, tmp_path):
        for name in ("b.png", "a.jpg", "notes.txt", "c.JPEG"):
            (tmp_path / name).write_bytes(b"x")
        assert discover_image_ids(tmp_path) == ["a.jpg", "b.png", "c.JPEG"]

    def test_discover_empty_rejected(self, tmp_path):
        with pytest.raises(AnnotationError):
            discover_image_ids(tmp_path)


class TestHttpApi:
    @staticmethod
    def client(tmp_path, pool=("img1", "img2"), auto=None, seed=1):
        from fastapi.testclient import TestClient
        store = AnnotationStore(list(pool), tmp_path, seed=seed)
        return TestClient(create_app(store, auto_labels=auto)), store

    def test_session_flow(self, tmp_path):
        client, _ = self.client(tmp_path)
        r = client.post("/session", json={"annotator_id": "ann"})
        assert r.status_code == 200
        body = r.json()
        assert body["session_id"]
        assert all(img["url"] == f"/images/{img['id']}" for img in body["images"])

        target = body["images"][0]["id"]
        r2 = client.post("/annotation", json={
            "session_id": body["session_id"], "image_id": target,
            "scores": scores(happy=0.8, surprised=0.4)})
        assert r2.status_code == 200
        out = r2.json()
        assert out["status"] == "ok"
        assert out["classes"] == list(UNIVERSAL_EMOTIONS)
        assert out["normalized"][UNIVERSAL_EMOTIONS.index("happy")] == \
            pytest.approx(2.0 / 3.0)

    def test_pool_exhausted_conflict(self, tmp_path):
        client, store = self.client(tmp_path, pool=("only",))
        r = client.post("/session", json={"annotator_id": "ann"})
        client.post("/annotation", json={
            "session_id": r.json()["session_id"], "image_id": "only",
            "scores": scores(sad=0.5)})
        r2 = client.post("/session", json={"annotator_id": "ann"})
        assert r2.status_code == 409
        assert r2.json()["status"] == "pool-exhausted"

    def test_duplicate_conflict(self, tmp_path):
        client, _ = self.client(tmp_path, pool=("only",))
        sid = client.post("/session",
                          json={"annotator_id": "ann"}).json()["session_id"]
        payload = {"session_id": sid, "image_id": "only",
                   "scores": scores(sad=0.5)}
        assert client.post("/annotation", json=payload).status_code == 200
        r = client.post("/annotation", json=payload)
        assert r.status_code == 409
        assert r.json()["status"] == "duplicate"

    def test_cap_reached_conflict(self, tmp_path):
        client, store = self.client(tmp_path, pool=("only",))
        sids = [client.post("/session", json={"annotator_id": f"a{k}"}
                            ).json()["session_id"] for k in range(4)]
        for sid in sids[:3]:
            assert client.post("/annotation", json={
                "session_id": sid, "image_id": "only",
                "scores": scores(angry=0.9)}).status_code == 200
        r = client.post("/annotation", json={
            "session_id": sids[3], "image_id": "only",
            "scores": scores(angry=0.9)})
        assert r.status_code == 409
        assert r.json()["status"] == "cap-reached"

    def test_unknown_session_404(self, tmp_path):
        client, _ = self.client(tmp_path)
        r = client.post("/annotation", json={
            "session_id": "ghost", "image_id": "img1", "scores": scores()})
        assert r.status_code == 404
        assert r.json()["status"] == "unknown-session"

    def test_invalid_scores_400(self, tmp_path):
        client, _ = self.client(tmp_path)
        sid = client.post("/session",
                          json={"annotator_id": "ann"}).json()["session_id"]
        r = client.post("/annotation", json={
            "session_id": sid, "image_id": "img1",
            "scores": {"happy": 2.0}})
        assert r.status_code == 400
        assert r.json()["status"] == "invalid"

    def test_report_endpoint(self, tmp_path):
        auto = {"img1": [1.0 / 8.0] * 8, "img2": [1.0 / 8.0] * 8}
        client, _ = self.client(tmp_path, auto=auto)
        sid_body = client.post("/session", json={"annotator_id": "ann"}).json()
        img = sid_body["images"][0]["id"]
        client.post("/annotation", json={
            "session_id": sid_body["session_id"], "image_id": img,
            "scores": scores(happy=0.9)})
        r = client.get("/report")
        assert r.status_code == 200
        body = r.json()
        assert body["classes"] == list(UNIVERSAL_EMOTIONS)
        assert body["n_images"] == 1
        assert body["per_image"][0]["image_id"] == img
