"""Annotation collection service: sessions, slider normalization, agreement.

Protocol: an annotator requests a session and receives one to four images
drawn uniformly from the eligible pool (fewer than three stored annotations,
never annotated by that annotator before).  Each submission carries seven
slider scores in [0, 1]; neutral is never a slider.  If the scores sum to at
least one they are normalized to a distribution and neutral gets zero,
otherwise they are kept verbatim and neutral absorbs the remainder.

Persistence is an append-only JSON-lines log; the in-memory state is rebuilt
by replaying it, so the log is the authoritative record.  A compact
``state.json`` snapshot is rewritten after every mutation for humans and
external tooling; it is never read back.

No postponed annotations here: the request models are defined inside
create_app, and the route annotations must hold real classes for the
framework to treat them as body parameters.
"""
import csv
import datetime
import json
import os
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import metrics
from .model import EmotionModelError, ProbLabel, SLIDER_EMOTIONS, UNIVERSAL_EMOTIONS

MAX_ANNOTATIONS_PER_IMAGE = 3
MIN_SESSION_SIZE = 1
MAX_SESSION_SIZE = 4


class AnnotationError(EmotionModelError):
    pass


class PoolExhausted(AnnotationError):
    pass


class DuplicateAnnotation(AnnotationError):
    pass


class CapReached(AnnotationError):
    pass


class UnknownSession(AnnotationError):
    pass


class NotAssigned(AnnotationError):
    pass


def normalize_annotation(scores: Dict[str, float]) -> ProbLabel:
    """Seven slider scores -> eight-class distribution with neutral first.

    Sum >= 1: divide through by the sum, neutral = 0.  Sum < 1: keep the
    scores verbatim, neutral = 1 - sum.  The boundary sum == 1 takes the
    first branch (a no-op division), so neutral is 0 there too.
    """
    expected = set(SLIDER_EMOTIONS)
    got = set(scores)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise AnnotationError(
            f"scores must cover exactly {sorted(expected)}; "
            f"missing {missing}, unexpected {extra}")
    vals = np.array([float(scores[e]) for e in SLIDER_EMOTIONS], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise AnnotationError("scores must be finite")
    if np.any(vals < 0.0) or np.any(vals > 1.0):
        bad = {e: scores[e] for e in SLIDER_EMOTIONS
               if not 0.0 <= float(scores[e]) <= 1.0}
        raise AnnotationError(f"scores must lie in [0, 1], got {bad}")
    total = float(vals.sum())
    if total >= 1.0:
        out = np.concatenate(([0.0], vals / total))
    else:
        out = np.concatenate(([1.0 - total], vals))
    return ProbLabel(probs=out)


@dataclass
class AnnotationSession:
    session_id: str
    annotator_id: str
    image_ids: List[str]
    created_at: str
    submitted: set = field(default_factory=set)

    def remaining(self) -> List[str]:
        return [i for i in self.image_ids if i not in self.submitted]


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class AnnotationStore:
    """Thread-safe annotation state with an append-only JSONL log.

    All mutations happen under one lock: eligibility checks, cap and
    duplicate enforcement, the log append and the in-memory update form one
    atomic step, so the three-annotation cap holds under concurrency.
    """

    def __init__(self, image_ids: Sequence[str], data_dir,
                 seed: Optional[int] = None):
        if not image_ids:
            raise AnnotationError("image pool is empty")
        if len(set(image_ids)) != len(image_ids):
            raise AnnotationError("duplicate image ids in pool")
        self.image_ids = list(image_ids)
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / "annotations.jsonl"
        self.snapshot_path = self.data_dir / "state.json"
        self._lock = threading.Lock()
        self._rng = random.Random(seed)
        self._counter = 0
        self.counts: Dict[str, int] = {i: 0 for i in self.image_ids}
        self.annotated: set = set()  # (annotator_id, image_id)
        self.sessions: Dict[str, AnnotationSession] = {}
        self.by_image: Dict[str, List[Tuple[str, List[float]]]] = {
            i: [] for i in self.image_ids}
        if self.log_path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self.log_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    ev = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise AnnotationError(
                        f"{self.log_path}: line {lineno}: {exc}") from exc
                kind = ev.get("event")
                if kind == "session":
                    self.sessions[ev["session_id"]] = AnnotationSession(
                        session_id=ev["session_id"],
                        annotator_id=ev["annotator_id"],
                        image_ids=list(ev["image_ids"]),
                        created_at=ev["created_at"],
                    )
                elif kind == "annotation":
                    img = ev["image_id"]
                    ann = ev["annotator_id"]
                    self.counts[img] = self.counts.get(img, 0) + 1
                    self.annotated.add((ann, img))
                    self.by_image.setdefault(img, []).append(
                        (ann, list(ev["normalized"])))
                    sess = self.sessions.get(ev.get("session_id", ""))
                    if sess is not None:
                        sess.submitted.add(img)
                else:
                    raise AnnotationError(
                        f"{self.log_path}: line {lineno}: unknown event {kind!r}")

    def _append(self, event: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")

    def _write_snapshot(self) -> None:
        state = {
            "counts": self.counts,
            "annotations": {
                img: [{"annotator_id": a, "normalized": p}
                      for a, p in rows]
                for img, rows in self.by_image.items() if rows
            },
            "sessions": {
                s.session_id: {
                    "annotator_id": s.annotator_id,
                    "image_ids": s.image_ids,
                    "submitted": sorted(s.submitted),
                    "created_at": s.created_at,
                }
                for s in self.sessions.values()
            },
        }
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(state, f, indent=2, sort_keys=True)
        os.replace(tmp, self.snapshot_path)

    def eligible_images(self, annotator_id: str) -> List[str]:
        return [i for i in self.image_ids
                if self.counts[i] < MAX_ANNOTATIONS_PER_IMAGE
                and (annotator_id, i) not in self.annotated]

    def assign_session(self, annotator_id: str) -> AnnotationSession:
        if not annotator_id:
            raise AnnotationError("annotator_id must be non-empty")
        with self._lock:
            pool = self.eligible_images(annotator_id)
            if not pool:
                raise PoolExhausted(f"no eligible images for {annotator_id!r}")
            want = self._rng.randint(MIN_SESSION_SIZE, MAX_SESSION_SIZE)
            chosen = self._rng.sample(pool, min(want, len(pool)))
            self._counter += 1
            sid = f"s{self._counter:06d}-{self._rng.getrandbits(32):08x}"
            session = AnnotationSession(
                session_id=sid, annotator_id=annotator_id,
                image_ids=chosen, created_at=_now())
            self._append({
                "event": "session", "session_id": sid,
                "annotator_id": annotator_id, "image_ids": chosen,
                "created_at": session.created_at,
            })
            self.sessions[sid] = session
            self._write_snapshot()
            return session

    def submit(self, session_id: str, image_id: str,
               scores: Dict[str, float]) -> ProbLabel:
        """Atomic check-and-insert; the caller gets the normalized label."""
        label = normalize_annotation(scores)
        with self._lock:
            session = self.sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"unknown session {session_id!r}")
            if image_id not in session.image_ids:
                raise NotAssigned(
                    f"image {image_id!r} is not part of session {session_id!r}")
            annotator = session.annotator_id
            if (annotator, image_id) in self.annotated:
                raise DuplicateAnnotation(
                    f"{annotator!r} already annotated {image_id!r}")
            if self.counts.get(image_id, 0) >= MAX_ANNOTATIONS_PER_IMAGE:
                raise CapReached(
                    f"image {image_id!r} already has "
                    f"{MAX_ANNOTATIONS_PER_IMAGE} annotations")
            probs = [float(x) for x in label.probs]
            self._append({
                "event": "annotation", "session_id": session_id,
                "annotator_id": annotator, "image_id": image_id,
                "scores": {e: float(scores[e]) for e in SLIDER_EMOTIONS},
                "normalized": probs, "created_at": _now(),
            })
            self.counts[image_id] = self.counts.get(image_id, 0) + 1
            self.annotated.add((annotator, image_id))
            self.by_image.setdefault(image_id, []).append((annotator, probs))
            session.submitted.add(image_id)
            self._write_snapshot()
        return label

    def agreement_report(
        self, auto_labels: Dict[str, Sequence[float]],
        image_ids: Optional[Sequence[str]] = None,
    ) -> dict:
        """Mean-human vs automatic divergence per image plus cohort means.

        Only images holding at least one annotation and an automatic label
        contribute; annotated images lacking an automatic label are listed
        under ``skipped``.  kl_human_auto is KL(human mean || automatic).
        """
        k = len(UNIVERSAL_EMOTIONS)
        with self._lock:
            stored = {img: [p for _, p in rows]
                      for img, rows in self.by_image.items() if rows}
        wanted = list(image_ids) if image_ids is not None else sorted(stored)
        per_image = []
        skipped = []
        human_bars = np.zeros(k)
        auto_bars = np.zeros(k)
        for img in wanted:
            rows = stored.get(img)
            if not rows:
                continue
            if img not in auto_labels:
                skipped.append(img)
                continue
            auto = np.asarray(auto_labels[img], dtype=float)
            if auto.shape != (k,):
                raise AnnotationError(
                    f"automatic label for {img!r} has {auto.size} classes, "
                    f"expected {k}")
            mean = np.mean(np.asarray(rows, dtype=float), axis=0)
            mean = mean / mean.sum()
            per_image.append({
                "image_id": img,
                "n_annotations": len(rows),
                "js": metrics.js_divergence(mean, auto),
                "kl_human_auto": metrics.kl_divergence(mean, auto),
                "kl_auto_human": metrics.kl_divergence(auto, mean),
            })
            human_bars += mean
            auto_bars += auto
        n = len(per_image)
        report = {
            "classes": list(UNIVERSAL_EMOTIONS),
            "n_images": n,
            "per_image": per_image,
            "skipped": skipped,
            "means": None,
            "per_emotion": None,
        }
        if n:
            report["means"] = {
                "js": float(np.mean([r["js"] for r in per_image])),
                "kl_human_auto": float(np.mean(
                    [r["kl_human_auto"] for r in per_image])),
                "kl_auto_human": float(np.mean(
                    [r["kl_auto_human"] for r in per_image])),
            }
            report["per_emotion"] = {
                "human": [float(x) for x in human_bars / n],
                "automatic": [float(x) for x in auto_bars / n],
            }
        return report


def load_auto_labels(path) -> Dict[str, List[float]]:
    """CSV of id plus one probability column per universal emotion."""
    path = Path(path)
    expected = ["id"] + list(UNIVERSAL_EMOTIONS)
    out: Dict[str, List[float]] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(l for l in f if l.strip() and not l.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None:
            raise AnnotationError(f"{path}: empty automatic-labels file")
        if [c.strip() for c in header] != expected:
            raise AnnotationError(
                f"{path}: header must be {expected}, got {header}")
        for row in reader:
            if len(row) != len(expected):
                raise AnnotationError(f"{path}: bad row {row!r}")
            out[row[0].strip()] = [float(x) for x in row[1:]]
    return out


def discover_image_ids(image_dir) -> List[str]:
    exts = {".jpg", ".jpeg", ".png", ".gif", ".bmp", ".webp"}
    root = Path(image_dir)
    ids = sorted(p.name for p in root.iterdir()
                 if p.is_file() and p.suffix.lower() in exts)
    if not ids:
        raise AnnotationError(f"no image files found under {root}")
    return ids


def create_app(store: AnnotationStore,
               auto_labels: Optional[Dict[str, Sequence[float]]] = None,
               image_dir=None, ui_dir=None):
    """FastAPI wiring over an AnnotationStore.

    409 payloads carry a machine-readable status: pool-exhausted, duplicate
    or cap-reached.  The static UI bundle mounts last so API routes win.
    """
    from fastapi import FastAPI
    from fastapi.responses import JSONResponse
    from fastapi.staticfiles import StaticFiles
    from pydantic import BaseModel

    class SessionRequest(BaseModel):
        annotator_id: str

    class AnnotationRequest(BaseModel):
        session_id: str
        image_id: str
        scores: Dict[str, float]

    app = FastAPI(title="emoblend annotation service")
    auto = dict(auto_labels) if auto_labels else {}

    def _image_url(image_id: str) -> str:
        return f"/images/{image_id}"

    @app.post("/session")
    def new_session(req: SessionRequest):
        try:
            session = store.assign_session(req.annotator_id)
        except PoolExhausted as exc:
            return JSONResponse(status_code=409, content={
                "status": "pool-exhausted", "detail": str(exc)})
        except AnnotationError as exc:
            return JSONResponse(status_code=400, content={
                "status": "invalid", "detail": str(exc)})
        return {
            "session_id": session.session_id,
            "images": [{"id": i, "url": _image_url(i)}
                       for i in session.image_ids],
        }

    @app.post("/annotation")
    def post_annotation(req: AnnotationRequest):
        try:
            label = store.submit(req.session_id, req.image_id, req.scores)
        except UnknownSession as exc:
            return JSONResponse(status_code=404, content={
                "status": "unknown-session", "detail": str(exc)})
        except DuplicateAnnotation as exc:
            return JSONResponse(status_code=409, content={
                "status": "duplicate", "detail": str(exc)})
        except CapReached as exc:
            return JSONResponse(status_code=409, content={
                "status": "cap-reached", "detail": str(exc)})
        except AnnotationError as exc:
            return JSONResponse(status_code=400, content={
                "status": "invalid", "detail": str(exc)})
        return {
            "status": "ok",
            "classes": list(UNIVERSAL_EMOTIONS),
            "normalized": [float(x) for x in label.probs],
        }

    @app.get("/report")
    def report():
        return store.agreement_report(auto)

    if image_dir is not None:
        app.mount("/images", StaticFiles(directory=str(image_dir)),
                  name="images")
    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")
    return app
