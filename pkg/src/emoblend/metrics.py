"""Distribution-comparison and dominant-label metrics.

All divergences use the natural log.  KL gets epsilon smoothing (with
re-normalization) so one-hot vectors stay finite; JS is computed from the
smoothed KL against the midpoint and is bounded by ln 2.  Classification
metrics take the argmax ("dominant") emotion per prediction, ties to the
lowest index, and macro-average over classes present in truth or
prediction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import EmotionModelError, ProbLabel

DEFAULT_EPSILON = 1e-10
LN2 = math.log(2.0)


class MetricError(EmotionModelError):
    pass


@dataclass
class MetricReport:
    """Aggregate metrics for a batch of (prediction, truth) distribution pairs."""

    js: float
    kl_pq: float
    kl_qp: float
    cosine: float
    pearson: float
    accuracy: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    n_pairs: int = 0
    config: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "js": self.js,
            "kl_pq": self.kl_pq,
            "kl_qp": self.kl_qp,
            "cosine": self.cosine,
            "pearson": self.pearson,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_pairs": self.n_pairs,
            "config": self.config,
        }


def _vec(p) -> np.ndarray:
    if isinstance(p, ProbLabel):
        return np.asarray(p.probs, dtype=float)
    return np.asarray(p, dtype=float)


def _check_pair(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape != q.shape or p.ndim != 1:
        raise MetricError(f"dimension mismatch: {p.shape} vs {q.shape}")


def kl_divergence(p, q, epsilon: float = DEFAULT_EPSILON) -> float:
    """KL(p || q) in nats, on epsilon-smoothed and re-normalized vectors."""
    pv, qv = _vec(p), _vec(q)
    _check_pair(pv, qv)
    if epsilon <= 0.0:
        raise MetricError(f"epsilon must be > 0, got {epsilon}")
    ps = (pv + epsilon) / (pv + epsilon).sum()
    qs = (qv + epsilon) / (qv + epsilon).sum()
    return float(np.sum(ps * (np.log(ps) - np.log(qs))))


def js_divergence(p, q, epsilon: float = DEFAULT_EPSILON) -> float:
    """Jensen-Shannon divergence in nats; symmetric, bounded by ln 2."""
    pv, qv = _vec(p), _vec(q)
    _check_pair(pv, qv)
    m = 0.5 * (pv + qv)
    return 0.5 * kl_divergence(pv, m, epsilon) + 0.5 * kl_divergence(qv, m, epsilon)


def cosine_similarity(p, q) -> float:
    pv, qv = _vec(p), _vec(q)
    _check_pair(pv, qv)
    np_, nq = np.linalg.norm(pv), np.linalg.norm(qv)
    if np_ == 0.0 or nq == 0.0:
        raise MetricError("cosine similarity undefined for a zero vector")
    return float(np.dot(pv, qv) / (np_ * nq))


def pearson_corr(p, q) -> float:
    pv, qv = _vec(p), _vec(q)
    _check_pair(pv, qv)
    pc = pv - pv.mean()
    qc = qv - qv.mean()
    sp, sq = np.linalg.norm(pc), np.linalg.norm(qc)
    if sp == 0.0 or sq == 0.0:
        raise MetricError("pearson correlation undefined for a constant vector")
    return float(np.dot(pc, qc) / (sp * sq))


def dominant_label_metrics(
    pred: Sequence, truth: Sequence[int], k: int
) -> Tuple[float, float, float, float]:
    """(accuracy, macro precision, macro recall, macro F1) via argmax labels.

    Macro averages run over classes appearing in truth or in the predicted
    argmaxes; classes absent from both are skipped.  Zero denominators give
    zero per-class precision/recall.
    """
    if len(pred) != len(truth):
        raise MetricError(f"length mismatch: {len(pred)} predictions, {len(truth)} truths")
    if len(pred) == 0:
        raise MetricError("no samples to score")
    pred_idx = np.array([int(np.argmax(_vec(p))) for p in pred])
    truth_idx = np.asarray(truth, dtype=int)
    if np.any(truth_idx < 0) or np.any(truth_idx >= k):
        raise MetricError(f"truth indices must lie in [0, {k})")

    accuracy = float(np.mean(pred_idx == truth_idx))
    classes = sorted(set(pred_idx.tolist()) | set(truth_idx.tolist()))
    precisions, recalls, f1s = [], [], []
    for c in classes:
        tp = int(np.sum((pred_idx == c) & (truth_idx == c)))
        fp = int(np.sum((pred_idx == c) & (truth_idx != c)))
        fn = int(np.sum((pred_idx != c) & (truth_idx == c)))
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2.0 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    return (
        accuracy,
        float(np.mean(precisions)),
        float(np.mean(recalls)),
        float(np.mean(f1s)),
    )


def batch_report(
    pred: Sequence,
    truth: Sequence,
    truth_indices: Optional[Sequence[int]] = None,
    k: Optional[int] = None,
    epsilon: float = DEFAULT_EPSILON,
) -> MetricReport:
    """Mean pairwise metrics over aligned prediction/truth distribution lists."""
    if len(pred) != len(truth):
        raise MetricError(f"length mismatch: {len(pred)} vs {len(truth)}")
    if len(pred) == 0:
        raise MetricError("no pairs to score")
    js, kl_pq, kl_qp, cos, pear = [], [], [], [], []
    for p, q in zip(pred, truth):
        js.append(js_divergence(p, q, epsilon))
        kl_pq.append(kl_divergence(p, q, epsilon))
        kl_qp.append(kl_divergence(q, p, epsilon))
        cos.append(cosine_similarity(p, q))
        pear.append(pearson_corr(p, q))
    report = MetricReport(
        js=float(np.mean(js)),
        kl_pq=float(np.mean(kl_pq)),
        kl_qp=float(np.mean(kl_qp)),
        cosine=float(np.mean(cos)),
        pearson=float(np.mean(pear)),
        n_pairs=len(pred),
        config={"log_base": "e", "epsilon": epsilon, "averaging": "macro"},
    )
    if truth_indices is not None:
        if k is None:
            raise MetricError("k is required with truth_indices")
        acc, prec, rec, f1 = dominant_label_metrics(pred, truth_indices, k)
        report.accuracy, report.precision, report.recall, report.f1 = acc, prec, rec, f1
    return report
