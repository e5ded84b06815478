"""Emotion consistency loss family: focal + conflict penalty + sparsity.

The conflict term reads the strict upper triangle of a matrix W and charges
sigmoid(W[i, j]) * p_i * p_j for every pair, so jointly activating
conflicting classes is penalized.  Three variants: ``static`` (fixed
near-binary W, no regularization), ``guided`` (learnable W initialized from
the prior mask, no regularization) and ``regularized`` (learnable W plus L1
sparsity).  Analytic gradients are provided for both the logits and W so
the whole family is verifiable by finite differences without any training
framework.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from .model import EmotionModelError, ProbLabel, Taxonomy

STATIC = "static"
GUIDED = "guided"
REGULARIZED = "regularized"
VARIANTS = (STATIC, GUIDED, REGULARIZED)

STATIC_MAGNITUDE = 5.0
LEARNABLE_INIT = 2.0
PRED_CLIP = 1e-12

_MODE_ALIASES = {
    "static": STATIC,
    "guided": GUIDED,
    "guided-learnable": GUIDED,
    "regularized": REGULARIZED,
    "regularized-learnable": REGULARIZED,
}


class LossError(EmotionModelError):
    pass


def canonical_variant(name: str) -> str:
    try:
        return _MODE_ALIASES[name]
    except KeyError:
        raise LossError(f"unknown loss variant {name!r}; expected one of {VARIANTS}") from None


@dataclass
class ConflictMatrix:
    """Pairwise conflict weights; only the strict upper triangle is read."""

    W: np.ndarray
    mode: str = STATIC
    prior_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        if self.W.ndim != 2 or self.W.shape[0] != self.W.shape[1]:
            raise LossError(f"conflict matrix must be square, got shape {self.W.shape}")
        self.mode = canonical_variant(self.mode)
        if self.prior_mask is not None:
            self.prior_mask = np.asarray(self.prior_mask, dtype=bool)
            if self.prior_mask.shape != self.W.shape:
                raise LossError("prior mask shape must match W")

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @classmethod
    def static(cls, prior_mask: np.ndarray, magnitude: float = STATIC_MAGNITUDE):
        mask = np.asarray(prior_mask, dtype=bool)
        W = np.where(mask, magnitude, -magnitude).astype(float)
        return cls(W=W, mode=STATIC, prior_mask=mask)

    @classmethod
    def learnable(cls, prior_mask: np.ndarray, mode: str = GUIDED,
                  init: float = LEARNABLE_INIT):
        mode = canonical_variant(mode)
        if mode == STATIC:
            raise LossError("learnable initialization needs a learnable mode")
        mask = np.asarray(prior_mask, dtype=bool)
        W = np.where(mask, init, -init).astype(float)
        return cls(W=W, mode=mode, prior_mask=mask)


def derive_conflict_pairs(
    taxonomy: Taxonomy, min_radius: float = 0.3
) -> List[Tuple[str, str]]:
    """Conflicting pairs by circumplex opposition.

    Two emotions conflict when their mean valence signs are strictly
    opposite and both VA means sit at least ``min_radius`` from the origin.
    Near-origin terms (neutral above all) never conflict with anything.
    """
    entries = []
    for e in taxonomy.emotions:
        v, a, _ = e.mu
        entries.append((e.name, v, math.hypot(v, a)))
    pairs = []
    for i, (name_i, v_i, r_i) in enumerate(entries):
        for name_j, v_j, r_j in entries[i + 1:]:
            if r_i >= min_radius and r_j >= min_radius and v_i * v_j < 0.0:
                pairs.append(tuple(sorted((name_i, name_j))))
    return sorted(pairs)


def prior_mask_from_pairs(
    taxonomy: Taxonomy, pairs: Sequence[Tuple[str, str]]
) -> np.ndarray:
    mask = np.zeros((taxonomy.K, taxonomy.K), dtype=bool)
    for a, b in pairs:
        i, j = taxonomy.index_of(a), taxonomy.index_of(b)
        mask[i, j] = mask[j, i] = True
    return mask


def load_conflict_pairs(path) -> List[Tuple[str, str]]:
    path = Path(path)
    pairs = []
    with open(path, newline="", encoding="utf-8") as f:
        for lineno, row in enumerate(csv.reader(
                l for l in f if l.strip() and not l.lstrip().startswith("#")), start=1):
            if lineno == 1 and [c.strip() for c in row] == ["emotion_a", "emotion_b"]:
                continue
            if len(row) != 2:
                raise LossError(f"{path}: conflict pair rows need 2 fields, got {row!r}")
            pairs.append(tuple(sorted((row[0].strip(), row[1].strip()))))
    return sorted(set(pairs))


def save_conflict_pairs(pairs: Sequence[Tuple[str, str]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["emotion_a", "emotion_b"])
        for a, b in pairs:
            w.writerow([a, b])


def _vec(p) -> np.ndarray:
    if isinstance(p, ProbLabel):
        return np.asarray(p.probs, dtype=float)
    return np.asarray(p, dtype=float)


def focal_loss(
    pred, target, gamma: float = 2.0,
    class_weights: Optional[Sequence[float]] = None,
) -> float:
    """Soft-target focal cross-entropy."""
    p, t = _vec(pred), _vec(target)
    if p.shape != t.shape or p.ndim != 1:
        raise LossError(f"dimension mismatch: {p.shape} vs {t.shape}")
    if gamma < 0.0:
        raise LossError(f"gamma must be >= 0, got {gamma}")
    alpha = np.ones_like(p) if class_weights is None else np.asarray(class_weights, float)
    if alpha.shape != p.shape:
        raise LossError("class_weights length mismatch")
    pc = np.clip(p, PRED_CLIP, 1.0)
    return float(-np.sum(alpha * t * (1.0 - pc) ** gamma * np.log(pc)))


def _matrix(W) -> np.ndarray:
    return W.W if isinstance(W, ConflictMatrix) else np.asarray(W, dtype=float)


def consistency_term(pred, W) -> float:
    """Sum of sigmoid(W[i, j]) * p_i * p_j over the strict upper triangle."""
    p = _vec(pred)
    M = _matrix(W)
    if M.shape != (p.size, p.size):
        raise LossError(f"conflict matrix shape {M.shape} does not fit {p.size} classes")
    iu = np.triu_indices(p.size, k=1)
    return float(np.sum(expit(M[iu]) * p[iu[0]] * p[iu[1]]))


def sparsity_term(W) -> float:
    """Mean absolute value over all n^2 matrix entries."""
    M = _matrix(W)
    return float(np.mean(np.abs(M)))


@dataclass
class LossBreakdown:
    focal: float
    consistency: float
    sparsity: float
    lambda_: float
    total: float


def total_loss(
    pred, target, W, gamma: float = 2.0, lambda_: float = 0.0,
    variant: Optional[str] = None,
    class_weights: Optional[Sequence[float]] = None,
) -> LossBreakdown:
    """Composite loss; static and guided variants force lambda to zero."""
    if variant is None:
        if not isinstance(W, ConflictMatrix):
            raise LossError("variant is required when W is a bare matrix")
        variant = W.mode
    variant = canonical_variant(variant)
    if lambda_ < 0.0:
        raise LossError(f"lambda must be >= 0, got {lambda_}")
    lam = lambda_ if variant == REGULARIZED else 0.0
    fl = focal_loss(pred, target, gamma, class_weights)
    cons = consistency_term(pred, W)
    sp = sparsity_term(W)
    return LossBreakdown(
        focal=fl, consistency=cons, sparsity=sp, lambda_=lam,
        total=fl + cons + lam * sp,
    )


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max())
    return e / e.sum()


def _sym_upper(M: np.ndarray) -> np.ndarray:
    U = np.triu(M, k=1)
    return U + U.T


def loss_gradients(
    pred_logits: Sequence[float],
    target,
    W,
    gamma: float = 2.0,
    lambda_: float = 0.0,
    variant: Optional[str] = None,
    class_weights: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of total_loss(softmax(logits), ...) wrt logits and W.

    The static variant returns an exactly-zero W gradient.  The L1 term uses
    the zero subgradient at W[i, j] == 0.
    """
    z = np.asarray(pred_logits, dtype=float)
    t = _vec(target)
    M = _matrix(W)
    if variant is None:
        if not isinstance(W, ConflictMatrix):
            raise LossError("variant is required when W is a bare matrix")
        variant = W.mode
    variant = canonical_variant(variant)
    n = z.size
    if t.shape != (n,) or M.shape != (n, n):
        raise LossError("inconsistent sizes across logits, target and W")
    alpha = np.ones(n) if class_weights is None else np.asarray(class_weights, float)
    lam = lambda_ if variant == REGULARIZED else 0.0

    p = softmax(z)
    pc = np.clip(p, PRED_CLIP, 1.0)
    active = p > PRED_CLIP  # below the clip the forward is flat in p

    # d(focal)/dp
    one_m = 1.0 - pc
    g_focal = -alpha * t * one_m ** gamma / pc
    if gamma > 0.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            bend = gamma * np.where(one_m > 0.0, one_m ** (gamma - 1.0), 0.0) * np.log(pc)
        g_focal = g_focal + alpha * t * bend
    g_focal = np.where(active, g_focal, 0.0)

    # d(consistency)/dp
    S = _sym_upper(expit(M))
    g_cons = S @ p

    g_p = g_focal + g_cons
    grad_logits = p * (g_p - float(np.dot(p, g_p)))

    if variant == STATIC:
        grad_W = np.zeros_like(M)
    else:
        iu = np.triu_indices(n, k=1)
        grad_W = np.zeros_like(M)
        s = expit(M[iu])
        grad_W[iu] = s * (1.0 - s) * p[iu[0]] * p[iu[1]]
        if lam > 0.0:
            grad_W = grad_W + lam * np.sign(M) / (n * n)
    return grad_logits, grad_W


def finite_difference_gradients(
    pred_logits: Sequence[float],
    target,
    W,
    gamma: float = 2.0,
    lambda_: float = 0.0,
    variant: Optional[str] = None,
    h: float = 1e-5,
    class_weights: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Central finite differences of total_loss through the softmax."""
    z = np.asarray(pred_logits, dtype=float)
    M = _matrix(W).copy()
    if variant is None:
        if not isinstance(W, ConflictMatrix):
            raise LossError("variant is required when W is a bare matrix")
        variant = W.mode
    variant = canonical_variant(variant)

    def value(zv: np.ndarray, Mv: np.ndarray) -> float:
        return total_loss(softmax(zv), target, Mv, gamma, lambda_, variant,
                          class_weights).total

    gz = np.zeros_like(z)
    for i in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        gz[i] = (value(zp, M) - value(zm, M)) / (2.0 * h)

    gW = np.zeros_like(M)
    if variant != STATIC:
        for i in range(M.shape[0]):
            for j in range(M.shape[1]):
                Mp, Mm = M.copy(), M.copy()
                Mp[i, j] += h
                Mm[i, j] -= h
                gW[i, j] = (value(z, Mp) - value(z, Mm)) / (2.0 * h)
    return gz, gW


def max_relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-4) -> float:
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom))


def gradient_check(
    n: int,
    trials: int,
    variant: str,
    seed: int,
    gamma: float = 2.0,
    lambda_: float = 0.01,
    tol: float = 1e-4,
) -> Tuple[float, float, bool]:
    """Random-instance FD verification; returns (worst logit err, worst W err, ok)."""
    variant = canonical_variant(variant)
    rng = np.random.default_rng(seed)
    worst_z, worst_w = 0.0, 0.0
    for _ in range(trials):
        z = rng.normal(0.0, 2.0, size=n)
        t = rng.dirichlet(np.ones(n))
        mask = np.triu(rng.random((n, n)) < 0.3, k=1)
        mask = mask | mask.T
        if variant == STATIC:
            cm = ConflictMatrix.static(mask)
        else:
            cm = ConflictMatrix.learnable(mask, mode=variant)
            cm.W = cm.W + rng.normal(0.0, 0.5, size=(n, n))
        ga_z, ga_w = loss_gradients(z, t, cm, gamma, lambda_, variant)
        gf_z, gf_w = finite_difference_gradients(z, t, cm, gamma, lambda_, variant)
        worst_z = max(worst_z, max_relative_error(ga_z, gf_z))
        if variant != STATIC:
            worst_w = max(worst_w, max_relative_error(ga_w, gf_w))
        else:
            worst_w = max(worst_w, float(np.max(np.abs(ga_w))))
    return worst_z, worst_w, worst_z <= tol and worst_w <= tol
