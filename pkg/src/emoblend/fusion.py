"""Iterative fusion of overlapping emotion distributions.

Two non-universal emotions merge when their normalized intersection measure
(intersection volume over the smaller total volume) exceeds a threshold.
Intersection volumes are Monte Carlo estimates with importance sampling from
the equal-weight two-component mixture; candidate pairs come from a KD-tree
neighbor shortlist, with a full pairwise sweep guaranteeing the final
taxonomy really has no pair above threshold.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .model import EmotionDistribution, EmotionModelError, Taxonomy


class FusionError(EmotionModelError):
    pass


@dataclass(frozen=True)
class FusionConfig:
    seed: int
    t: float = 0.5
    mc_samples: int = 200_000
    neighbors: int = 5
    fuse_samples: int = 1000

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise FusionError(f"threshold t={self.t} outside (0, 1)")
        if self.mc_samples < 10_000:
            raise FusionError(f"mc_samples={self.mc_samples} below 10000")
        if self.neighbors < 1:
            raise FusionError(f"neighbors={self.neighbors} must be >= 1")
        if self.fuse_samples < 2:
            raise FusionError(f"fuse_samples={self.fuse_samples} must be >= 2")


@dataclass
class FusionStep:
    merged_a: str
    merged_b: str
    nim_value: float
    new_name: str


@dataclass
class FusionTrace:
    steps: List[FusionStep] = field(default_factory=list)
    final_count: int = 0


def derive_seed(base: int, *parts: str) -> int:
    """Stable 64-bit stream seed from a base seed and string parts."""
    h = hashlib.sha256(str(int(base)).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(p.encode())
    return int.from_bytes(h.digest()[:8], "little")


def _log_pdf3(points: np.ndarray, e: EmotionDistribution) -> np.ndarray:
    """Log density of the axis-aligned trivariate Gaussian at (n, 3) points."""
    mu = np.asarray(e.mu)
    sigma = np.asarray(e.sigma)
    z = (points - mu) / sigma
    return (-0.5 * np.sum(z * z, axis=1)
            - np.sum(np.log(sigma))
            - 1.5 * math.log(2.0 * math.pi))


def _ordered(e_i: EmotionDistribution, e_j: EmotionDistribution):
    # name order makes sampling (and thus the estimate) argument-order invariant
    return (e_i, e_j) if e_i.name <= e_j.name else (e_j, e_i)


def intersection_volume(
    e_i: EmotionDistribution,
    e_j: EmotionDistribution,
    mc_samples: int,
    seed: int,
) -> float:
    """Monte Carlo estimate of the integral of min(PDF_i, PDF_j) over VAD.

    Importance-samples from the equal-weight mixture of the two densities:
    the integrand is then min/mixture, bounded in (0, 1], so the estimator
    is unbiased with low variance and returns exactly 1.0 for identical
    distributions.
    """
    a, b = _ordered(e_i, e_j)
    rng = np.random.default_rng(seed)
    n_a = mc_samples // 2
    n_b = mc_samples - n_a
    pts_a = np.asarray(a.mu) + np.asarray(a.sigma) * rng.standard_normal((n_a, 3))
    pts_b = np.asarray(b.mu) + np.asarray(b.sigma) * rng.standard_normal((n_b, 3))
    pts = np.vstack([pts_a, pts_b])
    log_pa = _log_pdf3(pts, a)
    log_pb = _log_pdf3(pts, b)
    log_min = np.minimum(log_pa, log_pb)
    log_mix = np.logaddexp(log_pa, log_pb) - math.log(2.0)
    return float(np.mean(np.exp(log_min - log_mix)))


def total_volume(e: EmotionDistribution) -> float:
    """Total probability mass of the emotion's PDF (1 for a proper Gaussian)."""
    return 1.0


def nim(
    e_i: EmotionDistribution,
    e_j: EmotionDistribution,
    config: FusionConfig,
) -> float:
    """Normalized intersection measure: V_cap over the smaller total volume.

    Seeded per pair from the names, so nim(a, b) == nim(b, a) exactly and
    results do not depend on evaluation order.
    """
    a, b = _ordered(e_i, e_j)
    seed = derive_seed(config.seed, "nim", a.name, b.name)
    v_cap = intersection_volume(a, b, config.mc_samples, seed)
    return v_cap / min(total_volume(a), total_volume(b))


def fuse_pair(
    e_i: EmotionDistribution,
    e_j: EmotionDistribution,
    fuse_samples: int,
    seed: int,
) -> EmotionDistribution:
    """Merge two distributions by pooling samples drawn from each.

    Draws ``fuse_samples`` points per parent, pools them, and summarizes the
    pool back to an axis-aligned Gaussian.  The fused term takes the
    lexicographically first parent name and is never universal.
    """
    a, b = _ordered(e_i, e_j)
    rng = np.random.default_rng(seed)
    pts_a = np.asarray(a.mu) + np.asarray(a.sigma) * rng.standard_normal((fuse_samples, 3))
    pts_b = np.asarray(b.mu) + np.asarray(b.sigma) * rng.standard_normal((fuse_samples, 3))
    pool = np.vstack([pts_a, pts_b])
    mu = np.clip(pool.mean(axis=0), -1.0, 1.0)
    sigma = pool.std(axis=0, ddof=1)
    return EmotionDistribution(
        name=a.name,
        mu=tuple(mu),
        sigma=tuple(sigma),
        rho=None,
        is_universal=False,
    )


def _pair_key(name_a: str, name_b: str) -> Tuple[str, str]:
    return (name_a, name_b) if name_a <= name_b else (name_b, name_a)


def _shortlist_pairs(
    active: Sequence[EmotionDistribution], neighbors: int
) -> List[Tuple[str, str]]:
    """Candidate pairs: each term with its nearest neighbors by mean VAD."""
    if len(active) < 2:
        return []
    mus = np.array([e.mu for e in active])
    tree = cKDTree(mus)
    k = min(neighbors + 1, len(active))
    _, idx = tree.query(mus, k=k)
    idx = np.atleast_2d(idx)
    pairs = set()
    for i, row in enumerate(idx):
        for j in np.atleast_1d(row):
            if int(j) != i:
                pairs.add(_pair_key(active[i].name, active[int(j)].name))
    return sorted(pairs)


def _all_pairs(active: Sequence[EmotionDistribution]) -> List[Tuple[str, str]]:
    names = [e.name for e in active]
    return [_pair_key(a, b) for i, a in enumerate(names) for b in names[i + 1:]]


def fuse_taxonomy(
    lexicon: Taxonomy, config: FusionConfig
) -> Tuple[Taxonomy, FusionTrace]:
    """Reduce a lexicon by repeatedly fusing the highest-NIM pair above t.

    Universal terms pass through untouched and never fuse.  Each iteration
    fuses exactly one pair (the globally best among shortlist candidates),
    so the process terminates in at most len(non-universals) - 1 steps.  A
    final full pairwise sweep re-opens fusion if the neighbor shortlist
    missed an overlapping pair, so on return no non-universal pair has
    NIM > t under the configured seed.
    """
    universals = [e for e in lexicon.emotions if e.is_universal]
    if not universals:
        raise FusionError("lexicon has no emotions flagged universal")
    active: List[EmotionDistribution] = [e for e in lexicon.emotions if not e.is_universal]
    by_name: Dict[str, EmotionDistribution] = {e.name: e for e in active}
    nim_cache: Dict[Tuple[str, str], float] = {}
    trace = FusionTrace()

    def nim_for(key: Tuple[str, str]) -> float:
        if key not in nim_cache:
            nim_cache[key] = nim(by_name[key[0]], by_name[key[1]], config)
        return nim_cache[key]

    def best_above_t(pairs: Sequence[Tuple[str, str]]):
        best = None
        for key in pairs:
            value = nim_for(key)
            if value > config.t and (best is None or value > best[1]):
                best = (key, value)
        return best

    def apply_fusion(key: Tuple[str, str], value: float) -> None:
        a, b = key
        fused = fuse_pair(
            by_name[a], by_name[b],
            config.fuse_samples,
            derive_seed(config.seed, "fuse", a, b),
        )
        for name in (a, b):
            active.remove(by_name[name])
            del by_name[name]
        for stale in [k for k in nim_cache if a in k or b in k]:
            del nim_cache[stale]
        active.append(fused)
        by_name[fused.name] = fused
        trace.steps.append(FusionStep(a, b, value, fused.name))

    while True:
        # shortlist-driven loop: fuse the best neighbor pair until none exceeds t
        while len(active) >= 2:
            best = best_above_t(_shortlist_pairs(active, config.neighbors))
            if best is None:
                break
            apply_fusion(*best)
        # enforcement sweep over every remaining pair
        best = best_above_t(_all_pairs(active)) if len(active) >= 2 else None
        if best is None:
            break
        apply_fusion(*best)

    fused_taxonomy = Taxonomy(tuple(universals) + tuple(active))
    trace.final_count = fused_taxonomy.K
    return fused_taxonomy, trace
