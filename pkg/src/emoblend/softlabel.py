"""Log-space soft labels: VAD point -> probability distribution over a taxonomy.

Per-class log-likelihoods are sums of three univariate normal log-densities
(V, A, D treated as independent); normalization subtracts the log-sum-exp,
so nothing underflows even for extreme inputs against tight distributions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .model import EmotionModelError, ProbLabel, SampleRecord, Taxonomy

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LogLikelihoodVector:
    """Per-class log densities; may be very negative but always finite."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise EmotionModelError("log-likelihood vector must be 1-D, non-empty")
        if not np.all(np.isfinite(v)):
            raise EmotionModelError("log-likelihood vector has non-finite entries")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def argmax(self) -> int:
        return int(np.argmax(self.values))


def log_axis_likelihood(x: float, mu: float, sigma: float) -> float:
    """Univariate normal log-density."""
    if sigma <= 0.0:
        raise EmotionModelError(f"sigma={sigma} must be > 0")
    z = (x - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - _LOG_SQRT_2PI


@lru_cache(maxsize=8)
def _taxonomy_params(taxonomy: Taxonomy) -> Tuple[np.ndarray, np.ndarray]:
    mus = np.array([e.mu for e in taxonomy.emotions])
    sigmas = np.array([e.sigma for e in taxonomy.emotions])
    return mus, sigmas


def log_likelihoods(vad: Sequence[float], taxonomy: Taxonomy) -> LogLikelihoodVector:
    """Sum of the three axis log-densities, one entry per taxonomy class."""
    x = np.asarray(vad, dtype=float)
    if x.shape != (3,):
        raise EmotionModelError(f"vad must be a (V, A, D) triple, got shape {x.shape}")
    mus, sigmas = _taxonomy_params(taxonomy)
    z = (x - mus) / sigmas
    values = (-0.5 * np.sum(z * z, axis=1)
              - np.sum(np.log(sigmas), axis=1)
              - 3.0 * _LOG_SQRT_2PI)
    return LogLikelihoodVector(values)


def soft_label_from_log(loglik: LogLikelihoodVector) -> ProbLabel:
    values = loglik.values
    p = np.exp(values - logsumexp(values))
    return ProbLabel(p / p.sum())


def soft_label(vad: Sequence[float], taxonomy: Taxonomy) -> ProbLabel:
    """Equiprobable-prior posterior over taxonomy classes for one VAD triple."""
    return soft_label_from_log(log_likelihoods(vad, taxonomy))


@dataclass
class RelabelOutcome:
    """Per-record result: a label, or the reason the record was rejected."""

    id: str
    label: Optional[ProbLabel] = None
    error: Optional[str] = None


DominanceEstimator = Callable[[SampleRecord], float]


def relabel_dataset(
    records: Iterable[SampleRecord],
    taxonomy: Taxonomy,
    dominance: DominanceEstimator,
) -> Iterator[RelabelOutcome]:
    """Soft-label a record stream, preserving order.

    Records carrying a dominance value keep it; the estimator fills only
    gaps.  Out-of-range VA yields a per-record error entry and processing
    continues.
    """
    for rec in records:
        if not rec.va_in_range():
            yield RelabelOutcome(
                rec.id,
                error=f"valence/arousal ({rec.valence}, {rec.arousal}) outside [-1, 1]",
            )
            continue
        d = rec.dominance if rec.dominance is not None else dominance(rec)
        yield RelabelOutcome(rec.id, label=soft_label((rec.valence, rec.arousal, d), taxonomy))
