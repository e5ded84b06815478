"""Combined Weighted Dominance Estimation.

Recovers a plausible dominance value for a (valence, arousal) observation as
the posterior-weighted mean of per-emotion linear regressions.  Posterior
weights come from treating V and A as independent univariate Gaussians per
emotion; the regressions are the closed-form least-squares solutions for D
on (V, A) under a trivariate Gaussian with the emotion's moments.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .model import CORE_SIX, EmotionDistribution, EmotionModelError, SampleRecord, Taxonomy

log = logging.getLogger(__name__)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

DEFAULT_PRIOR_STRENGTH = 0.8


class CwdeError(EmotionModelError):
    pass


@dataclass(frozen=True)
class RegressionCoefficients:
    """D ~ beta0 + beta1*V + beta2*A for one emotion."""

    beta0: float
    beta1: float
    beta2: float

    def predict(self, v: float, a: float) -> float:
        return self.beta0 + self.beta1 * v + self.beta2 * a


@dataclass(frozen=True)
class EmotionWeights:
    """Posterior over the six prototypical emotions; sums to 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (6,):
            raise CwdeError(f"expected 6 weights, got shape {w.shape}")
        if np.any(w < 0.0) or np.any(w > 1.0 + 1e-12):
            raise CwdeError("weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > 1e-9:
            raise CwdeError(f"weights sum to {w.sum()!r}, not 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def log_normal_pdf(x: float, mu: float, sigma: float) -> float:
    z = (x - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - _LOG_SQRT_2PI


def va_likelihood(v: float, a: float, emotion: EmotionDistribution) -> float:
    """Joint density of (v, a) under the emotion's independent V/A Gaussians."""
    return math.exp(log_va_likelihood(v, a, emotion))


def log_va_likelihood(v: float, a: float, emotion: EmotionDistribution) -> float:
    mu_v, mu_a, _ = emotion.mu
    s_v, s_a, _ = emotion.sigma
    return log_normal_pdf(v, mu_v, s_v) + log_normal_pdf(a, mu_a, s_a)


def _check_universals(universals: Sequence[EmotionDistribution]) -> None:
    if len(universals) != 6:
        raise CwdeError(f"expected exactly 6 universal emotions, got {len(universals)}")
    names = [e.name for e in universals]
    if len(set(names)) != 6:
        raise CwdeError(f"universal emotion names must be unique, got {names}")


def posterior_weights(
    v: float,
    a: float,
    universals: Sequence[EmotionDistribution],
    prior: Optional[Sequence[float]] = None,
) -> EmotionWeights:
    """Posterior plausibility of each emotion given (v, a).

    Computed in log space with a log-sum-exp normalization, so far-off
    observations that underflow every direct-space density still yield a
    well-defined posterior.  ``prior`` defaults to equiprobable.
    """
    _check_universals(universals)
    loglik = np.array([log_va_likelihood(v, a, e) for e in universals])
    if prior is not None:
        p = np.asarray(prior, dtype=float)
        if p.shape != (6,):
            raise CwdeError(f"prior must have 6 entries, got shape {p.shape}")
        if np.any(p < 0.0) or p.sum() <= 0.0:
            raise CwdeError("prior must be non-negative with positive mass")
        with np.errstate(divide="ignore"):
            loglik = loglik + np.log(p)
    w = np.exp(loglik - logsumexp(loglik))
    return EmotionWeights(w / w.sum())


def regression_for(emotion: EmotionDistribution) -> RegressionCoefficients:
    """Closed-form coefficients of D on (V, A) from the emotion's moments."""
    mu_v, mu_a, mu_d = emotion.mu
    s_v, s_a, s_d = emotion.sigma
    r_va, r_vd, r_ad = emotion.rho_or_zero()
    denom = 1.0 - r_va * r_va
    if denom <= 0.0:
        raise CwdeError(f"{emotion.name}: |rho_va| = 1 makes the regression singular")
    beta1 = (s_d / s_v) * ((r_vd - r_va * r_ad) / denom)
    beta2 = (s_d / s_a) * ((r_ad - r_va * r_vd) / denom)
    beta0 = mu_d - beta1 * mu_v - beta2 * mu_a
    return RegressionCoefficients(beta0, beta1, beta2)


def label_prior_vector(
    universals: Sequence[EmotionDistribution],
    label: str,
    prior_strength: float,
) -> np.ndarray:
    """Prior concentrated on the labeled emotion; the rest share the remainder."""
    if not 1.0 / 6.0 <= prior_strength < 1.0:
        raise CwdeError(f"prior_strength {prior_strength} outside [1/6, 1)")
    names = [e.name for e in universals]
    if label not in names:
        raise CwdeError(f"label {label!r} is not a universal emotion {names}")
    prior = np.full(6, (1.0 - prior_strength) / 5.0)
    prior[names.index(label)] = prior_strength
    return prior


def estimate_dominance(
    v: float,
    a: float,
    universals: Sequence[EmotionDistribution],
    label_prior: Optional[str] = None,
    prior_strength: float = DEFAULT_PRIOR_STRENGTH,
) -> float:
    """Weighted-mean dominance estimate, clamped to [-1, 1]."""
    _check_universals(universals)
    prior = None
    if label_prior is not None:
        prior = label_prior_vector(universals, label_prior, prior_strength)
    w = posterior_weights(v, a, universals, prior=prior).weights
    preds = np.array([regression_for(e).predict(v, a) for e in universals])
    d_hat = float(np.dot(w, preds))
    return max(-1.0, min(1.0, d_hat))


def core_universals(taxonomy: Taxonomy) -> Tuple[EmotionDistribution, ...]:
    """The six prototypical emotions, in canonical order, from a lexicon."""
    missing = [n for n in CORE_SIX if n not in taxonomy.names()]
    if missing:
        raise CwdeError(f"lexicon lacks prototypical emotions: {missing}")
    return tuple(taxonomy.get(n) for n in CORE_SIX)


def fill_dominance(
    records: Iterable[SampleRecord],
    universals: Sequence[EmotionDistribution],
    prior_strength: float = DEFAULT_PRIOR_STRENGTH,
    use_label_prior: bool = True,
) -> Tuple[List[SampleRecord], int]:
    """Fill missing dominance values in-place; returns (records, clamp count).

    Records that already carry dominance keep it.  Labels that do not name a
    universal emotion are ignored rather than rejected (auxiliary datasets
    use their own vocabularies).
    """
    universal_names = {e.name for e in universals}
    out = []
    clamped = 0
    for rec in records:
        if rec.dominance is None:
            label = rec.label if use_label_prior and rec.label in universal_names else None
            raw_prior = None
            if label is not None:
                raw_prior = label_prior_vector(universals, label, prior_strength)
            w = posterior_weights(rec.valence, rec.arousal, universals, prior=raw_prior).weights
            preds = np.array([
                regression_for(e).predict(rec.valence, rec.arousal) for e in universals
            ])
            d_hat = float(np.dot(w, preds))
            if not -1.0 <= d_hat <= 1.0:
                clamped += 1
                d_hat = max(-1.0, min(1.0, d_hat))
            rec.dominance = d_hat
        out.append(rec)
    if clamped:
        log.warning("dominance estimate clamped to [-1, 1] for %d record(s)", clamped)
    return out, clamped
