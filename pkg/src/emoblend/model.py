"""Core domain types: emotion distributions, taxonomies, sample records, probability labels."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

# Canonical class order for the 8-emotion setting. Index 0 is neutral so that
# label CSVs, the annotation service and the UI all agree on who is who.
UNIVERSAL_EMOTIONS: Tuple[str, ...] = (
    "neutral",
    "happy",
    "sad",
    "surprised",
    "fearful",
    "disgusted",
    "angry",
    "contempt",
)

# The 7 emotions users score directly (neutral is recovered, never scored).
SLIDER_EMOTIONS: Tuple[str, ...] = UNIVERSAL_EMOTIONS[1:]

# The six prototypical emotions used by the dominance estimator (no neutral,
# no contempt).
CORE_SIX: Tuple[str, ...] = (
    "happy",
    "sad",
    "surprised",
    "fearful",
    "disgusted",
    "angry",
)

PROB_SUM_TOL = 1e-9


class EmotionModelError(ValueError):
    """Invalid emotion-model data (bad parameters, malformed vectors, ...)."""


@dataclass(frozen=True)
class EmotionDistribution:
    """One emotion term as an axis-aligned trivariate Gaussian over VAD.

    ``mu`` and ``sigma`` are (V, A, D) triples on the [-1, 1] scale.  ``rho``
    optionally carries the pairwise correlations (rho_va, rho_vd, rho_ad)
    used by the dominance regression; absent means "treat as zero".
    """

    name: str
    mu: Tuple[float, float, float]
    sigma: Tuple[float, float, float]
    rho: Optional[Tuple[float, float, float]] = None
    is_universal: bool = False

    def __post_init__(self):
        if not self.name:
            raise EmotionModelError("emotion name must be non-empty")
        object.__setattr__(self, "mu", tuple(float(x) for x in self.mu))
        object.__setattr__(self, "sigma", tuple(float(x) for x in self.sigma))
        if len(self.mu) != 3 or len(self.sigma) != 3:
            raise EmotionModelError(f"{self.name}: mu and sigma must have 3 components")
        for axis, m in zip("VAD", self.mu):
            if not math.isfinite(m) or not -1.0 <= m <= 1.0:
                raise EmotionModelError(f"{self.name}: mu_{axis}={m} outside [-1, 1]")
        for axis, s in zip("VAD", self.sigma):
            if not math.isfinite(s) or s <= 0.0:
                raise EmotionModelError(f"{self.name}: sigma_{axis}={s} must be > 0")
        if self.rho is not None:
            rho = tuple(float(x) for x in self.rho)
            object.__setattr__(self, "rho", rho)
            if len(rho) != 3:
                raise EmotionModelError(f"{self.name}: rho must have 3 components")
            for pair, r in zip(("va", "vd", "ad"), rho):
                if not math.isfinite(r) or not -1.0 < r < 1.0:
                    raise EmotionModelError(
                        f"{self.name}: rho_{pair}={r} outside (-1, 1)"
                    )

    def rho_or_zero(self) -> Tuple[float, float, float]:
        return self.rho if self.rho is not None else (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Taxonomy:
    """Ordered label space: ProbLabel index i always refers to emotions[i]."""

    emotions: Tuple[EmotionDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "emotions", tuple(self.emotions))
        if len(self.emotions) < 1:
            raise EmotionModelError("taxonomy must contain at least one emotion")
        seen = set()
        for e in self.emotions:
            if e.name in seen:
                raise EmotionModelError(f"duplicate emotion name: {e.name!r}")
            seen.add(e.name)

    @property
    def K(self) -> int:
        return len(self.emotions)

    def names(self) -> Tuple[str, ...]:
        return tuple(e.name for e in self.emotions)

    def index_of(self, name: str) -> int:
        for i, e in enumerate(self.emotions):
            if e.name == name:
                return i
        raise EmotionModelError(f"emotion {name!r} not in taxonomy")

    def get(self, name: str) -> EmotionDistribution:
        return self.emotions[self.index_of(name)]

    def universals(self) -> Tuple[EmotionDistribution, ...]:
        return tuple(e for e in self.emotions if e.is_universal)

    def non_universals(self) -> Tuple[EmotionDistribution, ...]:
        return tuple(e for e in self.emotions if not e.is_universal)

    def subset(self, names: Sequence[str]) -> "Taxonomy":
        return Taxonomy(tuple(self.get(n) for n in names))


PRIMARY_SET = "primary-set"
AUXILIARY_SET = "auxiliary-set"
_SOURCES = (PRIMARY_SET, AUXILIARY_SET)


@dataclass
class SampleRecord:
    """One annotation row: image id plus its VA(D) values and optional label.

    Valence/arousal must always be present and finite; the [-1, 1] range is
    checked by the processing stages (out-of-range rows are rejected there,
    per record, rather than crashing a whole ingest).
    """

    id: str
    valence: float
    arousal: float
    dominance: Optional[float] = None
    label: Optional[str] = None
    source: str = PRIMARY_SET

    def __post_init__(self):
        if not self.id:
            raise EmotionModelError("sample id must be non-empty")
        self.valence = float(self.valence)
        self.arousal = float(self.arousal)
        if not math.isfinite(self.valence) or not math.isfinite(self.arousal):
            raise EmotionModelError(f"{self.id}: valence/arousal must be finite")
        if self.dominance is not None:
            self.dominance = float(self.dominance)
        if self.label == "":
            self.label = None
        if self.source not in _SOURCES:
            raise EmotionModelError(
                f"{self.id}: source {self.source!r} not one of {_SOURCES}"
            )

    def va_in_range(self) -> bool:
        return -1.0 <= self.valence <= 1.0 and -1.0 <= self.arousal <= 1.0


@dataclass(frozen=True)
class ProbLabel:
    """Length-K probability vector; entries in [0, 1], summing to 1."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise EmotionModelError("probability vector must be 1-D and non-empty")
        if not np.all(np.isfinite(p)):
            raise EmotionModelError("probability vector contains non-finite entries")
        if np.any(p < 0.0) or np.any(p > 1.0 + PROB_SUM_TOL):
            raise EmotionModelError("probability entries must lie in [0, 1]")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise EmotionModelError(f"probabilities sum to {p.sum()!r}, not 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def K(self) -> int:
        return self.probs.size

    def argmax(self) -> int:
        # ties resolve to the lowest index
        return int(np.argmax(self.probs))

    def __iter__(self):
        return iter(self.probs)


def prob_label_from_scores(scores: Iterable[float]) -> ProbLabel:
    """Normalize a non-negative score vector into a ProbLabel."""
    s = np.asarray(list(scores) if not isinstance(scores, np.ndarray) else scores,
                   dtype=float)
    if s.ndim != 1 or s.size < 1:
        raise EmotionModelError("score vector must be 1-D and non-empty")
    if not np.all(np.isfinite(s)):
        raise EmotionModelError("score vector contains non-finite entries")
    if np.any(s < 0.0):
        raise EmotionModelError("scores must be non-negative")
    total = s.sum()
    if total <= 0.0:
        raise EmotionModelError("no mass to normalize")
    return ProbLabel(s / total)


def one_hot(index: int, k: int) -> ProbLabel:
    """One-hot ProbLabel with mass on ``index``."""
    if not 0 <= index < k:
        raise EmotionModelError(f"one-hot index {index} outside [0, {k})")
    p = np.zeros(k)
    p[index] = 1.0
    return ProbLabel(p)
