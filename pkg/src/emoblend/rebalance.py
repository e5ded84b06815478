"""VA-quadrant density rebalancing: admit auxiliary samples into sparse quadrants.

Quadrants of the valence-arousal plane (Q1 = V>0,A>0; Q2 = V<0,A>0;
Q3 = V<0,A<0; Q4 = V>0,A<0; zero coordinates go to the positive side) each
have density count/area.  A candidate is admitted when its quadrant is below
the cap, and admission immediately updates that quadrant's density, so the
scan is order-dependent by design.  Admission never looks at the candidate's
categorical label.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

from .model import EmotionModelError, SampleRecord

QUADRANTS = (1, 2, 3, 4)


class RebalanceError(EmotionModelError):
    pass


def quadrant_of(v: float, a: float) -> int:
    """Quadrant id for a VA pair; boundaries (v=0 or a=0) count as positive."""
    if v >= 0.0:
        return 1 if a >= 0.0 else 4
    return 2 if a >= 0.0 else 3


@dataclass
class QuadrantStats:
    """Sample counts and densities per VA quadrant."""

    counts: List[int] = field(default_factory=lambda: [0, 0, 0, 0])
    areas: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if len(self.counts) != 4 or len(self.areas) != 4:
            raise RebalanceError("expected 4 quadrant counts and areas")
        if any(a <= 0.0 for a in self.areas):
            raise RebalanceError("quadrant areas must be positive")
        if any(c < 0 for c in self.counts):
            raise RebalanceError("quadrant counts must be non-negative")

    @classmethod
    def from_records(cls, records: Iterable[SampleRecord]) -> "QuadrantStats":
        counts = [0, 0, 0, 0]
        for r in records:
            counts[quadrant_of(r.valence, r.arousal) - 1] += 1
        return cls(counts=counts)

    def density(self, quadrant: int) -> float:
        return self.counts[quadrant - 1] / self.areas[quadrant - 1]

    def densities(self) -> Tuple[float, ...]:
        return tuple(self.density(q) for q in QUADRANTS)

    def max_density(self) -> float:
        return max(self.densities())

    def copy(self) -> "QuadrantStats":
        return QuadrantStats(counts=list(self.counts), areas=self.areas)


def max_quadrant_density(
    primary: Sequence[SampleRecord], reference_label: str
) -> float:
    """Density cap: the quadrant holding the reference emotion's mean VA.

    The reference quadrant is located by the mean valence/arousal of
    reference-labeled samples; its density is computed over all primary
    samples falling there.
    """
    if not primary:
        raise RebalanceError("primary dataset is empty")
    ref = [r for r in primary if r.label == reference_label]
    if not ref:
        raise RebalanceError(f"reference label {reference_label!r} absent from primary")
    mean_v = sum(r.valence for r in ref) / len(ref)
    mean_a = sum(r.arousal for r in ref) / len(ref)
    stats = QuadrantStats.from_records(primary)
    return stats.density(quadrant_of(mean_v, mean_a))


def admit_stream(
    primary: QuadrantStats,
    cap: float,
    candidates: Iterable[SampleRecord],
) -> Tuple[List[SampleRecord], QuadrantStats]:
    """Sequentially admit candidates whose quadrant density is below the cap."""
    if cap <= 0.0:
        raise RebalanceError(f"cap must be > 0, got {cap}")
    stats = primary.copy()
    admitted = []
    for rec in candidates:
        q = quadrant_of(rec.valence, rec.arousal)
        if stats.density(q) < cap:
            admitted.append(rec)
            stats.counts[q - 1] += 1
    return admitted, stats
