"""emoblend: valence-arousal records to emotion probability distributions.

Continuous affect annotations are turned into soft labels over a compact
emotion taxonomy: missing dominance is recovered from valence and arousal,
a large emotion lexicon is reduced by fusing overlapping distributions,
and each sample gets a probability vector by normalized Gaussian
likelihoods.  Supporting pieces: density-based dataset rebalancing,
distribution metrics, a consistency loss family with analytic gradients
and a slider-annotation collection service.
"""

__version__ = "0.1.0"

from .model import (
    AUXILIARY_SET,
    CORE_SIX,
    EmotionDistribution,
    EmotionModelError,
    PRIMARY_SET,
    ProbLabel,
    SLIDER_EMOTIONS,
    SampleRecord,
    Taxonomy,
    UNIVERSAL_EMOTIONS,
    one_hot,
    prob_label_from_scores,
)

__all__ = [
    "AUXILIARY_SET",
    "CORE_SIX",
    "EmotionDistribution",
    "EmotionModelError",
    "PRIMARY_SET",
    "ProbLabel",
    "SLIDER_EMOTIONS",
    "SampleRecord",
    "Taxonomy",
    "UNIVERSAL_EMOTIONS",
    "__version__",
    "one_hot",
    "prob_label_from_scores",
]
