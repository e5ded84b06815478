from importlib import resources

import numpy as np
import pytest

from emoblend.io import load_lexicon
from emoblend.model import EmotionDistribution, Taxonomy

LEXICON_SEED = 20240501


def lexicon_path():
    return resources.files("emoblend") / "data" / "russell_vad_lexicon.csv"


def conflict_pairs_path():
    return resources.files("emoblend") / "data" / "conflict_pairs_universal.csv"


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(lexicon_path())


@pytest.fixture(scope="session")
def universals(lexicon):
    return lexicon.universals()


def make_emotion(name, mu, sigma, rho=None, is_universal=False):
    return EmotionDistribution(
        name=name,
        mu=np.asarray(mu, dtype=float),
        sigma=np.asarray(sigma, dtype=float),
        rho=None if rho is None else tuple(rho),
        is_universal=is_universal,
    )


@pytest.fixture
def small_taxonomy():
    return Taxonomy(emotions=[
        make_emotion("neutral", (0.0, 0.0, 0.0), (0.3, 0.3, 0.3), is_universal=True),
        make_emotion("bright", (0.8, 0.5, 0.4), (0.2, 0.25, 0.3), is_universal=True),
        make_emotion("dim", (-0.6, -0.3, -0.3), (0.25, 0.3, 0.3), is_universal=True),
        make_emotion("tense", (-0.6, 0.6, -0.4), (0.2, 0.3, 0.3), is_universal=True),
        make_emotion("mellow", (0.6, -0.4, 0.1), (0.25, 0.3, 0.3)),
        make_emotion("edgy", (-0.4, 0.4, 0.2), (0.25, 0.3, 0.3)),
    ])


def random_emotion(rng, name="e", universal=False, with_rho=False):
    mu = rng.uniform(-0.9, 0.9, size=3)
    sigma = rng.uniform(0.15, 0.45, size=3)
    rho = None
    if with_rho:
        # Keep the correlation matrix comfortably positive definite.
        rho = tuple(rng.uniform(-0.5, 0.5, size=3))
    return make_emotion(name, mu, sigma, rho=rho, is_universal=universal)
