import random

import pytest

from bell_lab.presets import (
    frozen_random_model,
    noisy_readout_model,
    perfect_correlation_model,
    singleton_flip_model,
    singleton_model,
)
from bell_lab.search import SearchMode, SearchSpec, random_model

CAMPAIGN_SEED = 20260822


def campaign_models(count: int, seed: int = CAMPAIGN_SEED, max_cardinality: int = 4):
    """Seeded stream of random models with per-axis cardinality <= max."""
    rng = random.Random(seed)
    models = []
    for _ in range(count):
        cards = tuple(rng.randint(1, max_cardinality) for _ in range(6))
        spec = SearchSpec(cardinalities=cards, mode=SearchMode.RANDOM)
        models.append(random_model(spec, rng))
    return models


@pytest.fixture(scope="session")
def small_campaign():
    return campaign_models(150)


@pytest.fixture
def singleton():
    return singleton_model()


@pytest.fixture
def singleton_flip():
    return singleton_flip_model()


@pytest.fixture
def perfect():
    return perfect_correlation_model()


@pytest.fixture
def noisy():
    return noisy_readout_model()


@pytest.fixture
def random7():
    return frozen_random_model()
