import os
import random

import pytest

DEFAULT_SEED = 20260810


def suite_seed() -> int:
    return int(os.environ.get("CASCADE_LAB_SEED", DEFAULT_SEED))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(suite_seed())
