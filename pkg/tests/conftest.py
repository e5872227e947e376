import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from fairminer.data import FeatureSchema, FeatureSpec, StructuredDataset


@pytest.fixture
def demographic_schema():
    """gender/race/age sensitive, hours/rate free; binary labels."""
    return FeatureSchema(
        features=(
            FeatureSpec("gender", "categorical", sensitive=True,
                        values=("male", "female")),
            FeatureSpec("race", "categorical", sensitive=True,
                        values=("green", "blue", "red")),
            FeatureSpec("age", "continuous", sensitive=True,
                        minimum=0, maximum=100, integer=True),
            FeatureSpec("hours", "continuous", sensitive=False,
                        minimum=0, maximum=80, integer=True),
            FeatureSpec("rate", "continuous", sensitive=False,
                        minimum=0.0, maximum=1.0),
        ),
        label_names=("0", "1"),
        favorable_label="1",
    )


def build_demographic_rows(rng: np.random.Generator, n: int):
    gender = np.where(rng.random(n) < 0.5, "male", "female")
    race = rng.choice(["green", "blue", "red"], size=n, p=[0.35, 0.35, 0.30])
    age = rng.integers(0, 101, size=n)
    hours = rng.integers(0, 81, size=n)
    rate = np.round(rng.random(n), 2)
    return list(zip(gender.tolist(), race.tolist(), age.tolist(),
                    hours.tolist(), rate.tolist()))


@pytest.fixture
def demographic_dataset(demographic_schema):
    rng = np.random.default_rng(7)
    rows = build_demographic_rows(rng, 400)
    labels = np.where(rng.random(400) < 0.5, "1", "0").tolist()
    return StructuredDataset(demographic_schema, rows, labels)


@pytest.fixture
def tiny_schema():
    return FeatureSchema(
        features=(
            FeatureSpec("gender", "categorical", sensitive=True,
                        values=("male", "female")),
            FeatureSpec("hours", "continuous", sensitive=False,
                        minimum=0, maximum=80, integer=True),
        ),
        label_names=("0", "1"),
        favorable_label="1",
    )
