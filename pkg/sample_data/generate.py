"""Regenerate the demo audit inputs in this directory.

Builds a synthetic loan-style dataset whose labels depend mostly on two
merit features (hours, rate) plus a deliberate bump for gender=male, then
trains the built-in network on it. The resulting audit (config.json) finds
the gender gap. Everything is seeded; rerunning reproduces identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from fairminer.data import (FeatureSchema, FeatureSpec, StructuredDataset,
                            save_structured, schema_to_dict)
from fairminer.mitigation import TrainerConfig, accuracy, train_mlp
from fairminer.oracle import save_mlp

HERE = Path(__file__).resolve().parent
ROWS = 2400
SEED = 20240817


def build_schema() -> FeatureSchema:
    return FeatureSchema(
        features=(
            FeatureSpec("gender", "categorical", sensitive=True,
                        values=("male", "female")),
            FeatureSpec("age", "continuous", sensitive=True,
                        minimum=18, maximum=98, integer=True),
            FeatureSpec("hours", "continuous", sensitive=False,
                        minimum=0, maximum=80, integer=True),
            FeatureSpec("rate", "continuous", sensitive=False,
                        minimum=0.0, maximum=1.0),
        ),
        label_names=("0", "1"),
        favorable_label="1",
        label_column="label",
    )


def build_dataset(schema: FeatureSchema) -> StructuredDataset:
    rng = np.random.default_rng(SEED)
    gender = np.where(rng.random(ROWS) < 0.5, "male", "female")
    age = rng.integers(18, 99, size=ROWS)
    hours = rng.integers(0, 81, size=ROWS)
    rate = np.round(rng.random(ROWS), 2)
    merit = (hours / 80.0 + rate) / 2.0
    p_one = np.clip(0.1 + 0.7 * merit + 0.15 * (gender == "male"), 0.0, 1.0)
    labels = np.where(rng.random(ROWS) < p_one, "1", "0")
    rows = list(zip(gender.tolist(), age.tolist(), hours.tolist(), rate.tolist()))
    return StructuredDataset(schema, rows, labels.tolist())


def main():
    schema = build_schema()
    dataset = build_dataset(schema)

    with open(HERE / "schema.json", "w", encoding="utf-8") as fh:
        json.dump(schema_to_dict(schema), fh, indent=2)
        fh.write("\n")
    save_structured(dataset, HERE / "data.csv")

    result = train_mlp(dataset, TrainerConfig(hidden=(16, 8), learning_rate=0.1,
                                              epochs=25, batch_size=32, seed=SEED))
    save_mlp(result.model, HERE / "model.json")
    print(f"train accuracy: {result.train_accuracy:.4f}")
    print(f"dataset accuracy: {accuracy(result.model, dataset):.4f}")

    config = {
        "data": {"kind": "structured", "path": "data.csv", "schema": "schema.json"},
        "oracle": {"mlp": "model.json"},
        "rules": {"support_threshold": 0.1, "num_bins": 10, "mode": "union"},
        "scorer": {"error_threshold": 0.05, "max_samples": 20000},
        "sampler": {"seed": 11},
        "report": {"score_threshold": 0.05, "top_k": 3},
        "mitigation": {
            "start_count": 50, "max_fraction": 0.1, "growth": 2.0,
            "accuracy_drop_budget": 0.02,
            "trainer": {"hidden": [16, 8], "learning_rate": 0.1,
                        "epochs": 25, "batch_size": 32, "seed": SEED},
        },
        "jobs": 1,
    }
    with open(HERE / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")
    print("wrote schema.json, data.csv, model.json, config.json")


if __name__ == "__main__":
    main()
