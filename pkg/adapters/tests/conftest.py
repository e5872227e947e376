import json

import pytest

APPROVAL = {"0": "denied", "1": "approved"}


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")


def linear_model_doc() -> dict:
    """Favors gender=male and longer hours; age carries no weight."""
    return {
        "kind": "linear",
        "features": [
            {"name": "gender", "values": ["male", "female"]},
            {"name": "age", "offset": 0.0, "scale": 100.0},
            {"name": "hours", "offset": 0.0, "scale": 80.0},
        ],
        "weights": [[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 2.0]],
        "bias": [0.55, 0.0],
        "classes": ["0", "1"],
    }


def expected_linear_label(payload) -> str:
    """Independent recompute of the fixture model, mapped through APPROVAL."""
    male = 1.0 if payload[0] == "male" else 0.0
    score = 1.0 * male + 2.0 * (float(payload[2]) / 80.0)
    return APPROVAL["1"] if score > 0.55 else APPROVAL["0"]


@pytest.fixture
def linear_manifest(tmp_path):
    write_json(tmp_path / "model.json", linear_model_doc())
    write_json(tmp_path / "manifest.json",
               {"model": "model.json", "mode": "features", "labels": APPROVAL})
    return tmp_path / "manifest.json"


@pytest.fixture
def keyword_manifest(tmp_path):
    model = {
        "kind": "keyword",
        "weights": {"gay": 1.0, "happy": 0.25},
        "bias": -0.5,
        "classes": ["neg", "pos"],
    }
    write_json(tmp_path / "model.json", model)
    write_json(tmp_path / "manifest.json", {"model": "model.json", "mode": "tokens"})
    return tmp_path / "manifest.json"
