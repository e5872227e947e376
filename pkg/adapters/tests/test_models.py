import pytest

from conftest import expected_linear_label, linear_model_doc, write_json

from oracle_adapter import (AdapterError, CategoricalInput, KeywordModel,
                            LinearModel, NumericInput, load_model)


def fixture_linear() -> LinearModel:
    doc = linear_model_doc()
    inputs = (CategoricalInput("gender", ("male", "female")),
              NumericInput("age", 0.0, 100.0),
              NumericInput("hours", 0.0, 80.0))
    return LinearModel(inputs, doc["weights"], doc["bias"], doc["classes"])


def test_encoding_one_hot_and_rescaling():
    model = fixture_linear()
    assert model.encode(["male", 50, 20]) == [1.0, 0.0, 0.5, 0.25]
    assert model.encode(["female", 0, 80]) == [0.0, 1.0, 0.0, 1.0]


def test_predictions_match_hand_computation():
    model = fixture_linear()
    # male: 1 + 2*h/80 always beats the 0.55 bias
    assert model.predict(["male", 30, 0]) == "1"
    # female at 0 hours scores 0 < 0.55
    assert model.predict(["female", 30, 0]) == "0"
    # female crosses over above 22 hours (2*h/80 > 0.55)
    assert model.predict(["female", 30, 23]) == "1"
    # exact tie at 22 hours goes to the lower class index
    assert model.predict(["female", 30, 22]) == "0"


def test_prediction_payload_errors():
    model = fixture_linear()
    with pytest.raises(AdapterError, match="expected 3 features, got 2"):
        model.predict(["male", 30])
    with pytest.raises(AdapterError, match="expected 3 features, got str"):
        model.predict("male,30,40")
    with pytest.raises(AdapterError, match="unknown value 'elf' for gender"):
        model.predict(["elf", 30, 40])
    with pytest.raises(AdapterError, match="age must be numeric"):
        model.predict(["male", "old", 40])


def test_linear_validation():
    inputs = (CategoricalInput("gender", ("male", "female")),)
    with pytest.raises(AdapterError, match="at least two classes"):
        LinearModel(inputs, [[0.0, 0.0]], [0.0], ["1"])
    with pytest.raises(AdapterError, match="duplicate class names"):
        LinearModel(inputs, [[0.0, 0.0]] * 2, [0.0, 0.0], ["1", "1"])
    with pytest.raises(AdapterError, match="one weight row and one bias per class"):
        LinearModel(inputs, [[0.0, 0.0]], [0.0, 0.0], ["0", "1"])
    with pytest.raises(AdapterError, match="weight rows must have 2 entries, got 3"):
        LinearModel(inputs, [[0.0] * 3] * 2, [0.0, 0.0], ["0", "1"])


def test_keyword_scoring():
    model = KeywordModel({"gay": 1.0, "happy": 0.25}, -0.5, ["neg", "pos"])
    assert model.predict(["a", "gay", "parade"]) == "pos"
    assert model.predict(["a", "quiet", "day"]) == "neg"
    # occurrences accumulate: two 0.25 hits exactly reach the -0.5 bias
    assert model.predict(["happy", "happy"]) == "neg"
    assert model.predict(["happy", "happy", "happy"]) == "pos"
    with pytest.raises(AdapterError, match="tokens payload must be a list, got str"):
        model.predict("gay parade")


def test_keyword_needs_two_distinct_classes():
    with pytest.raises(AdapterError, match="exactly two distinct classes"):
        KeywordModel({}, 0.0, ["only"])
    with pytest.raises(AdapterError, match="exactly two distinct classes"):
        KeywordModel({}, 0.0, ["same", "same"])


def test_load_model_roundtrip(tmp_path):
    write_json(tmp_path / "model.json", linear_model_doc())
    model = load_model(tmp_path / "model.json")
    assert model.kind == "features"
    assert model.classes == ("0", "1")
    for payload in (["male", 10, 5], ["female", 80, 30], ["female", 5, 70]):
        mapped = {"0": "denied", "1": "approved"}[model.predict(payload)]
        assert mapped == expected_linear_label(payload)


def test_load_model_errors(tmp_path):
    with pytest.raises(AdapterError, match="cannot read model"):
        load_model(tmp_path / "absent.json")

    path = tmp_path / "model.json"
    path.write_text("{oops", encoding="utf-8")
    with pytest.raises(AdapterError, match="not valid JSON"):
        load_model(path)

    write_json(path, [1, 2])
    with pytest.raises(AdapterError, match="JSON object"):
        load_model(path)

    write_json(path, {"kind": "forest"})
    with pytest.raises(AdapterError, match="unknown model kind 'forest'"):
        load_model(path)

    write_json(path, {"kind": "linear", "features": []})
    with pytest.raises(AdapterError, match="missing field 'weights'"):
        load_model(path)

    write_json(path, {"kind": "linear",
                      "features": [{"name": "x", "scale": 0.0}],
                      "weights": [[1.0]], "bias": [0.0], "classes": ["0", "1"]})
    with pytest.raises(AdapterError, match="zero scale"):
        load_model(path)

    write_json(path, {"kind": "keyword", "weights": {}})
    with pytest.raises(AdapterError, match="missing field 'classes'"):
        load_model(path)
