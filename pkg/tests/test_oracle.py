import json
import math
import sys

import numpy as np
import pytest

from helpers import reference_mlp_label

from fairminer.errors import OracleError
from fairminer.oracle import (EncodingEntry, FunctionOracle, MlpLayer,
                              MlpModel, SubprocessOracle, default_encoding,
                              load_mlp, mlp_from_dict, mlp_to_dict, save_mlp)


def single_input_model(weight=10.0, bias=-5.0):
    return MlpModel(
        encoding=(EncodingEntry("x"),),
        layers=(MlpLayer(np.array([[weight]]), np.array([bias]), "sigmoid"),),
        labels=("no", "yes"),
    )


def test_function_oracle():
    oracle = FunctionOracle(lambda row: "1" if row[0] > 0 else "0")
    assert oracle.predict((3,)) == "1"
    assert oracle.predict_batch([(-1,), (2,)]) == ["0", "1"]


def test_sigmoid_threshold_hand_computed():
    model = single_input_model()
    # sigmoid(10*1 - 5) = sigmoid(5) > 0.5
    assert model.predict((1.0,)) == "yes"
    # sigmoid(10*0 - 5) < 0.5
    assert model.predict((0.0,)) == "no"
    # exactly 0.5 maps to the first label
    assert model.predict((0.5,)) == "no"
    probs = model.forward(model.encode([(1.0,)]))
    assert probs[0, 0] == pytest.approx(1.0 / (1.0 + math.exp(-5.0)))


def test_argmax_identity_network():
    model = MlpModel(
        encoding=(EncodingEntry("x"),),
        layers=(MlpLayer(np.array([[1.0], [-1.0]]), np.zeros(2), "identity"),),
        labels=("pos", "neg"),
    )
    assert model.predict((2.0,)) == "pos"
    assert model.predict((-2.0,)) == "neg"
    # tie (x=0) resolves to the lowest index
    assert model.predict((0.0,)) == "pos"


def test_one_hot_encoding():
    model = MlpModel(
        encoding=(EncodingEntry("color", values=("red", "green", "blue")),
                  EncodingEntry("size", offset=10.0, scale=2.0)),
        layers=(MlpLayer(np.eye(4), np.zeros(4), "softmax"),),
        labels=("a", "b", "c", "d"),
    )
    enc = model.encode([("green", 14.0)])
    assert enc.tolist() == [[0.0, 1.0, 0.0, 2.0]]
    with pytest.raises(OracleError):
        model.encode([("purple", 14.0)])


def test_default_encoding(demographic_schema):
    entries = default_encoding(demographic_schema)
    assert [e.feature for e in entries] == \
        ["gender", "race", "age", "hours", "rate"]
    assert entries[0].values == ("male", "female")
    assert entries[2].offset == 0 and entries[2].scale == 100
    assert sum(e.width for e in entries) == 2 + 3 + 1 + 1 + 1


def test_model_shape_validation():
    enc = (EncodingEntry("x"),)
    with pytest.raises(OracleError):
        MlpModel(enc, (MlpLayer(np.ones((2, 3)), np.zeros(2), "relu"),),
                 ("a", "b"))  # expects 3 inputs, encoding gives 1
    with pytest.raises(OracleError):
        MlpModel(enc, (MlpLayer(np.ones((3, 1)), np.zeros(3), "identity"),),
                 ("a", "b"))  # 3 outputs vs 2 labels
    with pytest.raises(OracleError):
        MlpModel(enc, (MlpLayer(np.ones((1, 1)), np.zeros(1), "relu"),),
                 ("a", "b"))  # single output must be sigmoid
    with pytest.raises(OracleError):
        MlpModel(enc, (), ("a", "b"))
    with pytest.raises(OracleError):
        MlpLayer(np.ones((2, 2)), np.zeros(3), "relu")
    with pytest.raises(OracleError):
        MlpLayer(np.ones((2, 2)), np.zeros(2), "tanh")


def test_batch_matches_single_and_reference():
    rng = np.random.default_rng(5)
    model = MlpModel(
        encoding=(EncodingEntry("c", values=("u", "v")),
                  EncodingEntry("x", offset=0.0, scale=1.0)),
        layers=(
            MlpLayer(rng.normal(size=(8, 3)), rng.normal(size=8), "relu"),
            MlpLayer(rng.normal(size=(3, 8)), rng.normal(size=3), "softmax"),
        ),
        labels=("a", "b", "c"),
    )
    samples = [(str(rng.choice(["u", "v"])), float(rng.normal()))
               for _ in range(60)]
    batch = model.predict_batch(samples)
    assert batch == [model.predict(s) for s in samples]
    assert batch == [reference_mlp_label(model, s) for s in samples]


def test_model_copy_is_independent():
    model = single_input_model()
    clone = model.copy()
    clone.layers[0].weights[0, 0] = -10.0
    assert model.layers[0].weights[0, 0] == 10.0
    assert model.predict((1.0,)) == "yes"
    assert clone.predict((1.0,)) == "no"


def test_mlp_json_roundtrip(tmp_path):
    model = MlpModel(
        encoding=(EncodingEntry("color", values=("red", "blue")),
                  EncodingEntry("size", offset=1.0, scale=3.0)),
        layers=(MlpLayer(np.array([[0.5, -0.25, 0.125]]), np.array([0.75]),
                         "sigmoid"),),
        labels=("n", "y"),
    )
    doc = mlp_to_dict(model)
    again = mlp_from_dict(doc)
    assert mlp_to_dict(again) == doc  # exact float round-trip
    path = tmp_path / "model.json"
    save_mlp(model, path)
    loaded = load_mlp(path)
    samples = [("red", 2.0), ("blue", -1.0)]
    assert loaded.predict_batch(samples) == model.predict_batch(samples)
    raw = json.loads(path.read_text())
    assert set(raw) == {"normalization", "encoding", "layers", "labels"}


def test_mlp_from_dict_rejects_garbage():
    with pytest.raises(OracleError):
        mlp_from_dict({"layers": [], "labels": ["a", "b"],
                       "normalization": []})
    with pytest.raises(OracleError):
        mlp_from_dict({"labels": ["a", "b"]})


# --- subprocess oracle ---

CONSTANT_STUB = r"""
import json, sys
for line in sys.stdin:
    doc = json.loads(line)
    print(json.dumps({"id": doc["id"], "label": "0"}))
    sys.stdout.flush()
"""

AGE_STUB = r"""
import json, sys
for line in sys.stdin:
    doc = json.loads(line)
    label = "1" if doc["features"][2] >= 50 else "0"
    print(json.dumps({"id": doc["id"], "label": label}))
    sys.stdout.flush()
"""

REORDER_STUB = r"""
import json, sys
pending = []
for line in sys.stdin:
    pending.append(json.loads(line))
    if len(pending) == 2:
        for doc in reversed(pending):
            print(json.dumps({"id": doc["id"], "label": "0"}))
        sys.stdout.flush()
        pending = []
"""

TOKEN_STUB = r"""
import json, sys
for line in sys.stdin:
    doc = json.loads(line)
    label = "1" if "gay" in doc["tokens"] else "0"
    print(json.dumps({"id": doc["id"], "label": label}))
    sys.stdout.flush()
"""


def stub(source):
    return [sys.executable, "-c", source]


def test_subprocess_oracle_round_trips():
    with SubprocessOracle(stub(CONSTANT_STUB)) as oracle:
        assert oracle.predict_batch([(1, 2), (3, 4)]) == ["0", "0"]
        assert oracle.predict((9,)) == "0"
        assert oracle.predict_batch([]) == []


def test_subprocess_oracle_feature_predicate():
    rng = np.random.default_rng(0)
    rows = [("male", "blue", int(rng.integers(0, 101)), 40, 0.5)
            for _ in range(100)]
    with SubprocessOracle(stub(AGE_STUB)) as oracle:
        got = oracle.predict_batch(rows)
    assert got == ["1" if r[2] >= 50 else "0" for r in rows]


def test_subprocess_oracle_token_mode():
    with SubprocessOracle(stub(TOKEN_STUB), mode="tokens") as oracle:
        assert oracle.predict_batch([["i", "am", "gay"], ["plain"]]) == \
            ["1", "0"]


def test_subprocess_oracle_handles_reordered_ids():
    with SubprocessOracle(stub(REORDER_STUB)) as oracle:
        assert oracle.predict_batch([(1,), (2,)]) == ["0", "0"]
        assert oracle.predict_batch([(3,), (4,)]) == ["0", "0"]


def test_subprocess_oracle_reports_dead_process():
    with SubprocessOracle(stub("import sys; sys.exit(3)")) as oracle:
        with pytest.raises(OracleError) as err:
            for _ in range(50):
                oracle.predict_batch([(1,)])
    msg = str(err.value)
    assert "exited" in msg or "closed its" in msg


def test_subprocess_oracle_reports_stderr_tail():
    source = ("import sys; print('boom: bad model file', file=sys.stderr); "
              "sys.stderr.flush(); sys.exit(2)")
    with SubprocessOracle(stub(source)) as oracle:
        with pytest.raises(OracleError) as err:
            for _ in range(50):
                oracle.predict_batch([(1,)])
    assert "boom: bad model file" in str(err.value)


def test_subprocess_oracle_rejects_malformed_response():
    source = r"""
import sys
sys.stdin.readline()
print("not json at all")
sys.stdout.flush()
sys.stdin.read()
"""
    with SubprocessOracle(stub(source)) as oracle:
        with pytest.raises(OracleError) as err:
            oracle.predict_batch([(1,)])
    assert "malformed" in str(err.value)


def test_subprocess_oracle_rejects_wrong_id():
    source = r"""
import json, sys
for line in sys.stdin:
    doc = json.loads(line)
    print(json.dumps({"id": doc["id"] + 1000, "label": "0"}))
    sys.stdout.flush()
"""
    with SubprocessOracle(stub(source)) as oracle:
        with pytest.raises(OracleError) as err:
            oracle.predict_batch([(1,)])
    assert "unexpected" in str(err.value)


def test_subprocess_oracle_timeout():
    source = "import time, sys; sys.stdin.readline(); time.sleep(30)"
    with SubprocessOracle(stub(source), timeout=0.3) as oracle:
        with pytest.raises(OracleError) as err:
            oracle.predict_batch([(1,)])
    assert "timed out" in str(err.value)


def test_subprocess_oracle_rejects_bad_mode():
    with pytest.raises(OracleError):
        SubprocessOracle(stub(CONSTANT_STUB), mode="rows")


def test_subprocess_oracle_missing_binary():
    with pytest.raises(OracleError):
        SubprocessOracle(["/no/such/binary-anywhere"])
