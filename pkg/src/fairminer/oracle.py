"""Black-box prediction oracles.

The model under test is only ever a samples->labels function. Two
realizations ship here: a feed-forward network evaluated in process from a
JSON weights file, and a client for an external process speaking a
line-delimited JSON prediction protocol. Probabilities never cross the
boundary; the scorer consumes labels alone.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from fairminer.data import FeatureSchema
from fairminer.errors import OracleError

ACTIVATIONS = ("relu", "sigmoid", "softmax", "identity")


class PredictionOracle:
    """Interface: ``predict_batch(samples) -> labels``.

    Samples are decoded feature tuples (structured) or token sequences
    (text). Implementations must be deterministic within a session and
    total over schema-conformant samples.
    """

    def predict_batch(self, samples: Sequence) -> list[str]:
        raise NotImplementedError

    def predict(self, sample) -> str:
        return self.predict_batch([sample])[0]


class FunctionOracle(PredictionOracle):
    """Wrap a plain sample->label function as an oracle."""

    def __init__(self, fn: Callable):
        self._fn = fn

    def predict_batch(self, samples: Sequence) -> list[str]:
        return [str(self._fn(s)) for s in samples]


# --- in-process feed-forward network ---


@dataclass(frozen=True)
class EncodingEntry:
    """How one input feature becomes network inputs: one-hot over ``values``
    for categoricals, or the affine map (v - offset) / scale."""

    feature: str
    values: tuple[str, ...] | None = None
    offset: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.values is None and self.scale == 0:
            raise OracleError(f"encoding for {self.feature!r} has zero scale")
        if self.values is not None and not self.values:
            raise OracleError(f"encoding for {self.feature!r} has an empty value list")

    @property
    def width(self) -> int:
        return len(self.values) if self.values is not None else 1


@dataclass
class MlpLayer:
    weights: np.ndarray  # (out, in), row-major
    bias: np.ndarray  # (out,)
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise OracleError("layer weights must be a matrix and bias a vector")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise OracleError(
                f"layer has {self.weights.shape[0]} output rows but "
                f"{self.bias.shape[0]} bias entries")
        if self.activation not in ACTIVATIONS:
            raise OracleError(f"unknown activation {self.activation!r}")


def _apply_activation(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if activation == "softmax":
        shifted = z - z.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)
    return z


class MlpModel(PredictionOracle):
    """Feed-forward network with an explicit input encoding.

    The file format keeps preprocessing inside the artifact, so a model is
    a self-contained function from decoded feature rows to labels. A final
    width equal to the label count selects by argmax (ties to the lowest
    index); a single sigmoid output thresholds at 0.5 for binary labels,
    with exactly 0.5 mapping to the first label.
    """

    def __init__(self, encoding: Sequence[EncodingEntry], layers: Sequence[MlpLayer],
                 labels: Sequence[str]):
        self.encoding = tuple(encoding)
        self.layers = list(layers)
        self.labels = tuple(str(l) for l in labels)
        if not self.layers:
            raise OracleError("model needs at least one layer")
        if len(self.labels) < 2:
            raise OracleError("model needs at least two labels")
        width = sum(e.width for e in self.encoding)
        for i, layer in enumerate(self.layers):
            if layer.weights.shape[1] != width:
                raise OracleError(
                    f"layer {i} expects {layer.weights.shape[1]} inputs but "
                    f"receives {width}")
            width = layer.weights.shape[0]
        final = self.layers[-1]
        if width == 1:
            if len(self.labels) != 2 or final.activation != "sigmoid":
                raise OracleError("a single-output model must be sigmoid over two labels")
        elif width != len(self.labels):
            raise OracleError(
                f"final layer width {width} does not match {len(self.labels)} labels")

    def encode(self, samples: Sequence) -> np.ndarray:
        n = len(samples)
        out = np.zeros((n, sum(e.width for e in self.encoding)), dtype=np.float64)
        col = 0
        for j, entry in enumerate(self.encoding):
            if entry.values is not None:
                index = {v: i for i, v in enumerate(entry.values)}
                for i, sample in enumerate(samples):
                    value = sample[j]
                    try:
                        out[i, col + index[value]] = 1.0
                    except KeyError:
                        raise OracleError(
                            f"value {value!r} not in encoding of {entry.feature!r}") from None
                col += entry.width
            else:
                out[:, col] = [(float(s[j]) - entry.offset) / entry.scale for s in samples]
                col += 1
        return out

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        a = inputs
        for layer in self.layers:
            a = _apply_activation(a @ layer.weights.T + layer.bias, layer.activation)
        return a

    def predict_batch(self, samples: Sequence) -> list[str]:
        if len(samples) == 0:
            return []
        out = self.forward(self.encode(samples))
        if out.shape[1] == 1:
            picks = (out[:, 0] > 0.5).astype(int)
        else:
            picks = np.argmax(out, axis=1)
        return [self.labels[i] for i in picks]

    def copy(self) -> "MlpModel":
        layers = [MlpLayer(l.weights.copy(), l.bias.copy(), l.activation)
                  for l in self.layers]
        return MlpModel(self.encoding, layers, self.labels)


def mlp_predict(model: MlpModel, sample) -> str:
    return model.predict(sample)


def default_encoding(schema: FeatureSchema) -> tuple[EncodingEntry, ...]:
    """One-hot categoricals in declared order; continuous scaled to [0, 1]
    over the declared range."""
    entries = []
    for spec in schema.features:
        if spec.is_categorical:
            entries.append(EncodingEntry(spec.name, values=spec.values))
        else:
            entries.append(EncodingEntry(spec.name, offset=spec.minimum,
                                         scale=spec.maximum - spec.minimum))
    return tuple(entries)


def mlp_from_dict(doc: dict) -> MlpModel:
    try:
        normalization = doc.get("normalization", {})
        encoding = []
        for e in doc["encoding"]:
            name = e["feature"]
            if "values" in e:
                encoding.append(EncodingEntry(name, values=tuple(e["values"])))
            else:
                norm = normalization.get(name, {})
                encoding.append(EncodingEntry(name, offset=float(norm.get("offset", 0.0)),
                                              scale=float(norm.get("scale", 1.0))))
        layers = [MlpLayer(np.array(l["weights"], dtype=np.float64),
                           np.array(l["bias"], dtype=np.float64),
                           l["activation"])
                  for l in doc["layers"]]
        return MlpModel(encoding, layers, [str(l) for l in doc["labels"]])
    except KeyError as exc:
        raise OracleError(f"model document missing field {exc}") from None


def mlp_to_dict(model: MlpModel) -> dict:
    encoding = []
    normalization = {}
    for e in model.encoding:
        if e.values is not None:
            encoding.append({"feature": e.feature, "values": list(e.values)})
        else:
            encoding.append({"feature": e.feature})
            normalization[e.feature] = {"offset": e.offset, "scale": e.scale}
    return {
        "normalization": normalization,
        "encoding": encoding,
        "layers": [{"weights": l.weights.tolist(), "bias": l.bias.tolist(),
                    "activation": l.activation} for l in model.layers],
        "labels": list(model.labels),
    }


def load_mlp(path) -> MlpModel:
    with open(path, "r", encoding="utf-8") as fh:
        return mlp_from_dict(json.load(fh))


def save_mlp(model: MlpModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mlp_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- subprocess protocol client ---


class SubprocessOracle(PredictionOracle):
    """Client for an external predictor process.

    Requests go out as one JSON line per sample, ``{"id": n, "features":
    [...]}`` (or ``"tokens"`` for text); responses are ``{"id": n, "label":
    "..."}`` lines matched by id, in any order. One child serves the whole
    audit; batches from concurrent scorer workers are serialized through a
    lock while a reader thread drains responses, so internal reordering or
    batching in the adapter never skews results.
    """

    def __init__(self, command: Sequence[str], *, mode: str = "features",
                 timeout: float = 30.0):
        if mode not in ("features", "tokens"):
            raise OracleError(f"unknown request mode {mode!r}")
        self.mode = mode
        self.timeout = timeout
        self.command = list(command)
        try:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.PIPE, text=True, encoding="utf-8", bufsize=1)
        except OSError as exc:
            raise OracleError(f"cannot launch oracle {self.command!r}: {exc}") from exc
        self._lock = threading.Lock()
        self._next_id = 0
        self._responses: "queue.Queue[tuple]" = queue.Queue()
        self._stderr_tail: deque[str] = deque(maxlen=40)
        self._reader = threading.Thread(target=self._read_stdout, daemon=True)
        self._reader.start()
        self._errlog = threading.Thread(target=self._read_stderr, daemon=True)
        self._errlog.start()

    def _read_stdout(self):
        for line in self._proc.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                rid = doc["id"]
                label = doc["label"]
            except (ValueError, TypeError, KeyError) as exc:
                self._responses.put(("error", f"malformed response line {line!r}: {exc}"))
                return
            if not isinstance(label, (str, int, float)) or isinstance(label, bool):
                self._responses.put(("error", f"response id {rid} has non-scalar label"))
                return
            self._responses.put(("ok", rid, str(label)))
        self._responses.put(("eof", None))

    def _read_stderr(self):
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def _fail(self, reason: str):
        tail = "\n".join(self._stderr_tail)
        suffix = f"; recent stderr:\n{tail}" if tail else ""
        raise OracleError(f"oracle {self.command!r}: {reason}{suffix}")

    def predict_batch(self, samples: Sequence) -> list[str]:
        if len(samples) == 0:
            return []
        with self._lock:
            if self._proc.poll() is not None:
                self._fail(f"process exited with status {self._proc.returncode}")
            first = self._next_id
            ids = range(first, first + len(samples))
            self._next_id += len(samples)
            try:
                for rid, sample in zip(ids, samples):
                    request = {"id": rid, self.mode: list(sample)}
                    self._proc.stdin.write(json.dumps(request) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                self._fail("process closed its input pipe")
            got: dict[int, str] = {}
            while len(got) < len(samples):
                try:
                    item = self._responses.get(timeout=self.timeout)
                except queue.Empty:
                    self._fail(f"timed out after {self.timeout}s waiting for "
                               f"{len(samples) - len(got)} of {len(samples)} responses")
                if item[0] == "error":
                    self._fail(item[1])
                if item[0] == "eof":
                    self._fail("process closed its output before answering")
                _, rid, label = item
                if not (first <= rid < first + len(samples)) or rid in got:
                    self._fail(f"unexpected or duplicate response id {rid}")
                got[rid] = label
            return [got[rid] for rid in ids]

    def close(self):
        proc = self._proc
        if proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        if proc.stdout:
            proc.stdout.close()
        if proc.stderr:
            proc.stderr.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
