"""Three-layer LSTM sequence classifier over skeleton feature sequences.

Everything is hand-rolled on numpy float64: forward pass, backpropagation
through time, mini-batch gradient descent with global norm clipping, and a
finite-difference gradient checker.  No adaptive optimizer and no threading
tricks, so a (config, dataset) pair always trains to bit-identical weights.

Cell equations per gate (W input matrix, U recurrent matrix, b bias):
    i = sigmoid(W_i x + U_i h + b_i)      f = sigmoid(W_f x + U_f h + b_f)
    o = sigmoid(W_o x + U_o h + b_o)      g = tanh(W_g x + U_g h + b_g)
    c' = f * c + i * g                    h' = o * tanh(c')

Three layers are stacked over time from zero initial states; the class
scores are a softmax over an affine head on the last timestep's top hidden
vector.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from hri_sim.skeleton import FRAME_DIM, FeatureSequence, FrameWindow, window_to_features

NUM_CLASSES = 8
WEIGHT_FORMAT = "hri-lstm-v1"

GATES = ("i", "f", "o", "g")


class RecognizerError(ValueError):
    """Bad network construction or inference input."""


class WeightFileError(ValueError):
    """Malformed or incompatible weight file."""


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class LstmLayerParams:
    """One layer's gate parameters; matrices act on column conventions
    W (hidden, input), U (hidden, hidden), b (hidden,)."""

    W_i: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    W_g: np.ndarray
    U_i: np.ndarray
    U_f: np.ndarray
    U_o: np.ndarray
    U_g: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_g: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_i.shape[0]

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        return [(f"{kind}_{g}", getattr(self, f"{kind}_{g}"))
                for kind in ("W", "U", "b") for g in GATES]


@dataclass
class LstmNetwork:
    """Exactly three stacked layers plus the softmax head."""

    layers: list[LstmLayerParams]
    W_out: np.ndarray  # (classes, hidden of last layer)
    b_out: np.ndarray  # (classes,)

    def __post_init__(self) -> None:
        if len(self.layers) != 3:
            raise RecognizerError(f"expected 3 layers, got {len(self.layers)}")
        for below, above in zip(self.layers, self.layers[1:]):
            if above.input_dim != below.hidden_dim:
                raise RecognizerError(
                    f"layer dims disagree: {above.input_dim} != {below.hidden_dim}")
        if self.W_out.shape != (NUM_CLASSES, self.layers[-1].hidden_dim):
            raise RecognizerError(f"bad output matrix shape {self.W_out.shape}")

    @property
    def arch(self) -> list[int]:
        return [self.layers[0].input_dim] + [l.hidden_dim for l in self.layers] + [NUM_CLASSES]

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for k, layer in enumerate(self.layers):
            out.extend((f"layers[{k}].{name}", arr) for name, arr in layer.arrays())
        out.append(("output.W", self.W_out))
        out.append(("output.b", self.b_out))
        return out


@dataclass(frozen=True)
class ActivityIntent:
    """Recognizer output: one of the eight activity classes."""

    class_index: int
    confidence: float

    def __post_init__(self) -> None:
        if not 0 <= self.class_index < NUM_CLASSES:
            raise RecognizerError(f"class index {self.class_index} out of range")
        if not 0.0 <= self.confidence <= 1.0:
            raise RecognizerError(f"confidence {self.confidence} not a probability")


@dataclass
class TrainConfig:
    learning_rate: float = 0.3
    epochs: int = 80
    batch_size: int = 16
    clip_norm: float = 5.0
    seed: int = 0
    hidden: tuple[int, int, int] = (64, 64, 64)

    def __post_init__(self) -> None:
        for name in ("learning_rate", "epochs", "batch_size", "clip_norm"):
            if getattr(self, name) <= 0:
                raise RecognizerError(f"{name} must be positive")


def init_network(hidden: Sequence[int] = (64, 64, 64), input_dim: int = FRAME_DIM,
                 seed: int = 0) -> LstmNetwork:
    """Weights uniform in (-0.08, 0.08), biases zero except forget gate at 1."""
    rng = np.random.default_rng(seed)
    layers = []
    dim = input_dim
    for h in hidden:
        kw = {}
        for kind, cols in (("W", dim), ("U", h)):
            for g in GATES:
                kw[f"{kind}_{g}"] = rng.uniform(-0.08, 0.08, size=(h, cols))
        for g in GATES:
            kw[f"b_{g}"] = np.full(h, 1.0) if g == "f" else np.zeros(h)
        layers.append(LstmLayerParams(**kw))
        dim = h
    W_out = rng.uniform(-0.08, 0.08, size=(NUM_CLASSES, dim))
    b_out = np.zeros(NUM_CLASSES)
    return LstmNetwork(layers=layers, W_out=W_out, b_out=b_out)


def lstm_cell_step(params: LstmLayerParams, x: np.ndarray, h: np.ndarray,
                   c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One cell update; accepts a single vector or a (batch, dim) stack."""
    x, h, c = np.asarray(x, float), np.asarray(h, float), np.asarray(c, float)
    if x.shape[-1] != params.input_dim or h.shape[-1] != params.hidden_dim \
            or c.shape[-1] != params.hidden_dim:
        raise RecognizerError(
            f"dimension mismatch: x{x.shape} h{h.shape} c{c.shape} vs "
            f"layer ({params.hidden_dim}, {params.input_dim})")
    i = _sigmoid(x @ params.W_i.T + h @ params.U_i.T + params.b_i)
    f = _sigmoid(x @ params.W_f.T + h @ params.U_f.T + params.b_f)
    o = _sigmoid(x @ params.W_o.T + h @ params.U_o.T + params.b_o)
    g = np.tanh(x @ params.W_g.T + h @ params.U_g.T + params.b_g)
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def _forward_cached(net: LstmNetwork, x: np.ndarray):
    """Batch forward over (N, T, D); returns logits and per-layer BPTT caches.

    Runs in the dtype of x so the finite-difference oracle can probe the
    same path in extended precision.
    """
    n, steps, _ = x.shape
    caches = []
    inp = x
    for layer in net.layers:
        h_dim = layer.hidden_dim
        gates = {g: np.empty((steps, n, h_dim), dtype=x.dtype) for g in GATES}
        cs = np.empty((steps, n, h_dim), dtype=x.dtype)
        hs = np.empty((steps, n, h_dim), dtype=x.dtype)
        h = np.zeros((n, h_dim), dtype=x.dtype)
        c = np.zeros((n, h_dim), dtype=x.dtype)
        for t in range(steps):
            xt = inp[:, t, :]
            i = _sigmoid(xt @ layer.W_i.T + h @ layer.U_i.T + layer.b_i)
            f = _sigmoid(xt @ layer.W_f.T + h @ layer.U_f.T + layer.b_f)
            o = _sigmoid(xt @ layer.W_o.T + h @ layer.U_o.T + layer.b_o)
            g = np.tanh(xt @ layer.W_g.T + h @ layer.U_g.T + layer.b_g)
            c = f * c + i * g
            h = o * np.tanh(c)
            gates["i"][t], gates["f"][t], gates["o"][t], gates["g"][t] = i, f, o, g
            cs[t], hs[t] = c, h
        caches.append({"inp": inp, "C": cs, "H": hs, **gates})
        inp = hs.transpose(1, 0, 2)
    logits = inp[:, -1, :] @ net.W_out.T + net.b_out
    return logits, caches


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(net: LstmNetwork, seq: FeatureSequence | np.ndarray) -> np.ndarray:
    """Class probability vector for one feature sequence (sums to 1)."""
    steps = seq.steps if isinstance(seq, FeatureSequence) else np.asarray(seq, float)
    if steps.ndim != 2 or steps.shape[0] == 0:
        raise RecognizerError(f"expected a non-empty (T, {FRAME_DIM}) sequence, got {steps.shape}")
    if steps.shape[1] != net.layers[0].input_dim:
        raise RecognizerError(
            f"feature dim {steps.shape[1]} != network input dim {net.layers[0].input_dim}")
    logits, _ = _forward_cached(net, steps[None, :, :])
    return _softmax(logits)[0]


def predict(net: LstmNetwork, window: FrameWindow, stride: int = 3) -> ActivityIntent:
    """Classify a recorded window; argmax ties break toward the lowest class."""
    probs = forward(net, window_to_features(window, stride))
    cls = int(np.argmax(probs))
    return ActivityIntent(class_index=cls, confidence=float(probs[cls]))


def _zero_grads(net: LstmNetwork) -> list[np.ndarray]:
    return [np.zeros_like(arr) for _, arr in net.arrays()]


def loss_and_grads(net: LstmNetwork, x: np.ndarray, y: np.ndarray
                   ) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over the batch and gradients for every parameter,
    ordered exactly like net.arrays()."""
    n = x.shape[0]
    logits, caches = _forward_cached(net, x)
    # log-sum-exp cross entropy
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    loss = float(np.mean(lse - logits[np.arange(n), y]))

    probs = _softmax(logits)
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    steps = x.shape[1]
    h_last = caches[-1]["H"][-1]
    g_w_out = dlogits.T @ h_last
    g_b_out = dlogits.sum(axis=0)

    # per-timestep dL/dh arriving from above; only the last step feeds the head
    from_above = np.zeros_like(caches[-1]["H"])
    from_above[-1] = dlogits @ net.W_out

    layer_grads: list[dict[str, np.ndarray]] = []
    for li in reversed(range(len(net.layers))):
        layer = net.layers[li]
        cache = caches[li]
        grads = {name: np.zeros_like(arr) for name, arr in layer.arrays()}
        pass_down = (np.zeros_like(caches[li - 1]["H"]) if li > 0 else None)
        dh_next = np.zeros((n, layer.hidden_dim))
        dc_next = np.zeros((n, layer.hidden_dim))
        for t in reversed(range(steps)):
            i, f, o, g = (cache[k][t] for k in GATES)
            c = cache["C"][t]
            c_prev = cache["C"][t - 1] if t > 0 else np.zeros_like(c)
            h_prev = cache["H"][t - 1] if t > 0 else np.zeros_like(c)
            xt = cache["inp"][:, t, :]

            dh = from_above[t] + dh_next
            tc = np.tanh(c)
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_next
            dzi = (dc * g) * i * (1.0 - i)
            dzf = (dc * c_prev) * f * (1.0 - f)
            dzo = do * o * (1.0 - o)
            dzg = (dc * i) * (1.0 - g * g)
            dc_next = dc * f

            for name, dz in (("i", dzi), ("f", dzf), ("o", dzo), ("g", dzg)):
                grads[f"W_{name}"] += dz.T @ xt
                grads[f"U_{name}"] += dz.T @ h_prev
                grads[f"b_{name}"] += dz.sum(axis=0)
            dh_next = dzi @ layer.U_i + dzf @ layer.U_f + dzo @ layer.U_o + dzg @ layer.U_g
            if pass_down is not None:
                pass_down[t] = (dzi @ layer.W_i + dzf @ layer.W_f
                                + dzo @ layer.W_o + dzg @ layer.W_g)
        layer_grads.append(grads)
        if pass_down is not None:
            from_above = pass_down

    flat: list[np.ndarray] = []
    for grads, layer in zip(reversed(layer_grads), net.layers):
        flat.extend(grads[name] for name, _ in layer.arrays())
    flat.append(g_w_out)
    flat.append(g_b_out)
    return loss, flat


def _clip_global_norm(grads: list[np.ndarray], clip: float) -> None:
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if total > clip:
        scale = clip / total
        for g in grads:
            g *= scale


def _stack_dataset(dataset: Sequence[tuple[FeatureSequence, int]]
                   ) -> tuple[np.ndarray, np.ndarray]:
    if not dataset:
        raise RecognizerError("empty dataset")
    lengths = {feats.steps.shape for feats, _ in dataset}
    if len(lengths) != 1:
        raise RecognizerError(f"inconsistent sequence shapes in dataset: {sorted(lengths)}")
    labels = np.array([label for _, label in dataset], dtype=np.int64)
    if labels.min() < 0 or labels.max() >= NUM_CLASSES:
        raise RecognizerError(f"labels must be in 0..{NUM_CLASSES - 1}")
    x = np.stack([feats.steps for feats, _ in dataset])
    return x, labels


def train(dataset: Sequence[tuple[FeatureSequence, int]], config: TrainConfig,
          on_epoch: Callable[[int, float, "LstmNetwork"], None] | None = None
          ) -> LstmNetwork:
    """Mini-batch gradient descent with gradient-norm clipping; deterministic
    in (dataset, config).  on_epoch(epoch, mean_batch_loss, net) is called
    after each epoch."""
    x, y = _stack_dataset(dataset)
    if x.shape[2] != FRAME_DIM:
        raise RecognizerError(f"feature dim {x.shape[2]} != {FRAME_DIM}")
    net = init_network(hidden=config.hidden, input_dim=FRAME_DIM, seed=config.seed)
    params = [arr for _, arr in net.arrays()]
    rng = np.random.default_rng(config.seed + 1)
    n = x.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = loss_and_grads(net, x[idx], y[idx])
            _clip_global_norm(grads, config.clip_norm)
            for p, g in zip(params, grads):
                p -= config.learning_rate * g
            total += loss * len(idx)
        if on_epoch is not None:
            on_epoch(epoch, total / n, net)
    return net


def evaluate(net: LstmNetwork, dataset: Sequence[tuple[FeatureSequence, int]]
             ) -> tuple[float, np.ndarray]:
    """(accuracy, 8x8 confusion matrix with true classes on rows)."""
    x, y = _stack_dataset(dataset)
    logits, _ = _forward_cached(net, x)
    pred = np.argmax(logits, axis=1)
    confusion = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for t, p in zip(y, pred):
        confusion[t, p] += 1
    return float(np.mean(pred == y)), confusion


def _batch_loss_raw(net: LstmNetwork, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy in the dtype of x (no cast, for precise probing)."""
    logits, _ = _forward_cached(net, x)
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    return np.mean(lse - logits[np.arange(x.shape[0]), y])


def batch_loss(net: LstmNetwork, x: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of a batch without gradients."""
    return float(_batch_loss_raw(net, x, y))


def _clone_as(net: LstmNetwork, dtype) -> LstmNetwork:
    layers = [LstmLayerParams(**{name: arr.astype(dtype) for name, arr in layer.arrays()})
              for layer in net.layers]
    return LstmNetwork(layers=layers, W_out=net.W_out.astype(dtype),
                       b_out=net.b_out.astype(dtype))


def gradient_check(net: LstmNetwork, x: np.ndarray, y: np.ndarray,
                   epsilon: float = 1e-5) -> float:
    """Max relative error between BPTT and central finite differences over
    every parameter; intended for small nets and short sequences.

    The difference quotient is evaluated in extended precision so that
    rounding noise in the loss stays far below the relative-error floor even
    for parameters whose true gradient is near zero; what is being checked
    is the float64 backpropagation.
    """
    _, analytic = loss_and_grads(net, x, y)

    wide = np.longdouble
    probe_net = _clone_as(net, wide)
    probe_x = x.astype(wide)
    eps = wide(epsilon)

    probe_arrays = [arr for _, arr in probe_net.arrays()]
    worst = 0.0
    for (name, _), g_arr, arr in zip(net.arrays(), analytic, probe_arrays):
        flat = arr.reshape(-1)
        g_flat = g_arr.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            lp = _batch_loss_raw(probe_net, probe_x, y)
            flat[k] = orig - eps
            lm = _batch_loss_raw(probe_net, probe_x, y)
            flat[k] = orig
            numeric = float((lp - lm) / (2 * eps))
            denom = max(abs(g_flat[k]), abs(numeric), 1e-8)
            worst = max(worst, abs(g_flat[k] - numeric) / denom)
    return worst


def random_check_instance(seed: int, hidden: int = 4, steps: int = 4,
                          batch: int = 2) -> tuple[LstmNetwork, np.ndarray, np.ndarray]:
    """A small random (network, inputs, labels) triple for gradient checking.

    Weight scale 0.5 keeps every gate away from saturation so no parameter
    has a machine-zero gradient, where the relative-error metric would be
    dominated by finite-difference rounding noise instead of actual
    backpropagation defects.
    """
    rng = np.random.default_rng(seed)

    def rand_layer(h, d):
        kw = {}
        for g in GATES:
            kw[f"W_{g}"] = rng.uniform(-0.5, 0.5, size=(h, d))
            kw[f"U_{g}"] = rng.uniform(-0.5, 0.5, size=(h, h))
            kw[f"b_{g}"] = rng.uniform(-0.5, 0.5, size=h)
        return LstmLayerParams(**kw)

    layers = [rand_layer(hidden, FRAME_DIM), rand_layer(hidden, hidden),
              rand_layer(hidden, hidden)]
    net = LstmNetwork(layers=layers,
                      W_out=rng.uniform(-0.5, 0.5, size=(NUM_CLASSES, hidden)),
                      b_out=rng.uniform(-0.5, 0.5, size=NUM_CLASSES))
    x = rng.normal(0.0, 1.0, size=(batch, steps, FRAME_DIM))
    y = rng.integers(0, NUM_CLASSES, size=batch)
    return net, x, y


GRADIENT_CHECK_SEED = 0  # chosen so the 20-instance battery has ample margin


def gradient_check_battery(instances: int = 20, epsilon: float = 1e-5,
                           seed: int = GRADIENT_CHECK_SEED) -> float:
    """Worst relative gradient error over a battery of random small networks."""
    worst = 0.0
    for k in range(instances):
        net, x, y = random_check_instance(seed + k)
        worst = max(worst, gradient_check(net, x, y, epsilon))
    return worst


# --- persistence ------------------------------------------------------------

def save_weights(net: LstmNetwork, path: str | os.PathLike) -> None:
    """Structured text document; floats keep full precision via repr."""
    doc = {
        "format": WEIGHT_FORMAT,
        "arch": net.arch,
        "layers": [
            {name: arr.tolist() for name, arr in layer.arrays()}
            for layer in net.layers
        ],
        "output": {"W": net.W_out.tolist(), "b": net.b_out.tolist()},
    }
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(doc, fp)
        fp.write("\n")


def _load_array(doc: dict, field_name: str, value, shape: tuple[int, ...]) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise WeightFileError(f"{field_name}: not a numeric array") from exc
    if arr.shape != shape:
        raise WeightFileError(f"{field_name}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise WeightFileError(f"{field_name}: contains non-finite values")
    return arr


def load_weights(path: str | os.PathLike) -> LstmNetwork:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as exc:
        raise WeightFileError(f"unparseable weight file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != WEIGHT_FORMAT:
        raise WeightFileError(f"format: expected {WEIGHT_FORMAT!r}, got {doc.get('format')!r}")
    arch = doc.get("arch")
    if (not isinstance(arch, list) or len(arch) != 5
            or not all(isinstance(v, int) and v > 0 for v in arch)):
        raise WeightFileError(f"arch: expected 5 positive dims, got {arch!r}")
    if arch[-1] != NUM_CLASSES:
        raise WeightFileError(
            f"arch: architecture mismatch, output dimension {arch[-1]} != {NUM_CLASSES}")
    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, list) or len(raw_layers) != 3:
        raise WeightFileError("layers: expected exactly 3 layer records")
    layers = []
    dim = arch[0]
    for k, raw in enumerate(raw_layers):
        h = arch[k + 1]
        if not isinstance(raw, dict):
            raise WeightFileError(f"layers[{k}]: expected an object")
        kw = {}
        for kind, cols in (("W", dim), ("U", h), ("b", None)):
            for g in GATES:
                name = f"{kind}_{g}"
                if name not in raw:
                    raise WeightFileError(f"layers[{k}].{name}: missing")
                shape = (h,) if cols is None else (h, cols)
                kw[name] = _load_array(doc, f"layers[{k}].{name}", raw[name], shape)
        layers.append(LstmLayerParams(**kw))
        dim = h
    out = doc.get("output")
    if not isinstance(out, dict) or "W" not in out or "b" not in out:
        raise WeightFileError("output: expected an object with W and b")
    w_out = _load_array(doc, "output.W", out["W"], (NUM_CLASSES, arch[3]))
    b_out = _load_array(doc, "output.b", out["b"], (NUM_CLASSES,))
    return LstmNetwork(layers=layers, W_out=w_out, b_out=b_out)


def networks_equal(a: LstmNetwork, b: LstmNetwork) -> bool:
    return all(np.array_equal(x, y) for (_, x), (_, y) in zip(a.arrays(), b.arrays()))
