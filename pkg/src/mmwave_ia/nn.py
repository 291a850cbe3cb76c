"""Feed-forward beam classifier written directly in numpy.

Network: five dense hidden layers (64, 128, 256, 128, 64) with ReLU, Tanh,
Sigmoid, ReLU, Tanh, each followed by batch normalization, then a dense
softmax output over the 24 beams. Trained with cross-entropy and Adam.

Initialization is Glorot-uniform, ``W ~ U(-a, a)`` with
``a = sqrt(6 / (fan_in + fan_out))`` (variance ``2 / (fan_in + fan_out)``),
biases zero, BN scale one and shift zero, running statistics zero.

Checkpoint layout (version 1, little-endian)::

    4 bytes   magic b"MWCK"
    2 bytes   version (uint16)
    4 bytes   header length H (uint32)
    H bytes   UTF-8 JSON header: architecture, subset, norm constant,
              normalization mode, dtype and the ordered tensor shapes
    rest      float64 tensors in header order, C order, concatenated
              (float32 models are widened on save and narrowed on load)
"""

from __future__ import annotations

import csv
import json
import logging
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dataset import BeamSubset

log = logging.getLogger(__name__)

HIDDEN = (64, 128, 256, 128, 64)
ACTIVATIONS = ("relu", "tanh", "sigmoid", "relu", "tanh")
EPOCHS_BY_M = {2: 35, 4: 55, 6: 65, 8: 70, 12: 75, 24: 90}
PROB_FLOOR = 1e-12
VAL_CALIBRATION_SAMPLES = 16384

CKPT_MAGIC = b"MWCK"
CKPT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class Architecture:
    input_width: int
    hidden: tuple[int, ...] = HIDDEN
    output_width: int = 24
    activations: tuple[str, ...] = ACTIVATIONS
    bn_position: str = "post"  # "post": dense -> act -> BN; "pre": dense -> BN -> act

    def __post_init__(self):
        if self.input_width < 1 or self.output_width < 1 or any(h < 1 for h in self.hidden):
            raise ValueError("layer widths must be positive")
        if len(self.activations) != len(self.hidden):
            raise ValueError("one activation per hidden layer")
        if any(a not in _ACT for a in self.activations):
            raise ValueError(f"unknown activation in {self.activations}")
        if self.bn_position not in ("post", "pre"):
            raise ValueError("bn_position must be 'post' or 'pre'")

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_width, *self.hidden, self.output_width)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 1024
    epochs: dict = field(default_factory=lambda: dict(EPOCHS_BY_M))
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    bn_position: str = "post"
    bn_recalibrate: bool = True
    dtype: str = "float64"
    seed: int = 0

    def __post_init__(self):
        if self.dtype not in ("float64", "float32"):
            raise ValueError("dtype must be 'float64' or 'float32'")
        if self.learning_rate < 0 or self.batch_size < 2:
            raise ValueError("learning_rate must be >= 0 and batch_size >= 2")
        if any(e < 1 for e in self.epochs.values()):
            raise ValueError("epoch counts must be positive")

    def epochs_for(self, m: int) -> int:
        if m not in self.epochs:
            raise ValueError(f"no epoch count configured for m={m}")
        return self.epochs[m]


def _relu(z):
    return np.maximum(z, 0.0)


def _sigmoid(z):
    # tanh form: overflow-free and much cheaper than exp on large batches
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# activation -> (f, f' expressed through input z and output a)
_ACT = {
    "relu": (_relu, lambda z, a: z > 0),
    "tanh": (np.tanh, lambda z, a: 1.0 - a * a),
    "sigmoid": (_sigmoid, lambda z, a: a * (1.0 - a)),
}


@dataclass
class ModelState:
    arch: Architecture
    weights: list
    biases: list
    gamma: list
    beta: list
    running_mean: list
    running_var: list
    norm_max_linear: float = 1.0
    subset: tuple[int, ...] | None = None
    normalization: str = "global"
    bn_eps: float = 1e-5
    bn_momentum: float = 0.1

    def params(self) -> list[tuple[str, np.ndarray]]:
        """Trainable tensors in a fixed order (views, updated in place)."""
        out = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            out += [(f"W{k}", w), (f"b{k}", b)]
        for k, (g, s) in enumerate(zip(self.gamma, self.beta)):
            out += [(f"gamma{k}", g), (f"beta{k}", s)]
        return out

    @property
    def dtype(self):
        return self.weights[0].dtype

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        out = self.params()
        for k, (m, v) in enumerate(zip(self.running_mean, self.running_var)):
            out += [(f"rmean{k}", m), (f"rvar{k}", v)]
        return out

    def copy(self) -> ModelState:
        cp = lambda xs: [x.copy() for x in xs]  # noqa: E731
        return ModelState(self.arch, cp(self.weights), cp(self.biases), cp(self.gamma),
                          cp(self.beta), cp(self.running_mean), cp(self.running_var),
                          self.norm_max_linear, self.subset, self.normalization,
                          self.bn_eps, self.bn_momentum)


def init(arch: Architecture, seed: int = 0, dtype="float64", **kw) -> ModelState:
    """Glorot-uniform weights drawn in float64 (then cast), so both precisions
    start from the same values for a given seed."""
    rng = np.random.default_rng(seed)
    widths = arch.widths
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-a, a, size=(fan_in, fan_out)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype))
    hid = arch.hidden
    return ModelState(arch, weights, biases,
                      [np.ones(h, dtype) for h in hid], [np.zeros(h, dtype) for h in hid],
                      [np.zeros(h, dtype) for h in hid], [np.zeros(h, dtype) for h in hid], **kw)


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check_input(model: ModelState, x):
    x = np.asarray(x, dtype=model.dtype)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.arch.input_width:
        raise ValueError(f"expected input width {model.arch.input_width}, got shape {x.shape}")
    return x


def _forward(model: ModelState, x, train: bool):
    """Returns (probs, cache). In train mode updates running BN statistics."""
    arch = model.arch
    eps = model.bn_eps
    cache = []
    h = x
    for k, name in enumerate(arch.activations):
        act, _ = _ACT[name]
        z = h @ model.weights[k]
        z += model.biases[k]
        pre_bn = act(z) if arch.bn_position == "post" else z
        if train:
            n = pre_bn.shape[0]
            mu = pre_bn.mean(axis=0)
            xc = pre_bn - mu
            var = np.einsum("ij,ij->j", xc, xc) / n
            mom = model.bn_momentum
            model.running_mean[k] *= 1.0 - mom
            model.running_mean[k] += mom * mu
            model.running_var[k] *= 1.0 - mom
            model.running_var[k] += (mom * n / (n - 1)) * var
        else:
            xc = pre_bn - model.running_mean[k]
            var = model.running_var[k]
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = xc * inv_std
        bn = xhat * model.gamma[k]
        bn += model.beta[k]
        if arch.bn_position == "post":
            a, out = pre_bn, bn
        else:
            a = act(bn)
            out = a
        cache.append((h, z, a, xhat, inv_std))
        h = out
    logits = h @ model.weights[-1] + model.biases[-1]
    probs = softmax(logits)
    cache.append((h,))
    return probs, cache


def forward(model: ModelState, batch, mode: str = "infer") -> np.ndarray:
    x = _check_input(model, batch)
    if mode == "train":
        if x.shape[0] < 2:
            raise ValueError("train mode needs at least 2 samples for batch statistics")
        return _forward(model, x, train=True)[0]
    if mode != "infer":
        raise ValueError("mode must be 'train' or 'infer'")
    return _forward(model, x, train=False)[0]


def loss(probs, labels) -> float:
    """Mean cross-entropy; ``labels`` are 1-based beam indices."""
    probs = np.asarray(probs)
    labels = np.asarray(labels)
    if probs.shape[0] != labels.shape[0]:
        raise ValueError("probs and labels disagree on batch size")
    p = probs[np.arange(len(labels)), labels - 1]
    return float(-np.mean(np.log(np.maximum(p, PROB_FLOOR))))


def _bn_backward(dout, xhat, inv_std, gamma):
    n = dout.shape[0]
    dbeta = dout.sum(axis=0)
    dgamma = np.einsum("ij,ij->j", dout, xhat)
    # batch-statistics form: gamma/sigma * (dout - mean(dout) - xhat * mean(dout * xhat))
    dx = dout - dbeta / n
    dx -= xhat * (dgamma / n)
    dx *= gamma * inv_std
    return dx, dgamma, dbeta


def gradients(model: ModelState, x, labels) -> tuple[float, dict]:
    """Loss and analytic gradients for a train-mode pass on one batch.

    Running BN statistics are updated as a side effect, as in training.
    """
    x = _check_input(model, x)
    labels = np.asarray(labels)
    probs, cache = _forward(model, x, train=True)
    batch_loss = loss(probs, labels)
    n = x.shape[0]
    dlogits = probs.copy()
    dlogits[np.arange(n), labels - 1] -= 1.0
    dlogits /= n

    arch = model.arch
    grads = {}
    (h_last,) = cache[-1]
    nl = len(arch.hidden)
    grads[f"W{nl}"] = h_last.T @ dlogits
    grads[f"b{nl}"] = dlogits.sum(axis=0)
    dh = dlogits @ model.weights[-1].T
    for k in range(nl - 1, -1, -1):
        h_in, z, a, xhat, inv_std = cache[k]
        _, dact = _ACT[arch.activations[k]]
        if arch.bn_position == "post":
            da, grads[f"gamma{k}"], grads[f"beta{k}"] = _bn_backward(dh, xhat, inv_std, model.gamma[k])
            dz = da * dact(z, a)
        else:
            # relu(x) > 0 iff x > 0, so the activation output stands in for its input
            dbn = dh * dact(a, a)
            dz,grads[f"gamma{k}"], grads[f"beta{k}"] = _bn_backward(dbn, xhat, inv_std, model.gamma[k])
        grads[f"W{k}"] = h_in.T @ dz
        grads[f"b{k}"] = dz.sum(axis=0)
        dh = dz @ model.weights[k].T
    return batch_loss, grads


class Adam:
    def __init__(self, model: ModelState, cfg: TrainConfig = TrainConfig()):
        self.lr = cfg.learning_rate
        self.b1 = cfg.adam_beta1
        self.b2 = cfg.adam_beta2
        self.eps = cfg.adam_eps
        self.t = 0
        self.m = {name: np.zeros_like(p) for name, p in model.params()}
        self.v = {name: np.zeros_like(p) for name, p in model.params()}

    def step(self, model: ModelState, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for name, p in model.params():
            g = grads[name]
            m, v = self.m[name], self.v[name]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def backward_and_step(model: ModelState, batch, labels, adam: Adam) -> float:
    batch_loss, grads = gradients(model, batch, labels)
    if not np.isfinite(batch_loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
        bad = [k for k, g in grads.items() if not np.all(np.isfinite(g))]
        raise FloatingPointError(f"non-finite training step (loss={batch_loss}, bad grads={bad})")
    adam.step(model, grads)
    return batch_loss


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)

    def __len__(self):
        return len(self.train_loss)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "train_loss", "val_loss", "val_acc"])
            for e, row in enumerate(zip(self.train_loss, self.val_loss, self.val_acc), 1):
                w.writerow([e, *(repr(float(v)) for v in row)])


def predict_proba(model: ModelState, x) -> np.ndarray:
    return forward(model, x, "infer")


def predict(model: ModelState, x):
    """Most likely beam (1-based); ties go to the lowest index."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.argmax(predict_proba(model, x), axis=1) + 1
    return int(labels[0]) if x.ndim == 1 else labels


def evaluate(model: ModelState, x, labels, batch_size: int = 8192) -> tuple[float, float]:
    """(mean loss, accuracy fraction) in inference mode."""
    total_loss, correct = 0.0, 0
    for s in range(0, len(labels), batch_size):
        p = predict_proba(model, x[s:s + batch_size])
        y = labels[s:s + batch_size]
        total_loss += loss(p, y) * len(y)
        correct += int(np.sum(np.argmax(p, axis=1) + 1 == y))
    return total_loss / len(labels), correct / len(labels)


def recalibrate_bn(model: ModelState, x, batch_size: int = 16384) -> ModelState:
    """Replace the running BN statistics with population statistics of ``x``.

    Weights are frozen. Layers are processed in order, each normalized with its
    freshly estimated statistics before feeding the next, so every BN layer of
    the inference-mode network sees inputs with exactly the stored mean and
    (unbiased) variance over ``x``. Mutates and returns ``model``.
    """
    x = _check_input(model, x)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples to estimate BN statistics")
    arch = model.arch
    h = x
    for k, name in enumerate(arch.activations):
        act, _ = _ACT[name]
        z = np.empty((n, arch.hidden[k]), model.dtype)
        for s in range(0, n, batch_size):
            z[s:s + batch_size] = h[s:s + batch_size] @ model.weights[k]
        z += model.biases[k]
        pre_bn = act(z) if arch.bn_position == "post" else z
        mu = pre_bn.mean(axis=0)
        pre_bn -= mu
        var = np.einsum("ij,ij->j", pre_bn, pre_bn) / (n - 1)
        model.running_mean[k][...] = mu
        model.running_var[k][...] = var
        pre_bn *= model.gamma[k] / np.sqrt(var + model.bn_eps)
        pre_bn += model.beta[k]
        h = pre_bn if arch.bn_position == "post" else act(pre_bn)
    return model


def _relu_masks(model: ModelState, cache) -> list:
    masks = []
    for k, name in enumerate(model.arch.activations):
        if name == "relu":
            _, z, a, _, _ = cache[k]
            masks.append((z if model.arch.bn_position == "post" else a) > 0)
    return masks


def gradient_check(model: ModelState, x, labels, h: float = 1e-5, max_entries: int | None = None,
                   seed: int = 0, atol: float = 1e-5) -> dict:
    """Compare analytic gradients with central differences, per tensor.

    Returns ``{name: (relative_error, checked, skipped)}`` where the relative
    error is ``|g - g_num| / max(|g|, |g_num|, atol)`` over the checked
    entries (Euclidean norms). The floor sits above the round-off of the
    finite differences; it matters for tensors whose true gradient is zero,
    such as biases feeding straight into BN. An entry is skipped when the
    perturbation flips a ReLU, since the loss is not differentiable across
    the kink. ``max_entries`` samples that many entries per tensor.
    Needs a float64 model.
    """
    if model.dtype != np.float64:
        raise ValueError("gradient checking needs a float64 model")
    x = _check_input(model, x)
    labels = np.asarray(labels)
    _, grads = gradients(model.copy(), x, labels)
    probe = model.copy()
    rng = np.random.default_rng(seed)

    def evaluate_at():
        probs, cache = _forward(probe, x, True)
        return loss(probs, labels), _relu_masks(probe, cache)

    report = {}
    for name, p in probe.params():
        flat = p.reshape(-1)
        idx = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            idx = np.sort(rng.choice(flat.size, max_entries, replace=False))
        g = grads[name].reshape(-1)
        ana, num = [], []
        skipped = 0
        for i in idx:
            old = flat[i]
            flat[i] = old + h
            lp, mp = evaluate_at()
            flat[i] = old - h
            lm, mm = evaluate_at()
            flat[i] = old
            if any(not np.array_equal(a, b) for a, b in zip(mp, mm)):
                skipped += 1
                continue
            ana.append(g[i])
            num.append((lp - lm) / (2 * h))
        ana, num = np.array(ana), np.array(num)
        denom = max(np.linalg.norm(ana), np.linalg.norm(num), atol)
        err = float(np.linalg.norm(ana - num) / denom)
        report[name] = (err, len(ana), skipped)
    return report


def fit(model: ModelState, x_train, y_train, epochs: int, cfg: TrainConfig = TrainConfig(),
        x_val=None, y_val=None, shuffle_seed: int = 0) -> TrainHistory:
    """Mini-batch Adam for exactly ``epochs`` epochs; mutates ``model``.

    A trailing batch of a single sample is skipped (BN needs two). The
    momentum-averaged BN statistics lag badly behind the weights here, so
    validation after each epoch uses a copy recalibrated on a fixed slice of
    the training set, and the returned model is recalibrated on all of it
    (see :func:`recalibrate_bn`). ``cfg.bn_recalibrate=False`` keeps the
    plain running averages.
    """
    rng = np.random.default_rng(shuffle_seed)
    adam = Adam(model, cfg)
    hist = TrainHistory()
    n = len(y_train)
    calib = x_train[np.random.default_rng(shuffle_seed).permutation(n)[:VAL_CALIBRATION_SAMPLES]]
    for epoch in range(epochs):
        perm = rng.permutation(n)
        run_loss, seen = 0.0, 0
        for s in range(0, n, cfg.batch_size):
            idx = perm[s:s + cfg.batch_size]
            if len(idx) < 2:
                continue
            run_loss += backward_and_step(model, x_train[idx], y_train[idx], adam) * len(idx)
            seen += len(idx)
        hist.train_loss.append(run_loss / seen)
        if x_val is not None and len(y_val):
            probe = recalibrate_bn(model.copy(), calib) if cfg.bn_recalibrate else model
            vl, va = evaluate(probe, x_val, y_val)
        else:
            vl, va = float("nan"), float("nan")
        hist.val_loss.append(vl)
        hist.val_acc.append(va)
        log.debug("epoch %d train_loss %.4f val_loss %.4f val_acc %.4f",
                  epoch + 1, hist.train_loss[-1], vl, va)
    if cfg.bn_recalibrate and n >= 2:
        recalibrate_bn(model, x_train)
    return hist


def train(splits, subset: BeamSubset, cfg: TrainConfig = TrainConfig(),
          init_seed: int | None = None, epochs: int | None = None):
    """Train a classifier on ``(train, val, test)`` datasets for one beam subset.

    Returns ``(model, history)``. The model carries the dataset's normalization
    constant and the subset so it can be applied to raw RSS later.
    """
    from .dataset import select_features

    train_ds, val_ds = splits[0], splits[1]
    n_epochs = cfg.epochs_for(subset.m) if epochs is None else epochs
    arch = Architecture(subset.m, bn_position=cfg.bn_position)
    model = init(arch, cfg.seed if init_seed is None else init_seed, cfg.dtype,
                 norm_max_linear=train_ds.norm_max_linear, subset=tuple(subset.indices),
                 normalization=train_ds.normalization, bn_eps=cfg.bn_eps,
                 bn_momentum=cfg.bn_momentum)
    hist = fit(model, select_features(train_ds, subset), train_ds.labels, n_epochs, cfg,
               select_features(val_ds, subset), val_ds.labels, shuffle_seed=cfg.seed)
    return model, hist


def save(model: ModelState, path) -> None:
    tensors = model.tensors()
    header = {
        "arch": {**asdict(model.arch)},
        "subset": list(model.subset) if model.subset is not None else None,
        "norm_max_linear": model.norm_max_linear,
        "normalization": model.normalization,
        "bn_eps": model.bn_eps,
        "bn_momentum": model.bn_momentum,
        "dtype": str(model.dtype),
        "tensors": [[name, list(t.shape)] for name, t in tensors],
    }
    hb = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CKPT_MAGIC + struct.pack("<HI", CKPT_VERSION, len(hb)) + hb)
        for _, t in tensors:
            f.write(np.ascontiguousarray(t, dtype="<f8").tobytes())


def load(path) -> ModelState:
    blob = Path(path).read_bytes()
    if len(blob) < 10 or blob[:4] != CKPT_MAGIC:
        raise CheckpointError("not a checkpoint file")
    version, hlen = struct.unpack_from("<HI", blob, 4)
    if version != CKPT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if len(blob) < 10 + hlen:
        raise CheckpointError("truncated checkpoint header")
    try:
        header = json.loads(blob[10:10 + hlen])
        a = header["arch"]
        arch = Architecture(a["input_width"], tuple(a["hidden"]), a["output_width"],
                            tuple(a["activations"]), a["bn_position"])
    except (ValueError, KeyError, TypeError) as e:
        raise CheckpointError(f"corrupt checkpoint header: {e}") from e
    try:
        model = init(arch, 0, np.dtype(header["dtype"]))
    except TypeError as e:
        raise CheckpointError(f"bad dtype in checkpoint: {e}") from e
    expected = model.tensors()
    stored = header["tensors"]
    if [(n, tuple(s)) for n, s in stored] != [(n, t.shape) for n, t in expected]:
        raise CheckpointError("tensor layout does not match the architecture")
    off = 10 + hlen
    need = off + sum(8 * t.size for _, t in expected)
    if len(blob) != need:
        raise CheckpointError(f"checkpoint size {len(blob)} != expected {need} (truncated?)")
    for _, t in expected:
        # stored as float64; exact for float32 models too
        t[...] = np.frombuffer(blob, "<f8", t.size, off).reshape(t.shape)
        off += 8 * t.size
    model.norm_max_linear = header["norm_max_linear"]
    model.subset = tuple(header["subset"]) if header["subset"] is not None else None
    model.normalization = header["normalization"]
    model.bn_eps = header["bn_eps"]
    model.bn_momentum = header["bn_momentum"]
    return model
