"""Dense, LSTM, and GRU forecasters with hand-derived backpropagation and
mini-batch SGD, in 64-bit numpy throughout.

Architectures (defaults follow the benchmark's fixed shapes):
  ann   flat input -> dense(64, ReLU) -> dense(36, ReLU) -> dense(horizon, linear)
  lstm  per-step dense projection(36, ReLU) -> LSTM(64) over the lookback
        steps -> dense(horizon, linear) on the final hidden state
  gru   same, with a GRU cell
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import WindowedDataset
from .errors import NonFiniteLoss, ShapeMismatch


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def dense_forward(x, W, b, activation="linear"):
    """Single dense layer: activation(b + x @ W). activation is "relu" or
    "linear"."""
    x = np.asarray(x, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if x.shape[-1] != W.shape[0]:
        raise ShapeMismatch(f"input width {x.shape[-1]} != weight rows {W.shape[0]}")
    z = x @ W + b
    if activation == "relu":
        return relu(z)
    if activation == "linear":
        return z
    raise ValueError(f"unknown activation {activation!r}")


def lstm_cell(x_t, h_prev, c_prev, params):
    """One LSTM step on [h_prev, x_t]; returns (h_t, c_t, cache).

    Gates follow sigma(W [h_prev, x_t] + b); the cell candidate uses tanh and
    the state updates c_t = f*c_prev + i*g, h_t = o*tanh(c_t).
    """
    a = np.concatenate([h_prev, x_t], axis=-1)
    i = sigmoid(a @ params["Wi"] + params["bi"])
    f = sigmoid(a @ params["Wf"] + params["bf"])
    o = sigmoid(a @ params["Wo"] + params["bo"])
    g = np.tanh(a @ params["Wc"] + params["bc"])
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    cache = (a, i, f, o, g, c_prev, c_t)
    return h_t, c_t, cache


def gru_cell(x_t, h_prev, params):
    """One GRU step on [h_prev, x_t]; returns (h_t, cache).

    z gates the convex combination h_t = (1-z)*h_prev + z*h_tilde; r scales
    h_prev inside the candidate. Gate biases are present only when the model
    was built with them.
    """
    a = np.concatenate([h_prev, x_t], axis=-1)
    bz = params.get("bz", 0.0)
    br = params.get("br", 0.0)
    bh = params.get("bh", 0.0)
    z = sigmoid(a @ params["Wz"] + bz)
    r = sigmoid(a @ params["Wr"] + br)
    a2 = np.concatenate([r * h_prev, x_t], axis=-1)
    h_tilde = np.tanh(a2 @ params["Wh"] + bh)
    h_t = (1.0 - z) * h_prev + z * h_tilde
    cache = (a, a2, z, r, h_tilde, h_prev)
    return h_t, cache


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture description; widths default to the benchmark shapes."""

    kind: str                    # "ann" | "lstm" | "gru"
    num_features: int = 8
    lookback: int = 3
    horizon: int = 24
    ann_hidden: tuple = (64, 36)
    proj_width: int = 36
    cell_width: int = 64
    gru_gate_bias: bool = True   # set False to pin GRU gate biases at zero

    def __post_init__(self):
        if self.kind not in ("ann", "lstm", "gru"):
            raise ValueError(f"unknown network kind {self.kind!r}")

    @property
    def input_width(self) -> int:
        return self.num_features * self.lookback


@dataclass
class TrainingConfig:
    learning_rate: float
    batch_size: int
    epochs: int
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate >= 0, batch_size >= 1, epochs >= 1 required")


@dataclass
class LossCurve:
    train: list = field(default_factory=list)
    validation: list = field(default_factory=list)


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class ForecastNetwork:
    """Trainable forecaster with an explicit parameter store (dict of
    arrays in a fixed key order, flattenable for gradient checking)."""

    def __init__(self, spec: NetworkSpec, seed: int = 0):
        self.spec = spec
        rng = np.random.default_rng(seed)
        p = {}
        if spec.kind == "ann":
            widths = [spec.input_width, *spec.ann_hidden, spec.horizon]
            for k, (fi, fo) in enumerate(zip(widths[:-1], widths[1:]), start=1):
                p[f"W{k}"] = _glorot(rng, fi, fo)
                p[f"b{k}"] = np.zeros(fo)
        else:
            p["Wp"] = _glorot(rng, spec.num_features, spec.proj_width)
            p["bp"] = np.zeros(spec.proj_width)
            cat = spec.cell_width + spec.proj_width
            if spec.kind == "lstm":
                for g in ("i", "f", "o", "c"):
                    p[f"W{g}"] = _glorot(rng, cat, spec.cell_width)
                    p[f"b{g}"] = np.zeros(spec.cell_width)
            else:
                for g in ("z", "r", "h"):
                    p[f"W{g}"] = _glorot(rng, cat, spec.cell_width)
                    if spec.gru_gate_bias or g == "h":
                        p[f"b{g}"] = np.zeros(spec.cell_width)
            p["Wy"] = _glorot(rng, spec.cell_width, spec.horizon)
            p["by"] = np.zeros(spec.horizon)
        self.params = p
        self._keys = list(p.keys())

    # --- parameter flat view -------------------------------------------------

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.params[k].ravel() for k in self._keys])

    def unflatten(self, vec: np.ndarray) -> None:
        pos = 0
        for k in self._keys:
            size = self.params[k].size
            self.params[k] = vec[pos : pos + size].reshape(self.params[k].shape).copy()
            pos += size
        if pos != len(vec):
            raise ShapeMismatch("flat vector length does not match parameter count")

    # --- forward -------------------------------------------------------------

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        s = self.spec
        if s.kind == "ann":
            if X.ndim != 2 or X.shape[1] != s.input_width:
                raise ShapeMismatch(f"ann expects (n, {s.input_width}), got {X.shape}")
        else:
            if X.ndim != 3 or X.shape[1] != s.lookback or X.shape[2] != s.num_features:
                raise ShapeMismatch(
                    f"{s.kind} expects (n, {s.lookback}, {s.num_features}), got {X.shape}"
                )
        return X

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Batched forward pass -> (n, horizon) predictions."""
        out, _ = self._forward_cached(self._check_input(X))
        return out

    def _forward_cached(self, X):
        p = self.params
        s = self.spec
        if s.kind == "ann":
            n_layers = len(s.ann_hidden) + 1
            acts = [X]
            pre = []
            h = X
            for k in range(1, n_layers + 1):
                z = h @ p[f"W{k}"] + p[f"b{k}"]
                pre.append(z)
                h = relu(z) if k < n_layers else z
                acts.append(h)
            return h, ("ann", acts, pre)

        n = X.shape[0]
        h = np.zeros((n, s.cell_width))
        c = np.zeros((n, s.cell_width))
        steps = []
        for t in range(s.lookback):
            zp = X[:, t, :] @ p["Wp"] + p["bp"]
            xp = relu(zp)
            if s.kind == "lstm":
                h, c, cache = lstm_cell(xp, h, c, p)
            else:
                h, cache = gru_cell(xp, h, p)
            steps.append((X[:, t, :], zp, cache))
        y = h @ p["Wy"] + p["by"]
        return y, (s.kind, steps, h)

    # --- backward ------------------------------------------------------------

    def loss_and_gradients(self, X, Y):
        """Mean-squared-error loss over the batch and all horizon outputs,
        plus its exact analytic gradient for every parameter."""
        X = self._check_input(X)
        Y = np.asarray(Y, dtype=np.float64)
        if len(X) == 0:
            raise ValueError("batch must be non-empty")
        out, cache = self._forward_cached(X)
        if out.shape != Y.shape:
            raise ShapeMismatch(f"targets shape {Y.shape} != outputs shape {out.shape}")
        diff = out - Y
        loss = float(np.mean(diff * diff))
        if not np.isfinite(loss):
            raise NonFiniteLoss("loss is not finite")
        d_out = 2.0 * diff / diff.size
        if cache[0] == "ann":
            grads = self._backward_ann(d_out, cache)
        else:
            grads = self._backward_recurrent(d_out, cache)
        return loss, grads

    def _backward_ann(self, d_y, cache):
        _, acts, pre = cache
        p = self.params
        g = {}
        n_layers = len(pre)
        d = d_y
        for k in range(n_layers, 0, -1):
            if k < n_layers:
                d = d * (pre[k - 1] > 0)   # ReLU on hidden layers only
            g[f"W{k}"] = acts[k - 1].T @ d
            g[f"b{k}"] = d.sum(axis=0)
            if k > 1:
                d = d @ p[f"W{k}"].T
        return g

    def _backward_recurrent(self, d_y, cache):
        kind, steps, h_last = cache
        p = self.params
        s = self.spec
        cw = s.cell_width
        g = {k: np.zeros_like(v) for k, v in self.params.items()}

        g["Wy"] = h_last.T @ d_y
        g["by"] = d_y.sum(axis=0)
        d_h = d_y @ p["Wy"].T
        d_c = np.zeros_like(d_h)

        for t in range(s.lookback - 1, -1, -1):
            x_raw, zp, cell_cache = steps[t]
            if kind == "lstm":
                a, i, f, o, gg, c_prev, c_t = cell_cache
                tc = np.tanh(c_t)
                d_o = d_h * tc
                d_ct = d_h * o * (1.0 - tc * tc) + d_c
                d_f = d_ct * c_prev
                d_i = d_ct * gg
                d_g = d_ct * i
                d_c = d_ct * f
                dz_i = d_i * i * (1.0 - i)
                dz_f = d_f * f * (1.0 - f)
                dz_o = d_o * o * (1.0 - o)
                dz_g = d_g * (1.0 - gg * gg)
                g["Wi"] += a.T @ dz_i
                g["bi"] += dz_i.sum(axis=0)
                g["Wf"] += a.T @ dz_f
                g["bf"] += dz_f.sum(axis=0)
                g["Wo"] += a.T @ dz_o
                g["bo"] += dz_o.sum(axis=0)
                g["Wc"] += a.T @ dz_g
                g["bc"] += dz_g.sum(axis=0)
                d_a = dz_i @ p["Wi"].T + dz_f @ p["Wf"].T + dz_o @ p["Wo"].T + dz_g @ p["Wc"].T
                d_h = d_a[:, :cw]
                d_xp = d_a[:, cw:]
            else:
                a, a2, z, r, h_tilde, h_prev = cell_cache
                d_z = d_h * (h_tilde - h_prev)
                d_hprev = d_h * (1.0 - z)
                d_htilde = d_h * z
                dz_h = d_htilde * (1.0 - h_tilde * h_tilde)
                g["Wh"] += a2.T @ dz_h
                g["bh"] += dz_h.sum(axis=0)
                d_a2 = dz_h @ p["Wh"].T
                d_rh = d_a2[:, :cw]
                d_xp = d_a2[:, cw:]
                d_r = d_rh * h_prev
                d_hprev += d_rh * r
                dz_z = d_z * z * (1.0 - z)
                dz_r = d_r * r * (1.0 - r)
                g["Wz"] += a.T @ dz_z
                g["Wr"] += a.T @ dz_r
                if "bz" in g:
                    g["bz"] += dz_z.sum(axis=0)
                    g["br"] += dz_r.sum(axis=0)
                d_a = dz_z @ p["Wz"].T + dz_r @ p["Wr"].T
                d_hprev += d_a[:, :cw]
                d_xp += d_a[:, cw:]
                d_h = d_hprev
                d_c = np.zeros_like(d_h)

            dz_p = d_xp * (zp > 0)
            g["Wp"] += x_raw.T @ dz_p
            g["bp"] += dz_p.sum(axis=0)

        return g


def network_forward(model: ForecastNetwork, window: np.ndarray) -> np.ndarray:
    """Forward pass of one input window -> length-horizon forecast."""
    return model.forward(np.asarray(window)[None, ...])[0]


def backprop_gradients(model: ForecastNetwork, inputs, targets):
    """Exact MSE gradient w.r.t. every parameter (dict keyed like
    model.params)."""
    _, grads = model.loss_and_gradients(inputs, targets)
    return grads


def predict_windows(model: ForecastNetwork, inputs) -> np.ndarray:
    """Pure batched forward pass; no state carries between samples."""
    return model.forward(inputs)


def sgd_train(
    model: ForecastNetwork,
    train: WindowedDataset,
    val: WindowedDataset | None,
    config: TrainingConfig,
) -> tuple[ForecastNetwork, LossCurve]:
    """Plain mini-batch SGD (w <- w - lr * grad) with a seeded per-epoch
    shuffle. Returns the model and per-epoch train/validation MSE."""
    rng = np.random.default_rng(config.seed)
    n = len(train)
    curve = LossCurve()
    for _ in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = model.loss_and_gradients(train.inputs[idx], train.targets[idx])
            total += loss * len(idx)
            if config.learning_rate != 0.0:
                for k, gk in grads.items():
                    model.params[k] -= config.learning_rate * gk
        curve.train.append(total / n)
        if val is not None and len(val):
            pred = model.forward(val.inputs)
            v = float(np.mean((pred - val.targets) ** 2))
            if not np.isfinite(v):
                raise NonFiniteLoss("validation loss is not finite")
            curve.validation.append(v)
    return model, curve
