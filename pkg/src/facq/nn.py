"""Minimal dense feed-forward network core.

Float64 throughout.  Forward/backward operate on batches (rows are
instances); backward produces exact reverse-mode gradients for every
parameter and for the input itself, which the acquisition criterion needs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ACTIVATIONS = ("relu", "sigmoid", "linear", "softmax")


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class Layer:
    W: np.ndarray               # (n_in, n_out)
    b: np.ndarray               # (n_out,)
    activation: str
    lr_scale: float = 1.0       # per-layer learning-rate multiplier

    def copy(self) -> "Layer":
        return Layer(self.W.copy(), self.b.copy(), self.activation, self.lr_scale)


@dataclass
class Network:
    layers: list[Layer]

    @property
    def input_width(self) -> int:
        return self.layers[0].W.shape[0]

    @property
    def output_width(self) -> int:
        return self.layers[-1].W.shape[1]

    def copy(self) -> "Network":
        return Network([ly.copy() for ly in self.layers])

    def forward(self, X: np.ndarray):
        """Returns (output, cache). X is (n, input_width) or (input_width,)."""
        X = np.asarray(X, dtype=np.float64)
        squeeze = X.ndim == 1
        if squeeze:
            X = X[None, :]
        if X.shape[1] != self.input_width:
            raise ValueError(f"input width {X.shape[1]} != {self.input_width}")
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite input")
        A = X
        inputs, outputs = [], []
        for ly in self.layers:
            inputs.append(A)
            Z = A @ ly.W + ly.b
            if ly.activation == "relu":
                A = np.maximum(Z, 0.0)
            elif ly.activation == "sigmoid":
                A = 1.0 / (1.0 + np.exp(-Z))
            elif ly.activation == "softmax":
                A = _softmax(Z)
            elif ly.activation == "linear":
                A = Z
            else:
                raise ValueError(f"unknown activation {ly.activation!r}")
            outputs.append(A)
        out = A[0] if squeeze else A
        return out, _Cache(inputs, outputs, squeeze)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[0]


@dataclass
class _Cache:
    inputs: list[np.ndarray]    # per-layer input activations
    outputs: list[np.ndarray]   # per-layer post-activation outputs
    squeezed: bool


@dataclass
class Gradients:
    dW: list[np.ndarray]
    db: list[np.ndarray]
    dX: np.ndarray              # gradient w.r.t. the network input


def backward(net: Network, cache: _Cache, output_grad: np.ndarray,
             from_logits: bool = False, need_param_grads: bool = True) -> Gradients:
    """Exact reverse pass.

    ``output_grad`` is dL/d(output) — or dL/d(last pre-activation) when
    ``from_logits`` is set, which sidesteps the softmax/sigmoid jacobian for
    fused losses.  Parameter gradients are summed over the batch.
    """
    G = np.asarray(output_grad, dtype=np.float64)
    if cache.squeezed and G.ndim == 1:
        G = G[None, :]
    if G.shape != cache.outputs[-1].shape:
        raise ValueError(f"output_grad shape {G.shape} != {cache.outputs[-1].shape}")
    n_layers = len(net.layers)
    dW = [None] * n_layers
    db = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        ly = net.layers[i]
        A = cache.outputs[i]
        if i == n_layers - 1 and from_logits:
            dZ = G
        elif ly.activation == "relu":
            dZ = G * (A > 0.0)
        elif ly.activation == "sigmoid":
            dZ = G * A * (1.0 - A)
        elif ly.activation == "softmax":
            dZ = A * (G - (G * A).sum(axis=-1, keepdims=True))
        else:
            dZ = G
        if need_param_grads:
            dW[i] = cache.inputs[i].T @ dZ
            db[i] = dZ.sum(axis=0)
        G = dZ @ ly.W.T
    dX = G[0] if cache.squeezed else G
    return Gradients(dW, db, dX)


def input_sensitivity(net: Network, X: np.ndarray) -> np.ndarray:
    """Per input coordinate: sum over output units of |d out_i / d input|.

    One backward pass per output unit; shape matches ``X``.
    """
    out, cache = net.forward(X)
    batch = np.atleast_2d(out)
    n, r = batch.shape
    sens = np.zeros_like(cache.inputs[0])
    for i in range(r):
        G = np.zeros((n, r))
        G[:, i] = 1.0
        g = backward(net, cache, G if not cache.squeezed else G[0],
                     need_param_grads=False)
        sens += np.abs(np.atleast_2d(g.dX))
    return sens[0] if cache.squeezed else sens


# ---------------------------------------------------------------------------
# losses

XENT_CLIP = 1e-7


def weighted_bit_xent(target_bits: np.ndarray, pred_bits: np.ndarray,
                      l: int) -> float:
    """Cross-entropy over bit words, bit b (1-indexed) weighted 2**-(b-1).

    Shapes (..., d, l) or flat (..., d*l); returns the mean over leading
    batch dimensions of the per-instance weighted sum.
    """
    t = np.asarray(target_bits, dtype=np.float64)
    p = np.asarray(pred_bits, dtype=np.float64)
    if t.shape != p.shape:
        raise ValueError(f"shape mismatch {t.shape} vs {p.shape}")
    w = _loss_weights(t.shape[-1], l)
    p = np.clip(p, XENT_CLIP, 1.0 - XENT_CLIP)
    per = -(w * (t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))
    if t.ndim == 1:
        return float(per.sum())
    per = per.reshape(t.shape[0], -1) if t.ndim > 2 else per
    return float(per.sum(axis=-1).mean())


def weighted_bit_xent_logit_grad(target_bits: np.ndarray, pred_bits: np.ndarray,
                                 l: int) -> np.ndarray:
    """Gradient of the batch-mean loss w.r.t. the pre-sigmoid logits."""
    t = np.asarray(target_bits, dtype=np.float64)
    p = np.asarray(pred_bits, dtype=np.float64)
    w = _loss_weights(t.shape[-1], l)
    n = t.shape[0] if t.ndim > 1 else 1
    return w * (p - t) / n


def _loss_weights(last_dim: int, l: int) -> np.ndarray:
    w = 2.0 ** -np.arange(l)        # msb weight 1, lsb weight 2**-(l-1)
    if last_dim == l:
        return w
    if last_dim % l:
        raise ValueError(f"last dim {last_dim} not a multiple of l={l}")
    return np.tile(w, last_dim // l)


def softmax_xent(logits: np.ndarray, labels: np.ndarray):
    """Mean categorical cross-entropy; returns (loss, grad w.r.t. logits)."""
    Z = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    y = np.atleast_1d(np.asarray(labels))
    n, r = Z.shape
    if np.any(y < 0) or np.any(y >= r):
        raise ValueError("label out of range")
    P = _softmax(Z)
    loss = float(-np.log(np.clip(P[np.arange(n), y], 1e-300, None)).mean())
    G = P.copy()
    G[np.arange(n), y] -= 1.0
    G /= n
    if np.asarray(logits).ndim == 1:
        return loss, G[0]
    return loss, G


# ---------------------------------------------------------------------------
# Adam

@dataclass
class OptimizerConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1/beta2 must lie in [0, 1)")


class AdamState:
    def __init__(self, net: Network):
        self.mW = [np.zeros_like(ly.W) for ly in net.layers]
        self.vW = [np.zeros_like(ly.W) for ly in net.layers]
        self.mb = [np.zeros_like(ly.b) for ly in net.layers]
        self.vb = [np.zeros_like(ly.b) for ly in net.layers]


def adam_step(net: Network, grads: Gradients, cfg: OptimizerConfig,
              state: AdamState, t: int) -> None:
    """In-place Adam update with bias correction at step t >= 1."""
    if t < 1:
        raise ValueError("step index starts at 1")
    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.epsilon
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for i, ly in enumerate(net.layers):
        gW, gb = grads.dW[i], grads.db[i]
        if gW is None:
            continue
        if not (np.all(np.isfinite(gW)) and np.all(np.isfinite(gb))):
            raise FloatingPointError("non-finite gradients")
        lr = cfg.learning_rate * ly.lr_scale
        if lr == 0.0:
            continue
        state.mW[i] = b1 * state.mW[i] + (1 - b1) * gW
        state.vW[i] = b2 * state.vW[i] + (1 - b2) * gW * gW
        state.mb[i] = b1 * state.mb[i] + (1 - b1) * gb
        state.vb[i] = b2 * state.vb[i] + (1 - b2) * gb * gb
        ly.W -= lr * (state.mW[i] / c1) / (np.sqrt(state.vW[i] / c2) + eps)
        ly.b -= lr * (state.mb[i] / c1) / (np.sqrt(state.vb[i] / c2) + eps)


# ---------------------------------------------------------------------------
# construction / serialization

def glorot_layer(n_in: int, n_out: int, activation: str,
                 rng: np.random.Generator, lr_scale: float = 1.0) -> Layer:
    limit = np.sqrt(6.0 / (n_in + n_out))
    W = rng.uniform(-limit, limit, size=(n_in, n_out))
    return Layer(W, np.zeros(n_out), activation, lr_scale)


def build_mlp(widths: list[int], activations: list[str],
              rng: np.random.Generator) -> Network:
    assert len(activations) == len(widths) - 1
    layers = [glorot_layer(a, b, act, rng)
              for a, b, act in zip(widths[:-1], widths[1:], activations)]
    return Network(layers)


def save_network(net: Network, path: str | Path) -> None:
    doc = {
        "version": 1,
        "layers": [
            {
                "rows": ly.W.shape[0],
                "cols": ly.W.shape[1],
                "activation": ly.activation,
                "lr_scale": ly.lr_scale,
                "weights": ly.W.ravel().tolist(),
                "bias": ly.b.tolist(),
            }
            for ly in net.layers
        ],
    }
    Path(path).write_text(json.dumps(doc))


def load_network(path: str | Path) -> Network:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != 1:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    layers = []
    for spec in doc["layers"]:
        W = np.array(spec["weights"], dtype=np.float64).reshape(spec["rows"], spec["cols"])
        b = np.array(spec["bias"], dtype=np.float64)
        layers.append(Layer(W, b, spec["activation"], spec.get("lr_scale", 1.0)))
    return Network(layers)
