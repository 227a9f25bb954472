"""Dense tanh networks with hand-written reverse-mode gradients and Adam.

No autodiff framework: the backward pass is the chain rule written out over
the layer caches, which keeps gradients exact, fast for full-batch work, and
easy to check against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .integrate import format_float
from .rng import Rng

MODEL_FORMAT_LINE = "eulerfit-mlp 1"


@dataclass(frozen=True)
class Mlp:
    """Feedforward net: affine -> tanh per hidden layer, affine output.

    weights[l] has shape (layer_sizes[l+1], layer_sizes[l]) and biases[l]
    matches its fan-out; everything is float64.
    """

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2 or any(n < 1 for n in sizes):
            raise ValueError(f"layer_sizes needs >= 2 entries, all >= 1, got {sizes}")
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        bs = tuple(np.asarray(b, dtype=float) for b in self.biases)
        if len(ws) != len(sizes) - 1 or len(bs) != len(sizes) - 1:
            raise ValueError("need one weight matrix and one bias vector per layer")
        for l, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(
                    f"layer {l}: expected W{(sizes[l + 1], sizes[l])} and "
                    f"b({sizes[l + 1]},), got W{w.shape} and b{b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: parameters must be finite")
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def d_in(self) -> int:
        return self.layer_sizes[0]

    @property
    def d_out(self) -> int:
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class Gradients:
    """Loss gradients, shape-congruent with the Mlp that produced them."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases):
            raise ValueError("need one weight gradient and one bias gradient per layer")
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "biases", tuple(self.biases))


@dataclass(frozen=True)
class AdamState:
    """First/second-moment accumulators plus optimizer hyperparameters."""

    m_weights: tuple[np.ndarray, ...]
    m_biases: tuple[np.ndarray, ...]
    v_weights: tuple[np.ndarray, ...]
    v_biases: tuple[np.ndarray, ...]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.step < 0:
            raise ValueError("step counter must be >= 0")
        for group in (self.m_weights, self.m_biases, self.v_weights, self.v_biases):
            for arr in group:
                if not np.all(np.isfinite(arr)):
                    raise ValueError("optimizer moments must be finite")


def parameter_count(net: Mlp) -> int:
    """Total trainable scalars: sum over layers of fan_out*fan_in + fan_out."""
    sizes = net.layer_sizes
    return sum(sizes[l + 1] * sizes[l] + sizes[l + 1] for l in range(len(sizes) - 1))


def mlp_init(layer_sizes, seed: int) -> Mlp:
    """Glorot-uniform weights, zero biases, reproducible from the seed.

    Each layer's weight entries are drawn row-major from
    U[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))], layer by layer.
    """
    sizes = tuple(int(n) for n in layer_sizes)
    if len(sizes) < 2 or any(n < 1 for n in sizes):
        raise ValueError(f"layer_sizes needs >= 2 entries, all >= 1, got {sizes}")
    rng = Rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        w = np.array(
            [rng.uniform_in(-bound, bound) for _ in range(fan_out * fan_in)]
        ).reshape(fan_out, fan_in)
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return Mlp(sizes, tuple(weights), tuple(biases))


def mlp_forward_cached(net: Mlp, X: np.ndarray):
    """Batched forward pass; returns (output, per-layer activation cache).

    X has shape (n, d_in); the cache holds X and every layer's output and is
    what mlp_backward_cached consumes.
    """
    acts = [X]
    a = X
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        a = z if l == last else np.tanh(z)
        acts.append(a)
    return a, acts


def mlp_backward_cached(net: Mlp, acts, upstream: np.ndarray):
    """Reverse-mode pass from a batched upstream gradient (n, d_out).

    Returns (Gradients summed over the batch, gradient w.r.t. the inputs).
    """
    gw: list = [None] * len(net.weights)
    gb: list = [None] * len(net.biases)
    delta = upstream
    for l in range(len(net.weights) - 1, -1, -1):
        gw[l] = delta.T @ acts[l]
        gb[l] = delta.sum(axis=0)
        if l > 0:
            # acts[l] is the tanh output feeding layer l, so 1 - acts[l]^2 is
            # the activation derivative of layer l-1.
            delta = (delta @ net.weights[l]) * (1.0 - acts[l] ** 2)
    gx = delta @ net.weights[0]
    return Gradients(tuple(gw), tuple(gb)), gx


def mlp_forward(net: Mlp, x):
    """Network output for one input vector or an (n, d_in) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != net.d_in:
        raise ValueError(f"input must have {net.d_in} components, got shape {x.shape}")
    out, _ = mlp_forward_cached(net, X)
    return out[0] if single else out


def mlp_backward(net: Mlp, x, upstream):
    """Exact gradients of (upstream . output) w.r.t. all parameters and x."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(upstream, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    G = g[None, :] if single else g
    if X.shape[1] != net.d_in:
        raise ValueError(f"input must have {net.d_in} components, got shape {x.shape}")
    if G.shape != (X.shape[0], net.d_out):
        raise ValueError(f"upstream must have {net.d_out} components per input")
    _, acts = mlp_forward_cached(net, X)
    grads, gx = mlp_backward_cached(net, acts, G)
    return grads, (gx[0] if single else gx)


def adam_init(net: Mlp, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
    """Fresh zero-moment state sized to the network."""
    zw = tuple(np.zeros_like(w) for w in net.weights)
    zb = tuple(np.zeros_like(b) for b in net.biases)
    return AdamState(zw, zb, tuple(np.zeros_like(w) for w in net.weights),
                     tuple(np.zeros_like(b) for b in net.biases),
                     step=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(net: Mlp, grads: Gradients, state: AdamState) -> tuple[Mlp, AdamState]:
    """One Adam update with bias-corrected moments; inputs are left untouched."""
    if len(grads.weights) != len(net.weights):
        raise ValueError("gradient layer count does not match the network")
    for gw, w in zip(grads.weights, net.weights):
        if gw.shape != w.shape:
            raise ValueError(f"weight gradient shape {gw.shape} != {w.shape}")
    for gb, b in zip(grads.biases, net.biases):
        if gb.shape != b.shape:
            raise ValueError(f"bias gradient shape {gb.shape} != {b.shape}")

    t = state.step + 1
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t

    def update(p, g, m, v):
        m1 = state.beta1 * m + (1.0 - state.beta1) * g
        v1 = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        p1 = p - state.lr * (m1 / c1) / (np.sqrt(v1 / c2) + state.eps)
        return p1, m1, v1

    new_w, new_mw, new_vw = [], [], []
    for p, g, m, v in zip(net.weights, grads.weights, state.m_weights, state.v_weights):
        p1, m1, v1 = update(p, g, m, v)
        new_w.append(p1), new_mw.append(m1), new_vw.append(v1)
    new_b, new_mb, new_vb = [], [], []
    for p, g, m, v in zip(net.biases, grads.biases, state.m_biases, state.v_biases):
        p1, m1, v1 = update(p, g, m, v)
        new_b.append(p1), new_mb.append(m1), new_vb.append(v1)

    return (
        Mlp(net.layer_sizes, tuple(new_w), tuple(new_b)),
        AdamState(tuple(new_mw), tuple(new_mb), tuple(new_vw), tuple(new_vb),
                  step=t, lr=state.lr, beta1=state.beta1, beta2=state.beta2,
                  eps=state.eps),
    )


def save_model(net: Mlp, path) -> None:
    """Plain-text parameter dump that round-trips bit-exactly.

    Line 1 is the format version, line 2 the layer sizes; then per layer the
    weight matrix (one line per row, row-major) followed by the bias vector.
    """
    lines = [MODEL_FORMAT_LINE, "layers " + " ".join(str(n) for n in net.layer_sizes)]
    for w, b in zip(net.weights, net.biases):
        for row in w:
            lines.append(" ".join(format_float(x) for x in row))
        lines.append(" ".join(format_float(x) for x in b))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def load_model(path) -> Mlp:
    """Parse a save_model file; raises ValueError on any format mismatch."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != MODEL_FORMAT_LINE:
        raise ValueError(f"{path}: expected format line '{MODEL_FORMAT_LINE}'")
    if len(lines) < 2 or not lines[1].startswith("layers "):
        raise ValueError(f"{path}: missing 'layers' line")
    sizes = tuple(int(tok) for tok in lines[1].split()[1:])
    pos = 2
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        rows = lines[pos:pos + fan_out]
        if len(rows) < fan_out:
            raise ValueError(f"{path}: truncated weight matrix")
        weights.append(np.array([[float(x) for x in row.split()] for row in rows]))
        pos += fan_out
        if pos >= len(lines):
            raise ValueError(f"{path}: truncated bias vector")
        biases.append(np.array([float(x) for x in lines[pos].split()]))
        pos += 1
    if any(lines[pos:]):
        raise ValueError(f"{path}: trailing content after parameters")
    return Mlp(sizes, tuple(weights), tuple(biases))
