"""Feedforward network with dense layers and an optional first strided
1-D convolution, backed by a single flat float64 parameter vector.

The convolution exists for measurement-independent inputs: with stride equal
to kernel width it scans disjoint (projector descriptor, probability) slots,
so features of one slot never mix with its neighbours. Gradients are exact
(MAE subgradient 0 at zero residual) and accumulate in a fixed order, which
keeps training bit-reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "sigmoid", "linear")


@dataclass(frozen=True)
class DenseSpec:
    width: int
    activation: str = "relu"


@dataclass(frozen=True)
class Conv1dSpec:
    kernel_width: int
    stride: int
    channels: int
    activation: str = "relu"


@dataclass(frozen=True)
class NetworkSpec:
    """Layer chain; conv1d may appear only as the first layer and the final
    layer must be dense with width 1 or 3."""

    input_width: int
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_width < 1:
            raise ValueError("input_width must be positive")
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for pos, layer in enumerate(self.layers):
            if isinstance(layer, Conv1dSpec):
                if pos != 0:
                    raise ValueError("conv1d is only supported as the first layer")
                if layer.kernel_width < 1 or layer.stride < 1 or layer.channels < 1:
                    raise ValueError("conv1d dimensions must be positive")
            elif isinstance(layer, DenseSpec):
                if layer.width < 1:
                    raise ValueError("dense width must be positive")
            else:
                raise ValueError(f"unknown layer spec {layer!r}")
            if layer.activation not in ACTIVATIONS:
                raise ValueError(f"unknown activation {layer.activation!r}")
        if not isinstance(self.layers[-1], DenseSpec) or self.layers[-1].width not in (1, 3):
            raise ValueError("final layer must be dense with width 1 or 3")
        widths = self.layer_widths()
        if any(w < 1 for w in widths):
            raise ValueError(f"layer widths do not chain: {widths}")

    def layer_widths(self) -> list:
        """Output width after each layer (conv output is flattened)."""
        widths = []
        current = self.input_width
        for layer in self.layers:
            if isinstance(layer, Conv1dSpec):
                n_windows = conv_window_count(current, layer.kernel_width, layer.stride)
                current = n_windows * layer.channels
            else:
                current = layer.width
            widths.append(current)
        return widths

    @property
    def output_width(self) -> int:
        return self.layers[-1].width

    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in _shape_dummies(self))

    def to_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, Conv1dSpec):
                layers.append(
                    {
                        "type": "conv1d",
                        "kernel_width": layer.kernel_width,
                        "stride": layer.stride,
                        "channels": layer.channels,
                        "activation": layer.activation,
                    }
                )
            else:
                layers.append({"type": "dense", "width": layer.width, "activation": layer.activation})
        return {"input_width": self.input_width, "layers": layers}

    @staticmethod
    def from_dict(data: dict) -> "NetworkSpec":
        layers = []
        for entry in data["layers"]:
            if entry["type"] == "conv1d":
                layers.append(
                    Conv1dSpec(
                        kernel_width=int(entry["kernel_width"]),
                        stride=int(entry["stride"]),
                        channels=int(entry["channels"]),
                        activation=entry["activation"],
                    )
                )
            elif entry["type"] == "dense":
                layers.append(DenseSpec(width=int(entry["width"]), activation=entry["activation"]))
            else:
                raise ValueError(f"unknown layer type {entry['type']!r}")
        return NetworkSpec(input_width=int(data["input_width"]), layers=tuple(layers))


def conv_window_count(input_width: int, kernel: int, stride: int) -> int:
    if input_width < kernel:
        raise ValueError(f"input width {input_width} shorter than kernel {kernel}")
    return (input_width - kernel) // stride + 1


def _shape_dummies(spec: NetworkSpec):
    """(W, b) shape templates per layer, cheapest way to share the layout."""
    shapes = []
    current = spec.input_width
    for layer in spec.layers:
        if isinstance(layer, Conv1dSpec):
            shapes.append(
                (np.empty((layer.channels, layer.kernel_width)), np.empty(layer.channels))
            )
            current = conv_window_count(current, layer.kernel_width, layer.stride) * layer.channels
        else:
            shapes.append((np.empty((layer.width, current)), np.empty(layer.width)))
            current = layer.width
    return shapes


@dataclass
class NetworkModel:
    """Network spec plus its flat parameter vector and provenance metadata."""

    spec: NetworkSpec
    theta: np.ndarray
    rng_seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        expected = self.spec.parameter_count()
        if self.theta.shape != (expected,):
            raise ValueError(f"theta has {self.theta.shape}, spec needs ({expected},)")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta contains non-finite values")
        self._views = _parameter_views(self.spec, self.theta)

    def parameter_views(self):
        """Per-layer (W, b) views into the flat vector (no copies)."""
        return self._views

    def copy(self) -> "NetworkModel":
        return NetworkModel(
            spec=self.spec, theta=self.theta.copy(), rng_seed=self.rng_seed, meta=dict(self.meta)
        )


def _parameter_views(spec: NetworkSpec, theta: np.ndarray):
    views = []
    offset = 0
    for w_t, b_t in _shape_dummies(spec):
        w = theta[offset : offset + w_t.size].reshape(w_t.shape)
        offset += w_t.size
        b = theta[offset : offset + b_t.size]
        offset += b_t.size
        views.append((w, b))
    return views


def initialize_model(spec: NetworkSpec, seed: int, meta: dict | None = None) -> NetworkModel:
    """Scaled uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    rng = np.random.default_rng(int(seed))
    theta = np.zeros(spec.parameter_count(), dtype=np.float64)
    model = NetworkModel(spec=spec, theta=theta, rng_seed=int(seed), meta=dict(meta or {}))
    for (w, b), layer in zip(model.parameter_views(), spec.layers):
        fan_in = layer.kernel_width if isinstance(layer, Conv1dSpec) else w.shape[1]
        limit = 1.0 / np.sqrt(fan_in)
        w[...] = rng.uniform(-limit, limit, size=w.shape)
        b[...] = rng.uniform(-limit, limit, size=b.shape)
    return model


def _activate(z: np.ndarray, name: str) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _activation_grad(z: np.ndarray, out: np.ndarray, name: str) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "sigmoid":
        return out * (1.0 - out)
    return np.ones_like(z)


def _conv_windows(x: np.ndarray, layer: Conv1dSpec) -> np.ndarray:
    n_win = conv_window_count(x.shape[1], layer.kernel_width, layer.stride)
    idx = np.arange(n_win)[:, None] * layer.stride + np.arange(layer.kernel_width)[None, :]
    return x[:, idx]  # (batch, n_win, kernel)


def _forward_cached(model: NetworkModel, x: np.ndarray):
    """Forward pass keeping per-layer inputs, pre-activations, and outputs."""
    cache = []
    h = x
    for (w, b), layer in zip(model.parameter_views(), model.spec.layers):
        if isinstance(layer, Conv1dSpec):
            windows = _conv_windows(h, layer)
            z = np.einsum("bwk,ck->bwc", windows, w) + b
            out = _activate(z, layer.activation)
            cache.append((h, windows, z, out, layer))
            h = out.reshape(out.shape[0], -1)
        else:
            z = h @ w.T + b
            out = _activate(z, layer.activation)
            cache.append((h, None, z, out, layer))
            h = out
    return h, cache


def forward(model: NetworkModel, inputs) -> np.ndarray:
    """Network output for a single input vector or a batch (rows)."""
    x = np.asarray(inputs, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.spec.input_width:
        raise ValueError(f"input width {x.shape[1]} does not match spec {model.spec.input_width}")
    h = x
    for (w, b), layer in zip(model.parameter_views(), model.spec.layers):
        if isinstance(layer, Conv1dSpec):
            z = np.einsum("bwk,ck->bwc", _conv_windows(h, layer), w) + b
            h = _activate(z, layer.activation).reshape(h.shape[0], -1)
        else:
            h = _activate(h @ w.T + b, layer.activation)
    return h[0] if single else h


def mae_loss(pred, truth) -> float:
    """Mean absolute difference over all components and samples."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("empty batch")
    return float(np.mean(np.abs(p - t)))


def backward(model: NetworkModel, inputs, targets):
    """Gradient of the MAE loss with respect to the flat parameter vector.

    Returns (gradient, loss). The MAE subgradient at zero residual is 0.
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if y.ndim == 1:
        y = y[None, :] if model.spec.output_width > 1 else y[:, None]
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if x.shape[1] != model.spec.input_width:
        raise ValueError(f"input width {x.shape[1]} does not match spec {model.spec.input_width}")
    if y.shape != (x.shape[0], model.spec.output_width):
        raise ValueError(f"target shape {y.shape} does not match batch")

    pred, cache = _forward_cached(model, x)
    loss = float(np.mean(np.abs(pred - y)))

    grad = np.zeros_like(model.theta)
    grad_views = _parameter_views(model.spec, grad)

    delta = np.sign(pred - y) / pred.size
    for (g_w, g_b), (w, _), (h_in, windows, z, out, layer) in zip(
        reversed(grad_views), reversed(model.parameter_views()), reversed(cache)
    ):
        if isinstance(layer, Conv1dSpec):
            delta = delta.reshape(z.shape) * _activation_grad(z, out, layer.activation)
            g_w[...] = np.einsum("bwc,bwk->ck", delta, windows)
            g_b[...] = delta.sum(axis=(0, 1))
            d_windows = np.einsum("bwc,ck->bwk", delta, w)
            d_x = np.zeros_like(h_in)
            n_win = z.shape[1]
            if layer.stride == layer.kernel_width:
                # disjoint windows tile the input; plain reshape scatter
                span = n_win * layer.kernel_width
                d_x[:, :span] = d_windows.reshape(d_windows.shape[0], span)
            else:
                idx = np.arange(n_win)[:, None] * layer.stride + np.arange(layer.kernel_width)[None, :]
                np.add.at(d_x, (slice(None), idx), d_windows)
            delta = d_x
        else:
            delta = delta * _activation_grad(z, out, layer.activation)
            g_w[...] = delta.T @ h_in
            g_b[...] = delta.sum(axis=0)
            delta = delta @ w
    return grad, loss
