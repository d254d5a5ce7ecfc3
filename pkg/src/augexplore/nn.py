"""Small numpy neural-network stack with hand-written backward passes.

Everything is float64. A network is a :class:`Sequential` of layers; the
first layer may be a :class:`Branches` block that runs one sub-network per
input and concatenates their features (dual encoders for observation and
statistics inputs).

Checkpoint layout (little-endian)::

    8 bytes   magic b"AXNNCKPT"
    uint32    number of tensors
    per tensor:
      uint32  name length, then the UTF-8 name
      uint32  ndim, then ndim x uint32 dimensions
      float64 data, row-major
"""
from __future__ import annotations

import copy
import struct
from typing import Callable, Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeError(ValueError):
    pass


class BackwardError(RuntimeError):
    """backward() called without a cached forward pass."""


def orthogonal(shape: tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols])


class Layer:
    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def parameters(self, prefix: str = "") -> Iterator[tuple[str, np.ndarray, np.ndarray]]:
        return iter(())

    def __call__(self, x):
        return self.forward(x)


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator | None = None,
                 gain: float = np.sqrt(2.0)):
        rng = rng or np.random.default_rng(0)
        self.W = orthogonal((n_in, n_out), gain, rng)
        self.b = np.zeros(n_out)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._x = None

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.W.shape[0]:
            raise ShapeError(f"Dense expects (B, {self.W.shape[0]}), got {x.shape}")
        self._x = x
        return x @ self.W + self.b

    def backward(self, grad):
        if self._x is None:
            raise BackwardError("Dense.backward before forward")
        self.dW += self._x.T @ grad
        self.db += grad.sum(axis=0)
        return grad @ self.W.T

    def parameters(self, prefix=""):
        yield prefix + "W", self.W, self.dW
        yield prefix + "b", self.b, self.db


class Conv2d(Layer):
    """Square-kernel 2-D convolution over (B, C, H, W) via im2col."""

    def __init__(self, in_ch: int, out_ch: int, k: int = 3, stride: int = 1, pad: int = 1,
                 rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        fan_in = in_ch * k * k
        bound = np.sqrt(6.0 / fan_in)
        self.W = rng.uniform(-bound, bound, size=(out_ch, in_ch, k, k))
        self.b = np.zeros(out_ch)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self.k, self.stride, self.pad = k, stride, pad
        self._cols = None

    def out_hw(self, h: int, w: int) -> tuple[int, int]:
        k, s, p = self.k, self.stride, self.pad
        return (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1

    def forward(self, x):
        out_ch, in_ch, k, _ = self.W.shape
        if x.ndim != 4 or x.shape[1] != in_ch:
            raise ShapeError(f"Conv2d expects (B, {in_ch}, H, W), got {x.shape}")
        B, _, H, W = x.shape
        p, s = self.pad, self.stride
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        Ho, Wo = self.out_hw(H, W)
        win = sliding_window_view(xp, (k, k), axis=(2, 3))[:, :, ::s, ::s][:, :, :Ho, :Wo]
        cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(B * Ho * Wo, in_ch * k * k)
        self._cols = cols
        self._in_shape = x.shape
        out = cols @ self.W.reshape(out_ch, -1).T + self.b
        return out.reshape(B, Ho, Wo, out_ch).transpose(0, 3, 1, 2)

    def backward(self, grad):
        if self._cols is None:
            raise BackwardError("Conv2d.backward before forward")
        out_ch, in_ch, k, _ = self.W.shape
        B, _, H, W = self._in_shape
        p, s = self.pad, self.stride
        Ho, Wo = grad.shape[2], grad.shape[3]
        g = grad.transpose(0, 2, 3, 1).reshape(-1, out_ch)
        self.dW += (g.T @ self._cols).reshape(self.W.shape)
        self.db += g.sum(axis=0)
        dcols = (g @ self.W.reshape(out_ch, -1)).reshape(B, Ho, Wo, in_ch, k, k)
        dxp = np.zeros((B, in_ch, H + 2 * p, W + 2 * p))
        for i in range(k):
            for j in range(k):
                dxp[:, :, i:i + s * Ho:s, j:j + s * Wo:s] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        return dxp[:, :, p:p + H, p:p + W] if p else dxp

    def parameters(self, prefix=""):
        yield prefix + "W", self.W, self.dW
        yield prefix + "b", self.b, self.db


class ReLU(Layer):
    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad):
        if self._mask is None:
            raise BackwardError("ReLU.backward before forward")
        return grad * self._mask


class Flatten(Layer):
    def __init__(self):
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        if self._shape is None:
            raise BackwardError("Flatten.backward before forward")
        return grad.reshape(self._shape)


class Sequential(Layer):
    def __init__(self, layers: Sequence[Layer]):
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self, prefix=""):
        for i, layer in enumerate(self.layers):
            yield from layer.parameters(f"{prefix}{i}.")

    def zero_grad(self) -> None:
        for _, _, g in self.parameters():
            g[...] = 0.0

    def param_dict(self) -> dict[str, np.ndarray]:
        return {name: p for name, p, _ in self.parameters()}

    def load_param_dict(self, params: dict[str, np.ndarray]) -> None:
        for name, p, _ in self.parameters():
            if params[name].shape != p.shape:
                raise ShapeError(f"{name}: {params[name].shape} vs {p.shape}")
            p[...] = params[name]

    def copy(self) -> "Sequential":
        return copy.deepcopy(self)


class Branches(Layer):
    """Apply one sub-network per input and concatenate outputs on axis 1."""

    def __init__(self, branches: Sequence[Layer]):
        self.branches = list(branches)
        self._widths = None

    def forward(self, xs):
        if not isinstance(xs, (tuple, list)) or len(xs) != len(self.branches):
            raise ShapeError(f"Branches expects {len(self.branches)} inputs")
        outs = [b.forward(x) for b, x in zip(self.branches, xs)]
        self._widths = [o.shape[1] for o in outs]
        return np.concatenate(outs, axis=1)

    def backward(self, grad):
        if self._widths is None:
            raise BackwardError("Branches.backward before forward")
        splits = np.cumsum(self._widths)[:-1]
        return tuple(b.backward(g) for b, g in zip(self.branches, np.split(grad, splits, axis=1)))

    def parameters(self, prefix=""):
        for i, b in enumerate(self.branches):
            yield from b.parameters(f"{prefix}branch{i}.")


# ---------------------------------------------------------------------------
# optimisers
# ---------------------------------------------------------------------------

def clip_grad_norm(net: Layer, max_norm: float | None) -> float:
    grads = [g for _, _, g in net.parameters()]
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if max_norm is not None and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for g in grads:
            g *= scale
    return total


class Optimizer:
    def __init__(self, lr: float, max_grad_norm: float | None = None):
        self.lr = lr
        self.max_grad_norm = max_grad_norm
        self.state: dict[str, dict[str, np.ndarray]] = {}

    def step(self, net: Layer) -> float:
        norm = clip_grad_norm(net, self.max_grad_norm)
        for name, p, g in net.parameters():
            self._update(name, p, g)
        return norm

    def _update(self, name, p, g):
        raise NotImplementedError


class SGD(Optimizer):
    def _update(self, name, p, g):
        p -= self.lr * g


class RMSProp(Optimizer):
    """torch-style RMSprop: ``v = a v + (1-a) g^2``, ``p -= lr g / (sqrt(v) + eps)``."""

    def __init__(self, lr, alpha=0.99, eps=1e-5, max_grad_norm=None):
        super().__init__(lr, max_grad_norm)
        self.alpha, self.eps = alpha, eps

    def _update(self, name, p, g):
        st = self.state.setdefault(name, {"v": np.zeros_like(p)})
        st["v"] *= self.alpha
        st["v"] += (1.0 - self.alpha) * g * g
        p -= self.lr * g / (np.sqrt(st["v"]) + self.eps)


class Adam(Optimizer):
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8, max_grad_norm=None):
        super().__init__(lr, max_grad_norm)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps

    def _update(self, name, p, g):
        st = self.state.setdefault(name, {"m": np.zeros_like(p), "v": np.zeros_like(p), "t": 0})
        st["t"] += 1
        st["m"] = self.beta1 * st["m"] + (1 - self.beta1) * g
        st["v"] = self.beta2 * st["v"] + (1 - self.beta2) * g * g
        m_hat = st["m"] / (1 - self.beta1 ** st["t"])
        v_hat = st["v"] / (1 - self.beta2 ** st["t"])
        p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind: str, lr: float, max_grad_norm: float | None = None, **kw) -> Optimizer:
    if kind == "sgd":
        return SGD(lr, max_grad_norm)
    if kind == "rmsprop":
        return RMSProp(lr, max_grad_norm=max_grad_norm, **kw)
    if kind == "adam":
        return Adam(lr, max_grad_norm=max_grad_norm, **kw)
    raise ValueError(f"unknown optimizer {kind!r}")


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

def grad_check(net: Sequential, inputs, loss_fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
               eps: float = 1e-5, floor: float = 1e-6) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    ``loss_fn(output)`` returns ``(loss, dloss/doutput)``. The relative
    error of one entry is ``|a - n| / max(|a|, |n|, floor)``.
    """
    net.zero_grad()
    _, g_out = loss_fn(net.forward(inputs))
    net.backward(g_out)
    worst = 0.0
    for _, p, g in net.parameters():
        analytic = g.copy()
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + eps
            lp, _ = loss_fn(net.forward(inputs))
            p[idx] = old - eps
            lm, _ = loss_fn(net.forward(inputs))
            p[idx] = old
            num = (lp - lm) / (2 * eps)
            a = analytic[idx]
            worst = max(worst, abs(a - num) / max(abs(a), abs(num), floor))
    return worst


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

_MAGIC = b"AXNNCKPT"


def save_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            arr = np.asarray(arr, dtype="<f8")
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr).tobytes())


def load_tensors(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != _MAGIC:
        raise ValueError("not a checkpoint file")
    pos = 8
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    out = {}
    for _ in range(count):
        (ln,) = struct.unpack_from("<I", data, pos)
        pos += 4
        name = data[pos:pos + ln].decode("utf-8")
        pos += ln
        (ndim,) = struct.unpack_from("<I", data, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        out[name] = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape).copy()
        pos += 8 * size
    return out
