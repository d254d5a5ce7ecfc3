"""Network builders and input preparation for observation/statistics pairs."""
from __future__ import annotations

import numpy as np

from ..nn import Branches, Conv2d, Dense, Flatten, ReLU, Sequential
from .config import ArchConfig


def _as_channels(shape: tuple[int, ...]) -> tuple[int, int, int]:
    return (1, *shape) if len(shape) == 2 else tuple(shape)


def _conv_trunk(in_shape, arch: ArchConfig, rng) -> tuple[list, int]:
    c, h, w = in_shape
    layers = []
    for out_ch, stride in zip(arch.channels, arch.strides):
        conv = Conv2d(c, out_ch, k=3, stride=stride, pad=1, rng=rng)
        layers += [conv, ReLU()]
        h, w = conv.out_hw(h, w)
        c = out_ch
    layers.append(Flatten())
    return layers, c * h * w


def _stats_is_grid(obs_shape, stats_shape) -> bool:
    return len(stats_shape) == 2 and tuple(stats_shape) == tuple(_as_channels(obs_shape)[1:])


class InputAdapter:
    """Turns batched (obs, stats) arrays into whatever the network consumes."""

    def __init__(self, obs_shape, stats_shape, arch: ArchConfig):
        self.obs_shape = tuple(obs_shape)
        self.stats_shape = tuple(stats_shape)
        self.has_stats = int(np.prod(stats_shape)) > 0
        self.arch = arch
        if arch.kind == "mlp":
            self.mode = "flat"
        elif not self.has_stats:
            self.mode = "image"
        elif arch.fusion == "stack" and _stats_is_grid(obs_shape, stats_shape):
            self.mode = "stack"
        else:
            self.mode = "dual"

    def __call__(self, obs: np.ndarray, stats: np.ndarray):
        b = obs.shape[0]
        obs = obs.astype(np.float64, copy=False)
        if self.mode == "flat":
            parts = [obs.reshape(b, -1)]
            if self.has_stats:
                parts.append(stats.reshape(b, -1))
            return np.concatenate(parts, axis=1) if len(parts) > 1 else parts[0]
        img = obs.reshape(b, *_as_channels(self.obs_shape))
        if self.mode == "image":
            return img
        if self.mode == "stack":
            return np.concatenate([img, stats.reshape(b, 1, *self.stats_shape)], axis=1)
        s = stats.reshape(b, 1, *self.stats_shape) if len(self.stats_shape) == 2 else stats.reshape(b, -1)
        return (img, s)


def build_network(obs_shape, stats_shape, n_out: int, arch: ArchConfig,
                  rng: np.random.Generator, head_gain: float = 1.0):
    """Return ``(net, adapter)`` for the given observation/statistics shapes."""
    adapter = InputAdapter(obs_shape, stats_shape, arch)
    obs_c = _as_channels(obs_shape)
    if adapter.mode == "flat":
        n_in = int(np.prod(obs_shape)) + (int(np.prod(stats_shape)) if adapter.has_stats else 0)
        layers = [Dense(n_in, arch.hidden, rng), ReLU(), Dense(arch.hidden, arch.hidden, rng), ReLU()]
        width = arch.hidden
    elif adapter.mode in ("image", "stack"):
        c = obs_c[0] + (1 if adapter.mode == "stack" else 0)
        trunk, flat = _conv_trunk((c, *obs_c[1:]), arch, rng)
        layers = trunk + [Dense(flat, arch.hidden, rng), ReLU()]
        width = arch.hidden
    else:
        trunk, flat = _conv_trunk(obs_c, arch, rng)
        obs_branch = Sequential(trunk + [Dense(flat, arch.hidden, rng), ReLU()])
        if len(stats_shape) == 2:
            strunk, sflat = _conv_trunk((1, *stats_shape), arch, rng)
            stat_branch = Sequential(strunk + [Dense(sflat, arch.hidden, rng), ReLU()])
        else:
            n = int(np.prod(stats_shape))
            stat_branch = Sequential([Dense(n, arch.hidden, rng), ReLU()])
        layers = [Branches([obs_branch, stat_branch])]
        width = 2 * arch.hidden
    layers.append(Dense(width, n_out, rng, gain=head_gain))
    return Sequential(layers), adapter
