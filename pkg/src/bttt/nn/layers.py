"""Minimal numpy layers with hand-written backprop.

Only what the fixed policy/value architecture needs: Conv2D (no bias, 'same'
padding with the asymmetric even-kernel convention), BatchNorm2D, Dense,
LeakyReLU.  Layers cache forward intermediates; backward(dy) returns dx and
stores parameter gradients on the layer.
"""
from __future__ import annotations

import numpy as np


class ShapeMismatch(Exception):
    pass


def he_uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def same_padding(kernel: int) -> tuple[int, int, int, int]:
    """(top, bottom, left, right). Even kernels pad one less before than after."""
    lo = (kernel - 1) // 2
    hi = kernel - 1 - lo
    return lo, hi, lo, hi


class Conv2D:
    """Bias-free 2D convolution (a BatchNorm always follows)."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int, rng: np.random.Generator, dtype):
        self.w = he_uniform(rng, (out_ch, in_ch, kernel, kernel), in_ch * kernel * kernel, dtype)
        self.pad = same_padding(kernel)
        self.dw = None
        self._cache = None
        self._gather: tuple[tuple, np.ndarray] | None = None

    def _gather_index(self, x_shape) -> np.ndarray:
        """im2col gather indices into the flat (C*H*W + 1) input, where the
        trailing slot is a virtual zero (out-of-bounds taps)."""
        if self._gather is not None and self._gather[0] == x_shape:
            return self._gather[1]
        _, c, h, w = x_shape
        _, _, kh, kw = self.w.shape
        pt, _, pl, _ = self.pad
        zero_slot = c * h * w
        idx = np.full((h * w, c * kh * kw), zero_slot, dtype=np.intp)
        for i in range(h):
            for j in range(w):
                for ch in range(c):
                    for ki in range(kh):
                        for kj in range(kw):
                            r, s = i + ki - pt, j + kj - pl
                            if 0 <= r < h and 0 <= s < w:
                                idx[i * w + j, ch * kh * kw + ki * kw + kj] = (ch * h + r) * w + s
        self._gather = (x_shape, idx)
        return idx

    def forward(self, x: np.ndarray) -> np.ndarray:
        f, c, kh, kw = self.w.shape
        if x.shape[1] != c:
            raise ShapeMismatch(f"conv expects {c} input channels, got {x.shape[1]}")
        n, _, h, w = x.shape
        idx = self._gather_index(x.shape)
        x_ext = np.empty((n, c * h * w + 1), dtype=x.dtype)
        x_ext[:, :-1] = x.reshape(n, -1)
        x_ext[:, -1] = 0
        cols = x_ext[:, idx]  # (N, H*W, C*kh*kw)
        y = cols @ self.w.reshape(f, -1).T
        self._cache = (cols, x.shape)
        return y.transpose(0, 2, 1).reshape(n, f, h, w)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        cols, x_shape = self._cache
        f, c, kh, kw = self.w.shape
        n, _, h, w = x_shape
        dyf = dy.reshape(n, f, h * w).transpose(0, 2, 1)
        self.dw = np.einsum("npk,npf->fk", cols, dyf).reshape(self.w.shape)
        dcols = (dyf @ self.w.reshape(f, -1)).reshape(n, h, w, c, kh, kw)
        pt, pb, pl, pr = self.pad
        dxp = np.zeros((n, c, h + pt + pb, w + pl + pr), dtype=dy.dtype)
        for i in range(kh):
            for j in range(kw):
                dxp[:, :, i:i + h, j:j + w] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        return dxp[:, :, pt:pt + h, pl:pl + w]


class BatchNorm2D:
    def __init__(self, channels: int, epsilon: float, momentum: float, dtype):
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.epsilon = epsilon
        self.momentum = momentum
        self.dgamma = None
        self.dbeta = None
        self._cache = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        g = self.gamma[:, None, None]
        b = self.beta[:, None, None]
        if not train:
            inv = 1.0 / np.sqrt(self.running_var + self.epsilon)
            return (x - self.running_mean[:, None, None]) * inv[:, None, None] * g + b
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        inv_std = 1.0 / np.sqrt(var + self.epsilon)
        xhat = (x - mean[:, None, None]) * inv_std[:, None, None]
        self.running_mean = (self.momentum * self.running_mean + (1 - self.momentum) * mean).astype(x.dtype)
        self.running_var = (self.momentum * self.running_var + (1 - self.momentum) * var).astype(x.dtype)
        self._cache = (xhat, inv_std)
        return g * xhat + b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        xhat, inv_std = self._cache
        m = dy.shape[0] * dy.shape[2] * dy.shape[3]
        self.dgamma = (dy * xhat).sum(axis=(0, 2, 3))
        self.dbeta = dy.sum(axis=(0, 2, 3))
        dxhat = dy * self.gamma[:, None, None]
        dx = (dxhat - dxhat.mean(axis=(0, 2, 3), keepdims=True)
              - xhat * (dxhat * xhat).mean(axis=(0, 2, 3), keepdims=True))
        return dx * inv_std[:, None, None]


class Dense:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype):
        self.w = he_uniform(rng, (in_dim, out_dim), in_dim, dtype)
        self.b = np.zeros(out_dim, dtype=dtype)
        self.dw = None
        self.db = None
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != self.w.shape[0]:
            raise ShapeMismatch(f"dense expects {self.w.shape[0]} inputs, got {x.shape[1]}")
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        self.dw = self._x.T @ dy
        self.db = dy.sum(axis=0)
        return dy @ self.w.T


class LeakyReLU:
    def __init__(self, slope: float):
        self.slope = slope
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, self.slope * x)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return np.where(self._mask, dy, self.slope * dy)
