"""The residual policy/value network and its training loss.

Body: Conv2D(filters, 4x4 'same') + BN + LeakyReLU, then `residual_blocks`
residual blocks of two such conv blocks with a skip connection.  Value head:
1x1 conv block, flatten, dense(value_hidden), LeakyReLU, dense(1), tanh.
Policy head: 1x1 conv block (2 filters), flatten, dense(49) logits.

Policy probabilities are always produced through a legal-move mask: softmax
over legal squares only, illegal entries exactly 0.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .layers import BatchNorm2D, Conv2D, Dense, LeakyReLU, ShapeMismatch


@dataclass
class NetworkConfig:
    input_planes: int = 3
    board_side: int = 7
    filters: int = 75
    residual_blocks: int = 5
    conv_kernel: int = 4
    value_hidden: int = 20
    policy_out: int = 49
    policy_filters: int = 2
    leaky_slope: float = 0.01
    bn_epsilon: float = 1e-5
    bn_momentum: float = 0.9
    dtype: str = "float32"

    def __post_init__(self):
        if self.policy_out != self.board_side ** 2:
            raise ValueError("policy_out must equal board_side**2")


class _ConvBlock:
    """Conv2D + BatchNorm + LeakyReLU."""

    def __init__(self, name, in_ch, out_ch, kernel, cfg: NetworkConfig, rng, dtype):
        self.name = name
        self.conv = Conv2D(in_ch, out_ch, kernel, rng, dtype)
        self.bn = BatchNorm2D(out_ch, cfg.bn_epsilon, cfg.bn_momentum, dtype)
        self.act = LeakyReLU(cfg.leaky_slope)

    def forward(self, x, train):
        return self.act.forward(self.bn.forward(self.conv.forward(x), train))

    def backward(self, dy):
        return self.conv.backward(self.bn.backward(self.act.backward(dy)))

    def params(self):
        return {
            f"{self.name}.conv.w": self.conv.w,
            f"{self.name}.bn.gamma": self.bn.gamma,
            f"{self.name}.bn.beta": self.bn.beta,
        }

    def grads(self):
        return {
            f"{self.name}.conv.w": self.conv.dw,
            f"{self.name}.bn.gamma": self.bn.dgamma,
            f"{self.name}.bn.beta": self.bn.dbeta,
        }

    def state(self):
        return {
            f"{self.name}.bn.running_mean": self.bn.running_mean,
            f"{self.name}.bn.running_var": self.bn.running_var,
        }


class Network:
    """Parameter container + forward/backward for the fixed architecture."""

    def __init__(self, config: NetworkConfig | None = None, seed: int = 0):
        cfg = self.config = config or NetworkConfig()
        dtype = np.dtype(cfg.dtype)
        rng = np.random.default_rng(seed)
        side2 = cfg.board_side ** 2
        self.blocks = [_ConvBlock("in", cfg.input_planes, cfg.filters, cfg.conv_kernel, cfg, rng, dtype)]
        self.res = []
        for i in range(cfg.residual_blocks):
            self.res.append((
                _ConvBlock(f"res{i}.a", cfg.filters, cfg.filters, cfg.conv_kernel, cfg, rng, dtype),
                _ConvBlock(f"res{i}.b", cfg.filters, cfg.filters, cfg.conv_kernel, cfg, rng, dtype),
            ))
        self.value_conv = _ConvBlock("vh", cfg.filters, 1, 1, cfg, rng, dtype)
        self.value_fc1 = Dense(side2, cfg.value_hidden, rng, dtype)
        self.value_act = LeakyReLU(cfg.leaky_slope)
        self.value_fc2 = Dense(cfg.value_hidden, 1, rng, dtype)
        self.policy_conv = _ConvBlock("ph", cfg.filters, cfg.policy_filters, 1, cfg, rng, dtype)
        self.policy_fc = Dense(cfg.policy_filters * side2, cfg.policy_out, rng, dtype)
        self._cache = None

    def _conv_blocks(self):
        yield self.blocks[0]
        for a, b in self.res:
            yield a
            yield b
        yield self.value_conv
        yield self.policy_conv

    def forward(self, planes: np.ndarray, train: bool = False):
        """planes (N,3,7,7) -> (policy logits (N,49), value (N,))."""
        cfg = self.config
        x = np.ascontiguousarray(planes, dtype=np.dtype(cfg.dtype))
        if x.ndim != 4 or x.shape[1:] != (cfg.input_planes, cfg.board_side, cfg.board_side):
            raise ShapeMismatch(f"expected (N,{cfg.input_planes},{cfg.board_side},{cfg.board_side}), got {x.shape}")
        n = x.shape[0]
        x = self.blocks[0].forward(x, train)
        for a, b in self.res:
            x = x + b.forward(a.forward(x, train), train)
        vh = self.value_conv.forward(x, train).reshape(n, -1)
        vh = self.value_act.forward(self.value_fc1.forward(vh))
        v_pre = self.value_fc2.forward(vh)[:, 0]
        v = np.tanh(v_pre)
        ph = self.policy_conv.forward(x, train).reshape(n, -1)
        logits = self.policy_fc.forward(ph)
        self._cache = (n, v, x.shape)
        return logits, v

    def backward(self, dlogits: np.ndarray, dv: np.ndarray) -> None:
        """Accumulates parameter gradients for the last train-mode forward."""
        n, v, body_shape = self._cache
        dph = self.policy_fc.backward(dlogits)
        dx = self.policy_conv.backward(dph.reshape(n, self.config.policy_filters,
                                                   self.config.board_side, self.config.board_side))
        dv_pre = dv * (1.0 - v * v)
        dvh = self.value_fc1.backward(self.value_act.backward(self.value_fc2.backward(dv_pre[:, None])))
        dx = dx + self.value_conv.backward(dvh.reshape(n, 1, self.config.board_side, self.config.board_side))
        for a, b in reversed(self.res):
            dx = dx + a.backward(b.backward(dx))
        self.blocks[0].backward(dx)

    # -- parameter access ---------------------------------------------------

    def params(self) -> dict[str, np.ndarray]:
        out = {}
        for blk in self._conv_blocks():
            out.update(blk.params())
        out.update({
            "vh.fc1.w": self.value_fc1.w, "vh.fc1.b": self.value_fc1.b,
            "vh.fc2.w": self.value_fc2.w, "vh.fc2.b": self.value_fc2.b,
            "ph.fc.w": self.policy_fc.w, "ph.fc.b": self.policy_fc.b,
        })
        return out

    def grads(self) -> dict[str, np.ndarray]:
        out = {}
        for blk in self._conv_blocks():
            out.update(blk.grads())
        out.update({
            "vh.fc1.w": self.value_fc1.dw, "vh.fc1.b": self.value_fc1.db,
            "vh.fc2.w": self.value_fc2.dw, "vh.fc2.b": self.value_fc2.db,
            "ph.fc.w": self.policy_fc.dw, "ph.fc.b": self.policy_fc.db,
        })
        return out

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Parameters plus batch-norm running statistics (checkpoint payload)."""
        out = dict(self.params())
        for blk in self._conv_blocks():
            out.update(blk.state())
        return out

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        targets = self.state_arrays()
        missing = set(targets) - set(arrays)
        if missing:
            raise ShapeMismatch(f"checkpoint missing tensors: {sorted(missing)}")
        for name, target in targets.items():
            src = arrays[name]
            if src.shape != target.shape:
                raise ShapeMismatch(f"tensor {name}: checkpoint {src.shape} vs model {target.shape}")
            target[...] = src.astype(target.dtype)

    def weight_names(self) -> list[str]:
        """Conv/dense weight matrices: the set covered by L2 regularization."""
        return [n for n in self.params() if n.endswith(".w")]

    # -- inference ----------------------------------------------------------

    def predict(self, planes: np.ndarray, legal_mask: np.ndarray):
        """Single state -> (masked policy over 49, value scalar).  Eval mode."""
        logits, v = self.forward(planes[None], train=False)
        p = masked_softmax(logits, legal_mask[None].astype(bool))[0]
        return p, float(v[0])


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over mask-true entries; mask-false entries are exactly 0."""
    neg = np.finfo(logits.dtype).min / 4
    z = np.where(mask, logits, neg)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.where(mask, np.exp(z), 0.0)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grads(net: Network, planes, pis, zs, masks, reg_c: float):
    """Eq-style training loss (z-v)^2 - pi^T log p + c*||w||^2 and its grads.

    Value and policy terms are averaged over the batch; the L2 term covers
    conv/dense weights only.  Returns (metrics dict, grads dict).
    """
    n = planes.shape[0]
    logits, v = net.forward(planes, train=True)
    masks = masks.astype(bool)
    p = masked_softmax(logits, masks)
    neg = np.finfo(logits.dtype).min / 4
    logp = np.where(masks, logits, neg)
    logp = logp - logp.max(axis=-1, keepdims=True)
    logp = logp - np.log(np.where(masks, np.exp(logp), 0.0).sum(axis=-1, keepdims=True))
    value_loss = float(np.mean((zs - v) ** 2))
    policy_loss = float(-np.sum(np.where(masks, pis * logp, 0.0)) / n)
    dlogits = ((p - pis) / n).astype(logits.dtype)
    dv = (2.0 * (v - zs) / n).astype(v.dtype)
    net.backward(dlogits, dv)
    grads = net.grads()
    params = net.params()
    reg_loss = 0.0
    for name in net.weight_names():
        w = params[name]
        reg_loss += float(np.sum(w.astype(np.float64) ** 2))
        grads[name] = grads[name] + 2.0 * reg_c * w
    reg_loss *= reg_c
    metrics = {
        "loss": value_loss + policy_loss + reg_loss,
        "value_loss": value_loss,
        "policy_loss": policy_loss,
        "reg_loss": reg_loss,
    }
    return metrics, grads


class SgdMomentum:
    """Classical momentum: velocity = m*velocity + grad; w -= lr*velocity."""

    def __init__(self, lr: float = 0.1, momentum: float = 0.9):
        self.lr = lr
        self.momentum = momentum
        self.velocity: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, p in params.items():
            g = grads[name]
            if g.shape != p.shape:
                raise ShapeMismatch(f"grad {name}: {g.shape} vs param {p.shape}")
            vel = self.velocity.get(name)
            if vel is None:
                vel = np.zeros_like(p)
            vel = self.momentum * vel + g
            self.velocity[name] = vel
            p -= (self.lr * vel).astype(p.dtype)


def parameter_count(cfg: NetworkConfig) -> int:
    """Closed-form count of trainable parameters for the architecture."""
    k2 = cfg.conv_kernel ** 2
    side2 = cfg.board_side ** 2
    count = cfg.filters * cfg.input_planes * k2 + 2 * cfg.filters           # input block
    count += cfg.residual_blocks * 2 * (cfg.filters ** 2 * k2 + 2 * cfg.filters)
    count += 1 * cfg.filters + 2                                            # value 1x1 conv + bn
    count += side2 * cfg.value_hidden + cfg.value_hidden                    # value fc1
    count += cfg.value_hidden * 1 + 1                                       # value fc2
    count += cfg.policy_filters * cfg.filters + 2 * cfg.policy_filters      # policy 1x1 conv + bn
    count += cfg.policy_filters * side2 * cfg.policy_out + cfg.policy_out   # policy fc
    return count


def config_to_dict(cfg: NetworkConfig) -> dict:
    return asdict(cfg)


def config_from_dict(d: dict) -> NetworkConfig:
    return NetworkConfig(**d)
