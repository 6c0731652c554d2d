"""Decoupled-weight-decay optimizer with configurable first-moment blending.

The update is, per parameter tensor:

    num   = b1*m + (1-b1)*g          (stored back as the new m)
    inner = b2*v + (1-b2)*g^2        (stored back as the new v)
    theta <- theta - lr*num/(sqrt(inner) + eps) - lr*wd*theta

Deliberately, there is NO bias correction in the default path; with b1 = 0
the numerator is exactly the raw gradient. A `bias_correction` flag enables
the conventional corrected variant for comparison runs and defaults off.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import math

import numpy as np

from .model import NumericError

SCHEDULERS = ("none", "cosine")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.0
    beta2: float = 0.99
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    batch_size: int = 64
    epochs: int = 100
    scheduler: str = "none"
    seed: int = 0
    bias_correction: bool = False

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.epsilon <= 0 or self.learning_rate <= 0:
            raise ValueError("epsilon and learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"scheduler must be one of {SCHEDULERS}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")

    def with_beta1(self, beta1: float) -> "TrainConfig":
        return replace(self, beta1=beta1)


@dataclass
class OptimizerState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def init_like(cls, params: dict[str, np.ndarray]) -> "OptimizerState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            t=0,
        )


def adamw_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    cfg: TrainConfig,
    lr: float | None = None,
):
    """One in-place update; refuses (raising, state untouched) on bad grads."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}; step refused")
    if lr is None:
        lr = cfg.learning_rate
    b1, b2, eps, wd = cfg.beta1, cfg.beta2, cfg.epsilon, cfg.weight_decay
    t_next = state.t + 1
    for name, theta in params.items():
        g = grads[name]
        num = b1 * state.m[name] + (1.0 - b1) * g
        inner = b2 * state.v[name] + (1.0 - b2) * g * g
        state.m[name] = num
        state.v[name] = inner
        if cfg.bias_correction:
            num = num / (1.0 - b1**t_next)
            inner = inner / (1.0 - b2**t_next)
        theta -= (lr * num / (np.sqrt(inner) + eps) + lr * wd * theta).astype(
            theta.dtype, copy=False
        )
    state.t = t_next
    return params, state


def lr_schedule(cfg: TrainConfig, epoch: int) -> float:
    """Effective learning rate for a 0-based epoch.

    "none" holds the configured rate; "cosine" decays from lr to lr/100
    across cfg.epochs (half-cosine, endpoints exact).
    """
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    if cfg.scheduler == "none":
        return cfg.learning_rate
    lo = cfg.learning_rate / 100.0
    frac = min(epoch / cfg.epochs, 1.0)
    return lo + (cfg.learning_rate - lo) * 0.5 * (1.0 + math.cos(math.pi * frac))
