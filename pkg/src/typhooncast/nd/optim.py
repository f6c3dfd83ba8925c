"""Adam optimizer and cosine learning-rate annealing."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigError, NumericError
from .tensor import Tensor


class Adam:
    """Adam with bias correction over a named parameter dict.

    Gradients are read from each tensor's ``grad`` buffer; a non-finite
    gradient aborts the step with the offending parameter's name. Parameters
    whose gradient is unset are left untouched.
    """

    def __init__(self, params: dict[str, Tensor], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr < 0:
            raise ConfigError(f"learning rate must be >= 0, got {lr}")
        self.params = params
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self, lr: float | None = None):
        lr = self.lr if lr is None else float(lr)
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient for parameter '{name}'")
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p.data -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None


class CosineSchedule:
    """Learning rate annealed from ``lr0`` to 0 over ``total_steps``."""

    def __init__(self, lr0: float, total_steps: int):
        if total_steps < 1:
            raise ConfigError(f"total_steps must be >= 1, got {total_steps}")
        self.lr0 = float(lr0)
        self.total_steps = int(total_steps)

    def __call__(self, step: int) -> float:
        s = min(max(step, 0), self.total_steps)
        return self.lr0 * 0.5 * (1.0 + math.cos(math.pi * s / self.total_steps))
