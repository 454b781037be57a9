"""ADAM with decoupled weight decay, global-norm clipping, plateau scheduler."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float = 5.0) -> dict[str, np.ndarray]:
    """Scale all gradients by max_norm/norm when the global L2 norm exceeds it."""
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    norm = np.sqrt(total)
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}


@dataclass
class AdamState:
    """Bias-corrected ADAM with decoupled weight decay."""

    lr: float = 0.001
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-5
    step_count: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def step(self, params: dict[str, Tensor], grads: dict[str, np.ndarray]) -> None:
        b1, b2 = self.betas
        self.step_count += 1
        t = self.step_count
        for name, p in params.items():
            g = grads.get(name)
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for {name}")
            if name not in self.m:
                self.m[name] = np.zeros_like(p.data)
                self.v[name] = np.zeros_like(p.data)
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1 ** t)
            v_hat = self.v[name] / (1 - b2 ** t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay:
                p.data -= self.lr * self.weight_decay * p.data


@dataclass
class PlateauScheduler:
    """Halve the learning rate when the validation metric stops improving."""

    patience: int = 20
    factor: float = 0.5
    min_lr: float = 1e-6
    best_metric: float = np.inf
    wait: int = 0

    def __post_init__(self):
        if not 0 < self.factor < 1:
            raise ValueError("factor must be in (0,1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")

    def step(self, metric: float, optimizer: AdamState) -> bool:
        """Record a validation metric; returns True when it improved."""
        if metric < self.best_metric:
            self.best_metric = metric
            self.wait = 0
            return True
        self.wait += 1
        if self.wait > self.patience:
            optimizer.lr = max(self.min_lr, optimizer.lr * self.factor)
            self.wait = 0
        return False
