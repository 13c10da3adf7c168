"""AdamW optimizer with a stepped learning-rate decay schedule.

Parameters live in a flat ``{path: array}`` dict and are updated in place.
Weight decay is decoupled: it is applied directly to the parameter, not
mixed into the gradient moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError


@dataclass
class AdamWState:
    """Per-parameter first/second moment accumulators plus the step count."""

    step: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)


def adamw_step(
    params: dict,
    grads: dict,
    state: AdamWState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """One update: p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)."""
    if not lr > 0.0:
        raise TrainingError("learning rate must be positive")
    if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
        raise TrainingError("betas must lie in [0, 1)")
    missing = set(params) - set(grads)
    if missing:
        raise TrainingError(f"gradients missing for: {sorted(missing)[:3]}")
    state.step += 1
    t = state.step
    bias1 = 1.0 - beta1**t
    bias2 = 1.0 - beta2**t
    for path, param in params.items():
        grad = np.asarray(grads[path], dtype=np.float64)
        if grad.shape != param.shape:
            raise TrainingError(f"gradient shape mismatch for {path}")
        m = state.first_moment.get(path)
        if m is None:
            m = np.zeros_like(param)
            state.first_moment[path] = m
            state.second_moment[path] = np.zeros_like(param)
        v = state.second_moment[path]
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        m_hat = m / bias1
        v_hat = v / bias2
        param -= lr * (m_hat / (np.sqrt(v_hat) + eps) + weight_decay * param)


def step_lr(base_lr: float, step_size: int, gamma: float, epoch: int) -> float:
    """Learning rate at ``epoch``: base_lr * gamma ** floor(epoch / step_size)."""
    if not base_lr > 0.0:
        raise TrainingError("base learning rate must be positive")
    if step_size < 1:
        raise TrainingError("step_size must be at least 1")
    if not 0.0 <= gamma <= 1.0:
        raise TrainingError("gamma must lie in [0, 1]")
    if epoch < 0:
        raise TrainingError("epoch must be non-negative")
    return base_lr * gamma ** (epoch // step_size)


__all__ = ["AdamWState", "adamw_step", "step_lr"]
