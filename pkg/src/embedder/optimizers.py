"""
First-order optimizers operating in place on named numpy parameter arrays.

Author: CapMap Project
License: MIT
"""

from typing import Dict

import numpy as np

from ..config.schema import FitConfig, OptimizerKind


class GradientDescent:
    """Plain gradient descent: p -= lr * g."""

    def __init__(self, lr: float = 0.01):
        self.lr = lr
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        for k in params:
            params[k] -= self.lr * grads[k]


class Adam:
    """
    Adaptive moment estimation.

    Keeps per-parameter first and second moment estimates with bias
    correction.
    """

    def __init__(self, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        self.t += 1

        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1

        for k in params:
            g = grads[k]

            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])

            self.m[k] *= self.beta1
            self.m[k] += (1.0 - self.beta1) * g

            self.v[k] *= self.beta2
            self.v[k] += (1.0 - self.beta2) * (g * g)

            denom = np.sqrt(self.v[k] * (1.0 / bc2)) + self.epsilon
            params[k] -= step_size * self.m[k] / denom


def build_optimizer(config: FitConfig):
    """Instantiate the optimizer named by a FitConfig."""
    if config.optimizer == OptimizerKind.ADAM:
        return Adam(config.learning_rate, config.beta1, config.beta2, config.adam_epsilon)
    return GradientDescent(config.learning_rate)
