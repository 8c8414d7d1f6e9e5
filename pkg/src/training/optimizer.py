"""Adaptive moment estimation on flat float64 arrays."""

import numpy as np
from pydantic import BaseModel, Field


class AdamConfig(BaseModel):
    """Step size and moment decay rates."""

    learning_rate: float = Field(default=1e-2, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)


class Adam:
    """Bias-corrected first/second moment accumulators for one parameter array."""

    def __init__(self, shape: tuple[int, ...], config: AdamConfig | None = None) -> None:
        self.config = config or AdamConfig()
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    @property
    def learning_rate(self) -> float:
        return self.config.learning_rate

    def step(self, params: np.ndarray, gradient: np.ndarray) -> np.ndarray:
        """Return the updated parameters; ``params`` is left untouched."""
        c = self.config
        self.t += 1
        self.m = c.beta1 * self.m + (1 - c.beta1) * gradient
        self.v = c.beta2 * self.v + (1 - c.beta2) * gradient**2
        m_hat = self.m / (1 - c.beta1**self.t)
        v_hat = self.v / (1 - c.beta2**self.t)
        return params - c.learning_rate * m_hat / (np.sqrt(v_hat) + c.eps)

    def step_sizes(self) -> np.ndarray:
        """Per-coordinate multiplier of the last step, ``lr / (sqrt(v_hat) + eps)``.

        Scales a proximal threshold to the metric Adam steps in.
        """
        if self.t == 0:
            raise ValueError("step_sizes is defined after the first step")
        c = self.config
        v_hat = self.v / (1 - c.beta2**self.t)
        return c.learning_rate / (np.sqrt(v_hat) + c.eps)
