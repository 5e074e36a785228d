"""Nesterov-accelerated adaptive moment (NAdam) parameter updates.

The decay rate mu is held constant across steps, so the bias-correction
products reduce to plain powers mu^t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NAdamHyper:
    eta: float = 0.001   # learning rate
    mu: float = 0.9      # first-moment decay
    nu: float = 0.999    # second-moment decay
    eps: float = 1e-7    # denominator stabilizer

    def to_dict(self) -> dict:
        return {"eta": self.eta, "mu": self.mu, "nu": self.nu, "eps": self.eps}

    @staticmethod
    def from_dict(data: dict) -> "NAdamHyper":
        return NAdamHyper(**{k: float(v) for k, v in data.items()})


@dataclass
class NAdamState:
    """Step counter and exponential moment accumulators over the flat
    parameter vector."""

    t: int
    m: np.ndarray
    n: np.ndarray
    hyper: NAdamHyper = field(default_factory=NAdamHyper)

    @staticmethod
    def fresh(n_params: int, hyper: NAdamHyper | None = None) -> "NAdamState":
        return NAdamState(
            t=0,
            m=np.zeros(n_params, dtype=np.float64),
            n=np.zeros(n_params, dtype=np.float64),
            hyper=hyper or NAdamHyper(),
        )


def nadam_step(state: NAdamState, theta: np.ndarray, grad: np.ndarray):
    """One NAdam update, mutating ``theta`` and ``state`` in place.

        m_t = mu m + (1 - mu) g            n_t = nu n + (1 - nu) g^2
        g^ = g / (1 - mu^t)                n^ = n_t / (1 - nu^t)
        m^ = m_t / (1 - mu^(t+1))          mbar = (1 - mu) g^ + mu m^
        theta <- theta - eta mbar / (sqrt(n^) + eps)
    """
    if theta.shape != grad.shape or theta.shape != state.m.shape:
        raise ValueError("theta, gradient, and optimizer state lengths must match")
    h = state.hyper
    state.t += 1
    t = state.t
    state.m *= h.mu
    state.m += (1.0 - h.mu) * grad
    state.n *= h.nu
    state.n += (1.0 - h.nu) * np.square(grad)
    g_hat = grad / (1.0 - h.mu ** t)
    m_hat = state.m / (1.0 - h.mu ** (t + 1))
    m_bar = (1.0 - h.mu) * g_hat + h.mu * m_hat
    n_hat = state.n / (1.0 - h.nu ** t)
    theta -= h.eta * m_bar / (np.sqrt(n_hat) + h.eps)
    return state, theta
