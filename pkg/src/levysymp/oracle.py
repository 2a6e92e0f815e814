"""Closed-form solution of the kicked linear oscillator on a realized path.

For ``dP = -Q dt + beta dL``, ``dQ = P dt`` the drift is a rotation of the
phase plane and every jump kicks the momentum by ``beta * R_k``. For a
pure-jump compound Poisson ``L`` the stochastic convolutions reduce to finite
sums over the jumps:

    P(t) = p0 cos t - q0 sin t + beta * sum_{tau_k <= t} cos(t - tau_k) R_k
    Q(t) = p0 sin t + q0 cos t + beta * sum_{tau_k <= t} sin(t - tau_k) R_k

(The frequently quoted form with ``sin`` in the momentum sum belongs to the
oscillator with the roles of P and Q exchanged.)

With additive noise the Marcus and Ito integrals coincide, so these sums are
the exact Marcus solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .hamiltonian import State
from .levy_path import LevyPath

__all__ = ["OscillatorParams", "exact_state", "exact_hamiltonian", "exact_trajectory"]


@dataclass(frozen=True)
class OscillatorParams:
    beta: float = 1.0
    p0: float = 0.0
    q0: float = 1.0

    def __post_init__(self):
        for name in ("beta", "p0", "q0"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    def replace(self, **changes) -> "OscillatorParams":
        values = {"beta": self.beta, "p0": self.p0, "q0": self.q0}
        values.update(changes)
        return OscillatorParams(**values)


def _check_path(path: LevyPath):
    if path.channels != 1:
        raise ConfigError(f"the oscillator is driven by one channel, path has {path.channels}")
    if path.config.brownian_coefficient != 0:
        raise ConfigError("the closed form requires a pure-jump path")


def exact_trajectory(params: OscillatorParams, path: LevyPath, times, left=None):
    """Exact ``(P, Q)`` arrays at each of ``times``.

    ``left`` is an optional boolean mask; where True the left limit is
    returned, i.e. a jump exactly at that time is excluded.
    """
    _check_path(path)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0) or np.any(t > path.horizon):
        raise DomainError(f"times must lie in [0, {path.horizon!r}]")
    tau, R = path.times[0], path.sizes[0]
    dt = t[:, None] - tau[None, :]
    active = dt >= 0
    if left is not None:
        left = np.broadcast_to(np.asarray(left, dtype=bool), t.shape)
        active &= ~(left[:, None] & (dt == 0))
    w = np.where(active, R[None, :], 0.0)
    jump_sin = np.sum(np.sin(dt) * w, axis=1)
    jump_cos = np.sum(np.cos(dt) * w, axis=1)
    c, s = np.cos(t), np.sin(t)
    P = params.p0 * c - params.q0 * s + params.beta * jump_cos
    Q = params.p0 * s + params.q0 * c + params.beta * jump_sin
    return P, Q


def exact_state(params: OscillatorParams, path: LevyPath, t: float, *, left: bool = False) -> State:
    """Exact state at ``t``; a jump at exactly ``t`` counts unless ``left`` is set."""
    P, Q = exact_trajectory(params, path, [t], left=[left])
    return State(P, Q)


def exact_hamiltonian(params: OscillatorParams, path: LevyPath, t: float, *, left: bool = False) -> float:
    s = exact_state(params, path, t, left=left)
    return 0.5 * float(s.P[0] ** 2 + s.Q[0] ** 2)
