"""Marcus jump map: the time-1 flow of ``d xi/ds = V_r(xi) * l``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError
from .hamiltonian import HamiltonianSystem, State

__all__ = ["JumpEvent", "apply_jump", "marcus_increment", "DEFAULT_SUBSTEPS"]

DEFAULT_SUBSTEPS = 100


@dataclass(frozen=True)
class JumpEvent:
    channel: int
    time: float
    size: float

    def __post_init__(self):
        if not np.isfinite(self.size):
            raise ConfigError(f"jump size must be finite, got {self.size!r}")
        if not self.time > 0:
            raise ConfigError(f"jump time must be positive, got {self.time!r}")


def _jump_arrays(sys, P, Q, channel, time, size, substeps):
    ch = sys.noise[channel]
    if ch.additive:
        dP, dQ = ch.field(P, Q, time)
        return P + dP * size, Q + dQ * size

    # state-dependent field: classical RK4 on s in [0, 1]
    n = P.size
    h = 1.0 / substeps

    def f(x):
        dP, dQ = ch.field(x[:n], x[n:], time)
        return np.concatenate([dP, dQ]) * size

    x = np.concatenate([P, Q])
    for i in range(substeps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"jump flow diverged at substep {i}", substep=i, time=time)
    return x[:n], x[n:]


def apply_jump(sys: HamiltonianSystem, s_minus: State, ev: JumpEvent,
               substeps: int = DEFAULT_SUBSTEPS) -> State:
    """Post-jump state from the left-limit state ``s_minus``.

    Additive channels translate the state exactly; state-dependent ones are
    integrated with ``substeps`` fixed RK4 steps.
    """
    if not 0 <= ev.channel < sys.m:
        raise ConfigError(f"channel {ev.channel} out of range for {sys.m} noise channel(s)")
    P, Q = _jump_arrays(sys, s_minus.P, s_minus.Q, ev.channel, ev.time, ev.size, substeps)
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
        raise DivergenceError("non-finite state after jump", time=ev.time)
    return State(P, Q)


def marcus_increment(sys: HamiltonianSystem, s_minus: State, ev: JumpEvent,
                     substeps: int = DEFAULT_SUBSTEPS):
    """Return ``(post_jump_state, correction)``.

    ``correction = Phi(x) - x - V_r(x) * l`` as a 2n-vector; it is the part of
    the Marcus increment beyond the Ito increment and vanishes for additive
    noise.
    """
    after = apply_jump(sys, s_minus, ev, substeps)
    if sys.noise[ev.channel].additive:
        return after, np.zeros(2 * s_minus.n)
    dP, dQ = sys.noise[ev.channel].field(s_minus.P, s_minus.Q, ev.time)
    ito = np.concatenate([dP, dQ]) * ev.size
    correction = after.as_vector() - s_minus.as_vector() - ito
    return after, correction
