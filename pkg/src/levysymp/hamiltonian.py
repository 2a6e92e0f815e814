"""Hamiltonian systems described by their partial-gradient callbacks.

Phase points are ``(P, Q)`` with momenta ``P`` and positions ``Q``, both
n-vectors. The drift is

    dP = -sigma0(P, Q) dt,   dQ = gamma0(P, Q) dt,

with ``sigma0 = dH0/dQ`` and ``gamma0 = dH0/dP``. Each noise channel ``r``
contributes ``-sigma_r`` to ``dP`` and ``+gamma_r`` to ``dQ`` against the
Marcus differential of ``L_r``, i.e. its vector field is
``V_r = (-dH_r/dQ, dH_r/dP)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CapabilityError, ConfigError

__all__ = [
    "State",
    "NoiseChannel",
    "HamiltonianSystem",
    "make_linear_oscillator",
    "hamiltonian_value",
    "step_size_bound",
]


@dataclass(frozen=True, eq=False)
class State:
    """A phase point. ``P`` and ``Q`` are coerced to 1-d float arrays."""

    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        P = np.atleast_1d(np.asarray(self.P, dtype=float)).copy()
        Q = np.atleast_1d(np.asarray(self.Q, dtype=float)).copy()
        if P.ndim != 1 or P.shape != Q.shape or P.size < 1:
            raise ConfigError(f"P and Q must be n-vectors of equal length, got {P.shape} and {Q.shape}")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
            raise ConfigError("state entries must be finite")
        P.flags.writeable = False
        Q.flags.writeable = False
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    @property
    def n(self) -> int:
        return self.P.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.P, self.Q])

    @classmethod
    def from_vector(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        n = x.size // 2
        return cls(x[:n], x[n:])


@dataclass(frozen=True)
class NoiseChannel:
    """Gradients of one noise Hamiltonian ``H_r``.

    With ``additive=True`` the callbacks take the time only, ``sigma(t)`` and
    ``gamma(t)``; otherwise they take ``(P, Q, t)``. Only additive channels
    are accepted by the integrators; state-dependent ones are understood by
    the jump map.
    """

    sigma: Callable
    gamma: Callable
    additive: bool = True

    def field(self, P, Q, t):
        """The vector field ``V_r = (-sigma, gamma)`` as a ``(dP, dQ)`` pair."""
        if self.additive:
            return -np.asarray(self.sigma(t), dtype=float), np.asarray(self.gamma(t), dtype=float)
        return (-np.asarray(self.sigma(P, Q, t), dtype=float),
                np.asarray(self.gamma(P, Q, t), dtype=float))


@dataclass(frozen=True)
class HamiltonianSystem:
    """Drift and noise Hamiltonians given through their gradients.

    ``lipschitz_K`` is asserted by the caller, never estimated.
    ``sigma0_depends_on_p=False`` lets the implicit momentum update finish in
    one evaluation. ``step_jacobian(P, Q, dt, scheme)`` optionally supplies
    the analytic Jacobian of one drift step.
    """

    n: int
    sigma0: Callable
    gamma0: Callable
    noise: tuple = ()
    lipschitz_K: float = 1.0
    H0: Optional[Callable] = None
    sigma0_depends_on_p: bool = True
    step_jacobian: Optional[Callable] = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not (self.lipschitz_K > 0 and math.isfinite(self.lipschitz_K)):
            raise ConfigError(f"lipschitz_K must be positive, got {self.lipschitz_K!r}")
        object.__setattr__(self, "noise", tuple(self.noise))

    @property
    def m(self) -> int:
        return len(self.noise)

    @property
    def is_additive(self) -> bool:
        return all(ch.additive for ch in self.noise)


def _osc_sigma0(P, Q):
    return Q


def _osc_gamma0(P, Q):
    return P


def _osc_H0(P, Q):
    return 0.5 * float(np.dot(P, P) + np.dot(Q, Q))


def _osc_jacobian(P, Q, dt, scheme):
    scheme = str(getattr(scheme, "value", scheme)).lower()
    if scheme == "ses":
        return np.array([[1.0, -dt], [dt, 1.0 - dt * dt]])
    if scheme == "eem":
        return np.array([[1.0, -dt], [dt, 1.0]])
    raise ConfigError(f"unknown scheme {scheme!r}")


def make_linear_oscillator(beta: float) -> HamiltonianSystem:
    """Linear oscillator ``H0 = (P^2 + Q^2)/2`` kicked in momentum by ``beta dL``.

    The noise Hamiltonian is ``H1 = -beta Q``, so ``sigma_1 = dH1/dQ = -beta``
    and the momentum equation ``dP = ... - sigma_1 dL`` gains ``+beta dL``.
    """
    beta = float(beta)
    if not math.isfinite(beta):
        raise ConfigError(f"beta must be finite, got {beta!r}")
    kick = np.array([-beta])
    zero = np.zeros(1)
    channel = NoiseChannel(sigma=lambda t: kick, gamma=lambda t: zero)
    return HamiltonianSystem(
        n=1,
        sigma0=_osc_sigma0,
        gamma0=_osc_gamma0,
        noise=(channel,),
        lipschitz_K=1.0,
        H0=_osc_H0,
        sigma0_depends_on_p=False,
        step_jacobian=_osc_jacobian,
        name="linear_oscillator",
    )


def hamiltonian_value(sys: HamiltonianSystem, s: State) -> float:
    if sys.H0 is None:
        raise CapabilityError("system has no H0 callback")
    return float(sys.H0(s.P, s.Q))


def step_size_bound(sys: HamiltonianSystem) -> float:
    """Supremum of step sizes with ``1 - 8 sqrt(2) K^2 tau^2 > 0``."""
    return 1.0 / (sys.lipschitz_K * math.sqrt(8.0 * math.sqrt(2.0)))
