"""Hamiltonian test systems shared across the suite."""

import numpy as np

from levysymp import HamiltonianSystem, NoiseChannel


def pendulum(kick=0.5):
    # H0 = P^2/2 - cos Q
    return HamiltonianSystem(
        n=1,
        sigma0=lambda P, Q: np.sin(Q),
        gamma0=lambda P, Q: P,
        noise=(NoiseChannel(lambda t: np.array([-kick]), lambda t: np.array([0.0])),),
        lipschitz_K=1.0,
        H0=lambda P, Q: 0.5 * float(P @ P) - float(np.sum(np.cos(Q))),
        sigma0_depends_on_p=False,
        name="pendulum",
    )


def nonseparable(eps=0.5):
    # H0 = (P^2 + Q^2)/2 + eps P^2 Q^2 / 4; dH0/dQ depends on P, so the momentum update is implicit
    return HamiltonianSystem(
        n=1,
        sigma0=lambda P, Q: Q + 0.5 * eps * P**2 * Q,
        gamma0=lambda P, Q: P + 0.5 * eps * P * Q**2,
        noise=(NoiseChannel(lambda t: np.array([0.3]), lambda t: np.array([0.2])),),
        lipschitz_K=1.0,
        H0=lambda P, Q: 0.5 * float(P @ P + Q @ Q) + 0.25 * eps * float(np.sum(P**2 * Q**2)),
        name="nonseparable",
    )


def coupled(n=2):
    # H0 = |P|^2/2 + Q^T K Q/2 with a symmetric positive definite K
    K = np.array([[2.0, -0.5], [-0.5, 1.0]])[:n, :n]
    return HamiltonianSystem(
        n=n,
        sigma0=lambda P, Q: K @ Q,
        gamma0=lambda P, Q: P,
        noise=(NoiseChannel(lambda t: np.array([-1.0, 0.0]), lambda t: np.array([0.0, 0.5])),
               NoiseChannel(lambda t: np.array([0.0, np.cos(t)]), lambda t: np.zeros(2))),
        lipschitz_K=float(np.max(np.linalg.eigvalsh(K))),
        H0=lambda P, Q: 0.5 * float(P @ P + Q @ K @ Q),
        sigma0_depends_on_p=False,
        name="coupled",
    )


def rotation_field(size_scale=1.0):
    """One state-dependent channel with V(P, Q) = (-Q, P), i.e. H1 = (P^2 + Q^2)/2."""
    return HamiltonianSystem(
        n=1,
        sigma0=lambda P, Q: Q,
        gamma0=lambda P, Q: P,
        noise=(NoiseChannel(lambda P, Q, t: size_scale * Q, lambda P, Q, t: size_scale * P,
                            additive=False),),
        lipschitz_K=1.0,
        H0=lambda P, Q: 0.5 * float(P @ P + Q @ Q),
    )


ALL_ADDITIVE = [pendulum, nonseparable, coupled]
