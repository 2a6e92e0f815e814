"""Symplectic (semi-implicit) and explicit Euler schemes on a jump-adapted grid.

The time grid is the union of the fixed points ``k * dt``, every jump time
up to ``t_end``, and ``t_end`` itself. Between grid points the drift is
advanced by one drift step; at a jump time the Marcus jump map is applied to
the left-limit state.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, NumericalError, SolverError, StepSizeWarning
from .hamiltonian import HamiltonianSystem, State, step_size_bound
from .levy_path import LevyPath
from .marcus import DEFAULT_SUBSTEPS, _jump_arrays

__all__ = [
    "Scheme",
    "SchemeConfig",
    "TrajectoryRecord",
    "ses_drift_step",
    "eem_drift_step",
    "integrate",
    "one_step_jacobian",
    "symplectic_form",
]


class Scheme(str, enum.Enum):
    SES = "ses"
    EEM = "eem"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown scheme {value!r}; expected 'ses' or 'eem'") from None


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme = Scheme.SES
    dt: float = 0.08
    t_end: float = 20.0
    fixed_point_tol: float = 1e-12
    fixed_point_max_iters: int = 50
    record_every: int = 1
    jump_substeps: int = DEFAULT_SUBSTEPS

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError(f"t_end must be positive, got {self.t_end!r}")
        if not self.fixed_point_tol > 0:
            raise ConfigError(f"fixed_point_tol must be positive, got {self.fixed_point_tol!r}")
        for name in ("fixed_point_max_iters", "record_every", "jump_substeps"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")

    def replace(self, **changes) -> "SchemeConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return SchemeConfig(**values)


@dataclass(frozen=True)
class TrajectoryRecord:
    """Recorded trajectory.

    ``P`` and ``Q`` have shape ``(N, n)``. Times are non-decreasing: a jump at
    time ``tau`` produces two rows with the same time, the left limit followed
    by the post-jump state (``jump_flags`` True on the latter).
    """

    times: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    hamiltonians: np.ndarray | None
    jump_flags: np.ndarray

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> State:
        return State(self.P[i], self.Q[i])

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    @property
    def final_state(self) -> State:
        return self.state(-1)

    def left_limit_mask(self) -> np.ndarray:
        """True on rows holding the left limit of a jump recorded in the next row."""
        left = np.zeros(len(self), dtype=bool)
        left[:-1] = (self.times[1:] == self.times[:-1]) & self.jump_flags[1:]
        return left

    def to_csv(self, filename) -> None:
        """Write ``t, P_1..P_n, Q_1..Q_n, H0, jump_flag`` rows."""
        n = self.P.shape[1]
        header = (["t"] + [f"P_{i + 1}" for i in range(n)]
                  + [f"Q_{i + 1}" for i in range(n)] + ["H0", "jump_flag"])
        with open(filename, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i in range(len(self)):
                h = "" if self.hamiltonians is None else f"{self.hamiltonians[i]:.17g}"
                w.writerow([f"{self.times[i]:.17g}"]
                           + [f"{v:.17g}" for v in self.P[i]]
                           + [f"{v:.17g}" for v in self.Q[i]]
                           + [h, int(self.jump_flags[i])])


def _ses_arrays(sys, P, Q, dt, tol, max_iters):
    sigma0 = sys.sigma0
    if sys.sigma0_depends_on_p:
        Pk = P
        residual = math.inf
        for it in range(1, max_iters + 1):
            P_next = P - sigma0(Pk, Q) * dt
            residual = float(np.max(np.abs(P_next - Pk)))
            Pk = P_next
            if residual < tol:
                break
        else:
            raise SolverError(
                f"fixed-point iteration did not converge in {max_iters} iterations "
                f"(last residual {residual:.3e})", iterations=max_iters, residual=residual)
        P_new = Pk
    else:
        P_new = P - sigma0(P, Q) * dt
    return P_new, Q + sys.gamma0(P_new, Q) * dt


def _eem_arrays(sys, P, Q, dt, tol=None, max_iters=None):
    return P - sys.sigma0(P, Q) * dt, Q + sys.gamma0(P, Q) * dt


_DRIFT = {Scheme.SES: _ses_arrays, Scheme.EEM: _eem_arrays}


def ses_drift_step(sys: HamiltonianSystem, s: State, dt: float,
                   tol: float = 1e-12, max_iters: int = 50) -> State:
    """One semi-implicit step: ``P+ = P - sigma0(P+, Q) dt``, ``Q+ = Q + gamma0(P+, Q) dt``.

    The implicit momentum equation is solved by fixed-point iteration from the
    initial guess ``P`` until successive iterates differ by less than ``tol``
    in max-norm. Warns with :class:`StepSizeWarning` when ``dt`` exceeds
    :func:`step_size_bound`.
    """
    if dt < 0:
        raise ConfigError(f"dt must be non-negative, got {dt!r}")
    if dt > step_size_bound(sys):
        _warn_step(sys, dt)
    P, Q = _ses_arrays(sys, s.P, s.Q, dt, tol, max_iters)
    return State(P, Q)


def eem_drift_step(sys: HamiltonianSystem, s: State, dt: float) -> State:
    """One explicit Euler step; both updates use the old ``(P, Q)``."""
    if dt < 0:
        raise ConfigError(f"dt must be non-negative, got {dt!r}")
    P, Q = _eem_arrays(sys, s.P, s.Q, dt)
    return State(P, Q)


def _warn_step(sys, dt):
    warnings.warn(
        f"dt={dt!r} exceeds the step-size bound {step_size_bound(sys):.6g} for K={sys.lipschitz_K!r}",
        StepSizeWarning, stacklevel=3)


def _grid(dt, t_end):
    n = max(1, math.ceil(t_end / dt - 1e-9))
    pts = [k * dt for k in range(1, n)]
    pts.append(float(t_end))
    return pts


def _moves(sys, event):
    tau, channel, size = event
    if size == 0:
        return False
    dP, dQ = sys.noise[channel].field(None, None, tau)
    return bool(np.any(dP != 0) or np.any(dQ != 0))


def integrate(sys: HamiltonianSystem, x0: State, path: LevyPath, cfg: SchemeConfig) -> TrajectoryRecord:
    """Integrate from ``x0`` at t=0 to exactly ``cfg.t_end`` along ``path``.

    Drift steps are recorded every ``cfg.record_every`` steps; the initial
    state, the final state, and the states on both sides of every jump are
    always recorded. Jumps through a channel whose field vanishes at the jump
    time are skipped, so ``beta=0`` reproduces the deterministic scheme.
    """
    if not sys.is_additive:
        raise ConfigError("integrators accept additive-noise systems only")
    if x0.n != sys.n:
        raise ConfigError(f"state dimension {x0.n} does not match system dimension {sys.n}")
    if path.channels != sys.m:
        raise ConfigError(f"path has {path.channels} channel(s), system has {sys.m}")
    if path.horizon < cfg.t_end:
        raise ConfigError(f"path horizon {path.horizon!r} is shorter than t_end {cfg.t_end!r}")
    if cfg.dt > step_size_bound(sys):
        _warn_step(sys, cfg.dt)

    drift = _DRIFT[cfg.scheme]
    tol, max_iters = cfg.fixed_point_tol, cfg.fixed_point_max_iters
    substeps = cfg.jump_substeps
    every = cfg.record_every
    t_end = float(cfg.t_end)
    # jumps through a vanishing additive field are no-ops and do not refine the grid
    events = [e for e in path.events(t_end) if _moves(sys, e)]

    times, Ps, Qs, flags = [0.0], [x0.P], [x0.Q], [False]

    def record(t, P, Q, flag):
        times.append(t)
        Ps.append(P)
        Qs.append(Q)
        flags.append(flag)

    P, Q = x0.P, x0.Q
    t = 0.0
    steps = 0
    ei, ne = 0, len(events)

    def step_to(t_new):
        nonlocal P, Q
        try:
            P, Q = drift(sys, P, Q, t_new - t, tol, max_iters)
        except NumericalError as err:
            err.time = t
            raise
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
            raise DivergenceError("non-finite state after drift step", time=t_new)

    for g in _grid(cfg.dt, t_end):
        while ei < ne and events[ei][0] <= g:
            tau, channel, size = events[ei]
            ei += 1
            if tau > t:
                step_to(tau)
                t = tau
            if times[-1] < tau:
                record(t, P, Q, False)
            try:
                P, Q = _jump_arrays(sys, P, Q, channel, tau, size, substeps)
            except NumericalError as err:
                err.time = tau
                raise
            if not (np.all(np.isfinite(P)) and np.all(np.isfinite(Q))):
                raise DivergenceError("non-finite state after jump", time=tau)
            record(t, P, Q, True)
        if g > t:
            step_to(g)
            t = g
            steps += 1
            if steps % every == 0 or g == t_end:
                record(t, P, Q, False)

    P_arr = np.array(Ps, dtype=float).reshape(len(times), sys.n)
    Q_arr = np.array(Qs, dtype=float).reshape(len(times), sys.n)
    H = None
    if sys.H0 is not None:
        H = np.array([sys.H0(p, q) for p, q in zip(P_arr, Q_arr)], dtype=float)
    return TrajectoryRecord(np.array(times), P_arr, Q_arr, H, np.array(flags, dtype=bool))


def symplectic_form(n: int) -> np.ndarray:
    """The standard matrix ``[[0, I], [-I, 0]]`` in ``(P, Q)`` ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def one_step_jacobian(sys: HamiltonianSystem, s: State, dt: float, scheme, *,
                      method: str = "auto", h: float = 1e-6, max_iters: int = 200) -> np.ndarray:
    """Jacobian of one drift step at ``s`` in ``(P, Q)`` ordering.

    ``method="auto"`` uses the system's analytic ``step_jacobian`` when it has
    one and central finite differences with step ``h`` otherwise; ``"fd"``
    forces finite differences. The implicit solve inside the differenced map
    uses a tolerance far below ``h`` so that it does not pollute the quotient.
    """
    scheme = Scheme.parse(scheme)
    if method not in ("auto", "fd", "analytic"):
        raise ConfigError(f"unknown method {method!r}")
    if method != "fd" and sys.step_jacobian is not None:
        return np.asarray(sys.step_jacobian(s.P, s.Q, dt, scheme), dtype=float)
    if method == "analytic":
        raise ConfigError("system supplies no analytic step Jacobian")

    drift = _DRIFT[scheme]
    n = s.n
    x = s.as_vector()
    tol = 1e-14 * max(1.0, float(np.max(np.abs(x))))
    J = np.empty((2 * n, 2 * n))
    for j in range(2 * n):
        e = np.zeros(2 * n)
        e[j] = h
        xp, xm = x + e, x - e
        Pp, Qp = drift(sys, xp[:n], xp[n:], dt, tol, max_iters)
        Pm, Qm = drift(sys, xm[:n], xm[n:], dt, tol, max_iters)
        J[:, j] = (np.concatenate([Pp, Qp]) - np.concatenate([Pm, Qm])) / (2 * h)
    return J
