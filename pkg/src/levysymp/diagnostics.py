"""Phase-area tracking, Hamiltonian traces and mean-square convergence studies."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import CapabilityError, ConfigError, DomainError, NumericalError
from .hamiltonian import HamiltonianSystem, State, make_linear_oscillator
from .integrators import SchemeConfig, TrajectoryRecord, integrate
from .levy_path import LevyConfig, LevyPath, sample_path
from .oracle import OscillatorParams, exact_trajectory

__all__ = [
    "PhaseDomain",
    "ConvergenceReport",
    "circle_domain",
    "shoelace_area",
    "evolve_domain",
    "exact_domain",
    "derive_seed",
    "convergence_study",
    "fit_slope",
    "hamiltonian_trace",
    "time_average",
    "inter_jump_increments",
    "sign_test_pvalue",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class PhaseDomain:
    """Closed polygon in the (P, Q) plane; ``vertices`` has shape ``(k, 2)``."""

    vertices: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise DomainError(f"vertices must have shape (k, 2), got {v.shape}")
        if v.shape[0] < 3:
            raise DomainError(f"a domain needs at least 3 vertices, got {v.shape[0]}")
        object.__setattr__(self, "vertices", v)


@dataclass(frozen=True)
class ConvergenceReport:
    step_sizes: np.ndarray
    rms_errors: np.ndarray
    fitted_slope: float
    fit_residual: float
    num_paths: int
    metric: str = "endpoint"

    def to_csv(self, filename) -> None:
        with open(filename, "w") as fh:
            fh.write("tau,rms_error\n")
            for tau, err in zip(self.step_sizes, self.rms_errors):
                fh.write(f"{tau:.17g},{err:.17g}\n")


def circle_domain(center=(0.0, 0.0), radius: float = 1.0, num_vertices: int = 256) -> PhaseDomain:
    theta = 2.0 * np.pi * np.arange(num_vertices) / num_vertices
    v = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    return PhaseDomain(v, 0.0)


def shoelace_area(domain: PhaseDomain) -> float:
    """Absolute area of the polygon through the vertices (closure implied)."""
    v = domain.vertices
    if v.shape[0] < 3:
        raise DomainError("a domain needs at least 3 vertices")
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def evolve_domain(sys: HamiltonianSystem, path: LevyPath, cfg: SchemeConfig,
                  initial: PhaseDomain, snapshot_times) -> list:
    """Images of every vertex of ``initial`` under the scheme of ``cfg``, all on the same path.

    ``cfg.t_end`` is replaced by each snapshot time in turn.
    """
    if sys.n != 1:
        raise ConfigError("phase domains are defined for n=1 systems only")
    out = []
    for t in snapshot_times:
        t = float(t)
        if not 0 <= t <= path.horizon:
            raise DomainError(f"snapshot time {t!r} outside [0, {path.horizon!r}]")
        if t == 0:
            out.append(PhaseDomain(initial.vertices.copy(), 0.0))
            continue
        c = cfg.replace(t_end=t, record_every=10**9)
        images = np.empty_like(initial.vertices)
        for i, (p, q) in enumerate(initial.vertices):
            try:
                rec = integrate(sys, State([p], [q]), path, c)
            except NumericalError as err:
                err.vertex = i
                raise
            images[i] = rec.P[-1, 0], rec.Q[-1, 0]
        out.append(PhaseDomain(images, t))
    return out


def exact_domain(params: OscillatorParams, path: LevyPath, initial: PhaseDomain, snapshot_times) -> list:
    """Images of ``initial`` under the exact oscillator flow; ``params.p0/q0`` are ignored."""
    out = []
    for t in snapshot_times:
        t = float(t)
        P = np.empty(initial.vertices.shape[0])
        Q = np.empty_like(P)
        for i, (p, q) in enumerate(initial.vertices):
            Pi, Qi = exact_trajectory(params.replace(p0=p, q0=q), path, [t])
            P[i], Q[i] = Pi[0], Qi[0]
        out.append(PhaseDomain(np.column_stack([P, Q]), t))
    return out


def derive_seed(master: int, index: int) -> int:
    """Per-path seed: the SplitMix64 finalizer applied to ``master + (index + 1) * golden``."""
    z = (int(master) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fit_slope(step_sizes, errors):
    """Least-squares slope of log(error) on log(step); returns ``(slope, rms_residual)``."""
    x = np.log(np.asarray(step_sizes, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if x.size < 2:
        raise ConfigError("a slope fit needs at least two step sizes")
    coeffs = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeffs, x)
    return float(coeffs[0]), float(np.sqrt(np.mean(resid ** 2)))



def _path_squared_errors(job):
    index, params, cfg_base, step_sizes, t_end, levy, metric = job
    sys = make_linear_oscillator(params.beta)
    path = sample_path(levy.replace(seed=derive_seed(levy.seed, index)))
    x0 = State([params.p0], [params.q0])
    out = np.empty(len(step_sizes))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for j, dt in enumerate(step_sizes):
                if metric == "endpoint":
                    cfg = cfg_base.replace(dt=dt, t_end=t_end, record_every=10**9)
                    rec = integrate(sys, x0, path, cfg)
                    P, Q = exact_trajectory(params, path, [t_end])
                    out[j] = (rec.P[-1, 0] - P[0]) ** 2 + (rec.Q[-1, 0] - Q[0]) ** 2
                else:
                    cfg = cfg_base.replace(dt=dt, t_end=t_end, record_every=1)
                    rec = integrate(sys, x0, path, cfg)
                    P, Q = exact_trajectory(params, path, rec.times, left=rec.left_limit_mask())
                    out[j] = np.max((rec.P[:, 0] - P) ** 2 + (rec.Q[:, 0] - Q) ** 2)
    except NumericalError as err:
        err.path_index = index
        raise
    return out


def convergence_study(params: OscillatorParams, cfg_base: SchemeConfig, step_sizes, M: int,
                      t_end: float, seed: int, *, levy: LevyConfig | None = None,
                      workers: int = 1, metric: str = "endpoint") -> ConvergenceReport:
    """Mean-square error of the scheme in ``cfg_base`` against the exact oscillator solution.

    Path ``i`` is sampled with seed ``derive_seed(seed, i)`` and every step
    size is run on that same path. ``metric="endpoint"`` measures the error
    at ``t_end``; ``"sup"`` takes the maximum over recorded points, per path,
    before averaging. Squared errors are reduced in path order, so the result
    does not depend on ``workers``.
    """
    steps = np.asarray([float(s) for s in step_sizes])
    if steps.size < 2:
        raise ConfigError("a convergence study needs at least two step sizes")
    if np.any(steps <= 0) or np.any(np.diff(steps) >= 0):
        raise ConfigError("step sizes must be positive and strictly decreasing")
    if int(M) != M or M < 1:
        raise ConfigError(f"number of paths must be a positive integer, got {M!r}")
    if not t_end > 0 or np.any(steps > t_end):
        raise ConfigError("step sizes must not exceed t_end")
    if metric not in ("endpoint", "sup"):
        raise ConfigError(f"unknown metric {metric!r}")
    if M < 10:
        warnings.warn(f"M={M} paths: the mean-square estimate is dominated by statistical noise",
                      RuntimeWarning, stacklevel=2)
    levy = (levy or LevyConfig()).replace(horizon=float(t_end), seed=int(seed))

    jobs = [(i, params, cfg_base, tuple(steps), float(t_end), levy, metric) for i in range(M)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_path_squared_errors, jobs))
    else:
        results = [_path_squared_errors(job) for job in jobs]

    total = np.zeros(steps.size)
    for r in results:
        total += r
    rms = np.sqrt(total / M)
    if np.any(rms <= 0):
        raise NumericalError("zero error at some step size; the slope fit is undefined")
    slope, resid = fit_slope(steps, rms)
    return ConvergenceReport(steps, rms, slope, resid, int(M), metric)


def hamiltonian_trace(record: TrajectoryRecord) -> np.ndarray:
    """``(N, 2)`` array of ``(t, H0)`` rows."""
    if record.hamiltonians is None:
        raise CapabilityError("record carries no Hamiltonian values")
    return np.column_stack([record.times, record.hamiltonians])


def time_average(trace) -> float:
    """Trapezoidal time average of a ``(t, value)`` series; repeated times add zero width."""
    trace = np.asarray(trace, dtype=float)
    t, h = trace[:, 0], trace[:, 1]
    span = t[-1] - t[0]
    if span <= 0:
        raise DomainError("time average needs a positive time span")
    return float(np.trapezoid(h, t) / span)


def inter_jump_increments(record: TrajectoryRecord) -> np.ndarray:
    """Change of H0 across each jump-free stretch.

    Each stretch runs from the start (or a post-jump row) to the next pre-jump
    row (or the end); stretches of zero duration are skipped.
    """
    if record.hamiltonians is None:
        raise CapabilityError("record carries no Hamiltonian values")
    H, t, flags = record.hamiltonians, record.times, record.jump_flags
    starts = [0] + [i for i in range(len(record)) if flags[i]]
    out = []
    for k, s in enumerate(starts):
        e = starts[k + 1] - 1 if k + 1 < len(starts) else len(record) - 1
        if e > s and t[e] > t[s]:
            out.append(H[e] - H[s])
    return np.asarray(out)


def sign_test_pvalue(increments) -> float:
    """Two-sided binomial sign test p-value for ``P(increment > 0) = 1/2``."""
    inc = np.asarray(increments, dtype=float)
    inc = inc[inc != 0]
    if inc.size == 0:
        return 1.0
    return float(stats.binomtest(int(np.sum(inc > 0)), inc.size, 0.5).pvalue)
