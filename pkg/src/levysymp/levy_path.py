"""Compound-Poisson driving paths.

Each channel ``r`` carries an independent compound Poisson process

    L_r(t) = sum_{k : tau_k <= t} R_k

with Exp(intensity) waiting times and N(0, sigma^2) jump sizes. Paths are
stored as explicit event lists (never on a grid) so that integrators can land
exactly on every jump time.

Sampling recipe, fixed so that a seed reproduces a path bit-for-bit:

* ``numpy.random.SeedSequence(seed)`` is spawned into one child per channel,
  and each child into two PCG64 streams: one for waiting times, one for sizes.
* Uniforms on the open interval (0, 1) are built as ``(k + 0.5) / 2**52``
  with ``k`` a uniform 52-bit integer.
* Waiting times use the inverse CDF ``-log(U) / intensity``.
* Jump sizes use the inverse normal CDF, ``sigma * ndtri(U)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ConfigError, DomainError

__all__ = [
    "LevyConfig",
    "LevyPath",
    "sample_path",
    "path_value",
    "jumps_in",
    "write_path_csv",
]

_TWO52 = float(2**52)


@dataclass(frozen=True)
class LevyConfig:
    """Parameters of the driving compound-Poisson noise.

    ``brownian_coefficient`` is carried for completeness but must be 0; the
    Brownian part of the noise is not supported.
    """

    intensity: float = 5.0
    jump_size_sigma: float = 0.2
    channels: int = 1
    horizon: float = 20.0
    seed: int = 0
    brownian_coefficient: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.intensity) and self.intensity > 0):
            raise ConfigError(f"intensity must be positive, got {self.intensity!r}")
        if not (np.isfinite(self.jump_size_sigma) and self.jump_size_sigma > 0):
            raise ConfigError(f"jump_size_sigma must be positive, got {self.jump_size_sigma!r}")
        if int(self.channels) != self.channels or self.channels < 1:
            raise ConfigError(f"channels must be a positive integer, got {self.channels!r}")
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon must be positive, got {self.horizon!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.brownian_coefficient != 0:
            raise ConfigError("brownian_coefficient must be 0: Brownian noise is not supported")

    def replace(self, **changes) -> "LevyConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return LevyConfig(**values)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float).reshape(-1)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LevyPath:
    """One realization: per-channel jump times and jump sizes on (0, horizon]."""

    config: LevyConfig
    times: tuple = field(repr=False)
    sizes: tuple = field(repr=False)

    def __post_init__(self):
        times = tuple(_frozen(t) for t in self.times)
        sizes = tuple(_frozen(s) for s in self.sizes)
        if len(times) != self.config.channels or len(sizes) != self.config.channels:
            raise ConfigError(
                f"expected {self.config.channels} channels, got {len(times)} time and "
                f"{len(sizes)} size arrays")
        for r, (t, s) in enumerate(zip(times, sizes)):
            if t.shape != s.shape:
                raise ConfigError(f"channel {r}: {t.size} times but {s.size} sizes")
            if t.size == 0:
                continue
            if t[0] <= 0 or t[-1] > self.config.horizon:
                raise ConfigError(f"channel {r}: jump times must lie in (0, horizon]")
            if np.any(np.diff(t) <= 0):
                raise ConfigError(f"channel {r}: jump times must be strictly increasing")
            if not np.all(np.isfinite(s)):
                raise ConfigError(f"channel {r}: jump sizes must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def from_jumps(cls, config: LevyConfig, jumps) -> "LevyPath":
        """Build a path from ``jumps[r] = [(time, size), ...]``."""
        times, sizes = [], []
        for channel in jumps:
            channel = list(channel)
            times.append([t for t, _ in channel])
            sizes.append([s for _, s in channel])
        return cls(config, tuple(times), tuple(sizes))

    @property
    def channels(self) -> int:
        return self.config.channels

    @property
    def horizon(self) -> float:
        return self.config.horizon

    def num_jumps(self, channel: int | None = None) -> int:
        if channel is None:
            return sum(t.size for t in self.times)
        return self.times[channel].size

    def events(self, t_end: float | None = None):
        """All jumps up to ``t_end`` as ``(time, channel, size)``, ordered by time then channel."""
        out = []
        for r, (ts, ss) in enumerate(zip(self.times, self.sizes)):
            k = ts.size if t_end is None else int(np.searchsorted(ts, t_end, side="right"))
            out.extend((float(ts[i]), r, float(ss[i])) for i in range(k))
        out.sort(key=lambda e: (e[0], e[1]))
        return out


def _open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    k = rng.integers(0, 2**52, size=n, dtype=np.int64)
    return (k.astype(float) + 0.5) / _TWO52


def _sample_times(rng, intensity, horizon):
    chunk = int(intensity * horizon + 5.0 * np.sqrt(intensity * horizon)) + 16
    pieces = []
    last = 0.0
    while True:
        w = -np.log(_open_uniforms(rng, chunk)) / intensity
        cum = last + np.cumsum(w)
        pieces.append(cum)
        last = cum[-1]
        if last > horizon:
            break
    times = np.concatenate(pieces)
    times = times[times <= horizon]
    if times.size > 1:
        # a waiting time below one ulp of the clock produces a tie; drop it
        keep = np.concatenate(([True], np.diff(times) > 0))
        times = times[keep]
    return times


def sample_path(config: LevyConfig) -> LevyPath:
    """Draw one path; identical configs (seed included) give identical paths."""
    if not isinstance(config, LevyConfig):
        raise ConfigError("sample_path expects a LevyConfig")
    times, sizes = [], []
    for child in np.random.SeedSequence(config.seed).spawn(config.channels):
        time_ss, size_ss = child.spawn(2)
        t = _sample_times(np.random.Generator(np.random.PCG64(time_ss)),
                          config.intensity, config.horizon)
        u = _open_uniforms(np.random.Generator(np.random.PCG64(size_ss)), t.size)
        times.append(t)
        sizes.append(config.jump_size_sigma * ndtri(u))
    return LevyPath(config, tuple(times), tuple(sizes))


def _check_channel(path: LevyPath, channel: int):
    if not 0 <= channel < path.channels:
        raise DomainError(f"channel {channel} out of range for {path.channels} channel(s)")


def path_value(path: LevyPath, channel: int, t: float) -> float:
    """Cadlag value of channel ``channel`` at time ``t``: sum of sizes with time <= t."""
    _check_channel(path, channel)
    if not 0 <= t <= path.horizon:
        raise DomainError(f"t={t!r} outside [0, {path.horizon!r}]")
    k = int(np.searchsorted(path.times[channel], t, side="right"))
    return float(np.sum(path.sizes[channel][:k]))


def jumps_in(path: LevyPath, channel: int, t0: float, t1: float):
    """Jumps with ``t0 < time <= t1``, in time order, as ``(time, size)`` pairs."""
    _check_channel(path, channel)
    if not t0 < t1:
        raise DomainError(f"empty interval ({t0!r}, {t1!r}]")
    if t0 < 0 or t1 > path.horizon:
        raise DomainError(f"interval ({t0!r}, {t1!r}] outside [0, {path.horizon!r}]")
    ts, ss = path.times[channel], path.sizes[channel]
    lo = int(np.searchsorted(ts, t0, side="right"))
    hi = int(np.searchsorted(ts, t1, side="right"))
    return [(float(ts[i]), float(ss[i])) for i in range(lo, hi)]


def write_path_csv(path: LevyPath, filename) -> None:
    """Write ``channel,jump_index,jump_time,jump_size`` rows."""
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["channel", "jump_index", "jump_time", "jump_size"])
        for r, (ts, ss) in enumerate(zip(path.times, path.sizes)):
            for k, (t, s) in enumerate(zip(ts, ss)):
                w.writerow([r, k, f"{t:.17g}", f"{s:.17g}"])
