"""Command-line experiments for the kicked linear oscillator.

Subcommands write CSV files (one header line, 17 significant digits) to the
``--out`` directory:

    simulate      trajectory.csv [exact.csv] [path.csv]
    converge      convergence.csv, prints the fitted slope
    phase-domain  domains.csv, areas.csv
    hamiltonian   hamiltonian.csv

Options may also come from ``--config FILE`` holding ``key=value`` lines
(keys are the long option names, with or without the leading dashes; ``#``
starts a comment). Flags given on the command line override the file.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings

import numpy as np

from .diagnostics import circle_domain, convergence_study, evolve_domain, exact_domain, shoelace_area
from .errors import ConfigError, LevySympError, NumericalError
from .hamiltonian import State, make_linear_oscillator
from .integrators import Scheme, SchemeConfig, integrate
from .levy_path import LevyConfig, sample_path, write_path_csv
from .oracle import OscillatorParams, exact_trajectory

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

DEFAULT_SEED = 12345


def _floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _flag(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (type, default); per-command default overrides follow
OPTIONS = {
    "scheme": (str, "ses"),
    "dt": (float, 0.08),
    "t_end": (float, 20.0),
    "beta": (float, 1.0),
    "lambda": (float, 5.0),
    "sigma": (float, 0.2),
    "p0": (float, 0.0),
    "q0": (float, 1.0),
    "seed": (int, DEFAULT_SEED),
    "paths": (int, 100),
    "steps": (_floats, [0.02, 0.01, 0.005, 0.0025]),
    "snapshots": (_floats, [0.0, 4.0, 8.0]),
    "slope_band": (_floats, [0.85, 1.15]),
    "workers": (int, 1),
    "record_every": (int, 1),
    "with_exact": (_flag, False),
    "dump_path": (_flag, False),
    "out": (str, "."),
}

COMMAND_DEFAULTS = {
    "phase-domain": {"p0": 0.2, "q0": 0.8},
    "hamiltonian": {"p0": 0.2, "q0": 0.8},
}


def read_config_file(filename) -> dict:
    values = {}
    with open(filename) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{filename}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in OPTIONS:
                raise ConfigError(f"{filename}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scheme", choices=["ses", "eem"], default=None)
    common.add_argument("--dt", type=float, default=None, help="maximum drift step (default 0.08)")
    common.add_argument("--t-end", dest="t_end", type=float, default=None, help="end time (default 20)")
    common.add_argument("--beta", type=float, default=None, help="noise strength (default 1)")
    common.add_argument("--lambda", dest="lambda", type=float, default=None, help="jump intensity (default 5)")
    common.add_argument("--sigma", type=float, default=None, help="jump-size std-dev (default 0.2)")
    common.add_argument("--p0", type=float, default=None)
    common.add_argument("--q0", type=float, default=None)
    common.add_argument("--seed", type=int, default=None, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--paths", type=int, default=None, help="Monte Carlo paths M (default 100)")
    common.add_argument("--steps", type=_floats, default=None, help="step sizes, e.g. 0.02,0.01")
    common.add_argument("--snapshots", type=_floats, default=None, help="snapshot times, e.g. 0,4,8")
    common.add_argument("--slope-band", dest="slope_band", type=_floats, default=None,
                        help="accepted slope interval LO,HI (default 0.85,1.15)")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--record-every", dest="record_every", type=int, default=None)
    common.add_argument("--with-exact", dest="with_exact", action="store_const", const=True, default=None)
    common.add_argument("--dump-path", dest="dump_path", action="store_const", const=True, default=None)
    common.add_argument("--out", default=None, help="output directory (default .)")
    common.add_argument("--config", default=None, help="key=value config file")

    parser = argparse.ArgumentParser(prog="levysymp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="one trajectory of the chosen scheme")
    sub.add_parser("converge", parents=[common], help="mean-square convergence study")
    sub.add_parser("phase-domain", parents=[common], help="evolution of a circle of initial states")
    sub.add_parser("hamiltonian", parents=[common], help="H0 along SES, exact and EEM")
    return parser


def resolve(args) -> argparse.Namespace:
    """Merge flags, config file and defaults into one namespace."""
    file_values = read_config_file(args.config) if args.config else {}
    defaults = dict((k, v[1]) for k, v in OPTIONS.items())
    defaults.update(COMMAND_DEFAULTS.get(args.command, {}))
    out = argparse.Namespace(command=args.command)
    for key, (conv, _) in OPTIONS.items():
        value = getattr(args, key)
        if value is None and key in file_values:
            try:
                value = conv(file_values[key])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"config value for {key!r}: {exc}") from None
        if value is None:
            value = defaults[key]
        setattr(out, key, value)
    return out


def _write_rows(filename, header, rows):
    with open(filename, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def _levy(cfg, horizon):
    return LevyConfig(intensity=cfg.lambda_, jump_size_sigma=cfg.sigma, channels=1,
                      horizon=horizon, seed=cfg.seed)


def _scheme_cfg(cfg, scheme=None):
    return SchemeConfig(scheme=scheme or cfg.scheme, dt=cfg.dt, t_end=cfg.t_end,
                        record_every=cfg.record_every)



def cmd_simulate(cfg) -> int:
    sysm = make_linear_oscillator(cfg.beta)
    path = sample_path(_levy(cfg, cfg.t_end))
    rec = integrate(sysm, State([cfg.p0], [cfg.q0]), path, _scheme_cfg(cfg))
    rec.to_csv(os.path.join(cfg.out, "trajectory.csv"))
    if cfg.with_exact:
        params = OscillatorParams(cfg.beta, cfg.p0, cfg.q0)
        P, Q = exact_trajectory(params, path, rec.times, left=rec.left_limit_mask())
        H = 0.5 * (P ** 2 + Q ** 2)
        _write_rows(os.path.join(cfg.out, "exact.csv"), ["t", "P_1", "Q_1", "H0", "jump_flag"],
                    ((float(t), float(p), float(q), float(h), int(f))
                     for t, p, q, h, f in zip(rec.times, P, Q, H, rec.jump_flags)))
    if cfg.dump_path:
        write_path_csv(path, os.path.join(cfg.out, "path.csv"))
    print(f"wrote {len(rec)} rows, {path.num_jumps()} jumps, final t={float(rec.times[-1])!r}")
    return EXIT_OK


def cmd_converge(cfg) -> int:
    if len(cfg.steps) < 2:
        raise ConfigError("at least two step sizes are needed to fit a slope")
    if len(cfg.slope_band) != 2:
        raise ConfigError("--slope-band takes exactly two numbers")
    params = OscillatorParams(cfg.beta, cfg.p0, cfg.q0)
    levy = _levy(cfg, cfg.t_end)
    report = convergence_study(params, _scheme_cfg(cfg), cfg.steps, cfg.paths, cfg.t_end,
                               cfg.seed, levy=levy, workers=cfg.workers)
    report.to_csv(os.path.join(cfg.out, "convergence.csv"))
    lo, hi = cfg.slope_band
    ok = lo <= report.fitted_slope <= hi
    print(f"fitted slope: {report.fitted_slope:.6f} (residual {report.fit_residual:.3g}, "
          f"M={report.num_paths}) {'within' if ok else 'OUTSIDE'} [{lo}, {hi}]")
    if cfg.dump_path:
        write_path_csv(sample_path(levy), os.path.join(cfg.out, "path.csv"))
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_phase_domain(cfg) -> int:
    snaps = sorted(set(cfg.snapshots))
    horizon = max(max(snaps), cfg.dt)
    path = sample_path(_levy(cfg, horizon))
    sysm = make_linear_oscillator(cfg.beta)
    initial = circle_domain((cfg.p0, cfg.q0), 1.0, 256)
    params = OscillatorParams(cfg.beta, cfg.p0, cfg.q0)
    results = {
        "ses": evolve_domain(sysm, path, _scheme_cfg(cfg, Scheme.SES), initial, snaps),
        "eem": evolve_domain(sysm, path, _scheme_cfg(cfg, Scheme.EEM), initial, snaps),
        "exact": exact_domain(params, path, initial, snaps),
    }
    dom_rows, area_rows = [], []
    for method, domains in results.items():
        for d in domains:
            area_rows.append((method, float(d.timestamp), shoelace_area(d)))
            for i, (p, q) in enumerate(d.vertices):
                dom_rows.append((method, float(d.timestamp), i, float(p), float(q)))
    _write_rows(os.path.join(cfg.out, "domains.csv"),
                ["method", "snapshot_time", "vertex_index", "P", "Q"], dom_rows)
    _write_rows(os.path.join(cfg.out, "areas.csv"),
                ["method", "snapshot_time", "shoelace_area"], area_rows)
    if cfg.dump_path:
        write_path_csv(path, os.path.join(cfg.out, "path.csv"))
    for method, t, a in area_rows:
        print(f"{method:5s} t={t:g} area={a:.10f}")
    return EXIT_OK


def cmd_hamiltonian(cfg) -> int:
    sysm = make_linear_oscillator(cfg.beta)
    path = sample_path(_levy(cfg, cfg.t_end))
    x0 = State([cfg.p0], [cfg.q0])
    ses = integrate(sysm, x0, path, _scheme_cfg(cfg, Scheme.SES))
    eem = integrate(sysm, x0, path, _scheme_cfg(cfg, Scheme.EEM))
    if not np.array_equal(ses.times, eem.times):
        raise NumericalError("SES and EEM records are not aligned")
    P, Q = exact_trajectory(OscillatorParams(cfg.beta, cfg.p0, cfg.q0), path, ses.times,
                            left=ses.left_limit_mask())
    H_exact = 0.5 * (P ** 2 + Q ** 2)
    _write_rows(os.path.join(cfg.out, "hamiltonian.csv"),
                ["t", "H_ses", "H_exact", "H_eem", "jump_flag"],
                ((float(t), float(a), float(b), float(c), int(f)) for t, a, b, c, f in
                 zip(ses.times, ses.hamiltonians, H_exact, eem.hamiltonians, ses.jump_flags)))
    if cfg.dump_path:
        write_path_csv(path, os.path.join(cfg.out, "path.csv"))
    print(f"H at t={ses.times[-1]:g}: ses={ses.hamiltonians[-1]:.6f} "
          f"exact={H_exact[-1]:.6f} eem={eem.hamiltonians[-1]:.6f}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "phase-domain": cmd_phase_domain,
    "hamiltonian": cmd_hamiltonian,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        cfg.lambda_ = getattr(cfg, "lambda")
        if cfg.paths == 1 and args.command == "converge":
            print("warning: M=1, the slope is dominated by statistical noise", file=sys.stderr)
        os.makedirs(cfg.out, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return COMMANDS[args.command](cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (LevySympError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
