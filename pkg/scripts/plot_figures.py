"""Render figures from the CSV files written by the ``levysymp`` CLI.

The package itself does no plotting. This script is an example consumer:

    levysymp phase-domain --out run
    levysymp hamiltonian --out run
    levysymp converge --out run
    python3 scripts/plot_figures.py run

Each CSV found in the directory gets a PNG next to it. Requires matplotlib
(``pip install -e .[plot]``).
"""

import argparse
import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def plot_domains(rows, out):
    groups = defaultdict(list)
    for r in rows:
        groups[r["method"], float(r["snapshot_time"])].append((float(r["P"]), float(r["Q"])))
    methods = sorted({m for m, _ in groups})
    fig, axes = plt.subplots(1, len(methods), figsize=(4 * len(methods), 4), sharex=True, sharey=True)
    for ax, method in zip(axes, methods):
        for (m, t), pts in sorted(groups.items()):
            if m != method:
                continue
            P, Q = zip(*(pts + pts[:1]))
            ax.plot(P, Q, label=f"t={t:g}")
        ax.set_title(method)
        ax.set_xlabel("P")
        ax.set_aspect("equal")
        ax.legend(fontsize="small")
    axes[0].set_ylabel("Q")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def plot_hamiltonian(rows, out):
    t = [float(r["t"]) for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    for key in ("H_exact", "H_ses", "H_eem"):
        ax.plot(t, [float(r[key]) for r in rows], label=key[2:])
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("H0")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def plot_convergence(rows, out):
    tau = [float(r["tau"]) for r in rows]
    err = [float(r["rms_error"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(tau, err, "o-", label="rms error")
    ax.loglog(tau, [err[0] * x / tau[0] for x in tau], "k--", label="slope 1")
    ax.set_xlabel("step size")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


PLOTTERS = {
    "domains.csv": plot_domains,
    "hamiltonian.csv": plot_hamiltonian,
    "convergence.csv": plot_convergence,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("directory", nargs="?", default=".")
    args = ap.parse_args()
    for name, plot in PLOTTERS.items():
        src = os.path.join(args.directory, name)
        if os.path.exists(src):
            dst = os.path.splitext(src)[0] + ".png"
            plot(read(src), dst)
            print(f"wrote {dst}")


if __name__ == "__main__":
    main()
