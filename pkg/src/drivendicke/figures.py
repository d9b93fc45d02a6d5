"""Figure rendering for scenario outputs (PNG files next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .angular import degeneracy
from .model import Kind
from .scenarios import rescale_factor

_YLABEL = {
    "gammaSR": r"$\gamma_{SR}/(N\Gamma)$",
    "gammaTot": r"$\gamma/(N\Gamma)$",
    "gamma0": r"$\gamma_0/(N\Gamma)$",
    "popSmax": r"$P_{S=N/2}$",
}

_OBS_ATTR = {
    "gammaSR": "gamma_sr",
    "gammaTot": "gamma_tot",
    "gamma0": "gamma0",
    "popSmax": "pop_smax",
}


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    return fig, ax


def _render_trajectories(result) -> list[Path]:
    scenario = result.scenario
    data = result.trajectories or {}
    if not data:
        return []
    fig, ax = _new_axes()
    attr = _OBS_ATTR[scenario.observable]
    rescaled = scenario.rescaling != "none"
    for (n, s) in sorted(data):
        traj = data[(n, s)]
        x = traj.times * (rescale_factor(scenario.rescaling, s) if rescaled else 1.0)
        y = getattr(traj, attr)
        if len(result.scenario.n_qubits) > 1:
            label = f"N = {n}"
        elif scenario.kind is Kind.NONE:
            label = "unperturbed"
        else:
            label = f"s = {s:g}" if s else "s = 0"
        ax.plot(x, y, lw=1.2, label=label)
    ax.set_xlabel(r"$\tau'$" if rescaled else r"$\tau$")
    ax.set_ylabel(_YLABEL[scenario.observable])
    if scenario.log_y:
        ax.set_yscale("log")
    ax.legend(fontsize=8, frameon=False)
    if scenario.title:
        ax.set_title(scenario.title, fontsize=10)
    path = result.out_dir / f"{scenario.name}_trajectory.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def _render_spectra(result) -> list[Path]:
    scenario = result.scenario
    data = result.spectra or {}
    strengths = sorted(s for s in data if s > 0)
    if not strengths:
        return []
    fig, (ax_re, ax_im) = plt.subplots(
        1, 2, figsize=(9.0, 4.0), constrained_layout=True
    )
    count = min(len(data[s]) for s in strengths)
    for i in range(count):
        res = [abs(data[s][i].real) for s in strengths]
        ims = [data[s][i].imag for s in strengths]
        ax_re.plot(strengths, res, "o-", ms=3, lw=0.8)
        ax_im.plot(strengths, ims, "o-", ms=3, lw=0.8)
    ax_re.set_xscale("log")
    ax_re.set_yscale("log")
    ax_re.set_xlabel("perturbation strength")
    ax_re.set_ylabel(r"$|\mathrm{Re}\,\mu_n|$")
    ax_im.set_xscale("log")
    ax_im.set_xlabel("perturbation strength")
    ax_im.set_ylabel(r"$\mathrm{Im}\,\mu_n$")
    if scenario.title:
        fig.suptitle(scenario.title, fontsize=10)
    path = result.out_dir / f"{scenario.name}_spectrum.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def _render_degeneracy(result) -> list[Path]:
    scenario = result.scenario
    ns = list(scenario.n_list)
    if not ns:
        return []
    fig, ax = _new_axes()
    values = [degeneracy(n)[1] for n in ns]
    ax.semilogy(ns, values, "o-", label="closed form")
    rows = result.degeneracy_rows or []
    checked = [(r[0], r[3]) for r in rows if r[3] != ""]
    if checked:
        ax.semilogy(
            [c[0] for c in checked],
            [c[1] for c in checked],
            "s",
            mfc="none",
            ms=10,
            label="Liouvillian null space",
        )
    ax.set_xlabel("N")
    ax.set_ylabel(r"$N_{ss}$")
    ax.legend(frameon=False)
    if scenario.title:
        ax.set_title(scenario.title, fontsize=10)
    path = result.out_dir / f"{scenario.name}_degeneracy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def render(result) -> list[Path]:
    """Render the figures appropriate for one scenario's outputs."""
    paths: list[Path] = []
    if "trajectory" in result.scenario.outputs:
        paths.extend(_render_trajectories(result))
    if "spectrum" in result.scenario.outputs:
        paths.extend(_render_spectra(result))
    if "degeneracy" in result.scenario.outputs:
        paths.extend(_render_degeneracy(result))
    return paths
