"""Scenario execution: trajectories, spectra, degeneracy tables, projections.

All delimited output uses fixed formatting (12 significant digits), so
identical inputs produce byte-identical files. Sweep members may run in
parallel; results are always aggregated in strength order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .angular import build_basis, degeneracy
from .lindblad import Trajectory, build_master_equation, evolve, ground_state
from .liouville import (
    build_liouvillian,
    cluster_eigenvalues,
    scaling_fit,
    spectrum,
)
from .model import Kind, PerturbationSpec, realize, reference_config
from .scenarios import Scenario, rescale_factor
from .subspace import build_subspace, coupling_matrix, steady_blocks

__all__ = ["RunError", "RunResult", "run_scenario", "format_float", "write_csv"]


class RunError(RuntimeError):
    """A scenario failed; carries per-strength error records if partial."""

    def __init__(self, message: str, records: list[dict] | None = None):
        super().__init__(message)
        self.records = records or []


@dataclass
class RunResult:
    """Paths written by one scenario run, plus any per-strength failures."""

    scenario: Scenario
    out_dir: Path
    files: list[Path]
    errors: list[dict]
    trajectories: dict = None  # (n, strength) -> Trajectory, for figure rendering
    spectra: dict = None  # strength -> eigenvalue array
    degeneracy_rows: list = None  # (N, N_ss formula, N_ss enumerated, null dim or "")


def format_float(x: float) -> str:
    """Fixed 12-significant-digit representation used in every CSV."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(format_float(v) if isinstance(v, float) else str(v) for v in row)
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _strength_tag(s: float) -> str:
    return format_float(s)


def _sample_grid(scenario: Scenario, strength: float) -> tuple[np.ndarray, float]:
    """Tau sample grid for one sweep member and its tau'-per-tau factor."""
    factor = rescale_factor(scenario.rescaling, strength)
    if scenario.t_max_units == "tau_prime":
        t_max = scenario.t_max / factor
    else:
        t_max = scenario.t_max
    return np.linspace(0.0, t_max, scenario.samples), factor


def _trajectory_job(args) -> tuple[int, float, Trajectory]:
    scenario, n, strength = args
    config = realize(PerturbationSpec(scenario.kind, strength), reference_config(n))
    me = build_master_equation(config)
    taus, _ = _sample_grid(scenario, strength)
    traj = evolve(me, ground_state(config), t_max=taus[-1], sample_times=taus)
    return n, strength, traj


def _write_trajectory(
    scenario: Scenario, out_dir: Path, n: int, strength: float, traj: Trajectory
) -> Path:
    factor = rescale_factor(scenario.rescaling, strength)
    header = ["tau", "gamma0", "gammaSR", "gammaTot", "popSmax"]
    rows = []
    for i, tau in enumerate(traj.times):
        row = [
            float(tau),
            float(traj.gamma0[i]),
            float(traj.gamma_sr[i]),
            float(traj.gamma_tot[i]),
            float(traj.pop_smax[i]),
        ]
        if scenario.rescaling != "none":
            row.append(float(tau * factor))
        rows.append(row)
    if scenario.rescaling != "none":
        header = header + ["tauPrime"]
    name = f"{scenario.name}_trajectory_N{n}"
    if len(scenario.strengths) > 1 or scenario.kind is not Kind.NONE:
        name += f"_s{_strength_tag(strength)}"
    return write_csv(out_dir / f"{name}.csv", header, rows)


def _collapse_report(scenario: Scenario, results: dict) -> dict:
    """Max pairwise deviation of the observable on the common tau' grid."""
    key = {
        "gammaSR": "gamma_sr",
        "gammaTot": "gamma_tot",
        "gamma0": "gamma0",
        "popSmax": "pop_smax",
    }[scenario.observable]
    strengths = sorted(s for s in scenario.strengths if s > 0)
    n = scenario.n_qubits[0]
    curves = {s: getattr(results[(n, s)], key) for s in strengths}
    grid = results[(n, strengths[0])].times * rescale_factor(
        scenario.rescaling, strengths[0]
    )
    worst = 0.0
    pairs = []
    for i, a in enumerate(strengths):
        for b in strengths[i + 1 :]:
            dev = float(np.max(np.abs(curves[a] - curves[b])))
            pairs.append({"strengths": [a, b], "max_deviation": dev})
            worst = max(worst, dev)
    return {
        "scenario": scenario.name,
        "observable": scenario.observable,
        "rescaling": scenario.rescaling,
        "tau_prime_window": [float(grid[0]), float(grid[-1])],
        "max_pairwise_deviation": worst,
        "pairs": pairs,
    }


def _run_trajectories(scenario, out_dir, jobs, result):
    tasks = [
        (scenario, n, s) for n in scenario.n_qubits for s in scenario.strengths
    ]
    outputs = {}
    errors = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_trajectory_job, t): t for t in tasks}
            for fut, task in futures.items():
                try:
                    n, s, traj = fut.result()
                    outputs[(n, s)] = traj
                except Exception as exc:
                    errors.append({"n_qubits": task[1], "strength": task[2], "error": str(exc)})
    else:
        for task in tasks:
            try:
                n, s, traj = _trajectory_job(task)
                outputs[(n, s)] = traj
            except Exception as exc:
                errors.append({"n_qubits": task[1], "strength": task[2], "error": str(exc)})
    for (n, s) in sorted(outputs):
        result.files.append(_write_trajectory(scenario, out_dir, n, s, outputs[(n, s)]))
    # joined file keyed by strength (single-N sweeps)
    if len(scenario.n_qubits) == 1 and len(scenario.strengths) > 1 and outputs:
        n = scenario.n_qubits[0]
        header = ["strength", "tau", "tauPrime", "gamma0", "gammaSR", "gammaTot", "popSmax"]
        rows = []
        for s in sorted(scenario.strengths):
            if (n, s) not in outputs:
                continue
            traj = outputs[(n, s)]
            factor = rescale_factor(scenario.rescaling, s)
            for i, tau in enumerate(traj.times):
                rows.append(
                    [
                        float(s),
                        float(tau),
                        float(tau * factor),
                        float(traj.gamma0[i]),
                        float(traj.gamma_sr[i]),
                        float(traj.gamma_tot[i]),
                        float(traj.pop_smax[i]),
                    ]
                )
        result.files.append(
            write_csv(out_dir / f"{scenario.name}_trajectories.csv", header, rows)
        )
    # collapse report: only meaningful when all curves share the tau' grid
    nonzero = [s for s in scenario.strengths if s > 0]
    complete = all((scenario.n_qubits[0], s) in outputs for s in nonzero)
    if (
        scenario.rescaling != "none"
        and scenario.t_max_units == "tau_prime"
        and len(scenario.n_qubits) == 1
        and len(nonzero) >= 2
        and complete
    ):
        report = _collapse_report(scenario, outputs)
        path = out_dir / f"{scenario.name}_collapse.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        result.files.append(path)
    result.trajectories = outputs
    result.errors.extend(errors)


def _spectrum_job(args):
    scenario, strength = args
    n = scenario.n_qubits[0]
    config = realize(PerturbationSpec(scenario.kind, strength), reference_config(n))
    sd = spectrum(build_liouvillian(build_master_equation(config)))
    count = scenario.cluster_size or degeneracy(n)[1]
    return strength, cluster_eigenvalues(sd, count)


def _run_spectra(scenario, out_dir, jobs, result):
    tasks = [(scenario, s) for s in scenario.strengths]
    values = {}
    errors = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_spectrum_job, t): t for t in tasks}
            for fut, task in futures.items():
                try:
                    s, eigs = fut.result()
                    values[s] = eigs
                except Exception as exc:
                    errors.append({"strength": task[1], "error": str(exc)})
    else:
        for task in tasks:
            try:
                s, eigs = _spectrum_job(task)
                values[s] = eigs
            except Exception as exc:
                errors.append({"strength": task[1], "error": str(exc)})
    header = ["index", "re", "im", "strength", "kind"]
    joined = []
    for s in sorted(scenario.strengths):
        if s not in values:
            continue
        rows = [
            [i, float(mu.real), float(mu.imag), float(s), scenario.kind.value]
            for i, mu in enumerate(values[s])
        ]
        joined.extend(rows)
        result.files.append(
            write_csv(
                out_dir / f"{scenario.name}_spectrum_s{_strength_tag(s)}.csv",
                header,
                rows,
            )
        )
    if len(scenario.strengths) > 1:
        result.files.append(
            write_csv(out_dir / f"{scenario.name}_spectra.csv", header, joined)
        )
    fit_strengths = [
        s
        for s in scenario.strengths
        if s > 0
        and (scenario.fit_max_strength is None or s <= scenario.fit_max_strength)
    ]
    if scenario.fit_exponents and len(fit_strengths) >= 3 and not errors:
        n = scenario.n_qubits[0]
        n_track = (scenario.cluster_size or degeneracy(n)[1]) - 1
        fit = scaling_fit(scenario.kind, fit_strengths, n_qubits=n, n_track=n_track)
        rows = [
            [i, float(fit.slopes[i])]
            + [float(abs(fit.tracked[i, j].real)) for j in range(len(fit.strengths))]
            for i in range(n_track)
        ]
        header = ["index", "slope"] + [
            f"absRe_s{_strength_tag(s)}" for s in fit.strengths
        ]
        result.files.append(
            write_csv(out_dir / f"{scenario.name}_exponents.csv", header, rows)
        )
    result.spectra = values
    result.errors.extend(errors)


def _run_degeneracy(scenario, out_dir, result):
    if scenario.degeneracy_columns == "nss":
        rows = [[n, degeneracy(n)[1]] for n in scenario.n_list]
        result.files.append(
            write_csv(out_dir / f"{scenario.name}_nss.csv", ["N", "N_ss"], rows)
        )
        return
    rows = []
    for n in scenario.n_list:
        table, n_ss = degeneracy(n)
        for s in sorted(table):
            rows.append([n, float(s), table[s], n_ss])
    result.files.append(
        write_csv(
            out_dir / f"{scenario.name}_degeneracy.csv",
            ["N", "S", "D_S", "N_ss"],
            rows,
        )
    )
    comparison = []
    for n in scenario.n_list:
        table, n_ss = degeneracy(n)
        basis = build_basis(n)
        null_dim = ""
        if n <= scenario.liouville_check_max:
            sd = spectrum(build_liouvillian(build_master_equation(reference_config(n))))
            null_dim = sd.null_dim
        comparison.append([n, n_ss, basis.n_ss, null_dim])
    result.files.append(
        write_csv(
            out_dir / f"{scenario.name}_comparison.csv",
            ["N", "N_ss_formula", "N_ss_enumerated", "liouville_null_dim"],
            comparison,
        )
    )
    result.degeneracy_rows = comparison


def _run_coupling(scenario, out_dir, result):
    n = scenario.n_qubits[0]
    config = reference_config(n)
    proj = build_subspace(build_basis(n), steady_blocks(config))
    header = ["index", "re", "im", "strength", "kind"]
    for s in sorted(scenario.strengths):
        projected = coupling_matrix(proj, PerturbationSpec(scenario.kind, s), config)
        eigs = np.linalg.eigvals(projected.coupling)
        order = np.lexsort((eigs.imag, -eigs.real))
        rows = [
            [i, float(mu.real), float(mu.imag), float(s), scenario.kind.value]
            for i, mu in enumerate(eigs[order])
        ]
        result.files.append(
            write_csv(
                out_dir / f"{scenario.name}_coupling_s{_strength_tag(s)}.csv",
                header,
                rows,
            )
        )
        entries = [
            [i, j, float(projected.coupling[i, j].real), float(projected.coupling[i, j].imag)]
            for i in range(projected.n_ss)
            for j in range(projected.n_ss)
        ]
        result.files.append(
            write_csv(
                out_dir / f"{scenario.name}_coupling_matrix_s{_strength_tag(s)}.csv",
                ["row", "col", "re", "im"],
                entries,
            )
        )


def run_scenario(
    scenario: Scenario,
    out_dir,
    jobs: int = 1,
    figures: bool = True,
) -> RunResult:
    """Execute every requested output of one scenario.

    Writes CSV/JSON outputs (and PNG figures unless disabled) into
    ``out_dir``; raises :class:`RunError` carrying per-strength records when
    any sweep member fails.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult(scenario=scenario, out_dir=out, files=[], errors=[])
    if "trajectory" in scenario.outputs:
        _run_trajectories(scenario, out, jobs, result)
    if "spectrum" in scenario.outputs:
        _run_spectra(scenario, out, jobs, result)
    if "degeneracy" in scenario.outputs:
        _run_degeneracy(scenario, out, result)
    if "coupling-matrix" in scenario.outputs:
        _run_coupling(scenario, out, result)
    if figures:
        from . import figures as figmod

        result.files.extend(figmod.render(result))
    if result.errors:
        raise RunError(
            f"scenario {scenario.name}: {len(result.errors)} sweep member(s) failed",
            records=result.errors,
        )
    return result
