"""Scenario configuration: JSON schema, validation, and time rescalings.

A scenario file is a JSON object with a ``schema_version`` field and one of
four output kinds: ``trajectory``, ``spectrum``, ``degeneracy``, or
``coupling-matrix``. Rescaling rules map integration time tau to the
figure axis tau':

    none                  tau' = tau
    dephasing-linear      tau' = 1000 * s * tau        (s = Gamma_phi/Gamma)
    phase-quadratic       tau' = (400 s)^2 * tau       (s = k_phi)
    separation-quadratic  tau' = (400 s)^2 * tau       (s = delta-d/lambda)
    detuning-quadratic    tau' = (s / 0.05)^2 * tau    (s = k_Delta)

with tau' = tau for the unperturbed (s = 0) member of a sweep. When
``t_max_units`` is ``tau_prime`` the horizon is fixed on the tau' axis and
converted per strength, so every curve shares the same tau' sample grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .model import Kind

__all__ = ["Scenario", "ScenarioError", "load_scenario", "rescale_factor", "RESCALINGS"]

SCHEMA_VERSION = 1

# rescaling name -> (required kind, tau' = factor(strength) * tau)
RESCALINGS: dict[str, tuple[Kind | None, object]] = {
    "none": (None, lambda s: 1.0),
    "dephasing-linear": (Kind.DEPHASING, lambda s: 1000.0 * s),
    "phase-quadratic": (Kind.DRIVING_PHASE, lambda s: (400.0 * s) ** 2),
    "separation-quadratic": (Kind.SEPARATION, lambda s: (400.0 * s) ** 2),
    "detuning-quadratic": (Kind.LINEAR_DETUNING, lambda s: (s / 0.05) ** 2),
}

_KINDS = {k.value: k for k in Kind}
_OUTPUTS = ("trajectory", "spectrum", "degeneracy", "coupling-matrix")


class ScenarioError(ValueError):
    """Invalid or inconsistent scenario configuration."""


def rescale_factor(rescaling: str, strength: float) -> float:
    """tau' / tau for one sweep member; 1 for the unperturbed member."""
    if strength == 0.0:
        return 1.0
    return RESCALINGS[rescaling][1](strength)


@dataclass(frozen=True)
class Scenario:
    """One validated scenario; see the module docstring for field semantics."""

    name: str
    outputs: tuple[str, ...]
    n_qubits: tuple[int, ...] = (4,)
    kind: Kind = Kind.NONE
    strengths: tuple[float, ...] = (0.0,)
    t_max: float = 30.0
    t_max_units: str = "tau"
    samples: int = 201
    rescaling: str = "none"
    observable: str = "gammaSR"
    log_y: bool = False
    cluster_size: int | None = None
    fit_exponents: bool = False
    fit_max_strength: float | None = None
    n_list: tuple[int, ...] = ()
    liouville_check_max: int = 0
    degeneracy_columns: str = "full"
    title: str = ""

    def with_strengths(self, strengths) -> "Scenario":
        return replace(self, strengths=tuple(float(s) for s in strengths))


def _require(cond: bool, message: str):
    if not cond:
        raise ScenarioError(message)


def load_scenario(source) -> Scenario:
    """Parse and validate a scenario from a path, file object, or dict."""
    if isinstance(source, dict):
        raw = source
    elif hasattr(source, "read"):
        raw = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = raw.get("schema_version")
    _require(version == SCHEMA_VERSION, f"unsupported schema_version {version!r}")
    name = raw.get("name")
    _require(isinstance(name, str) and name != "", "missing scenario name")

    outputs = raw.get("outputs")
    _require(
        isinstance(outputs, list) and outputs and all(o in _OUTPUTS for o in outputs),
        f"outputs must be a non-empty list drawn from {_OUTPUTS}",
    )

    n_raw = raw.get("n_qubits", 4)
    n_list_traj = tuple(n_raw) if isinstance(n_raw, list) else (int(n_raw),)
    _require(
        all(isinstance(n, int) and 1 <= n <= 8 for n in n_list_traj),
        "n_qubits entries must be integers in 1..8",
    )

    pert = raw.get("perturbation", {"kind": "none", "strengths": [0.0]})
    _require(isinstance(pert, dict), "perturbation must be an object")
    kind_name = pert.get("kind", "none")
    _require(kind_name in _KINDS, f"unknown perturbation kind {kind_name!r}")
    kind = _KINDS[kind_name]
    strengths = pert.get("strengths")
    _require(
        isinstance(strengths, list) and len(strengths) > 0,
        "perturbation.strengths must be a non-empty list",
    )
    strengths = tuple(float(s) for s in strengths)
    _require(all(s >= 0 for s in strengths), "strengths must be >= 0")

    rescaling = raw.get("rescaling", "none")
    _require(rescaling in RESCALINGS, f"unknown rescaling {rescaling!r}")
    required_kind = RESCALINGS[rescaling][0]
    _require(
        required_kind is None or required_kind is kind,
        f"rescaling {rescaling!r} requires perturbation kind "
        f"{required_kind.value if required_kind else 'none'}, got {kind.value}",
    )

    t_max = float(raw.get("t_max", 30.0))
    _require(t_max > 0, "t_max must be > 0")
    t_max_units = raw.get("t_max_units", "tau")
    _require(t_max_units in ("tau", "tau_prime"), "t_max_units must be tau or tau_prime")
    _require(
        t_max_units == "tau" or rescaling != "none",
        "t_max_units=tau_prime needs a rescaling rule",
    )

    samples = int(raw.get("samples", 201))
    _require(2 <= samples <= 100000, "samples must be in 2..100000")

    observable = raw.get("observable", "gammaSR")
    _require(
        observable in ("gammaSR", "gammaTot", "gamma0", "popSmax"),
        f"unknown observable {observable!r}",
    )

    cluster_size = raw.get("cluster_size")
    if cluster_size is not None:
        cluster_size = int(cluster_size)
        _require(cluster_size >= 1, "cluster_size must be >= 1")

    n_list = tuple(int(n) for n in raw.get("n_list", []))
    if "degeneracy" in outputs:
        _require(
            len(n_list) > 0 and all(1 <= n <= 8 for n in n_list),
            "degeneracy output needs n_list with entries in 1..8",
        )
    liou_max = int(raw.get("liouville_check_max", 0))
    _require(0 <= liou_max <= 6, "liouville_check_max must be in 0..6")
    deg_cols = raw.get("degeneracy_columns", "full")
    _require(deg_cols in ("full", "nss"), "degeneracy_columns must be full or nss")

    return Scenario(
        name=name,
        outputs=tuple(outputs),
        n_qubits=n_list_traj,
        kind=kind,
        strengths=strengths,
        t_max=t_max,
        t_max_units=t_max_units,
        samples=samples,
        rescaling=rescaling,
        observable=observable,
        log_y=bool(raw.get("log_y", False)),
        cluster_size=cluster_size,
        fit_exponents=bool(raw.get("fit_exponents", False)),
        fit_max_strength=(
            float(raw["fit_max_strength"]) if "fit_max_strength" in raw else None
        ),
        n_list=n_list,
        liouville_check_max=liou_max,
        degeneracy_columns=deg_cols,
        title=str(raw.get("title", "")),
    )
