"""Command-line front end.

Subcommands: ``run``, ``sweep``, ``spectrum``, ``degeneracy``, ``project``.
Outputs go to ``--out`` (default: $DRIVENDICKE_OUT or ./out). Invalid
configuration exits with code 2 and a machine-readable JSON error on stderr;
runtime failures exit with code 1. ``--seed`` is accepted for interface
stability but unused: every computation is deterministic.

Bundled scenarios (fig1..fig11, table1) live in the package data directory
and can be addressed by name, e.g. ``drivendicke run --config fig3``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .model import ConfigurationError, Kind
from .scenarios import Scenario, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _error_json(kind: str, message: str, **context) -> str:
    return json.dumps({"error": {"type": kind, "message": message, **context}})


def _fail(kind: str, message: str, code: int, **context) -> int:
    print(_error_json(kind, message, **context), file=sys.stderr)
    return code


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("DRIVENDICKE_OUT", "out"))


def _resolve_config(name_or_path: str):
    """A --config value is a path, or the name of a bundled scenario."""
    path = Path(name_or_path)
    if path.exists():
        return path
    candidate = resources.files("drivendicke").joinpath(
        f"data/scenarios/{name_or_path}.json"
    )
    if candidate.is_file():
        return candidate
    raise ScenarioError(f"no such config file or bundled scenario: {name_or_path}")


def _run_common(args, scenario: Scenario) -> int:
    from .runner import RunError, run_scenario

    try:
        result = run_scenario(
            scenario,
            _out_dir(args),
            jobs=args.jobs,
            figures=not args.no_figures,
        )
    except RunError as exc:
        return _fail(
            "run-failure",
            str(exc),
            EXIT_RUNTIME,
            scenario=scenario.name,
            records=exc.records,
        )
    except (ConfigurationError, ScenarioError) as exc:
        return _fail("configuration", str(exc), EXIT_USAGE, scenario=scenario.name)
    except Exception as exc:
        return _fail(
            "runtime", f"{type(exc).__name__}: {exc}", EXIT_RUNTIME, scenario=scenario.name
        )
    for path in result.files:
        print(path)
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(_resolve_config(args.config))
    except (ScenarioError, OSError, json.JSONDecodeError) as exc:
        return _fail("configuration", str(exc), EXIT_USAGE)
    return _run_common(args, scenario)


def _cmd_sweep(args) -> int:
    try:
        scenario = load_scenario(_resolve_config(args.config))
        if args.strengths is not None:
            strengths = _parse_strengths(args.strengths)
            scenario = scenario.with_strengths(strengths)
        if len(scenario.strengths) < 1:
            raise ScenarioError("sweep needs at least one strength")
    except (ScenarioError, OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail("configuration", str(exc), EXIT_USAGE)
    return _run_common(args, scenario)


def _parse_strengths(text: str) -> list[float]:
    values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    if not values:
        raise ScenarioError("empty strength list")
    if any(v < 0 for v in values):
        raise ScenarioError("strengths must be >= 0")
    return values


def _cmd_spectrum(args) -> int:
    try:
        if args.config:
            scenario = load_scenario(_resolve_config(args.config))
        else:
            scenario = load_scenario(
                {
                    "schema_version": 1,
                    "name": args.name,
                    "n_qubits": args.n_qubits,
                    "perturbation": {
                        "kind": args.kind,
                        "strengths": _parse_strengths(args.strengths),
                    },
                    "outputs": ["spectrum"],
                    "cluster_size": args.cluster_size,
                    "fit_exponents": args.fit,
                }
            )
    except (ScenarioError, OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail("configuration", str(exc), EXIT_USAGE)
    return _run_common(args, scenario)


def _cmd_degeneracy(args) -> int:
    try:
        scenario = load_scenario(
            {
                "schema_version": 1,
                "name": args.name,
                "outputs": ["degeneracy"],
                "n_list": list(range(args.n_min, args.n_max + 1)),
                "liouville_check_max": args.liouville_max,
                "degeneracy_columns": "nss" if args.nss_only else "full",
            }
        )
    except ScenarioError as exc:
        return _fail("configuration", str(exc), EXIT_USAGE)
    return _run_common(args, scenario)


def _cmd_project(args) -> int:
    try:
        scenario = load_scenario(
            {
                "schema_version": 1,
                "name": args.name,
                "n_qubits": args.n_qubits,
                "perturbation": {
                    "kind": args.kind,
                    "strengths": _parse_strengths(args.strengths),
                },
                "outputs": ["coupling-matrix"],
            }
        )
    except (ScenarioError, ValueError) as exc:
        return _fail("configuration", str(exc), EXIT_USAGE)
    return _run_common(args, scenario)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivendicke",
        description="Driven Dicke superradiance simulations for waveguide-coupled qubit arrays",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (default: $DRIVENDICKE_OUT or ./out)")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--seed", type=int, default=None, help="reserved; unused")
        p.add_argument(
            "--no-figures", action="store_true", help="skip PNG figure rendering"
        )

    p = sub.add_parser("run", help="run one scenario config")
    p.add_argument("--config", required=True, help="scenario JSON path or bundled name")
    common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a strength list")
    p.add_argument("--config", required=True, help="scenario JSON path or bundled name")
    p.add_argument("--strengths", help="comma-separated override, e.g. 0.001,0.002")
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("spectrum", help="export Liouvillian spectra")
    p.add_argument("--config", help="scenario JSON path or bundled name")
    p.add_argument("--name", default="spectrum", help="output file prefix")
    p.add_argument("--n-qubits", type=int, default=4)
    p.add_argument("--kind", default="dephasing", choices=[k.value for k in Kind])
    p.add_argument("--strengths", default="0.000625,0.00125,0.0025,0.005,0.01")
    p.add_argument("--cluster-size", type=int, default=None)
    p.add_argument("--fit", action="store_true", help="fit per-eigenvalue exponents")
    common(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("degeneracy", help="export the steady-state degeneracy table")
    p.add_argument("--name", default="degeneracy", help="output file prefix")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument(
        "--liouville-max",
        type=int,
        default=0,
        help="largest N whose Liouvillian null space is counted directly",
    )
    p.add_argument("--nss-only", action="store_true", help="emit (N, N_ss) columns only")
    common(p)
    p.set_defaults(func=_cmd_degeneracy)

    p = sub.add_parser("project", help="project a perturbation onto the degenerate subspace")
    p.add_argument("--name", default="project", help="output file prefix")
    p.add_argument("--n-qubits", type=int, default=4)
    p.add_argument("--kind", default="dephasing", choices=[k.value for k in Kind])
    p.add_argument("--strengths", default="0.001")
    common(p)
    p.set_defaults(func=_cmd_project)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
