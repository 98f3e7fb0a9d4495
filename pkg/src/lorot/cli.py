"""Command-line front door.

Reads a problem or experiment specification, runs it, and writes
machine-readable results: a summary ``result.json`` (always) plus CSV tables
per command. Outputs are byte-identical for identical (config, input, seed).

Exit codes: 0 success, 2 infeasible transport, 3 validation errors.
The environment variable ``LOROT_THREADS`` caps internal parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .diagnostics import audit
from .dual import DualPotential, PositiveCycle, chain_potential, dkp_verify
from .errors import Infeasible, LorotError, SchemaError
from .experiments import run_cylinder_example, run_line_counterexample
from .measures import measure_from_json
from .solver import dual_objective, problem_from_json, solve
from .spacetime import model_from_config
from .transport import AtomSplit, interpolate, monge_map

COMMANDS = (
    "solve",
    "dual",
    "audit",
    "interpolate",
    "monge",
    "counterexample-line",
    "counterexample-cylinder",
    "validate",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sanitize(obj):
    """Replace non-finite floats so the emitted JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _write_json(path: Path, obj):
    text = json.dumps(_sanitize(obj), sort_keys=True, indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _load_input(source: str) -> dict:
    """Accept a file path or inline JSON text."""
    text = source
    if not source.lstrip().startswith("{"):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise SchemaError(f"cannot read input {source!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"input is not valid JSON: {exc}") from exc


def _threads() -> int:
    raw = os.environ.get("LOROT_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise SchemaError(f"LOROT_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise SchemaError(f"LOROT_THREADS must be >= 1, got {value}")
    return value


def _resolved_config(args, threads) -> dict:
    cfg = {
        "command": args.command,
        "out": str(args.out),
        "seed": args.seed,
        "threads": threads,
    }
    for key in ("input", "tol", "n", "eps", "t", "grid"):
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    return cfg


def _validate_payload(obj: dict):
    """Schema and measure-invariant checks; returns a list of violations."""
    violations = []
    try:
        model = model_from_config(obj.get("model", {}))
    except SchemaError as exc:
        return [f"model: {exc}"]
    for side in ("mu", "nu"):
        if side not in obj:
            violations.append(f"{side}: missing")
            continue
        atoms = obj[side].get("atoms") if isinstance(obj[side], dict) else None
        if not atoms:
            violations.append(f"{side}: empty measure")
            continue
        try:
            measure_from_json(model, obj[side])
        except SchemaError as exc:
            msg = str(exc)
            tag = "mass" if "sum to 1" in msg else "schema"
            violations.append(f"{side}: {tag}: {msg}")
    return violations


def _cmd_validate(args, out_dir, config):
    obj = _load_input(args.input)
    violations = _validate_payload(obj)
    result = {"ok": not violations, "violations": violations}
    return result, (0 if not violations else 3)


def _solve_from_args(args):
    problem = problem_from_json(_load_input(args.input))
    if args.tol is not None:
        from .solver import SolverOptions, TransportProblem

        problem = TransportProblem(
            problem.model, problem.mu, problem.nu, SolverOptions(tolerance=args.tol)
        )
    coupling, duals = solve(problem)
    return problem, coupling, duals


def _cmd_solve(args, out_dir, config):
    problem, coupling, duals = _solve_from_args(args)
    C = problem.cost_matrix()
    rows = [(i, j, mass, float(C[i, j])) for i, j, mass in coupling.entries]
    _write_csv(out_dir / "coupling.csv", ("i", "j", "mass", "cost"), rows)
    gap = abs(coupling.total_cost - dual_objective(coupling, duals))
    result = {
        "cost": coupling.total_cost,
        "dual_gap": gap,
        "n_arcs": coupling.n_entries,
    }
    return result, 0


def _potential_rows(measure, values):
    rows = []
    for k, (p, v) in enumerate(zip(measure.points, values)):
        rows.append((k, *p.spatial, p.time, float(v)))
    return rows


def _cmd_dual(args, out_dir, config):
    problem, coupling, duals = _solve_from_args(args)
    psi = chain_potential(problem.model, coupling)
    if isinstance(psi, PositiveCycle):
        result = {"positive_cycle": {"atoms": list(psi.atoms), "gain": psi.gain}}
        return result, 0
    potential = DualPotential.from_psi(problem.model, problem.mu, psi, problem.nu)
    tol = args.tol if args.tol is not None else 1e-8
    report = dkp_verify(problem.model, coupling, potential, tol=tol)
    coord_names = tuple(f"x{k}" for k in range(problem.model.spatial_dim))
    header = ("index", *coord_names, "t", "value")
    _write_csv(out_dir / "psi.csv", header, _potential_rows(problem.mu, potential.psi))
    _write_csv(out_dir / "phi.csv", header, _potential_rows(problem.nu, potential.phi))
    result = report.as_dict()
    result["spread"] = float(max(potential.psi) - min(potential.psi))
    return result, 0


def _cmd_audit(args, out_dir, config):
    problem, coupling, duals = _solve_from_args(args)
    report = audit(problem.model, problem, coupling, duals, seed=args.seed)
    return report.as_dict(), 0


def _cmd_interpolate(args, out_dir, config):
    if args.t is None:
        raise SchemaError("interpolate requires --t")
    if not 0.0 <= args.t <= 1.0:
        raise SchemaError("--t must lie in [0, 1]")
    problem, coupling, duals = _solve_from_args(args)
    measure = interpolate(problem.model, coupling, args.t)
    _write_json(out_dir / "interpolated.json", measure.to_json_obj())
    result = {"t": args.t, "n_atoms": measure.n_atoms}
    return result, 0


def _cmd_monge(args, out_dir, config):
    problem = problem_from_json(_load_input(args.input))
    outcome = monge_map(problem.model, problem)
    if isinstance(outcome, AtomSplit):
        result = {
            "atom_split": {"mu_index": outcome.mu_index, "detail": outcome.detail}
        }
        return result, 0
    _write_csv(out_dir / "monge.csv", ("mu_index", "nu_index"), outcome.as_rows())
    result = {"cost": outcome.total_cost, "n_rays": len(outcome.rays)}
    return result, 0


def _report_result(report):
    return {
        "name": report.name,
        "scalars": {k: v.as_dict() for k, v in report.scalars.items()},
    }


def _cmd_line(args, out_dir, config):
    if args.n is None:
        raise SchemaError("counterexample-line requires --n")
    if args.n < 3:
        raise SchemaError("--n must be at least 3")
    report = run_line_counterexample(args.n, workers=config["threads"])
    rows = report.tables["levels"]
    header = tuple(rows[0].keys())
    _write_csv(out_dir / "levels.csv", header, [tuple(r[k] for k in header) for r in rows])
    return _report_result(report), 0


def _cmd_cylinder(args, out_dir, config):
    eps = args.eps if args.eps is not None else 0.25
    t = args.t if args.t is not None else 1.0
    grid = args.grid if args.grid is not None else 10000
    if not 0.0 < eps < 0.5:
        raise SchemaError("--eps must lie in (0, 0.5)")
    if not 0.0 < t <= 1.0:
        raise SchemaError("--t must lie in (0, 1]")
    if grid < 100:
        raise SchemaError("--grid must be at least 100")
    report = run_cylinder_example(eps, grid, t)
    rows = report.tables["subdifferential"]
    _write_csv(
        out_dir / "subdifferential.csv",
        ("theta", "y_theta", "margin"),
        [(r["theta"], r["y_theta"], r["margin"]) for r in rows],
    )
    return _report_result(report), 0


_HANDLERS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "dual": _cmd_dual,
    "audit": _cmd_audit,
    "interpolate": _cmd_interpolate,
    "monge": _cmd_monge,
    "counterexample-line": _cmd_line,
    "counterexample-cylinder": _cmd_cylinder,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorot",
        description="Discrete optimal transport with Lorentzian (causal) costs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name in ("solve", "dual", "audit", "interpolate", "monge", "validate"):
            p.add_argument("--input", required=True,
                           help="problem JSON: a file path or inline JSON text")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        if name == "counterexample-line":
            p.add_argument("--n", type=int, default=None, help="base grid size")
        if name == "counterexample-cylinder":
            p.add_argument("--eps", type=float, default=None)
            p.add_argument("--grid", type=int, default=None)
        if name in ("interpolate", "counterexample-cylinder"):
            p.add_argument("--t", type=float, default=None)
    return parser


def run(args) -> int:
    threads = _threads()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = _resolved_config(args, threads)
    summary = {"version": __version__, "command": args.command, "config": config}
    try:
        result, code = _HANDLERS[args.command](args, out_dir, config)
    except Infeasible as exc:
        summary["error"] = {"kind": "infeasible", "message": str(exc)}
        _write_json(out_dir / "result.json", summary)
        print(json.dumps(_sanitize(summary), sort_keys=True, allow_nan=False))
        print(f"lorot: infeasible: {exc}", file=sys.stderr)
        return 2
    summary["result"] = result
    _write_json(out_dir / "result.json", summary)
    print(json.dumps(_sanitize(summary), sort_keys=True, allow_nan=False))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except SchemaError as exc:
        print(f"lorot: invalid input: {exc}", file=sys.stderr)
        return 3
    except LorotError as exc:
        print(f"lorot: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
