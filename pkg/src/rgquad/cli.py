"""Command-line front end.

Subcommands: check, derive, solve, verify, catalog. A JSON config selects
the model (a built-in family or an inline field/coupling tensor pair),
tolerances, solver settings and output. Reports are JSON documents (the
authoritative format) or flat TSV projections. Exit codes: 0 pass,
1 domain failure, 2 usage or config failure.

The echoed config inside every report, re-run as-is, reproduces the run;
the `timings` key is the only non-deterministic part of a report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import catalog as catalog_mod
from .bethe_solver import (
    SolutionSet,
    SolverOptions,
    solve_all_homotopy,
    solve_all_multistart,
    solve_auto,
    spectral_sum_rules,
)
from .ed_oracle import joint_spectrum, match_spectra, MatchReport, SpectrumTable
from .errors import (
    ConfigError,
    DegenerateCoupling,
    DimensionCapExceeded,
    IntegrabilityViolation,
    InternalInconsistency,
    NonCommutingFamily,
    RGQuadError,
    StartupDegenerate,
)
from .model import (
    IntegrabilityReport,
    ModelSpec,
    check_commutators_numerical,
    check_integrability_algebraic,
)
from .pauli_ops import DEFAULT_CAP
from .quad_relations import (
    QuadraticSystem,
    check_coefficient_consistency,
    derive_coefficients,
    verify_operator_identity,
)

#: fixed pass threshold for the spectral sum rules (relative)
SUM_RULE_TOL = 1e-8
#: fixed pass threshold for the brute-force operator identity (relative)
OPERATOR_IDENTITY_TOL = 1e-11

_DEFAULT_TOLERANCES = {
    "integrability": 1e-10,
    "solver": 1e-12,
    "dedupe": None,
    "oracle": 1e-8,
}
_DEFAULT_SOLVER = {"method": "auto", "seed": None, "max_iter": 100, "sample_count": None}
_DEFAULT_ORACLE = {"enabled": True, "dimension_cap": DEFAULT_CAP}
_DEFAULT_OUTPUT = {"format": "json", "path": None}

_CATALOG_SCHEMAS = {
    "xxx_rational": {
        "params": {"epsilon": "list of pairwise-distinct reals", "B": "real z field"},
    },
    "xxz_trigonometric": {
        "params": {
            "epsilon": "list of reals, gaps not multiples of pi",
            "B": "real z field",
        },
        "notes": "certified integrable at construction; no quadratic closure",
    },
    "xxz_pip": {
        "params": {
            "epsilon": "list of nonzero reals with distinct squares",
            "G": "pair coupling",
            "gamma": "bath amplitude",
        },
        "notes": "z couplings are not skew-symmetric",
    },
}


# ---------------------------------------------------------------------------
# config parsing


def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in {where}")


def _real_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a real number, got {value!r}")
    return float(value)


def _real_list(value, where: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where} must be a non-empty list of reals")
    return [_real_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


@dataclass
class RunConfig:
    """Parsed configuration with defaults materialized."""

    model: dict
    tolerances: dict = dc_field(default_factory=dict)
    solver: dict = dc_field(default_factory=dict)
    oracle: dict = dc_field(default_factory=dict)
    output: dict = dc_field(default_factory=dict)

    def echo(self) -> dict:
        return {
            "model": self.model,
            "tolerances": dict(self.tolerances),
            "solver": dict(self.solver),
            "oracle": dict(self.oracle),
            "output": dict(self.output),
        }


def parse_config(raw: dict) -> RunConfig:
    """Validate the raw JSON document; unknown keys are rejected everywhere."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(raw, {"model", "tolerances", "solver", "oracle", "output"}, "config")
    if "model" not in raw:
        raise ConfigError("config missing required key 'model'")

    model = raw["model"]
    if not isinstance(model, dict):
        raise ConfigError("'model' must be an object")
    _require_keys(model, {"catalog", "inline"}, "model")
    if ("catalog" in model) == ("inline" in model):
        raise ConfigError("model must contain exactly one of 'catalog' or 'inline'")

    if "catalog" in model:
        cat = model["catalog"]
        if not isinstance(cat, dict):
            raise ConfigError("model.catalog must be an object")
        family = cat.get("family")
        if family is None:
            raise ConfigError("model.catalog missing required key 'family'")
        if family not in catalog_mod.FAMILIES:
            raise ConfigError(
                f"unknown family '{family}'; known: {', '.join(catalog_mod.FAMILIES)}"
            )
        if family == "xxz_pip":
            _require_keys(cat, {"family", "epsilon", "G", "gamma"}, "model.catalog")
            for key in ("epsilon", "G", "gamma"):
                if key not in cat:
                    raise ConfigError(f"model.catalog missing required key '{key}'")
            _real_list(cat["epsilon"], "model.catalog.epsilon")
            _real_number(cat["G"], "model.catalog.G")
            _real_number(cat["gamma"], "model.catalog.gamma")
        else:
            _require_keys(cat, {"family", "epsilon", "B"}, "model.catalog")
            for key in ("epsilon", "B"):
                if key not in cat:
                    raise ConfigError(f"model.catalog missing required key '{key}'")
            _real_list(cat["epsilon"], "model.catalog.epsilon")
            _real_number(cat["B"], "model.catalog.B")
    else:
        inline = model["inline"]
        if not isinstance(inline, dict):
            raise ConfigError("model.inline must be an object")
        _require_keys(inline, {"N", "B", "Gamma"}, "model.inline")
        for key in ("N", "B", "Gamma"):
            if key not in inline:
                raise ConfigError(f"model.inline missing required key '{key}'")
        n = inline["N"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("model.inline.N must be a positive integer")
        b = inline["B"]
        if not isinstance(b, list) or len(b) != n:
            raise ConfigError(f"model.inline.B must be a list of {n} rows [Bx, By, Bz]")
        for i, row in enumerate(b):
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigError(f"model.inline.B[{i}] must be [Bx, By, Bz]")
            _real_list(row, f"model.inline.B[{i}]")
        g = inline["Gamma"]
        if not isinstance(g, list) or len(g) != n:
            raise ConfigError(
                f"model.inline.Gamma must be indexed [i][j][axis] with {n} rows"
            )
        for i, row in enumerate(g):
            if not isinstance(row, list) or len(row) != n:
                raise ConfigError(f"model.inline.Gamma[{i}] must have {n} entries")
            for j, entry in enumerate(row):
                if not isinstance(entry, list) or len(entry) != 3:
                    raise ConfigError(
                        f"model.inline.Gamma[{i}][{j}] must be [x, y, z] values"
                    )
                _real_list(entry, f"model.inline.Gamma[{i}][{j}]")

    tolerances = dict(_DEFAULT_TOLERANCES)
    if "tolerances" in raw:
        tols = raw["tolerances"]
        if not isinstance(tols, dict):
            raise ConfigError("'tolerances' must be an object")
        _require_keys(tols, set(_DEFAULT_TOLERANCES), "tolerances")
        for key, value in tols.items():
            if key == "dedupe" and value is None:
                continue
            value = _real_number(value, f"tolerances.{key}")
            if value <= 0:
                raise ConfigError(f"tolerances.{key} must be positive")
            tolerances[key] = value

    solver = dict(_DEFAULT_SOLVER)
    if "solver" in raw:
        sol = raw["solver"]
        if not isinstance(sol, dict):
            raise ConfigError("'solver' must be an object")
        _require_keys(sol, set(_DEFAULT_SOLVER), "solver")
        if "method" in sol:
            if sol["method"] not in ("homotopy", "multistart", "auto"):
                raise ConfigError(
                    "solver.method must be 'homotopy', 'multistart' or 'auto'"
                )
            solver["method"] = sol["method"]
        if sol.get("seed") is not None:
            seed = sol["seed"]
            if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
                raise ConfigError("solver.seed must be an unsigned 64-bit integer")
            solver["seed"] = seed
        if sol.get("max_iter") is not None:
            it = sol["max_iter"]
            if isinstance(it, bool) or not isinstance(it, int) or it < 1:
                raise ConfigError("solver.max_iter must be a positive integer")
            solver["max_iter"] = it
        if sol.get("sample_count") is not None:
            cnt = sol["sample_count"]
            if isinstance(cnt, bool) or not isinstance(cnt, int) or cnt < 1:
                raise ConfigError("solver.sample_count must be a positive integer")
            solver["sample_count"] = cnt

    oracle = dict(_DEFAULT_ORACLE)
    if "oracle" in raw:
        orc = raw["oracle"]
        if not isinstance(orc, dict):
            raise ConfigError("'oracle' must be an object")
        _require_keys(orc, set(_DEFAULT_ORACLE), "oracle")
        if "enabled" in orc:
            if not isinstance(orc["enabled"], bool):
                raise ConfigError("oracle.enabled must be a boolean")
            oracle["enabled"] = orc["enabled"]
        if orc.get("dimension_cap") is not None:
            cap = orc["dimension_cap"]
            if isinstance(cap, bool) or not isinstance(cap, int) or cap < 1:
                raise ConfigError("oracle.dimension_cap must be a positive integer")
            oracle["dimension_cap"] = cap

    output = dict(_DEFAULT_OUTPUT)
    if "output" in raw:
        out = raw["output"]
        if not isinstance(out, dict):
            raise ConfigError("'output' must be an object")
        _require_keys(out, set(_DEFAULT_OUTPUT), "output")
        if "format" in out:
            if out["format"] not in ("json", "tsv"):
                raise ConfigError("output.format must be 'json' or 'tsv'")
            output["format"] = out["format"]
        if out.get("path") is not None:
            if not isinstance(out["path"], str):
                raise ConfigError("output.path must be a string")
            output["path"] = out["path"]

    return RunConfig(
        model=model, tolerances=tolerances, solver=solver, oracle=oracle, output=output
    )


def build_spec(config: RunConfig) -> ModelSpec:
    """Construct the model from the parsed config; parameter misuse is a
    config error (exit 2), integrability certification failures are domain
    errors (exit 1)."""
    try:
        if "catalog" in config.model:
            cat = config.model["catalog"]
            family = cat["family"]
            if family == "xxx_rational":
                return catalog_mod.xxx_rational(cat["epsilon"], cat["B"])
            if family == "xxz_trigonometric":
                return catalog_mod.xxz_trigonometric(cat["epsilon"], cat["B"])
            return catalog_mod.xxz_pip(cat["epsilon"], cat["G"], cat["gamma"])
        inline = config.model["inline"]
        return ModelSpec(
            field=np.array(inline["B"], dtype=float),
            coupling=np.array(inline["Gamma"], dtype=float),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc


# ---------------------------------------------------------------------------
# report serialization


def _integrability_dict(report: IntegrabilityReport) -> dict:
    return {
        "tol": report.tol,
        "max_field_residual": report.max_field_residual,
        "max_gaudin_residual": report.max_gaudin_residual,
        "max_commutator_norm": report.max_commutator_norm,
        "commutator_scale": report.commutator_scale,
        "passed": report.ok,
        "violations": [
            {
                "kind": v.kind,
                "sites": list(v.sites),
                "axes": list(v.axes) if v.axes is not None else None,
                "residual": v.residual,
            }
            for v in report.violations
        ],
    }


def _system_dict(qsys: QuadraticSystem) -> dict:
    return {
        "C": qsys.C.tolist(),
        "K": qsys.K.tolist(),
        "provenance": [list(row) for row in qsys.provenance],
    }


def _solution_dict(solution: SolutionSet, sum_rules: dict | None) -> dict:
    return {
        "tuples": [
            {
                "r": t.r.tolist(),
                "residual_norm": t.residual_norm,
                "branch_tag": list(t.branch_tag) if t.branch_tag is not None else None,
            }
            for t in solution.tuples
        ],
        "found": solution.found,
        "expected": solution.expected,
        "complete": solution.complete,
        "dedupe_tol": solution.dedupe_tol,
        "seed": solution.seed,
        "path_failures": [
            {"branch_tag": list(f.branch_tag), "reached": f.reached, "cause": f.cause}
            for f in solution.path_failures
        ],
        "sum_rules": sum_rules,
    }


def _spectrum_dict(table: SpectrumTable) -> dict:
    return {
        "tuples": table.tuples.tolist(),
        "diag_residual": table.diag_residual,
        "combo_seed": table.combo_seed,
        "unresolved_blocks": list(table.unresolved_blocks),
    }


def _match_dict(match: MatchReport) -> dict:
    return {
        "pairs": [[s, o, d] for s, o, d in match.pairs],
        "unmatched_solver": match.unmatched_solver,
        "unmatched_oracle": match.unmatched_oracle,
        "max_distance": match.max_distance,
        "complete": match.complete,
    }


def render_report_json(report: dict, drop_timings: bool = False) -> str:
    """Deterministic JSON rendering; floats keep full round-trip precision."""
    doc = {k: v for k, v in report.items() if not (drop_timings and k == "timings")}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_report_tsv(report: dict) -> str:
    """Flat projection: one row per tuple for solve/verify, one row per
    residual or violation otherwise."""
    lines = []
    solution = report.get("solution")
    if solution is not None:
        n = len(solution["tuples"][0]["r"]) if solution["tuples"] else 0
        header = [f"r_{i}" for i in range(n)] + ["residual_norm", "branch_tag"]
        lines.append("\t".join(header))
        for entry in solution["tuples"]:
            tag = (
                "".join("+" if s > 0 else "-" for s in entry["branch_tag"])
                if entry["branch_tag"]
                else ""
            )
            lines.append(
                "\t".join(
                    [repr(x) for x in entry["r"]]
                    + [repr(entry["residual_norm"]), tag]
                )
            )
        return "\n".join(lines) + "\n"
    system = report.get("quadratic_system")
    if system is not None:
        lines.append("kind\ti\tj\tvalue")
        for i, k in enumerate(system["K"]):
            lines.append(f"K\t{i}\t\t{k!r}")
        for i, row in enumerate(system["C"]):
            for j, c in enumerate(row):
                if i != j:
                    lines.append(f"C\t{i}\t{j}\t{c!r}")
        return "\n".join(lines) + "\n"
    integ = report.get("integrability")
    if integ is not None:
        lines.append("quantity\tvalue")
        for key in (
            "max_field_residual",
            "max_gaudin_residual",
            "max_commutator_norm",
            "passed",
        ):
            lines.append(f"{key}\t{integ[key]!r}")
        for v in integ["violations"]:
            lines.append(f"violation\t{v['kind']} sites={v['sites']} residual={v['residual']!r}")
        return "\n".join(lines) + "\n"
    return render_report_json(report)


# ---------------------------------------------------------------------------
# command implementations


def _resolved_cap(config: RunConfig, args) -> int:
    if getattr(args, "cap", None) is not None:
        return args.cap
    env = os.environ.get("RGQUAD_CAP")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError(f"RGQUAD_CAP must be an integer, got {env!r}") from exc
        if cap < 1:
            raise ConfigError("RGQUAD_CAP must be positive")
        return cap
    return config.oracle["dimension_cap"]


def _materialize_seed(config: RunConfig, args) -> int:
    if getattr(args, "seed", None) is not None:
        config.solver["seed"] = args.seed
    if config.solver["seed"] is None:
        config.solver["seed"] = int.from_bytes(os.urandom(8), "little")
    return config.solver["seed"]


def _solver_options(config: RunConfig) -> SolverOptions:
    return SolverOptions(
        tol=config.tolerances["solver"],
        max_iter=config.solver["max_iter"],
        integrability_tol=config.tolerances["integrability"],
        sample_count=config.solver["sample_count"],
        seed=config.solver["seed"],
        dedupe_tol=config.tolerances["dedupe"],
    )


def cmd_check(config: RunConfig, args) -> tuple[dict, bool]:
    cap = _resolved_cap(config, args)
    spec = build_spec(config)
    timings: dict[str, float] = {}
    start = time.perf_counter()
    algebraic = check_integrability_algebraic(spec, config.tolerances["integrability"])
    timings["algebraic_s"] = time.perf_counter() - start
    report = {
        "command": "check",
        "config": config.echo(),
        "integrability": _integrability_dict(algebraic),
        "timings": timings,
    }
    ok = algebraic.ok
    if spec.dim <= 2**cap:
        start = time.perf_counter()
        commutators = check_commutators_numerical(
            spec, config.tolerances["integrability"], cap=cap
        )
        timings["commutators_s"] = time.perf_counter() - start
        merged = report["integrability"]
        merged["max_commutator_norm"] = commutators.max_commutator_norm
        merged["commutator_scale"] = commutators.commutator_scale
        merged["violations"].extend(
            _integrability_dict(commutators)["violations"]
        )
        merged["passed"] = merged["passed"] and commutators.ok
        ok = ok and commutators.ok
    else:
        report["integrability"]["commutator_check_skipped"] = (
            f"dimension {spec.dim} exceeds cap 2^{cap}"
        )
    return report, ok


def cmd_derive(config: RunConfig, args) -> tuple[dict, bool]:
    cap = _resolved_cap(config, args)
    spec = build_spec(config)
    tol = config.tolerances["integrability"]
    timings: dict[str, float] = {}
    start = time.perf_counter()
    qsys = derive_coefficients(spec, tol)
    consistency = check_coefficient_consistency(spec, qsys, tol)
    timings["derive_s"] = time.perf_counter() - start
    report = {
        "command": "derive",
        "config": config.echo(),
        "quadratic_system": _system_dict(qsys),
        "consistency": {
            "max_route_residual": consistency.max_route_residual,
            "max_pair_residual": consistency.max_pair_residual,
            "passed": consistency.ok,
        },
        "timings": timings,
    }
    ok = consistency.ok
    if spec.dim <= 2**cap:
        start = time.perf_counter()
        identity = verify_operator_identity(
            spec, qsys, tol=OPERATOR_IDENTITY_TOL, cap=cap
        )
        timings["operator_identity_s"] = time.perf_counter() - start
        report["operator_identity"] = {
            "residuals": identity.residuals.tolist(),
            "tol": identity.tol,
            "passed": identity.ok,
        }
        ok = ok and identity.ok
    return report, ok


def _solve_solution(config: RunConfig, spec: ModelSpec) -> tuple[SolutionSet, QuadraticSystem]:
    opts = _solver_options(config)
    qsys = derive_coefficients(spec, opts.integrability_tol)
    method = config.solver["method"]
    if method == "homotopy":
        solution = solve_all_homotopy(spec, opts, qsys=qsys)
    elif method == "multistart":
        solution = solve_all_multistart(qsys, opts)
    else:
        solution = solve_auto(spec, opts, qsys=qsys)
    if solution.seed is None:
        solution.seed = config.solver["seed"]
    return solution, qsys


def cmd_solve(config: RunConfig, args) -> tuple[dict, bool]:
    _materialize_seed(config, args)
    spec = build_spec(config)
    timings: dict[str, float] = {}
    start = time.perf_counter()
    solution, qsys = _solve_solution(config, spec)
    timings["solve_s"] = time.perf_counter() - start
    sum_rules = None
    ok = solution.complete or bool(getattr(args, "allow_incomplete", False))
    if solution.complete:
        linear, quadratic = spectral_sum_rules(solution, qsys)
        passed = bool(np.all(linear <= SUM_RULE_TOL) and np.all(quadratic <= SUM_RULE_TOL))
        sum_rules = {
            "linear_defects": linear.tolist(),
            "quadratic_defects": quadratic.tolist(),
            "tol": SUM_RULE_TOL,
            "passed": passed,
        }
        ok = ok and passed
    report = {
        "command": "solve",
        "config": config.echo(),
        "quadratic_system": _system_dict(qsys),
        "solution": _solution_dict(solution, sum_rules),
        "timings": timings,
    }
    return report, ok


def cmd_verify(config: RunConfig, args) -> tuple[dict, bool]:
    _materialize_seed(config, args)
    cap = _resolved_cap(config, args)
    spec = build_spec(config)
    report, ok = cmd_solve(config, args)
    report["command"] = "verify"
    timings = report["timings"]
    start = time.perf_counter()
    table = joint_spectrum(
        spec,
        seed=config.solver["seed"],
        commutator_tol=config.tolerances["integrability"],
        cap=cap,
    )
    timings["oracle_s"] = time.perf_counter() - start
    rows = [entry["r"] for entry in report["solution"]["tuples"]]
    solver_tuples = np.array(rows) if rows else np.zeros((0, spec.n))
    match = match_spectra(solver_tuples, table.tuples, config.tolerances["oracle"])
    report["oracle"] = _spectrum_dict(table)
    report["match"] = _match_dict(match)
    return report, ok and match.complete


def cmd_catalog() -> tuple[dict, bool]:
    return {"command": "catalog", "families": _CATALOG_SCHEMAS}, True


# ---------------------------------------------------------------------------
# entry point


def _summary_lines(report: dict, ok: bool) -> list[str]:
    lines = [f"rgquad {report['command']}: {'PASS' if ok else 'FAIL'}"]
    integ = report.get("integrability")
    if integ:
        lines.append(
            f"  integrability: field {integ['max_field_residual']}, "
            f"triples {integ['max_gaudin_residual']}, "
            f"commutator {integ['max_commutator_norm']} "
            f"({len(integ['violations'])} violations)"
        )
    if "consistency" in report:
        c = report["consistency"]
        lines.append(
            f"  coefficient routes: spread {c['max_route_residual']}, "
            f"pair closure {c['max_pair_residual']}"
        )
    if "operator_identity" in report:
        o = report["operator_identity"]
        lines.append(f"  operator identity: worst residual {max(o['residuals'])}")
    if "solution" in report:
        s = report["solution"]
        lines.append(
            f"  solutions: {s['found']}/{s['expected']} "
            f"({len(s['path_failures'])} path failures, seed {s['seed']})"
        )
        if s["sum_rules"]:
            lines.append(
                f"  sum rules: {'pass' if s['sum_rules']['passed'] else 'FAIL'}"
            )
    if "match" in report:
        m = report["match"]
        lines.append(
            f"  oracle match: {len(m['pairs'])} pairs, "
            f"{len(m['unmatched_solver'])}+{len(m['unmatched_oracle'])} unmatched, "
            f"max distance {m['max_distance']}"
        )
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rgquad",
        description="Conserved-charge construction, quadratic relations and "
        "spectrum solver for spin-1/2 Richardson-Gaudin models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("check", True),
        ("derive", True),
        ("solve", True),
        ("verify", True),
        ("catalog", False),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="path to JSON config")
            p.add_argument("--output", help="write the report here instead of stdout")
            p.add_argument("--format", choices=("json", "tsv"), help="report format")
            p.add_argument("--seed", type=int, help="override the solver seed")
            p.add_argument(
                "--allow-incomplete",
                action="store_true",
                help="do not fail when fewer than 2^N tuples are found",
            )
            p.add_argument("--cap", type=int, help="dense-dimension cap (qubits)")
    return parser


def _load_config(path: str) -> RunConfig:
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            report, ok = cmd_catalog()
        else:
            config = _load_config(args.config)
            if args.seed is not None and not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            if args.cap is not None and args.cap < 1:
                raise ConfigError("--cap must be positive")
            if args.format:
                config.output["format"] = args.format
            if args.output:
                config.output["path"] = args.output
            handler = {
                "check": cmd_check,
                "derive": cmd_derive,
                "solve": cmd_solve,
                "verify": cmd_verify,
            }[args.command]
            report, ok = handler(config, args)
    except ConfigError as exc:
        print(f"rgquad: config error: {exc}", file=sys.stderr)
        return 2
    except (
        IntegrabilityViolation,
        DegenerateCoupling,
        InternalInconsistency,
        NonCommutingFamily,
        StartupDegenerate,
        DimensionCapExceeded,
    ) as exc:
        print(f"rgquad: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except RGQuadError as exc:
        print(f"rgquad: {exc}", file=sys.stderr)
        return 1

    if args.command == "catalog":
        print(render_report_json(report), end="")
        return 0

    fmt = report["config"]["output"]["format"] if "config" in report else "json"
    rendered = (
        render_report_tsv(report) if fmt == "tsv" else render_report_json(report)
    )
    path = report["config"]["output"]["path"] if "config" in report else None
    if path:
        with open(path, "w") as handle:
            handle.write(rendered)
        for line in _summary_lines(report, ok):
            print(line)
    else:
        for line in _summary_lines(report, ok):
            print(line, file=sys.stderr)
        print(rendered, end="")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
