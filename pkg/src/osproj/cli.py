"""Command-line interface: problem ingestion, scenarios, verification reports.

Commands:

    osproj run <config.json> [--output PATH] [--no-timing]
    osproj cbnorm <superop file> [--tol T --amplify N --restarts R --seed S]
                  [--output PATH] [--witness-file PATH]
    osproj suite <directory> [--output PATH] [--output-dir DIR]

Exit codes: 0 all invariants pass, 2 configuration/schema/precondition
problems, 3 numerical failures (failed invariant or solver breakdown).

Reports are JSON, written atomically. Every pass/fail entry carries the
tolerance it was judged against. Timing is reported under a single "timing"
key that `suite` omits in child reports so consecutive runs with the same
seeds produce byte-identical files. The environment variable OSPROJ_TOL_SCALE
multiplies every judgment tolerance (exploratory runs only; leave it unset
for acceptance).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import actions as ac
from . import apps
from . import averaging as av
from . import cbnorm
from . import fixedpoints as fp
from .errors import (
    ConfigError,
    HomomorphismError,
    IllConditionedError,
    NotCompletelyPositiveError,
    NotHermitianError,
    OsprojError,
    PowerBoundError,
    QuadratureError,
    SdpError,
    ShapeError,
    VerificationError,
)
from .linalg import as_cmatrix, format_complex, parse_complex, read_matrix_text, write_matrix_text
from .superop import SuperOp, from_kraus, read_superop_text

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

INLINE_DIM_CAP = 8

CONFIG_ERRORS = (
    ConfigError,
    QuadratureError,
    PowerBoundError,
    HomomorphismError,
    NotCompletelyPositiveError,
    NotHermitianError,
    IllConditionedError,
    ShapeError,
    ValueError,
    KeyError,
    OSError,
    json.JSONDecodeError,
)
NUMERIC_ERRORS = (VerificationError, SdpError)

DEFAULT_TOLERANCES = {
    "idempotency": 1e-8,
    "invariance": 1e-8,
    "restriction": 1e-9,
    "range_angle": 1e-7,
    "cb_slack": 1e-4,
    "module_property": 1e-8,
    "conditional_expectation": 1e-9,
    "q_idempotency": 1e-9,
    "state_psd": 1e-10,
    "state_trace": 1e-12,
    "state_invariance": 1e-9,
    "weyl_defect": 1e-9,
    "isotropy_exp": 1e-8,
    "commutant_angle": 1e-8,
    "plain_norm_slack": 1e-6,
    "choi_psd": 1e-9,
    "cp_contraction_slack": 1e-6,
}

SCENARIOS = ("project", "toeplitz", "cpfix", "dynsys", "weyl", "isotropy", "banach")


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _require_keys(block: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", field=where)
    missing = required - set(block)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}", field=where)


def _parse_matrix(value, base: Path, where: str) -> np.ndarray:
    if isinstance(value, dict):
        _require_keys(value, {"file"}, {"file"}, where)
        return read_matrix_text((base / value["file"]).read_text())
    if not isinstance(value, list):
        raise ConfigError("matrix must be a list of rows or a file reference", where)
    out = []
    for r, row in enumerate(value):
        if not isinstance(row, list):
            raise ConfigError(f"row {r} is not a list", where)
        parsed = []
        for c, entry in enumerate(row):
            if isinstance(entry, (int, float)):
                parsed.append(complex(entry))
            elif isinstance(entry, str):
                try:
                    parsed.append(parse_complex(entry))
                except ValueError as exc:
                    raise ConfigError(str(exc), f"{where}[{r}][{c}]") from None
            else:
                raise ConfigError(f"bad entry type {type(entry).__name__}", f"{where}[{r}][{c}]")
        out.append(parsed)
    return as_cmatrix(out)


def _matrix_to_json(m: np.ndarray) -> list[list[str]]:
    return [[format_complex(z) for z in row] for row in np.asarray(m, dtype=complex)]


def _parse_superop(value, base: Path, where: str) -> SuperOp:
    if isinstance(value, dict) and "file" in value:
        _require_keys(value, {"file"}, {"file"}, where)
        return read_superop_text((base / value["file"]).read_text())
    if isinstance(value, dict) and "natural" in value:
        _require_keys(value, {"natural"}, {"natural"}, where)
        return SuperOp(_parse_matrix(value["natural"], base, where + ".natural"))
    if isinstance(value, dict) and "kraus" in value:
        _require_keys(value, {"kraus"}, {"kraus"}, where)
        ops = [
            _parse_matrix(mat, base, f"{where}.kraus[{i}]")
            for i, mat in enumerate(value["kraus"])
        ]
        return from_kraus(ops)
    raise ConfigError("superop needs 'natural', 'kraus' or 'file'", where)


def _build_semigroup(block: dict, where: str = "semigroup") -> tuple[ac.SemigroupDesc, dict]:
    if not isinstance(block, dict):
        raise ConfigError("must be an object", where)
    kind = block.get("kind")
    if kind == "cyclic":
        _require_keys(block, {"kind", "order"}, {"kind", "order"}, where)
        return ac.cyclic_desc(int(block["order"])), {}
    if kind == "circle":
        _require_keys(block, {"kind"}, {"kind"}, where)
        return ac.circle_desc(), {}
    if kind == "free_monoid_commuting":
        _require_keys(block, {"kind", "generators"}, {"kind"}, where)
        return ac.free_monoid_desc(int(block.get("generators", 1))), {}
    if kind == "finite_group":
        allowed = {"kind", "elements", "table", "permutation_generators"}
        _require_keys(block, allowed, {"kind"}, where)
        if "permutation_generators" in block:
            desc, perms = ac.finite_group_from_permutations(
                block["permutation_generators"]
            )
            return desc, {"perms": perms}
        if "elements" not in block or "table" not in block:
            raise ConfigError(
                "finite_group needs elements+table or permutation_generators", where
            )
        return ac.finite_group_desc(block["elements"], block["table"]), {}
    raise ConfigError(f"unknown semigroup kind {kind!r}", where)


def _build_action(cfg: dict, base: Path) -> ac.SemigroupAction:
    desc, _ = _build_semigroup(cfg.get("semigroup", {}))
    block = cfg.get("action")
    if not isinstance(block, dict):
        raise ConfigError("must be an object", "action")
    atype = block.get("type")
    if atype == "circle":
        _require_keys(block, {"type", "weights"}, {"type", "weights"}, "action")
        if desc.kind != ac.CIRCLE:
            raise ConfigError("circle action needs a circle semigroup", "action")
        return ac.build_circle_action(block["weights"])
    if atype == "conjugation":
        _require_keys(block, {"type", "rep"}, {"type", "rep"}, "action")
        rep = block["rep"]
        if isinstance(rep, dict):
            mats = {
                lab: _parse_matrix(m, base, f"action.rep[{lab}]")
                for lab, m in rep.items()
            }
        else:
            mats = [
                _parse_matrix(m, base, f"action.rep[{i}]") for i, m in enumerate(rep)
            ]
        return ac.build_conjugation_action(desc, mats)
    if atype == "superop_list":
        _require_keys(block, {"type", "superops"}, {"type", "superops"}, "action")
        ops = [
            _parse_superop(s, base, f"action.superops[{i}]")
            for i, s in enumerate(block["superops"])
        ]
        if desc.kind == ac.FREE_MONOID:
            return ac.build_free_monoid_action(ops)
        return ac.build_superop_action(desc, ops)
    raise ConfigError(f"unknown action type {atype!r}", "action")


def _resolve_tolerances(cfg: dict) -> dict:
    tols = dict(DEFAULT_TOLERANCES)
    custom = cfg.get("verification", {}).get("tolerances", {})
    unknown = set(custom) - set(tols)
    if unknown:
        raise ConfigError(
            f"unknown tolerance keys {sorted(unknown)}", "verification.tolerances"
        )
    tols.update({k: float(v) for k, v in custom.items()})
    scale = os.environ.get("OSPROJ_TOL_SCALE")
    if scale:
        try:
            factor = float(scale)
        except ValueError:
            raise ConfigError("OSPROJ_TOL_SCALE must be a float", "env") from None
        tols = {k: v * factor for k, v in tols.items()}
    return tols


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("top level must be an object", "")
    allowed = {
        "scenario", "semigroup", "action", "mean", "toeplitz", "cpfix",
        "weyl", "isotropy", "verification", "output", "emit_timing",
    }
    _require_keys(cfg, allowed, {"scenario", "verification"}, "config")
    if cfg["scenario"] not in SCENARIOS:
        raise ConfigError(
            f"scenario must be one of {SCENARIOS}, got {cfg['scenario']!r}", "scenario"
        )
    ver = cfg["verification"]
    if not isinstance(ver, dict):
        raise ConfigError("must be an object", "verification")
    _require_keys(ver, {"seed", "trials", "tolerances"}, {"seed"}, "verification")
    if not isinstance(ver["seed"], int):
        raise ConfigError("seed must be an integer", "verification.seed")


def _mean_block(cfg: dict) -> dict:
    block = cfg.get("mean", {})
    if not isinstance(block, dict):
        raise ConfigError("must be an object", "mean")
    _require_keys(block, {"kind", "nodes", "horizon"}, set(), "mean")
    return block


# ---------------------------------------------------------------------------
# Invariant rows
# ---------------------------------------------------------------------------

def _row(name: str, measured: float, tol: float, ok: bool | None = None) -> dict:
    passed = bool(measured <= tol) if ok is None else bool(ok)
    return {
        "name": name,
        "measured": float(measured),
        "tolerance": float(tol),
        "pass": passed,
    }


def _report_rows(report: av.ProjectionReport, tols: dict) -> list[dict]:
    rows = []
    for name, measured, tol, ok in report.verify(
        idempotency_tol=tols["idempotency"],
        invariance_tol=tols["invariance"],
        restriction_tol=tols["restriction"],
        angle_tol=tols["range_angle"],
        cb_slack=tols["cb_slack"],
    ):
        rows.append(_row(name, measured, tol, ok))
    return rows


def _projection_json(report: av.ProjectionReport, out_path: Path | None, stem: str) -> dict:
    p = report.p
    body = {"in_dim": p.in_dim, "out_dim": p.out_dim}
    if p.in_dim <= INLINE_DIM_CAP:
        body["natural"] = _matrix_to_json(p.natural)
    elif out_path is not None:
        matrix_file = out_path.with_name(f"{stem}.natural.txt")
        matrix_file.write_text(write_matrix_text(p.natural))
        body["natural_file"] = matrix_file.name
    else:
        body["natural"] = "elided"
    return body


def _common_payload(report: av.ProjectionReport, tols: dict, out_path, stem) -> tuple[dict, list[dict]]:
    rows = _report_rows(report, tols)
    payload = {
        "projection": _projection_json(report, out_path, stem),
        "mean": {
            "kind": report.mean.kind,
            "nodes": report.mean.nodes,
            "horizon": report.mean.horizon,
        },
        "defects": {
            "idempotency": report.idempotency_defect,
            "invariance": report.invariance_defect,
            "restriction": report.restriction_defect,
        },
        "cb": {
            "lower": report.cb_lower,
            "upper": report.cb_upper,
            "norm_cap": report.norm_cap,
            "choi_min_eig": report.choi_min_eig,
        },
        "spaces": {
            "range_dim": report.range_basis.dim,
            "fixed_dim": report.fixed.dim,
            "max_principal_angle": report.match.angle,
            "dim_mismatch": report.match.dim_mismatch,
        },
        "collapse_note": report.collapse_note,
        "warnings": list(report.warnings),
        "extras": _jsonable(report.extras),
    }
    return payload, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return format_complex(obj)
    return obj


# ---------------------------------------------------------------------------
# Scenario runners
# ---------------------------------------------------------------------------

def _builder_for(action: ac.SemigroupAction, cfg: dict, seed: int):
    mean = _mean_block(cfg)
    kind = mean.get("kind")
    sg = action.semigroup.kind
    common = {"seed": seed}
    if sg in (ac.FINITE_GROUP, ac.CYCLIC):
        if kind not in (None, "uniform"):
            raise ConfigError(f"mean kind {kind!r} incompatible with {sg}", "mean.kind")
        return lambda: av.average_uniform(action, **common)
    if sg == ac.CIRCLE:
        if kind not in (None, "circle"):
            raise ConfigError(f"mean kind {kind!r} incompatible with circle", "mean.kind")
        nodes = mean.get("nodes")
        return lambda: av.average_circle(action, nodes=nodes, **common)
    if kind not in (None, "ergodic"):
        raise ConfigError(f"mean kind {kind!r} incompatible with N^d", "mean.kind")
    horizon = int(mean.get("horizon", 256))
    return lambda: av.average_ergodic(action, horizon=horizon, **common)


def _run_project(cfg, base, tols, seed, trials, out_path, stem):
    action = _build_action(cfg, base)
    report = _builder_for(action, cfg, seed)()
    payload, rows = _common_payload(report, tols, out_path, stem)
    if action.semigroup.kind in (ac.FINITE_GROUP, ac.CYCLIC) and action.unitary and trials:
        defect = apps.verify_conditional_expectation(action, report, trials, seed)
        rows.append(_row("conditional_expectation", defect, tols["conditional_expectation"]))
    return payload, rows


def _run_dynsys(cfg, base, tols, seed, trials, out_path, stem):
    action = _build_action(cfg, base)
    mean = _mean_block(cfg)
    report = av.average_dual(
        action, nodes=mean.get("nodes"), trials=trials or 16, seed=seed
    )
    payload, rows = _common_payload(report, tols, out_path, stem)
    rows.append(_row("q_idempotency", report.idempotency_defect, tols["q_idempotency"]))
    if "state_psd_defect" in report.extras:
        rows.append(_row("state_psd", report.extras["state_psd_defect"], tols["state_psd"]))
        rows.append(_row("state_trace", report.extras["state_trace_defect"], tols["state_trace"]))
        rows.append(_row(
            "state_invariance", report.extras["state_invariance_defect"],
            tols["state_invariance"],
        ))
    return payload, rows


def _run_toeplitz(cfg, base, tols, seed, trials, out_path, stem):
    block = cfg.get("toeplitz")
    if not isinstance(block, dict):
        raise ConfigError("toeplitz scenario needs a 'toeplitz' block", "toeplitz")
    _require_keys(block, {"dim", "mode"}, {"dim", "mode"}, "toeplitz")
    dim, mode = int(block["dim"]), block["mode"]
    if mode == apps.CYCLIC_SHIFT:
        problem = apps.ToeplitzProblem.cyclic(dim)
    elif mode == apps.TRUNCATED_SHIFT:
        problem = apps.ToeplitzProblem.truncated(dim)
    else:
        raise ConfigError(f"unknown mode {mode!r}", "toeplitz.mode")
    report = apps.toeplitz_projection(problem, seed=seed)
    payload, rows = _common_payload(report, tols, out_path, stem)
    payload["toeplitz"] = {"dim": dim, "mode": mode}
    defect = apps.verify_module_property(problem, report, trials or 32, seed)
    rows.append(_row("module_property", defect, tols["module_property"]))
    return payload, rows


def _run_cpfix(cfg, base, tols, seed, trials, out_path, stem):
    block = cfg.get("cpfix")
    if not isinstance(block, dict):
        raise ConfigError("cpfix scenario needs a 'cpfix' block", "cpfix")
    _require_keys(block, {"superop"}, {"superop"}, "cpfix")
    phi = _parse_superop(block["superop"], base, "cpfix.superop")
    report = apps.cp_fixed_projection(phi, seed=seed)
    payload, rows = _common_payload(report, tols, out_path, stem)
    scale = max(1.0, abs(report.choi_min_eig))
    rows.append(_row("choi_psd", max(0.0, -report.choi_min_eig), tols["choi_psd"] * scale))
    if report.p.natural.any():
        cp_norm = cbnorm.cb_norm_cp(report.p)
        rows.append(_row("cp_contraction", cp_norm, 1.0 + tols["cp_contraction_slack"]))
    errors = report.extras.get("cesaro_errors", {})
    ordered = [errors[k] for k in sorted(errors)]
    monotone = all(a >= b - 1e-15 for a, b in zip(ordered, ordered[1:]))
    rows.append(_row("cesaro_monotone", 0.0 if monotone else 1.0, 0.5, monotone))
    return payload, rows


def _rep_problem_from_config(cfg, base, where: str) -> apps.RepProblem:
    block = cfg.get(where)
    if not isinstance(block, dict):
        raise ConfigError(f"{where} scenario needs a {where!r} block", where)
    _require_keys(block, {"semigroup", "rep"}, {"semigroup", "rep"}, where)
    desc, _ = _build_semigroup(block["semigroup"], f"{where}.semigroup")
    rep = block["rep"]
    if isinstance(rep, dict):
        mats = {
            lab: _parse_matrix(m, base, f"{where}.rep[{lab}]") for lab, m in rep.items()
        }
    else:
        mats = [_parse_matrix(m, base, f"{where}.rep[{i}]") for i, m in enumerate(rep)]
        mats = {lab: m for lab, m in zip(desc.elements, mats)}
    return apps.RepProblem.build(desc, mats)


def _run_weyl(cfg, base, tols, seed, trials, out_path, stem):
    problem = _rep_problem_from_config(cfg, base, "weyl")
    result = apps.weyl_unitarize(problem)
    payload = {
        "weyl": {
            "w": _matrix_to_json(result.w)
            if result.w.shape[0] <= INLINE_DIM_CAP
            else "elided",
            "defect": result.defect,
            "gram_min_eig": result.gram_min_eig,
            "gram_min_eig_bound": result.gram_min_eig_bound,
        }
    }
    rows = [
        _row("weyl_defect", result.defect, tols["weyl_defect"]),
        _row(
            "gram_lower_bound",
            result.gram_min_eig_bound - result.gram_min_eig,
            0.0,
            result.gram_min_eig >= result.gram_min_eig_bound - 1e-12,
        ),
    ]
    return payload, rows


def _run_isotropy(cfg, base, tols, seed, trials, out_path, stem):
    problem = _rep_problem_from_config(cfg, base, "isotropy")
    result = apps.isotropy_lie_algebra(
        problem, samples=trials or 8, seed=seed, check_tol=tols["isotropy_exp"]
    )
    action = problem.action()
    fixed = fp.fixed_subspace(action)
    match = fp.subspace_match(fixed.basis, result.subspace.basis)
    payload = {
        "isotropy": {
            "commutant_dim": result.subspace.dim,
            "fixed_dim": fixed.dim,
            "exp_defect": result.exp_defect,
            "angle_fixed_vs_commutant": match.angle,
        }
    }
    rows = [
        _row("isotropy_exp", result.exp_defect, tols["isotropy_exp"]),
        _row(
            "commutant_angle", match.angle, tols["commutant_angle"],
            (not match.dim_mismatch) and match.angle <= tols["commutant_angle"],
        ),
    ]
    return payload, rows


def _run_banach(cfg, base, tols, seed, trials, out_path, stem):
    action = _build_action(cfg, base)
    result = apps.plain_norm_projection(action, seed=seed)
    payload, rows = _common_payload(result.report, tols, out_path, stem)
    payload["plain_norm"] = {
        "estimate": result.plain_norm_estimate,
        "cap": result.plain_norm_cap,
    }
    rows.append(
        _row(
            "plain_norm_bound",
            result.plain_norm_estimate,
            result.plain_norm_cap + tols["plain_norm_slack"],
            result.bound_ok,
        )
    )
    return payload, rows


_RUNNERS = {
    "project": _run_project,
    "dynsys": _run_dynsys,
    "toeplitz": _run_toeplitz,
    "cpfix": _run_cpfix,
    "weyl": _run_weyl,
    "isotropy": _run_isotropy,
    "banach": _run_banach,
}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def execute_config(
    config_path: Path,
    output_override: Path | None = None,
    emit_timing: bool = True,
) -> tuple[dict, int, Path | None]:
    """Run one scenario config; returns (report, exit code, report path)."""
    t_start = time.perf_counter()
    base = config_path.parent
    cfg = json.loads(config_path.read_text())
    validate_config(cfg)
    tols = _resolve_tolerances(cfg)
    ver = cfg["verification"]
    seed = int(ver["seed"])
    trials = int(ver.get("trials", 0))
    out_path = output_override
    if out_path is None and cfg.get("output"):
        out_path = base / cfg["output"]
    stem = config_path.stem
    emit_timing = bool(cfg.get("emit_timing", emit_timing)) and emit_timing
    t_built = time.perf_counter()
    payload, rows = _RUNNERS[cfg["scenario"]](cfg, base, tols, seed, trials, out_path, stem)
    t_run = time.perf_counter()
    passed = all(r["pass"] for r in rows)
    report = {
        "config_file": config_path.name,
        "scenario": cfg["scenario"],
        "config": cfg,
        **payload,
        "invariants": rows,
        "passed": passed,
    }
    if emit_timing:
        report["timing"] = {
            "parse_s": t_built - t_start,
            "run_s": t_run - t_built,
            "total_s": time.perf_counter() - t_start,
        }
    if out_path is not None:
        _atomic_write(out_path, _dump(report))
    return report, EXIT_OK if passed else EXIT_NUMERIC, out_path


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    try:
        report, code, out_path = execute_config(
            config_path,
            output_override=Path(args.output) if args.output else None,
            emit_timing=not args.no_timing,
        )
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if out_path is None:
        sys.stdout.write(_dump(report))
    else:
        print(f"report written to {out_path} (passed={report['passed']})")
    return code


def _cmd_cbnorm(args) -> int:
    path = Path(args.superop)
    try:
        phi = read_superop_text(path.read_text())
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        upper = cbnorm.cb_norm_upper(phi, tol=args.tol)
        lower, witness = cbnorm.cb_norm_lower(
            phi, n=args.amplify, restarts=args.restarts, seed=args.seed
        )
    except NUMERIC_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    witness_file = Path(args.witness_file) if args.witness_file else path.with_suffix(".witness.txt")
    witness_file.write_text(write_matrix_text(witness))
    result = {
        "lower": lower,
        "upper": upper.value,
        "witness_file": witness_file.name,
        "iterations": upper.iterations,
    }
    text = _dump(result)
    if args.output:
        _atomic_write(Path(args.output), text)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_suite(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"config error: {directory} is not a directory", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.output_dir) if args.output_dir else Path("osproj_suite_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = sorted(directory.glob("*.json"))
    runs = []
    worst = EXIT_OK
    for cfg_path in configs:
        child_out = out_dir / f"{cfg_path.stem}.report.json"
        entry = {"config": cfg_path.name, "report": child_out.name}
        try:
            report, code, _ = execute_config(
                cfg_path, output_override=child_out, emit_timing=False
            )
            entry["exit_code"] = code
            entry["passed"] = report["passed"]
        except NUMERIC_ERRORS as exc:
            entry.update(exit_code=EXIT_NUMERIC, passed=False, error=str(exc))
        except CONFIG_ERRORS as exc:
            entry.update(exit_code=EXIT_CONFIG, passed=False, error=str(exc))
        worst = max(worst, entry["exit_code"])
        runs.append(entry)
    aggregate = {
        "directory": directory.name,
        "runs": runs,
        "worst_exit": worst,
        "total": len(runs),
        "passed": sum(1 for r in runs if r.get("passed")),
    }
    text = _dump(aggregate)
    _atomic_write(out_dir / "suite_report.json", text)
    sys.stdout.write(text)
    return worst


def bundled_config_dir() -> Path:
    """Directory of the acceptance configs shipped with the package."""
    return Path(__file__).resolve().parent / "configs"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="osproj",
        description="Completely bounded projections onto fixed-point subspaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="report path (overrides config)")
    p_run.add_argument("--no-timing", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_cb = sub.add_parser("cbnorm", help="two-sided cb norm of a superop file")
    p_cb.add_argument("superop")
    p_cb.add_argument("--tol", type=float, default=1e-6)
    p_cb.add_argument("--amplify", type=int, default=None)
    p_cb.add_argument("--restarts", type=int, default=cbnorm.DEFAULT_RESTARTS)
    p_cb.add_argument("--seed", type=int, default=0)
    p_cb.add_argument("--output")
    p_cb.add_argument("--witness-file")
    p_cb.set_defaults(func=_cmd_cbnorm)

    p_suite = sub.add_parser("suite", help="run every config in a directory")
    p_suite.add_argument("directory", nargs="?", default=".")
    p_suite.add_argument("--output-dir", help="where child reports go")
    p_suite.add_argument("--bundled", action="store_true",
                         help="run the configs bundled with the package")
    p_suite.set_defaults(func=_cmd_suite)

    args = parser.parse_args(argv)
    if getattr(args, "bundled", False):
        args.directory = str(bundled_config_dir())
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
