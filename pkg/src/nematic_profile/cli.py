"""Command-line front end: solve | verify | asymptotics | stability | sweep | qfield.

Configuration precedence is flags > config file (flat ``key = value`` lines)
> defaults.  All machine-readable artifacts are JSON documents validating
against the versioned schema shipped with the package, and are byte-stable
for a fixed configuration and seed.

Exit codes: 0 ok, 1 verification failed, 2 no convergence, 3 sign
violation, 4 refused mode (b2 = 0 without the diagnostic flag), 64 usage.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import decoupled_tail_check, fit_tail, verify_bounds
from .core import MaterialParams, classify_regime, derive_constants
from .grid import build_grid
from .solver import (
    BZeroRefused,
    NoConvergence,
    SignViolation,
    b_zero_drift_report,
    discrete_energy,
    minimize_energy,
    ode_residual,
    solve_finite,
    solve_infinite,
)
from .stability import minimize_rayleigh
from .tensor import export_csv, reconstruct

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_NO_CONVERGENCE = 2
EXIT_SIGN_VIOLATION = 3
EXIT_REFUSED = 4
EXIT_USAGE = 64

SCHEMA_VERSION = "1"

_DEFAULTS: dict = {
    "a2": 1.0,
    "b2": 1.0,
    "c2": 1.0,
    "k": 1,
    "R": None,
    "rmax": None,
    "n": 800,
    "grading": "composite",
    "tol": 1e-8,
    "max_iter": 60,
    "method": "newton",
    "bc": "asymptotic",
    "allow_b_zero": False,
    "out": None,
    "jobs": 1,
    "seed": 0,
}

_BC_MODES = {"dirichlet": "dirichlet_const", "asymptotic": "asymptotic_corrected"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


_VERB_OUTPUTS = {
    "solve": frozenset({"profile_csv", "energy_json"}),
    "verify": frozenset({"bounds_json"}),
    "asymptotics": frozenset({"tailfit_json"}),
    "stability": frozenset({"stability_json"}),
    "qfield": frozenset({"qfield_csv"}),
    "sweep": frozenset({"sweep_json"}),
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration."""

    params: MaterialParams
    domain_kind: str  # "finite" | "infinite"
    R: float
    n: int
    grading: str
    tol: float
    max_iter: int
    method: str
    bc_mode: str
    outputs: frozenset[str]
    out_dir: Path
    jobs: int
    seed: int


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=str, default=None, help="flat key = value file")
    sp.add_argument("--a2", type=float, default=None)
    sp.add_argument("--b2", type=float, default=None)
    sp.add_argument("--c2", type=float, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--R", type=float, default=None, help="finite domain radius")
    sp.add_argument("--rmax", type=float, default=None, help="entire-plane truncation radius")
    sp.add_argument("--n", type=int, default=None, help="grid intervals")
    sp.add_argument("--grading", choices=["uniform", "geometric", "composite"], default=None)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=None, dest="max_iter")
    sp.add_argument("--method", choices=["newton", "energy"], default=None)
    sp.add_argument("--bc", choices=["dirichlet", "asymptotic"], default=None)
    sp.add_argument("--allow-b-zero", action="store_const", const=True, default=None,
                    dest="allow_b_zero")
    sp.add_argument("--out", type=str, default=None, help="output directory")
    sp.add_argument("--jobs", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="nematic-profile", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "verify", "asymptotics", "stability", "qfield"):
        sp = sub.add_parser(name)
        _add_common(sp)
        if name == "stability":
            sp.add_argument("--support", type=str, default=None,
                            help="annulus r_a,r_b (default rmax/4,rmax)")
        if name == "qfield":
            sp.add_argument("--angles", type=int, default=256)
    sp = sub.add_parser("sweep")
    _add_common(sp)
    sp.add_argument("--axis", required=True,
                    choices=["a2", "b2", "c2", "k", "R", "rmax", "n", "tol"])
    sp.add_argument("--values", required=True, help="comma-separated values")
    return parser


def _parse_config_file(path: str) -> dict:
    out: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def _coerce(key: str, val: str):
    if key in ("k", "n", "max_iter", "jobs", "seed"):
        return int(val)
    if key in ("a2", "b2", "c2", "R", "rmax", "tol"):
        return float(val)
    if key == "allow_b_zero":
        if val.lower() in ("true", "1", "yes"):
            return True
        if val.lower() in ("false", "0", "no"):
            return False
        raise UsageError(f"bad boolean {val!r} for {key}")
    return val


def _merge_settings(args: argparse.Namespace) -> dict:
    settings = dict(_DEFAULTS)
    if getattr(args, "config", None):
        settings.update(_parse_config_file(args.config))
    for key in _DEFAULTS:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            settings[key] = cli_val
    return settings


def resolve_config(settings: dict, outputs: frozenset[str] = frozenset()) -> RunConfig:
    if settings["R"] is not None and settings["rmax"] is not None:
        raise UsageError("give either --R (finite) or --rmax (entire plane), not both")
    if settings["R"] is None and settings["rmax"] is None:
        raise UsageError("one of --R or --rmax is required")
    tol = float(settings["tol"])
    if not (0.0 < tol <= 1e-2):
        raise UsageError(f"tol must lie in (0, 1e-2], got {tol:g}")
    n = int(settings["n"])
    if n < 16:
        raise UsageError(f"n must be at least 16, got {n}")
    if settings["b2"] == 0.0 and not settings["allow_b_zero"]:
        raise BZeroRefused("b2 = 0 requires --allow-b-zero (diagnostic mode)")
    try:
        params = MaterialParams(
            a2=float(settings["a2"]),
            b2=float(settings["b2"]),
            c2=float(settings["c2"]),
            k=int(settings["k"]),
            b_zero_diagnostic=bool(settings["allow_b_zero"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if settings["rmax"] is not None:
        kind, radius = "infinite", float(settings["rmax"])
        if settings["method"] == "energy":
            raise UsageError("--method energy applies to finite domains only")
    else:
        kind, radius = "finite", float(settings["R"])
    if radius <= 0.0:
        raise UsageError("domain radius must be positive")
    out_dir = settings["out"] or os.environ.get("NEMATIC_PROFILE_OUT") or "."
    jobs = int(settings["jobs"])
    if jobs < 1:
        raise UsageError("jobs must be >= 1")
    return RunConfig(
        params=params,
        domain_kind=kind,
        R=radius,
        n=n,
        grading=str(settings["grading"]),
        tol=tol,
        max_iter=int(settings["max_iter"]),
        method=str(settings["method"]),
        bc_mode=_BC_MODES[settings["bc"]],
        outputs=outputs,
        out_dir=Path(out_dir),
        jobs=jobs,
        seed=int(settings["seed"]),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _clean(obj):
    """Make values JSON-safe; non-finite numbers become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    return obj


def write_report(path: Path, report_type: str, payload: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "report_type": report_type}
    doc.update(payload)
    path.write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def _params_dict(p: MaterialParams) -> dict:
    return {"a2": p.a2, "b2": p.b2, "c2": p.c2, "k": p.k}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _run_solver(cfg: RunConfig):
    if cfg.domain_kind == "infinite":
        return solve_infinite(
            cfg.params, cfg.R, cfg.n, bc_mode=cfg.bc_mode, tol=cfg.tol,
            grading=cfg.grading, max_iter=cfg.max_iter,
        )
    g = build_grid(cfg.R, cfg.n, cfg.grading)
    if cfg.method == "energy":
        prof = minimize_energy(cfg.params, g, tol=max(cfg.tol, 1e-6))
        return solve_finite(cfg.params, g, init=prof, tol=cfg.tol, max_iter=cfg.max_iter)
    return solve_finite(cfg.params, g, tol=cfg.tol, max_iter=cfg.max_iter)


def _write_profile_csv(path: Path, prof) -> None:
    res_u, res_v = ode_residual(
        prof.params, prof.grid, prof.u, prof.v,
        bc_values=(prof.u[-1], prof.v[-1]),
    )
    resid = np.maximum(np.abs(res_u), np.abs(res_v))
    data = np.column_stack([prof.r, prof.u, prof.v, resid])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header="r,u,v,residual", comments="")


def _energy_payload(cfg: RunConfig, prof) -> dict:
    d = derive_constants(cfg.params)
    payload = {
        "params": _params_dict(cfg.params),
        "domain": {"kind": cfg.domain_kind, "R": cfg.R,
                   "bc_mode": cfg.bc_mode if cfg.domain_kind == "infinite" else None},
        "energy": discrete_energy(cfg.params, prof.grid, prof.u, prof.v),
        "residual_norm": prof.residual_norm,
        "s_plus": d.s_plus,
        "regime": classify_regime(cfg.params).tag,
        "method": prof.method,
    }
    if cfg.domain_kind == "infinite":
        payload["energy_renormalized"] = discrete_energy(
            cfg.params, prof.grid, prof.u, prof.v, renormalize=True
        )
    return payload


def cmd_solve(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.params.b2 == 0.0 and cfg.domain_kind == "infinite":
        rungs = b_zero_drift_report(cfg.params, cfg.R, cfg.n, tol=cfg.tol)
        write_report(cfg.out_dir / "drift.json", "drift",
                     {"params": _params_dict(cfg.params), "rungs": rungs})
        print("b2 = 0 entire-plane diagnostic: drift report written "
              "(no solution exists on the entire plane)", file=sys.stderr)
        return EXIT_OK
    prof = _run_solver(cfg)
    if "profile_csv" in cfg.outputs:
        _write_profile_csv(cfg.out_dir / "profile.csv", prof)
    if "energy_json" in cfg.outputs:
        write_report(cfg.out_dir / "energy.json", "energy", _energy_payload(cfg, prof))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    prof = _run_solver(cfg)
    report = verify_bounds(prof, tol=1e-6)
    payload = {
        "params": _params_dict(cfg.params),
        "regime": report.regime,
        "tol": report.tol,
        "all_satisfied": report.all_satisfied,
        "bounds": {
            name: {
                "satisfied": rec.satisfied,
                "worst_violation": rec.worst_violation,
                "worst_location": rec.worst_location,
            }
            for name, rec in report.bounds.items()
        },
    }
    write_report(cfg.out_dir / "bounds.json", "bounds", payload)
    return EXIT_OK if report.all_satisfied else EXIT_FAILED_CHECK


def cmd_asymptotics(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.domain_kind != "infinite":
        raise UsageError("asymptotics requires --rmax")
    if cfg.params.b2 == 0.0:
        rungs = b_zero_drift_report(cfg.params, cfg.R, cfg.n, tol=cfg.tol)
        write_report(cfg.out_dir / "drift.json", "drift",
                     {"params": _params_dict(cfg.params), "rungs": rungs})
        return EXIT_OK
    prof = _run_solver(cfg)
    window = (cfg.R / 2.0, cfg.R)
    fit = fit_tail(prof, window)
    dec = decoupled_tail_check(prof)
    payload = {
        "params": _params_dict(cfg.params),
        "window": list(fit.window),
        "fitted_u_const": fit.fitted_u_const,
        "fitted_u_coeff": fit.fitted_u_coeff,
        "fitted_v_const": fit.fitted_v_const,
        "fitted_v_coeff": fit.fitted_v_coeff,
        "predicted_u_coeff": fit.predicted_u_coeff,
        "predicted_v_coeff": fit.predicted_v_coeff,
        "rel_err_u": fit.rel_err_u,
        "rel_err_v": fit.rel_err_v,
        "remainder_order_estimate": fit.remainder_order_estimate,
        "decoupled": {
            "window": list(dec.window),
            "x_coeff_fitted": dec.x_coeff_fitted,
            "x_coeff_predicted": dec.x_coeff_predicted,
            "x_rel_err": dec.x_rel_err,
            "xbar_order": dec.xbar_order,
            "ybar_order": dec.ybar_order,
        },
    }
    write_report(cfg.out_dir / "tailfit.json", "tailfit", payload)
    return EXIT_OK


def cmd_stability(cfg: RunConfig, support: tuple[float, float] | None) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.domain_kind != "infinite":
        raise UsageError("stability requires --rmax")
    prof = _run_solver(cfg)
    report = minimize_rayleigh(prof, support, seed=cfg.seed)
    if report.open_question:
        print(
            "open question: no stability claim is made for |k| = 1; "
            "the reported minimal Rayleigh quotient asserts nothing",
            file=sys.stderr,
        )
    payload = {
        "params": _params_dict(cfg.params),
        "support": list(report.support),
        "min_rayleigh": report.min_rayleigh,
        "hardy_identity_error": report.hardy_identity_error,
        "k": report.k,
        "c_k": int(report.c_k),
        "open_question": report.open_question,
        "certificate_present": report.certificate is not None,
        "form_values": report.form_values,
    }
    write_report(cfg.out_dir / "stability.json", "stability", payload)
    if report.certificate is not None:
        data = np.column_stack([prof.r, report.certificate])
        np.savetxt(cfg.out_dir / "certificate.csv", data, fmt="%.17g",
                   delimiter=",", header="r,xi", comments="")
    return EXIT_OK


def cmd_qfield(cfg: RunConfig, n_angles: int) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    prof = _run_solver(cfg)
    field = reconstruct(prof, n_angles)
    export_csv(field, cfg.out_dir / "qfield.csv")
    return EXIT_OK


def _sweep_row(settings: dict, axis: str, value) -> dict:
    local = dict(settings)
    local[axis] = value
    cfg = resolve_config(local)
    prof = _run_solver(cfg)
    d = derive_constants(cfg.params)
    row = {
        "value": value,
        "s_plus": d.s_plus,
        "regime": classify_regime(cfg.params).tag,
        "energy": discrete_energy(cfg.params, prof.grid, prof.u, prof.v),
        "residual_norm": prof.residual_norm,
        "min_rayleigh": None,
        "tail_rel_err_u": None,
    }
    if cfg.domain_kind == "infinite" and cfg.params.b2 > 0.0:
        fit = fit_tail(prof, (cfg.R / 2.0, cfg.R))
        row["tail_rel_err_u"] = fit.rel_err_u
        row["min_rayleigh"] = minimize_rayleigh(prof, seed=cfg.seed).min_rayleigh
    return row


def cmd_sweep(settings: dict, axis: str, values: list) -> int:
    cfg = resolve_config(dict(settings, **{axis: values[0]}), _VERB_OUTPUTS["sweep"])
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = cfg.jobs
    if jobs == 1:
        rows = [_sweep_row(settings, axis, v) for v in values]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda v: _sweep_row(settings, axis, v), values))
    write_report(
        cfg.out_dir / "sweep.json",
        "sweep",
        {"axis": axis, "values": list(values), "rows": rows},
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _merge_settings(args)
        if args.command == "sweep":
            values = [_coerce(args.axis, v) for v in args.values.split(",") if v.strip()]
            if not values:
                raise UsageError("--values must list at least one value")
            return cmd_sweep(settings, args.axis, values)
        cfg = resolve_config(settings, _VERB_OUTPUTS[args.command])
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "asymptotics":
            return cmd_asymptotics(cfg)
        if args.command == "stability":
            support = None
            if args.support:
                parts = [float(s) for s in args.support.split(",")]
                if len(parts) != 2:
                    raise UsageError("--support expects r_a,r_b")
                support = (parts[0], parts[1])
            return cmd_stability(cfg, support)
        if args.command == "qfield":
            return cmd_qfield(cfg, args.angles)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BZeroRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except SignViolation as exc:
        print(f"sign violation: {exc}", file=sys.stderr)
        return EXIT_SIGN_VIOLATION
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ValueError,) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
