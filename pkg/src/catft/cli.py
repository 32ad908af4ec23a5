"""Command-line interface: JSON configs in, JSON/CSV results out.

Subcommands: codeword, kl-check, meas-error, ft-check, exrec, sweep,
breakeven.  Every output embeds the fully materialized configuration and the
seed, so a result file is reproducible on its own.  Progress goes to stderr;
data goes to --out (or stdout).

Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys

import numpy as np

from . import codes, exrec, ftcheck, phase_meas, sweep
from .codes import CodeSpec
from .errors import CatftError, ConfigError, DecodeDegenerateError, DegenerateCodeError, InvalidStateError
from .exrec import ExRecConfig, run_and_report
from .gadgets import GadgetSpec
from .noise import NoiseStrength
from .sweep import SearchSpace

CSV_COLUMNS = [
    "scheme", "N", "M", "gamma_loss", "gamma_ph", "wait_mult", "alpha_in",
    "alpha_anc", "phi0_in", "phi0_anc", "squeeze_r", "R", "R_stderr", "inF",
    "inF_bm", "shots", "seed",
]


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _validate(config: dict, schema: dict, path: str = "") -> dict:
    """Reject unknown fields and fill defaults; returns the echoed config."""
    if not isinstance(config, dict):
        raise ConfigError("expected an object", path or "<root>")
    out = {}
    for key, value in config.items():
        if key not in schema:
            raise ConfigError(f"unknown field {key!r}", f"{path}{key}")
        spec = schema[key]
        if isinstance(spec, dict):
            out[key] = _validate(value if value is not None else {}, spec, f"{path}{key}.")
        else:
            out[key] = value
    for key, spec in schema.items():
        if key in out:
            continue
        if isinstance(spec, dict):
            out[key] = _validate({}, spec, f"{path}{key}.")
        else:
            out[key] = spec
    return out


_CODE_SCHEMA = {
    "N": 2, "alpha": 3.0, "squeeze_r": 0.0, "squeeze_varphi": math.pi / 2,
    "dim": None,
}

_SPACE_SCHEMA = {
    "alpha_in": [1.5, 4.5], "alpha_anc": [1.5, 4.5],
    "phi0_in": None, "phi0_anc": None,
    "squeeze_r": [0.0, 1.5], "wait_mult": [1.0, 64.0],
    "optimize_squeeze": False, "optimize_wait": False,
    "grid_points": 4, "fixed": None,
}

SCHEMAS = {
    "codeword": _CODE_SCHEMA,
    "kl-check": {
        "N": 2, "alphas": [1.5, 2.0, 2.5, 3.0], "squeeze_r": 0.0,
        "squeeze_varphi": math.pi / 2, "k_max": None, "theta_points": 8,
    },
    "meas-error": {
        "N": 2, "alphas": [1.5, 2.0, 2.5, 3.0], "squeeze_rs": [0.0],
        "phi0": 0.0, "k_shift": 0,
    },
    "ft-check": {
        "scheme": "knill", "N": 2, "M": None, "k_value": 1,
        "theta_value": -math.pi / 8, "audit_M_range": None,
        "pattern": None, "max_weight": None,
    },
    "exrec": {
        "scheme": "hybrid", "N": 2, "M": None,
        "alpha_in": 3.0, "alpha_anc": 3.0,
        "squeeze_r_in": 0.0, "squeeze_varphi_in": math.pi / 2,
        "squeeze_r_anc": 0.0, "squeeze_varphi_anc": math.pi / 2,
        "phi0_in": 0.0, "phi0_anc": 0.0,
        "gamma_loss_op": 0.0, "gamma_ph_op": 0.0, "wait_mult": 1.0,
        "shots": 1000, "seed": 0, "include_input_noise": False,
    },
    "sweep": {
        "scheme": "hybrid", "N": 2, "M": None,
        "gamma_loss_list": [1e-3], "gamma_ph_list": [5e-4],
        "space": _SPACE_SCHEMA, "budget": 40, "shots": 1000,
        "final_shots": None, "seed": 0,
    },
    "breakeven": {
        "scheme": "hybrid", "N": 2, "M": None,
        "gamma_ph_list": [5e-4], "space": _SPACE_SCHEMA,
        "budget": 40, "shots": 1000, "seed": 0,
        "gamma_loss_bracket": [3e-5, 3e-2], "ratio_tol": 0.1,
        "bracket_factor": 1.3,
    },
}


def _space_from_config(cfg: dict, ns: argparse.Namespace | None = None) -> SearchSpace:
    fixed = tuple(sorted((cfg.get("fixed") or {}).items())) if cfg.get("fixed") else ()
    kwargs = {
        "alpha_in": tuple(cfg["alpha_in"]),
        "alpha_anc": tuple(cfg["alpha_anc"]),
        "squeeze_r": tuple(cfg["squeeze_r"]),
        "wait_mult": tuple(cfg["wait_mult"]),
        "optimize_squeeze": bool(cfg["optimize_squeeze"]),
        "optimize_wait": bool(cfg["optimize_wait"]),
        "grid_points": int(cfg["grid_points"]),
        "fixed": fixed,
    }
    if cfg["phi0_in"] is not None:
        kwargs["phi0_in"] = tuple(cfg["phi0_in"])
    if cfg["phi0_anc"] is not None:
        kwargs["phi0_anc"] = tuple(cfg["phi0_anc"])
    return SearchSpace(**kwargs)


def _json_out(payload: dict, out_path: str | None):
    text = json.dumps(payload, indent=2, default=_json_default)
    _write(text + "\n", out_path)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _csv_out(rows: list[dict], columns: list[str], config: dict, out_path: str | None):
    buf = io.StringIO()
    buf.write("# config " + json.dumps(config, default=_json_default) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")
    _write(buf.getvalue(), out_path)


def _write(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _progress(msg: str):
    print(msg, file=sys.stderr, flush=True)


def _sweep_row(scheme, N, M, point: sweep.SweepPoint, shots, seed) -> dict:
    p = point.best_params
    return {
        "scheme": scheme, "N": N, "M": M,
        "gamma_loss": point.gamma_loss, "gamma_ph": point.gamma_ph,
        "wait_mult": p.get("wait_mult", 1.0),
        "alpha_in": p.get("alpha_in"), "alpha_anc": p.get("alpha_anc"),
        "phi0_in": p.get("phi0_in", 0.0), "phi0_anc": p.get("phi0_anc", 0.0),
        "squeeze_r": p.get("squeeze_r", 0.0),
        "R": point.best_ratio, "R_stderr": point.best_stderr,
        "inF": None, "inF_bm": None,
        "shots": shots, "seed": seed,
    }


def cmd_codeword(cfg: dict, ns) -> int:
    spec = CodeSpec(
        N=int(cfg["N"]), alpha=float(cfg["alpha"]),
        squeeze_r=float(cfg["squeeze_r"]),
        squeeze_varphi=float(cfg["squeeze_varphi"]),
        dim=cfg["dim"],
    )
    cw = codes.codewords(spec)
    payload = {
        "config": cfg,
        "result": {
            "dim": cw.dim,
            "norm_constants": list(cw.norm_constants),
            "ket0": {"re": cw.ket0.amps.real.tolist(), "im": cw.ket0.amps.imag.tolist()},
            "ket1": {"re": cw.ket1.amps.real.tolist(), "im": cw.ket1.amps.imag.tolist()},
        },
    }
    _json_out(payload, ns.out)
    return 0


def cmd_kl_check(cfg: dict, ns) -> int:
    spec = CodeSpec(
        N=int(cfg["N"]), alpha=float(cfg["alphas"][0]),
        squeeze_r=float(cfg["squeeze_r"]), squeeze_varphi=float(cfg["squeeze_varphi"]),
    )
    k_max = cfg["k_max"] if cfg["k_max"] is not None else spec.N - 1
    thetas = np.linspace(-math.pi / spec.N * 0.875, 0.0, int(cfg["theta_points"]))
    report = codes.kl_violation(
        spec, k_range=range(int(k_max) + 1), theta_grid=thetas, alphas=cfg["alphas"]
    )
    _json_out({"config": cfg, "result": dataclasses.asdict(report)}, ns.out)
    return 0


def cmd_meas_error(cfg: dict, ns) -> int:
    rows = []
    for r in cfg["squeeze_rs"]:
        for alpha in cfg["alphas"]:
            p = phase_meas.xbar_error_prob(
                int(cfg["N"]), float(alpha), r=float(r),
                k_shift=int(cfg["k_shift"]), phi0=float(cfg["phi0"]),
            )
            rows.append({"N": cfg["N"], "alpha": alpha, "squeeze_r": r, "p_err": p})
    _csv_out(rows, ["N", "alpha", "squeeze_r", "p_err"], cfg, ns.out)
    return 0


def cmd_ft_check(cfg: dict, ns) -> int:
    scheme = cfg["scheme"]
    N = int(cfg["N"])
    M = cfg["M"] if cfg["M"] is not None else (N if scheme == "knill" else 1)
    result = {}
    if cfg["pattern"]:
        pattern = {int(k): tuple(v) for k, v in cfg["pattern"].items()}
        verdict = ftcheck.ecft_check(scheme, N, int(M), pattern=pattern)
        result["pattern_verdict"] = {
            "satisfied": verdict.satisfied,
            "hypothesis_holds": verdict.hypothesis_holds,
            "reasons": verdict.reasons,
            "propagation": dataclasses.asdict(verdict.propagation),
        }
    else:
        result["exhaustive"] = ftcheck.ecft_exhaustive(
            scheme, N, int(M), k_value=int(cfg["k_value"]),
            theta_value=float(cfg["theta_value"]),
        )
    if cfg["audit_M_range"]:
        result["ancilla_order_audit"] = ftcheck.ancilla_order_audit(
            scheme, N, [int(m) for m in cfg["audit_M_range"]],
            max_weight=cfg["max_weight"],
        )
    _json_out({"config": cfg, "result": result}, ns.out)
    return 0


def cmd_exrec(cfg: dict, ns) -> int:
    gadget = GadgetSpec(
        scheme=cfg["scheme"], N=int(cfg["N"]), M=cfg["M"],
        alpha_in=float(cfg["alpha_in"]), alpha_anc=float(cfg["alpha_anc"]),
        squeeze_r_in=float(cfg["squeeze_r_in"]),
        squeeze_varphi_in=float(cfg["squeeze_varphi_in"]),
        squeeze_r_anc=float(cfg["squeeze_r_anc"]),
        squeeze_varphi_anc=float(cfg["squeeze_varphi_anc"]),
        phi0_in=float(cfg["phi0_in"]), phi0_anc=float(cfg["phi0_anc"]),
    )
    config = ExRecConfig(
        gadget=gadget,
        op_noise=NoiseStrength(float(cfg["gamma_loss_op"]), float(cfg["gamma_ph_op"])),
        wait_mult=float(cfg["wait_mult"]),
        shots=int(cfg["shots"]),
        seed=int(cfg["seed"]),
        include_input_noise=bool(cfg["include_input_noise"]),
        workers=ns.threads,
    )
    _progress(f"exrec: {cfg['scheme']} N={cfg['N']} shots={cfg['shots']}")
    rep = run_and_report(config)
    result = {
        "F_ent": rep.f_ent,
        "inF": rep.infidelity,
        "inF_bm": rep.benchmark_infidelity,
        "R": rep.ratio,
        "R_stderr": rep.standard_error,
        "shots": rep.shots,
    }
    _json_out({"config": cfg, "result": result}, ns.out)
    return 0


def cmd_sweep(cfg: dict, ns) -> int:
    space = _space_from_config(cfg["space"])
    rows = []
    M = cfg["M"]
    for gph in cfg["gamma_ph_list"]:
        for gl in cfg["gamma_loss_list"]:
            _progress(f"sweep: optimizing ({gl:.3g}, {gph:.3g})")
            point = sweep.optimize_point(
                (float(gl), float(gph)), cfg["scheme"], int(cfg["N"]), space,
                budget=int(cfg["budget"]), shots=int(cfg["shots"]),
                seed=int(cfg["seed"]), M=M,
                final_shots=cfg["final_shots"],
            )
            rows.append(_sweep_row(
                cfg["scheme"], cfg["N"],
                M if M is not None else (cfg["N"] if cfg["scheme"] == "knill" else 1),
                point, point.shots, cfg["seed"],
            ))
    _csv_out(rows, CSV_COLUMNS, cfg, ns.out)
    return 0


def cmd_breakeven(cfg: dict, ns) -> int:
    space = _space_from_config(cfg["space"])
    points = sweep.breakeven_scan(
        cfg["scheme"], int(cfg["N"]),
        [float(g) for g in cfg["gamma_ph_list"]], space,
        budget=int(cfg["budget"]), shots=int(cfg["shots"]), seed=int(cfg["seed"]),
        M=cfg["M"],
        gamma_loss_bracket=tuple(cfg["gamma_loss_bracket"]),
        ratio_tol=float(cfg["ratio_tol"]),
        bracket_factor=float(cfg["bracket_factor"]),
    )
    rows = []
    for pt in points:
        p = pt.best_params
        rows.append({
            "scheme": cfg["scheme"], "N": cfg["N"],
            "M": cfg["M"] if cfg["M"] is not None else (cfg["N"] if cfg["scheme"] == "knill" else 1),
            "gamma_loss": pt.gamma_loss_star, "gamma_ph": pt.gamma_ph,
            "wait_mult": p.get("wait_mult", 1.0),
            "alpha_in": p.get("alpha_in"), "alpha_anc": p.get("alpha_anc"),
            "phi0_in": p.get("phi0_in", 0.0), "phi0_anc": p.get("phi0_anc", 0.0),
            "squeeze_r": p.get("squeeze_r", 0.0),
            "R": pt.ratio_at_star, "R_stderr": pt.stderr_at_star,
            "inF": None, "inF_bm": None,
            "shots": cfg["shots"], "seed": cfg["seed"],
            "gamma_loss_lo": pt.bracket[0], "gamma_loss_hi": pt.bracket[1],
            "out_of_range": int(pt.out_of_range),
        })
    _csv_out(rows, CSV_COLUMNS + ["gamma_loss_lo", "gamma_loss_hi", "out_of_range"], cfg, ns.out)
    return 0


COMMANDS = {
    "codeword": cmd_codeword,
    "kl-check": cmd_kl_check,
    "meas-error": cmd_meas_error,
    "ft-check": cmd_ft_check,
    "exrec": cmd_exrec,
    "sweep": cmd_sweep,
    "breakeven": cmd_breakeven,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catft",
        description="Cat-code error-correction circuit simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults apply if omitted)")
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--threads", type=int, default=1, help="worker process cap")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        raw = {}
        if ns.config:
            with open(ns.config) as fh:
                raw = json.load(fh)
        cfg = _validate(raw, SCHEMAS[ns.command])
        if ns.seed is not None and "seed" in SCHEMAS[ns.command]:
            cfg["seed"] = ns.seed
        return COMMANDS[ns.command](cfg, ns)
    except ConfigError as exc:
        _progress(f"config error: {exc}")
        return 2
    except (json.JSONDecodeError, FileNotFoundError) as exc:
        _progress(f"config error: {exc}")
        return 2
    except (DecodeDegenerateError, DegenerateCodeError, InvalidStateError) as exc:
        _progress(f"numerical degeneracy: {exc}")
        return 3
    except CatftError as exc:
        _progress(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
