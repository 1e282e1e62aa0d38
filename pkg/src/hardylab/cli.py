"""Batch front-end: argument parsing, battery orchestration, reports.

Subcommands
    validate-atom       check stored profiles against the atom classes
    validate-molecule   check stored profiles against the molecule class
    counterexample      emit a moment-cancelling oscillating profile
    decompose           split a molecule into atoms + polynomial pieces
    hp-norm             maximal-function quasi-norm and scale profile
    hardy               weighted spectral integral with certified tail
    cz                  kernel condition checks / operator application
    sscz-params         index arithmetic for the strongly singular class

Conventions: grid data travels as CSV (full-precision decimals), reports
as JSON with sorted keys so identical configurations produce
byte-identical output.  Batteries (multiple --input files) run items
concurrently -- capped by the HARDYLAB_THREADS environment variable --
and fail soft: one item's error is recorded in its entry without
aborting the rest.  Exit status: 0 all requested checks pass, 1 any
failure or item error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .atoms import build_counterexample, validate_ps_atom, validate_psomega_atom
from .errors import ConfigError, HardyLabError, ParameterError
from .fourier import hardy_integral
from .grid import Ball, GridFunction
from .maximal import DEFAULT_SPEC, MollifierSpec, hp_quasinorm
from .molecules import MoleculeParams, validate_molecule
from .decompose import molecular_decompose
from .operators import (
    apply_operator,
    hormander_sweep,
    kernel_by_name,
    kernel_size_check,
    l2_operator_ratio,
    standard_sample_pairs,
    strong_singular_params,
    verify_Ta_molecule,
)
from .params import HardyParams

__all__ = ["RunConfig", "RunReport", "run", "main", "build_parser"]


# ---------------------------------------------------------------------------
# config / report containers


@dataclass(frozen=True)
class RunConfig:
    """A parsed, validated invocation: subcommand plus resolved options."""

    subcommand: str
    options: dict

    def __post_init__(self):
        for key in ("input", "apply"):
            for path in _as_list(self.options.get(key)):
                if not Path(path).is_file():
                    raise ConfigError(f"--{key} path not found: {path}")


@dataclass
class RunReport:
    """Ordered per-item results plus provenance; deterministic given the
    configuration (and any seed recorded in it)."""

    subcommand: str
    items: list = field(default_factory=list)
    passed: bool = True
    provenance: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "passed": self.passed,
            "items": self.items,
            "provenance": self.provenance,
        }


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _dump_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _emit(report: RunReport, out_path: str | None):
    text = _dump_json(report.as_dict())
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_ball(text: str) -> Ball:
    try:
        c_str, r_str = text.split(",")
        c, r = float(c_str), float(r_str)
    except ValueError as exc:
        raise ConfigError(f"--ball expects 'center,radius', got {text!r}") \
            from exc
    if r <= 0:
        raise ConfigError("ball radius must be positive")
    return Ball(c, r)


def _parse_envelope(text: str | None):
    if text is None:
        return None
    try:
        a_str, b_str = text.split(",")
        return float(a_str), float(b_str)
    except ValueError as exc:
        raise ConfigError(f"--envelope expects 'A,beta', got {text!r}") \
            from exc


def _thread_cap() -> int:
    env = os.environ.get("HARDYLAB_THREADS")
    if env is None:
        return 4
    try:
        cap = int(env)
    except ValueError as exc:
        raise ConfigError(f"HARDYLAB_THREADS must be an integer, got {env!r}") \
            from exc
    return max(1, cap)


def _run_battery(paths, worker):
    """Ordered fail-soft map over battery items."""
    paths = list(paths)
    if not paths:
        return [], True

    def safe(path):
        try:
            payload, ok = worker(path)
        except Exception as exc:  # fail soft: record, keep the battery alive
            return {"input": str(path), "error": f"{type(exc).__name__}: "
                                                 f"{exc}"}, False
        payload = {"input": str(path), **payload}
        return payload, ok

    cap = min(_thread_cap(), len(paths))
    if cap <= 1 or len(paths) == 1:
        results = [safe(p) for p in paths]
    else:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            results = list(pool.map(safe, paths))
    items = [payload for payload, _ in results]
    passed = all(ok for _, ok in results)
    return items, passed


def _grid_provenance(f: GridFunction) -> dict:
    return {"x0": float(f.x0), "dx": float(f.dx), "n": int(f.n)}


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_validate_atom(opt) -> RunReport:
    ball = _parse_ball(opt["ball"])
    params = HardyParams(opt["p"], s=opt["s"], omega=opt["omega"])

    def worker(path):
        f = GridFunction.from_csv(path)
        if opt["atom_class"] == "ps":
            rep = validate_ps_atom(f, ball, params, tol=opt["tol"])
        else:
            rep = validate_psomega_atom(f, ball, params, tol=opt["tol"])
        d = rep.as_dict()
        d["grid"] = _grid_provenance(f)
        return d, rep.passed

    items, passed = _run_battery(opt["input"], worker)
    return RunReport("validate-atom", items, passed,
                     {"params": {"p": opt["p"], "s": opt["s"],
                                 "omega": opt["omega"], "tol": opt["tol"]},
                      "ball": [ball.center, ball.radius]})


def _cmd_validate_molecule(opt) -> RunReport:
    ball = _parse_ball(opt["ball"])
    params = HardyParams(opt["p"], s=opt["s"], omega=opt["omega"])
    mp = MoleculeParams(params, opt["lam"])
    envelope = _parse_envelope(opt.get("envelope"))

    def worker(path):
        f = GridFunction.from_csv(path)
        rep = validate_molecule(f, ball, mp, tol=opt["tol"],
                                envelope=envelope,
                                assume_compact=opt["assume_compact"])
        d = rep.as_dict()
        d["grid"] = _grid_provenance(f)
        return d, rep.passed

    items, passed = _run_battery(opt["input"], worker)
    return RunReport("validate-molecule", items, passed,
                     {"params": {"p": opt["p"], "s": opt["s"],
                                 "omega": opt["omega"], "lambda": opt["lam"],
                                 "tol": opt["tol"]},
                      "ball": [ball.center, ball.radius],
                      "envelope": envelope})


def _cmd_counterexample(opt) -> RunReport:
    f, ball = build_counterexample(opt["k"], opt["r"], opt["phi"],
                                   subdiv=opt["subdiv"])
    f.to_csv(opt["out"])
    item = {
        "out": opt["out"],
        "ball": [ball.center, ball.radius],
        "grid": _grid_provenance(f),
        "l1_norm": float(np.sum(np.abs(f.samples)) * f.dx),
    }
    return RunReport("counterexample", [item], True,
                     {"k": opt["k"], "r": opt["r"], "phi": opt["phi"],
                      "subdiv": opt["subdiv"]})


def _cmd_decompose(opt) -> RunReport:
    ball = _parse_ball(opt["ball"])
    params = HardyParams(opt["p"], s=opt["s"], omega=opt["omega"])
    mp = MoleculeParams(params, opt["lam"])
    out_dir = Path(opt["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    res = None
    items = []
    passed = True
    try:
        M = GridFunction.from_csv(opt["input"][0]) \
            if opt["input"] else None
        if M is None:
            return RunReport("decompose", [], True, {})
        res = molecular_decompose(M, ball, mp, K_max=opt["kmax"])
    except HardyLabError as exc:
        return RunReport("decompose", [{"error": str(exc)}], False, {})

    manifest = {
        "t_k": [float(piece.coeff) for piece in res.atoms],
        "s_k": [float(piece.coeff) for piece in res.phis],
        "a_omega_coeff": float(res.a_omega.coeff),
        "sums": {"t": float(res.coeff_sum_t), "s": float(res.coeff_sum_s)},
        "residual": float(res.residual_rel),
        "K_max": int(res.K_max),
        "pieces": [],
    }
    for idx, piece in enumerate(res.atoms):
        name = f"atom_{idx:03d}.csv"
        piece.f.to_csv(out_dir / name)
        manifest["pieces"].append({
            "file": name, "kind": "atom", "k": int(piece.k),
            "coeff": float(piece.coeff), "atom_class": "ps",
            "ball": [float(piece.ball.center), float(piece.ball.radius)]})
    for idx, piece in enumerate(res.phis):
        name = f"phi_{idx:03d}.csv"
        piece.f.to_csv(out_dir / name)
        manifest["pieces"].append({
            "file": name, "kind": "phi", "k": int(piece.k),
            "coeff": float(piece.coeff), "atom_class": "ps-sup",
            "ball": [float(piece.ball.center), float(piece.ball.radius)]})
    if res.a_omega.coeff != 0.0:
        res.a_omega.f.to_csv(out_dir / "a_omega.csv")
        manifest["pieces"].append({
            "file": "a_omega.csv", "kind": "a_omega",
            "coeff": float(res.a_omega.coeff), "atom_class": "psomega",
            "ball": [float(ball.center), float(ball.radius)]})
    (out_dir / "manifest.json").write_text(_dump_json(manifest))
    items.append(manifest)
    return RunReport("decompose", items, passed,
                     {"params": {"p": opt["p"], "s": opt["s"],
                                 "omega": opt["omega"], "lambda": opt["lam"],
                                 "kmax": opt["kmax"]},
                      "ball": [ball.center, ball.radius],
                      "out_dir": str(out_dir)})


def _cmd_hp_norm(opt) -> RunReport:
    spec = MollifierSpec(opt["phi"]) if opt["phi"] != "bump" else DEFAULT_SPEC
    t_grid = None
    if opt["tmin"] is not None:
        t_grid = np.geomspace(opt["tmin"], 1.0, opt["tpoints"])

    def worker(path):
        f = GridFunction.from_csv(path)
        res = hp_quasinorm(f, opt["p"], spec=spec, t_grid=t_grid,
                           n_t=opt["tpoints"])
        if opt.get("out"):
            res.profile.values.to_csv(opt["out"])
        peak = int(np.argmax(np.abs(res.profile.values.samples)))
        payload = {
            "value": float(res.value),
            "tail_bound": float(res.tail_bound),
            "total": float(res.total),
            "argmax_t_at_peak": float(np.asarray(res.profile.argmax_t)[peak]),
            "grid": _grid_provenance(f),
        }
        return payload, bool(np.isfinite(res.total))

    items, passed = _run_battery(opt["input"], worker)
    return RunReport("hp-norm", items, passed,
                     {"p": opt["p"], "phi": opt["phi"], "tmin": opt["tmin"],
                      "tpoints": opt["tpoints"], "profile_out": opt.get("out")})


def _cmd_hardy(opt) -> RunReport:
    def worker(path):
        f = GridFunction.from_csv(path)
        rep = hardy_integral(f, opt["p"], a=opt["a"], omega=opt["omega"],
                             xi_max=opt["ximax"])
        payload = {
            "total": float(rep.total),
            "i1": float(rep.i1),
            "i2": float(rep.i2),
            "tail_bound": float(rep.tail_bound),
            "split_xi": float(rep.split_xi),
            "xi_max": float(rep.xi_max),
            "method": rep.method,
            "grid": _grid_provenance(f),
        }
        return payload, bool(np.isfinite(rep.total))

    items, passed = _run_battery(opt["input"], worker)
    report = RunReport("hardy", items, passed,
                       {"p": opt["p"], "a": opt["a"], "omega": opt["omega"],
                        "ximax": opt["ximax"]})
    return report


def _cmd_cz(opt) -> RunReport:
    K = kernel_by_name(opt["kernel"])
    items = []
    passed = True
    if opt["check_kernel"]:
        pairs = standard_sample_pairs((-4.0, 4.0), 1.0 / 256.0)
        size = kernel_size_check(K, pairs)
        sup, _ = hormander_sweep(K)
        ok = size.passed and np.isfinite(sup)
        passed &= ok
        items.append({"check": "kernel",
                      "size_constant": float(size.c_measured),
                      "regularity_constant": float(sup),
                      "passed": bool(ok)})
    if opt["apply"]:
        a = GridFunction.from_csv(opt["apply"])
        Ta = apply_operator(K, a)
        entry = {"check": "apply",
                 "input": opt["apply"],
                 "l2_ratio": float(l2_operator_ratio(K, a)),
                 "image_grid": _grid_provenance(Ta)}
        if opt.get("apply_out"):
            Ta.to_csv(opt["apply_out"])
            entry["out"] = opt["apply_out"]
        if opt["verify_molecule"]:
            if opt["ball"] is None:
                raise ConfigError("--verify-molecule requires --ball")
            ball = _parse_ball(opt["ball"])
            params = HardyParams(opt["p"], s=opt["s"], omega=opt["omega"])
            rep = verify_Ta_molecule(K, a, ball, params, opt["lam"])
            entry["molecule"] = rep.as_dict()
            passed &= rep.passed
        items.append(entry)
    return RunReport("cz", items, passed,
                     {"kernel": opt["kernel"], "p": opt.get("p"),
                      "s": opt.get("s"), "lambda": opt.get("lam")})


def _cmd_sscz_params(opt) -> RunReport:
    sp = strong_singular_params(opt["beta"], opt["sigma"], opt["delta"],
                                opt["mu"], opt["s"])
    return RunReport("sscz-params", [sp.as_dict()], True,
                     {"beta": opt["beta"], "sigma": opt["sigma"],
                      "delta": opt["delta"], "mu": opt["mu"], "s": opt["s"]})


_HANDLERS = {
    "validate-atom": _cmd_validate_atom,
    "validate-molecule": _cmd_validate_molecule,
    "counterexample": _cmd_counterexample,
    "decompose": _cmd_decompose,
    "hp-norm": _cmd_hp_norm,
    "hardy": _cmd_hardy,
    "cz": _cmd_cz,
    "sscz-params": _cmd_sscz_params,
}


def run(config: RunConfig) -> RunReport:
    """Dispatch a validated configuration to its subcommand handler."""
    handler = _HANDLERS.get(config.subcommand)
    if handler is None:
        raise ConfigError(f"unknown subcommand {config.subcommand!r}")
    return handler(config.options)


# ---------------------------------------------------------------------------
# argument parsing


def _add_params(sub, with_lambda=False, omega_default=1.0):
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--s", type=float, default=2.0)
    sub.add_argument("--omega", type=float, default=omega_default)
    if with_lambda:
        sub.add_argument("--lambda", dest="lam", type=float, required=True)
    sub.add_argument("--tol", type=float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardylab",
        description="Numerical checks for local Hardy-space building blocks")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sub = subs.add_parser("validate-atom",
                          help="check profiles against the atom classes")
    sub.add_argument("--input", nargs="*", default=[], metavar="f.csv")
    sub.add_argument("--ball", required=True, metavar="c,r")
    sub.add_argument("--atom-class", choices=("ps", "psomega"),
                     default="psomega", dest="atom_class")
    _add_params(sub)
    sub.add_argument("--out", default=None, metavar="report.json")

    sub = subs.add_parser("validate-molecule",
                          help="check profiles against the molecule class")
    sub.add_argument("--input", nargs="*", default=[], metavar="M.csv")
    sub.add_argument("--ball", required=True, metavar="c,r")
    _add_params(sub, with_lambda=True)
    sub.add_argument("--envelope", default=None, metavar="A,beta")
    sub.add_argument("--assume-compact", action="store_true",
                     dest="assume_compact")
    sub.add_argument("--out", default=None, metavar="report.json")

    sub = subs.add_parser("counterexample",
                          help="emit a moment-cancelling oscillating profile")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--r", type=float, required=True)
    sub.add_argument("--phi", type=float, required=True,
                     help="prescribed critical moment pairing value")
    sub.add_argument("--subdiv", type=int, default=6)
    sub.add_argument("--out", required=True, metavar="a.csv")
    sub.add_argument("--report", default=None, metavar="report.json")

    sub = subs.add_parser("decompose",
                          help="split a molecule into atoms and poly pieces")
    sub.add_argument("--input", nargs="*", default=[], metavar="M.csv")
    sub.add_argument("--ball", required=True, metavar="c,r")
    _add_params(sub, with_lambda=True)
    sub.add_argument("--kmax", type=int, default=None)
    sub.add_argument("--out-dir", required=True, dest="out_dir")
    sub.add_argument("--out", default=None, metavar="report.json")

    sub = subs.add_parser("hp-norm",
                          help="maximal-function quasi-norm and profile")
    sub.add_argument("--input", nargs="*", default=[], metavar="f.csv")
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--phi", default="bump")
    sub.add_argument("--tmin", type=float, default=None)
    sub.add_argument("--tpoints", type=int, default=64)
    sub.add_argument("--out", default=None, metavar="profile.csv")
    sub.add_argument("--report", default=None, metavar="report.json")

    sub = subs.add_parser("hardy",
                          help="weighted spectral integral with tail bound")
    sub.add_argument("--input", nargs="*", default=[], metavar="f.csv")
    sub.add_argument("--p", type=float, required=True)
    sub.add_argument("--a", type=float, default=1.0)
    sub.add_argument("--omega", type=float, default=1.0)
    sub.add_argument("--ximax", type=float, default=None)
    sub.add_argument("--out", default=None, metavar="report.json")

    sub = subs.add_parser("cz",
                          help="kernel checks and operator application")
    sub.add_argument("--kernel", required=True,
                     choices=("bump", "hilbert", "hilbert-wide", "warped"))
    sub.add_argument("--check-kernel", action="store_true",
                     dest="check_kernel")
    sub.add_argument("--apply", default=None, metavar="atom.csv")
    sub.add_argument("--apply-out", default=None, dest="apply_out",
                     metavar="Ta.csv")
    sub.add_argument("--verify-molecule", action="store_true",
                     dest="verify_molecule")
    sub.add_argument("--ball", default=None, metavar="c,r")
    sub.add_argument("--p", type=float, default=1.0)
    sub.add_argument("--s", type=float, default=2.0)
    sub.add_argument("--omega", type=float, default=1.0)
    sub.add_argument("--lambda", dest="lam", type=float, default=2.0)
    sub.add_argument("--out", default=None, metavar="report.json")

    sub = subs.add_parser("sscz-params",
                          help="strongly singular index arithmetic")
    sub.add_argument("--beta", type=float, required=True)
    sub.add_argument("--sigma", type=float, required=True)
    sub.add_argument("--delta", type=float, required=True)
    sub.add_argument("--mu", type=float, required=True)
    sub.add_argument("--s", type=float, default=2.0)
    sub.add_argument("--out", default=None, metavar="report.json")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    options = vars(ns).copy()
    sub = options.pop("subcommand")
    out_path = options.get("report") or options.get("out")
    if sub in ("counterexample", "hp-norm"):
        # --out is a CSV payload path there; reports go to --report/stdout
        out_path = options.get("report")
    try:
        config = RunConfig(sub, options)
        report = run(config)
    except (ConfigError, ParameterError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    _emit(report, out_path)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
