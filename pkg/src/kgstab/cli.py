"""Command-line front end: every analysis as a subcommand.

JSON output is wrapped in a fixed envelope (schema_version / command /
params / payload / provenance) and rendered by a deterministic serializer:
identical arguments give byte-identical payloads, with volatile facts (wall
time, file paths) quarantined in ``provenance``.

Exit codes: 0 success, 2 usage, 3 domain/grid/CFL errors, 4 oracle
disagreement, 5 blow-up-truncated evolution.  Every failure prints a single
machine-parsable line ``kgstab: <tag>: <reason>`` on stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import evolve as evolve_mod
from . import soliton, spectrum, stability
from .model import DomainError, ModelParams, alpha_of_omega

SCHEMA_VERSION = "1.0.0"

# Published payload schemas, one per subcommand (restricted JSON-Schema
# vocabulary: type / required / properties / items; "number" admits any
# finite numeric, "maybe-number" admits null as well).
_NUM = {"type": "number"}
_INT = {"type": "integer"}
_MAYBE_NUM = {"type": ["number", "null"]}
_NUM_ARRAY = {"type": "array", "items": _NUM}
_PARAMS_SCHEMA = {
    "type": "object",
    "required": ["a", "b", "m"],
    "properties": {"a": _NUM, "b": _NUM, "m": _NUM},
}

SCHEMAS = {
    "tau-star": {
        "type": "object",
        "required": ["tau_star", "alpha_d"],
        "properties": {"tau_star": _NUM, "alpha_d": _NUM},
    },
    "classify": {
        "type": "object",
        "required": ["params", "tau", "tau_star", "omega_window",
                     "roots_alpha", "roots_omega", "intervals"],
        "properties": {
            "params": _PARAMS_SCHEMA,
            "tau": _NUM,
            "tau_star": _NUM,
            "omega_window": {
                "type": "object",
                "required": ["omega_star", "m"],
                "properties": {"omega_star": _NUM, "m": _NUM},
            },
            "roots_alpha": _NUM_ARRAY,
            "roots_omega": _NUM_ARRAY,
            "intervals": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["lo", "hi", "verdict"],
                    "properties": {"lo": _NUM, "hi": _NUM,
                                   "verdict": {"type": "string"}},
                },
            },
        },
    },
    "profile": {
        "type": "object",
        "required": ["omega", "half_length", "step", "max_ode_residual",
                     "x", "r"],
        "properties": {"omega": _NUM, "half_length": _NUM, "step": _NUM,
                       "max_ode_residual": _NUM, "x": _NUM_ARRAY,
                       "r": _NUM_ARRAY},
    },
    "sigma": {
        "type": "object",
        "required": ["omega", "alpha", "sigma_closed"],
        "properties": {"omega": _NUM, "alpha": _NUM, "sigma_closed": _NUM,
                       "sigma_quadrature": _NUM, "relative_gap": _NUM},
    },
    "spectrum": {
        "type": "object",
        "required": ["omega", "grid", "lplus_eigenvalues",
                     "lminus_eigenvalues", "lplus_kernel_match",
                     "lminus_kernel_match", "negative_count_lplus",
                     "negative_count_lminus"],
        "properties": {
            "omega": _NUM,
            "grid": {
                "type": "object",
                "required": ["half_length", "step"],
                "properties": {"half_length": _NUM, "step": _NUM},
            },
            "lplus_eigenvalues": _NUM_ARRAY,
            "lminus_eigenvalues": _NUM_ARRAY,
            "lplus_kernel_match": _NUM,
            "lminus_kernel_match": _NUM,
            "negative_count_lplus": _INT,
            "negative_count_lminus": _INT,
        },
    },
    "evolve": {
        "type": "object",
        "required": ["t_final", "relative_energy_drift",
                     "relative_charge_drift", "initial_distance",
                     "max_distance", "distance_ratio", "first_crossing_100x",
                     "max_sup_amplitude", "truncated", "truncation_time",
                     "tail_first_exceed"],
        "properties": {
            "t_final": _NUM,
            "relative_energy_drift": _NUM,
            "relative_charge_drift": _NUM,
            "initial_distance": _NUM,
            "max_distance": _NUM,
            "distance_ratio": _MAYBE_NUM,
            "first_crossing_100x": _MAYBE_NUM,
            "max_sup_amplitude": _NUM,
            "truncated": {"type": "boolean"},
            "truncation_time": _MAYBE_NUM,
            "tail_first_exceed": _MAYBE_NUM,
        },
    },
    "sweep": {
        "type": "object",
        "required": ["n", "rows"],
        "properties": {
            "n": _INT,
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["omega", "alpha", "sigma", "d2_sign"],
                    "properties": {"omega": _NUM, "alpha": _NUM,
                                   "sigma": _NUM, "d2_sign": _INT},
                },
            },
        },
    },
}

# Relative gap between closed-form sigma and its quadrature oracle beyond
# which `sigma --check` refuses to pass.
_SIGMA_GAP_LIMIT = 1e-6
_SIGMA_CHECK_STEP = 0.005


def _format_float(value: float) -> str:
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"non-finite number {value!r} has no JSON encoding")
    return format(value, ".17g")


def _escape_string(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch in ('"', "\\"):
            out.append("\\" + ch)
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def render_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, 17-significant-digit
    floats, no locale or timestamp dependence."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):  # bool before int: True is an int subclass
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return _escape_string(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{_escape_string(str(key))}: {render_json(val, indent + 1)}"
            for key, val in obj.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        parts = [f"{inner}{render_json(val, indent + 1)}" for val in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    raise TypeError(f"no JSON encoding for {type(obj).__name__}")


def _envelope(command: str, params, payload: dict, provenance: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "payload": payload,
        "provenance": provenance,
    }


def _params_dict(p: ModelParams) -> dict:
    return {"a": p.a, "b": p.b, "m": p.m}


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as stream:
            stream.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    """argparse with a single-line machine-parsable usage error."""

    def error(self, message):
        self.exit(2, f"kgstab: usage-error: {message}\n")


def _add_model_args(cmd, with_omega: bool = False):
    cmd.add_argument("--a", type=float, required=True,
                     help="quadratic coefficient (positive)")
    cmd.add_argument("--b", type=float, required=True,
                     help="cubic coefficient (positive)")
    cmd.add_argument("--m", type=float, required=True, help="mass (positive)")
    if with_omega:
        cmd.add_argument("--omega", type=float, required=True,
                         help="standing-wave frequency inside the window")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kgstab",
                     description="Standing-wave construction and stability "
                                 "classification for the quadratic-cubic "
                                 "Klein-Gordon equation")
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("tau-star", help="critical coupling sup k2")
    cmd.add_argument("--json", action="store_true")
    cmd.set_defaults(func=_cmd_tau_star)

    cmd = sub.add_parser("classify", help="stable/unstable window partition")
    _add_model_args(cmd)
    fmt = cmd.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    cmd.add_argument("--no-check", action="store_true",
                     help="skip the finite-difference oracle check")
    cmd.set_defaults(func=_cmd_classify)

    cmd = sub.add_parser("profile", help="sampled profile R(x) as CSV")
    _add_model_args(cmd, with_omega=True)
    cmd.add_argument("--h", type=float, default=0.01, help="grid step")
    cmd.add_argument("--tail", type=float, default=1e-12,
                     help="tail tolerance relative to R(0)")
    cmd.add_argument("--json", action="store_true")
    cmd.add_argument("--out", help="output path (default stdout)")
    cmd.set_defaults(func=_cmd_profile)

    cmd = sub.add_parser("sigma", help="closed-form sigma = omega*||R||^2")
    _add_model_args(cmd, with_omega=True)
    cmd.add_argument("--check", action="store_true",
                     help="compare against quadrature; nonzero exit on gap")
    cmd.add_argument("--json", action="store_true")
    cmd.set_defaults(func=_cmd_sigma)

    cmd = sub.add_parser("spectrum", help="low spectrum of L+ and L-")
    _add_model_args(cmd, with_omega=True)
    cmd.add_argument("--h", type=float, default=0.02, help="grid step")
    cmd.add_argument("--L", type=float, default=None, help="half-length")
    cmd.add_argument("--k", type=int, default=4, help="eigenpair count")
    cmd.add_argument("--json", action="store_true")
    cmd.add_argument("--vectors", help="write eigenvectors to this CSV path")
    cmd.set_defaults(func=_cmd_spectrum)

    cmd = sub.add_parser("evolve", help="nonlinear evolution diagnostics")
    _add_model_args(cmd, with_omega=True)
    cmd.add_argument("--perturb", required=True,
                     type=evolve_mod.parse_perturbation,
                     help="none | scale:EPS | bump:EPS")
    cmd.add_argument("--t-final", type=float, required=True, dest="t_final")
    cmd.add_argument("--dx", type=float, default=0.02)
    cmd.add_argument("--dt", type=float, default=0.01)
    cmd.add_argument("--sample", type=int, default=50,
                     help="steps between diagnostic samples")
    cmd.add_argument("--out", required=True,
                     help="path for the diagnostics CSV")
    cmd.set_defaults(func=_cmd_evolve)

    cmd = sub.add_parser("sweep", help="omega grid of (alpha, sigma, sign d2)")
    _add_model_args(cmd)
    cmd.add_argument("--n", type=int, required=True,
                     help="number of omega samples")
    cmd.add_argument("--json", action="store_true")
    cmd.add_argument("--out", help="output path (default stdout)")
    cmd.set_defaults(func=_cmd_sweep)

    return parser


def _cmd_tau_star(args) -> int:
    start = time.perf_counter()
    crit = stability.tau_star()
    if args.json:
        payload = {"tau_star": crit.tau_star, "alpha_d": crit.alpha_d}
        prov = {"tolerances": {"tol_alpha": 1e-12},
                "wall_time_s": time.perf_counter() - start}
        print(render_json(_envelope("tau-star", None, payload, prov)))
    else:
        print(f"tau_star = {_format_float(crit.tau_star)}")
        print(f"alpha_d = {_format_float(crit.alpha_d)}")
    return 0


def _cmd_classify(args) -> int:
    start = time.perf_counter()
    p = ModelParams(args.a, args.b, args.m)
    report = stability.classify(p, check_oracle=not args.no_check)
    if args.json:
        prov = {"tolerances": {"alpha_tol": 1e-12, "sign_tol": 1e-10},
                "oracle_checked": not args.no_check,
                "wall_time_s": time.perf_counter() - start}
        print(render_json(_envelope("classify", _params_dict(p),
                                    report.to_dict(), prov)))
    elif args.csv:
        lines = ["lo,hi,verdict"]
        lines += [f"{_format_float(lo)},{_format_float(hi)},{verdict}"
                  for (lo, hi, verdict) in report.intervals]
        print("\n".join(lines))
    else:
        print(f"tau = {_format_float(report.tau)}")
        print(f"tau_star = {_format_float(report.tau_star)}")
        print(f"omega_window = ({_format_float(report.omega_window.omega_star)}, "
              f"{_format_float(report.omega_window.m)})")
        for root_a, root_w in zip(report.roots_alpha, report.roots_omega):
            print(f"root: omega = {_format_float(root_w)} "
                  f"(alpha = {_format_float(root_a)})")
        for lo, hi, verdict in report.intervals:
            print(f"{verdict}: ({_format_float(lo)}, {_format_float(hi)})")
    return 0


def _cmd_profile(args) -> int:
    start = time.perf_counter()
    p = ModelParams(args.a, args.b, args.m)
    prof = soliton.build_profile(p, args.omega, args.h, tail_tol=args.tail)
    if args.json:
        payload = {
            "omega": prof.omega,
            "half_length": prof.half_length,
            "step": prof.step,
            "max_ode_residual": prof.max_ode_residual,
            "x": [float(v) for v in prof.x],
            "r": [float(v) for v in prof.values],
        }
        prov = {"grid": {"step": args.h, "tail_tol": args.tail},
                "wall_time_s": time.perf_counter() - start}
        text = render_json(_envelope("profile", _params_dict(p), payload,
                                     prov)) + "\n"
    else:
        lines = ["x,R"]
        lines += [f"{_format_float(float(x))},{_format_float(float(r))}"
                  for x, r in zip(prof.x, prof.values)]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_sigma(args) -> int:
    start = time.perf_counter()
    p = ModelParams(args.a, args.b, args.m)
    closed = stability.sigma_closed(p, args.omega)
    alpha = alpha_of_omega(p, args.omega)
    payload = {"omega": args.omega, "alpha": alpha, "sigma_closed": closed}
    gap = None
    if args.check:
        quad = soliton.charge(
            soliton.build_profile(p, args.omega, _SIGMA_CHECK_STEP))
        gap = abs(closed - quad) / closed
        payload["sigma_quadrature"] = quad
        payload["relative_gap"] = gap
    if args.json:
        prov = {"tolerances": {"check_gap": _SIGMA_GAP_LIMIT},
                "grid": {"step": _SIGMA_CHECK_STEP} if args.check else None,
                "wall_time_s": time.perf_counter() - start}
        print(render_json(_envelope("sigma", _params_dict(p), payload, prov)))
    else:
        print(f"sigma_closed = {_format_float(closed)}")
        if args.check:
            print(f"sigma_quadrature = {_format_float(payload['sigma_quadrature'])}")
            print(f"relative_gap = {_format_float(gap)}")
    if gap is not None and not gap < _SIGMA_GAP_LIMIT:
        print(f"kgstab: oracle-disagreement: sigma quadrature gap {gap:.3e} "
              f"exceeds {_SIGMA_GAP_LIMIT:.0e}", file=sys.stderr)
        return 4
    return 0


def _cmd_spectrum(args) -> int:
    start = time.perf_counter()
    p = ModelParams(args.a, args.b, args.m)
    if args.k < 2:
        raise DomainError("--k must be at least 2 (kernel match needs the "
                          "second eigenpair)")
    report = spectrum.spectral_report(p, args.omega, args.h,
                                      half_length=args.L, k=args.k)
    if args.vectors:
        header = ["x"]
        header += [f"lplus_{i}" for i in range(args.k)]
        header += [f"lminus_{i}" for i in range(args.k)]
        lines = [",".join(header)]
        for i, x in enumerate(report.x):
            row = [x, *report.lplus_eigenvectors[i],
                   *report.lminus_eigenvectors[i]]
            lines.append(",".join(_format_float(float(v)) for v in row))
        with open(args.vectors, "w", encoding="utf-8") as stream:
            stream.write("\n".join(lines) + "\n")
    if args.json:
        prov = {"grid": {"step": args.h, "half_length": report.half_length,
                         "k": args.k},
                "tolerances": {"eigenvalue_tol": 1e-10,
                               "kernel_band": 10.0 * args.h * args.h},
                "wall_time_s": time.perf_counter() - start}
        print(render_json(_envelope("spectrum", _params_dict(p),
                                    report.to_dict(), prov)))
    else:
        print(f"omega = {_format_float(report.omega)}")
        print("lplus_eigenvalues = "
              + " ".join(_format_float(v) for v in report.lplus_eigenvalues))
        print("lminus_eigenvalues = "
              + " ".join(_format_float(v) for v in report.lminus_eigenvalues))
        print(f"negative_count_lplus = {report.negative_count_lplus}")
        print(f"negative_count_lminus = {report.negative_count_lminus}")
        print(f"lplus_kernel_match = {_format_float(report.lplus_kernel_match)}")
        print(f"lminus_kernel_match = {_format_float(report.lminus_kernel_match)}")
    return 0


def _cmd_evolve(args) -> int:
    start = time.perf_counter()
    p = ModelParams(args.a, args.b, args.m)
    kind, eps = args.perturb
    if not args.t_final > 0.0:
        raise DomainError(f"--t-final must be positive, got {args.t_final!r}")
    if args.sample < 1:
        raise DomainError(f"--sample must be >= 1, got {args.sample!r}")
    diag = evolve_mod.run(p, args.omega, args.perturb, args.t_final,
                          sample_every=args.sample, step_x=args.dx,
                          step_t=args.dt)
    with open(args.out, "w", encoding="utf-8") as stream:
        diag.to_csv(stream)
    prov = {"grid": {"step_x": args.dx, "step_t": args.dt,
                     "sample_every": args.sample,
                     "perturbation":
                         kind if kind == "none" else f"{kind}:{eps!r}"},
            "out": args.out,
            "wall_time_s": time.perf_counter() - start}
    print(render_json(_envelope("evolve", _params_dict(p), diag.summary(),
                                prov)))
    if diag.truncated:
        print(f"kgstab: blow-up: run truncated at t="
              f"{_format_float(diag.truncation_time)}", file=sys.stderr)
        return 5
    return 0


def _sweep_workers(n_jobs: int) -> int:
    env = os.environ.get("KGSTAB_THREADS", "").strip()
    workers = None
    if env:
        try:
            workers = int(env)
        except ValueError:
            workers = None
    if workers is None:
        workers = min(8, os.cpu_count() or 1)
    return max(1, min(workers, n_jobs))


def _cmd_sweep(args) -> int:
    start = time.perf_counter()
    p = ModelParams(args.a, args.b, args.m)
    if args.n < 1:
        raise DomainError(f"--n must be >= 1, got {args.n!r}")
    window = p.window
    omegas = [window.omega_star + (i + 1) * window.width / (args.n + 1)
              for i in range(args.n)]

    def row(omega: float) -> dict:
        return {
            "omega": omega,
            "alpha": alpha_of_omega(p, omega),
            "sigma": stability.sigma_closed(p, omega),
            "d2_sign": stability.d_second_sign(p, omega),
        }

    with ThreadPoolExecutor(max_workers=_sweep_workers(args.n)) as pool:
        rows = list(pool.map(row, omegas))  # map preserves omega order

    if args.json:
        payload = {"n": args.n, "rows": rows}
        prov = {"wall_time_s": time.perf_counter() - start}
        text = render_json(_envelope("sweep", _params_dict(p), payload,
                                     prov)) + "\n"
    else:
        lines = ["omega,alpha,sigma,d2_sign"]
        lines += [
            f"{_format_float(r['omega'])},{_format_float(r['alpha'])},"
            f"{_format_float(r['sigma'])},{r['d2_sign']}"
            for r in rows
        ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"kgstab: domain-error: {exc}", file=sys.stderr)
        return 3
    except evolve_mod.CFLError as exc:
        print(f"kgstab: cfl-error: {exc}", file=sys.stderr)
        return 3
    except soliton.GridError as exc:
        print(f"kgstab: grid-error: {exc}", file=sys.stderr)
        return 3
    except stability.OracleDisagreementError as exc:
        print(f"kgstab: oracle-disagreement: {exc}", file=sys.stderr)
        return 4
    except evolve_mod.BlowUpError as exc:
        print(f"kgstab: blow-up: {exc}", file=sys.stderr)
        return 5
    except spectrum.EigensolverError as exc:
        print(f"kgstab: eigensolver-error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
