"""Command-line front end.

Subcommands:
  entropy    edge entropies of the configured model
  curve      rate-distortion curve on a distortion grid, as CSV
  waterfill  optimal distortion allocation at one budget, with KKT report
  verify     closed forms against the numerical oracle on small instances
  simulate   Monte Carlo of the achievability test channel

One JSON config describes the model (and optionally the run); flags
override config values. Results go to stdout or --out as strict JSON (CSV
for curve); diagnostics go to stderr. Exit codes: 0 success, 1 infeasible
or failed computation, 2 config or usage error, 3 oracle non-convergence.
"""

import argparse
import json
import math
import sys

import numpy as np

from .models import (
    ErParams,
    InhomErParams,
    SbmParams,
    er_entropy,
    inhomogeneous_er_entropy,
    pair_count,
    params_from_json,
    sbm_conditional_entropy,
    sbm_entropy_interval,
)
from .oracle import InstanceTooLargeError, conditional_sbm_oracle, joint_graph_rdf_oracle
from .rdf import rd_point, rdf_curve
from .simulate import RngSpec, monte_carlo_distortion
from .waterfill import (
    InfeasibleDistortionError,
    er_kkt_certificate,
    sbm_kkt_certificate,
    solve_er_waterfill,
    solve_sbm_waterfill,
)

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_CONFIG = 2
EXIT_ORACLE = 3

_MODEL_KEYS = {
    "sbm": {"model", "n", "p", "W"},
    "er": {"model", "n", "p"},
    "inhom_er": {"model", "n", "p"},
}
_OPTION_KEYS = {
    "entropy": set(),
    "curve": {"grid"},
    "waterfill": {"D"},
    "verify": {"D", "D_values", "tol"},
    "simulate": {"D", "trials", "seed", "workers"},
}


class ConfigError(Exception):
    """Malformed config or unusable option values."""


class OracleConvergenceError(RuntimeError):
    """The numerical oracle failed to converge."""


def _load_config(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _parse_config(path, command):
    cfg = _load_config(path)
    kind = cfg.get("model")
    if kind not in _MODEL_KEYS:
        raise ConfigError(f"unknown model {kind!r}; expected sbm, er, or inhom_er")
    unknown = sorted(set(cfg) - _MODEL_KEYS[kind] - _OPTION_KEYS[command])
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    try:
        params = params_from_json(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, params


def _kkt_summary(cert):
    return {
        "nu": cert["nu"],
        "max_multiplier_violation": max(0.0, -cert["min_multiplier"]),
        "max_slackness_residual": cert["max_slackness_residual"],
    }


def _model_name(params):
    if isinstance(params, SbmParams):
        return "sbm"
    if isinstance(params, ErParams):
        return "er"
    return "inhom_er"


def _json_safe(value):
    """Strict-JSON form: non-finite floats become null, arrays become lists."""
    if isinstance(value, dict):
        return {key: _json_safe(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def _emit(text, out_path):
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _emit_json(payload, out_path):
    _emit(json.dumps(_json_safe(payload), indent=2, allow_nan=False) + "\n", out_path)


def _require_number(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    return float(value)


def _require_int(value, what, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{what} must be at least {minimum}, got {value}")
    return value


def _budget(args, cfg, required=True):
    if args.D is not None:
        return float(args.D)
    if "D" in cfg:
        return _require_number(cfg["D"], "D")
    if required:
        raise ConfigError("no distortion budget: pass --D or put D in the config")
    return None


def cmd_entropy(args):
    _, params = _parse_config(args.config, "entropy")
    if isinstance(params, SbmParams):
        lower, upper = sbm_entropy_interval(params)
        payload = {
            "model": "sbm",
            "conditional_bits": sbm_conditional_entropy(params),
            "interval": [lower, upper],
        }
    elif isinstance(params, ErParams):
        payload = {"model": "er", "entropy_bits": er_entropy(params)}
    else:
        payload = {"model": "inhom_er", "entropy_bits": inhomogeneous_er_entropy(params)}
    _emit_json(payload, args.out)
    return EXIT_OK


def _curve_grid(args, cfg):
    if args.points is not None:
        return None, _require_int(args.points, "points", 1)
    raw = cfg.get("grid")
    if raw is None:
        return None, 200
    if isinstance(raw, dict):
        extra = sorted(set(raw) - {"points"})
        if extra:
            raise ConfigError(f"unknown grid key(s): {', '.join(extra)}")
        return None, _require_int(raw.get("points", 200), "grid points", 1)
    if isinstance(raw, (list, tuple)):
        if not raw:
            raise ConfigError("grid must not be empty")
        values = [_require_number(v, "grid value") for v in raw]
        if any(not math.isfinite(v) or v < 0.0 for v in values):
            raise ConfigError("grid values must be finite and nonnegative")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ConfigError("grid must be sorted ascending")
        return np.asarray(values), None
    raise ConfigError("grid must be an array of budgets or {\"points\": N}")


def cmd_curve(args):
    cfg, params = _parse_config(args.config, "curve")
    grid, points = _curve_grid(args, cfg)
    curve = rdf_curve(params, grid=grid, points=points)
    lines = ["D,D_per_edge,rate_bits,mu"]
    lines.extend(
        f"{pt.distortion_abs:.12g},{pt.distortion_per_edge:.12g},"
        f"{pt.rate_bits:.12g},{pt.water_level:.12g}"
        for pt in curve
    )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_waterfill(args):
    cfg, params = _parse_config(args.config, "waterfill")
    D = _budget(args, cfg)
    model = _model_name(params)
    if isinstance(params, SbmParams):
        alloc = solve_sbm_waterfill(params, D)
        payload = {
            "model": model,
            "D": D,
            "normalized_distortion": alloc.normalized_distortion,
            "mu": alloc.mu,
            "dstar": alloc.dstar,
            "kkt": _kkt_summary(sbm_kkt_certificate(params, alloc)),
        }
    else:
        if isinstance(params, ErParams):
            probs = np.full(pair_count(params.n), float(params.p))
            params = InhomErParams(n=params.n, edge_probs=probs)
        alloc = solve_er_waterfill(params, D)
        payload = {
            "model": model,
            "D": D,
            "lambda": alloc.lam,
            "d": alloc.d,
            "kkt": _kkt_summary(er_kkt_certificate(params, alloc)),
        }
    _emit_json(payload, args.out)
    return EXIT_OK


def _verify_targets(args, cfg):
    if args.D is not None:
        return [float(args.D)]
    if "D_values" in cfg:
        raw = cfg["D_values"]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError("D_values must be a nonempty array of budgets")
        return [_require_number(v, "D value") for v in raw]
    if "D" in cfg:
        return [_require_number(cfg["D"], "D")]
    raise ConfigError("no distortion budgets: pass --D or put D or D_values in the config")


def cmd_verify(args):
    cfg, params = _parse_config(args.config, "verify")
    targets = _verify_targets(args, cfg)
    tol = args.tol if args.tol is not None else cfg.get("tol", 1e-4)
    tol = _require_number(tol, "tol")
    if tol < 0.0:
        raise ConfigError(f"tol must be nonnegative, got {tol}")
    rows = []
    for D in targets:
        closed = rd_point(params, D).rate_bits
        if isinstance(params, SbmParams):
            res = conditional_sbm_oracle(params, D)
        elif isinstance(params, ErParams):
            probs = np.full(pair_count(params.n), float(params.p))
            res = joint_graph_rdf_oracle(probs, D)
        else:
            res = joint_graph_rdf_oracle(params.edge_probs, D)
        if not res.converged:
            raise OracleConvergenceError(
                f"oracle did not converge at D={D:.12g} "
                f"(achieved distortion {res.achieved_distortion:.12g})"
            )
        rows.append(
            {
                "D": D,
                "closed_form_bits": closed,
                "oracle_bits": res.rate_bits,
                "abs_diff": abs(closed - res.rate_bits),
                "oracle_iterations": res.iterations,
            }
        )
    max_diff = max(row["abs_diff"] for row in rows)
    payload = {
        "model": _model_name(params),
        "tolerance": tol,
        "results": rows,
        "max_abs_diff": max_diff,
        "pass": max_diff <= tol,
    }
    _emit_json(payload, args.out)
    return EXIT_OK if max_diff <= tol else EXIT_COMPUTE


def cmd_simulate(args):
    cfg, params = _parse_config(args.config, "simulate")
    D = _budget(args, cfg)
    trials = args.trials if args.trials is not None else cfg.get("trials", 1000)
    trials = _require_int(trials, "trials", 1)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    seed = _require_int(seed, "seed", 0)
    workers = _require_int(cfg.get("workers", 1), "workers", 1)
    model = _model_name(params)
    if isinstance(params, ErParams):
        # a common edge probability is a one-community block model
        params = SbmParams(n=params.n, p=[1.0], W=[[float(params.p)]])
    elif not isinstance(params, SbmParams):
        raise ConfigError("simulate supports the sbm and er models")
    report = monte_carlo_distortion(
        params, D, trials, RngSpec(seed), workers=workers, pair_stats=True
    )
    # workers is a runtime knob, not part of the result: any worker count
    # must produce byte-identical output for a given seed
    payload = {
        "model": model,
        "D": D,
        "trials": report.trials,
        "seed": seed,
        "target_distortion": report.target_distortion,
        "mean_distortion": report.mean_distortion,
        "stderr": report.stderr,
        "analytic_rate": report.analytic_rate,
        "pair_flip_rate": report.pair_flip_rate,
        "pair_exposures": report.pair_exposures,
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="graphrd",
        description="Rate-distortion tools for block-model and independent-edge graph sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config path, or - for stdin")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("entropy", help="edge entropies of the configured model")
    common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("curve", help="rate-distortion curve as CSV")
    common(p)
    p.add_argument("--points", type=int, default=None, help="evenly spaced grid size")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("waterfill", help="distortion allocation at one budget")
    common(p)
    p.add_argument("--D", type=float, default=None, help="distortion budget")
    p.set_defaults(func=cmd_waterfill)

    p = sub.add_parser("verify", help="closed forms against the numerical oracle")
    common(p)
    p.add_argument("--D", type=float, default=None, help="distortion budget")
    p.add_argument("--tol", type=float, default=None, help="rate tolerance in bits")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo of the test channel")
    common(p)
    p.add_argument("--D", type=float, default=None, help="distortion budget")
    p.add_argument("--trials", type=int, default=None, help="number of trials")
    p.add_argument("--seed", type=int, default=None, help="root seed")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except InfeasibleDistortionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
