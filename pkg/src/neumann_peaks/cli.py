"""Command-line front end.

Exit codes: 0 success, 2 bad configuration or precondition, 3 numerical
failure, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .energy_constants import EnergyConstantError, compute_energy_constants
from .ground_state import DEFAULT_TOL, GroundStateError, ode_residual, solve_ground_state
from .lattice import export_sweep_csv, regime_exponent_check
from .params import ParameterError, SystemParams
from .quadrature import QuadratureError
from .reduced_energy import (
    F_leading,
    ReducedEnergyModel,
    export_curve_csv,
    maximize_numeric,
    summary,
)
from .verify import FAULTS, VerifyContext, run_suite, summarize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
PARAM_KEYS = ("N", "p", "k", "mu", "gamma", "delta")
RUN_KEYS = ("tol", "seed", "quick", "out", "k_sweep", "alpha")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    out: Path
    tol: float = DEFAULT_TOL
    seed: int = 0
    quick: bool = False
    k_sweep: list = field(default_factory=list)
    alpha: float | None = None
    fault: str | None = None

    def system_params(self) -> SystemParams:
        return SystemParams.from_config(self.params)

    def record(self) -> dict:
        """Resolved configuration embedded in every artifact."""
        doc = {"command": self.command, "params": dict(self.params), "tol": self.tol,
               "seed": self.seed, "quick": self.quick, "k_sweep": list(self.k_sweep),
               "alpha": self.alpha, "version": __version__}
        if self.fault:
            doc["fault"] = self.fault
        return doc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional JSON config file with command-line flags (flags win)."""
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(base) - set(PARAM_KEYS) - set(RUN_KEYS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    params = {k: base[k] for k in PARAM_KEYS if k in base}
    for k in PARAM_KEYS:
        val = getattr(args, k, None)
        if val is not None:
            params[k] = val
    params.setdefault("N", 5)
    N = params["N"]
    params.setdefault("p", (N + 2) / (N - 2) if N > 2 else 1.0)

    def pick(key, default):
        val = getattr(args, key, None)
        return val if val is not None else base.get(key, default)

    out = Path(pick("out", "."))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return RunConfig(args.command, params, out, float(pick("tol", DEFAULT_TOL)),
                     int(pick("seed", 0)), bool(args.quick or base.get("quick", False)),
                     [int(k) for k in pick("k_sweep", [])], pick("alpha", None),
                     getattr(args, "inject_fault", None))


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_finite(doc), indent=2, sort_keys=True) + "\n")


def _finite(obj):
    """JSON has no NaN/inf; encode them as strings."""
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


# ---------------------------------------------------------------- commands

def _solve(cfg: RunConfig):
    params = cfg.system_params()
    return params, solve_ground_state(params, tol=cfg.tol)


def cmd_ground_state(cfg: RunConfig) -> int:
    params, prof = _solve(cfg)
    prof.save(cfg.out / "profile.csv", cfg.out / "profile.json")
    res = ode_residual(prof)
    doc = {"config": cfg.record(), "beta": prof.beta, "tail_a": prof.tail_a,
           "tail_b": prof.tail_b, "regime": prof.regime, "ode_residual": res,
           "l1_identity_ratio": prof.meta.get("l1_identity_ratio")}
    _write_json(cfg.out / "ground_state.json", doc)
    print(f"beta* = {prof.beta:.12f}  a = {prof.tail_a:.9g}  b = {prof.tail_b:.9g}  "
          f"regime = {prof.regime}  residual = {res:.3e}")
    return EXIT_OK


def _constants(cfg: RunConfig):
    params, prof = _solve(cfg)
    return params, compute_energy_constants(prof, params)


def cmd_constants(cfg: RunConfig) -> int:
    params, ec = _constants(cfg)
    ec.to_json(cfg.out / "constants.json", config=_finite(cfg.record()),
               symmetry_gaps=ec.symmetry_gaps())
    for name in ("A0", "A1", "A3", "A4", "B0", "B1", "B3", "B4", "Q0", "Q1", "Q2", "Q3", "Q4"):
        print(f"{name} = {getattr(ec, name):.12g} +- {ec.error(name):.2e}")
    return EXIT_OK


def cmd_lattice(cfg: RunConfig) -> int:
    params = cfg.system_params()
    N = params.N
    alpha = float(cfg.alpha) if cfg.alpha is not None else N - 2.0
    ks = cfg.k_sweep or ([64, 256, 1024] if cfg.quick else [2 ** e for e in range(6, 13)])
    rows = export_sweep_csv(cfg.out / "lattice_sweep.csv", N, alpha, ks)
    rep = regime_exponent_check(N, alpha, ks if len(ks) >= 3 else None)
    _write_json(cfg.out / "lattice.json", {"config": cfg.record(), "rows": rows,
                                           "regime": rep.to_dict()})
    for row in rows:
        print(f"k = {row['k']:6d}  sum = {row['sum']:.10g}  ratio = {row['ratio']:.8g}")
    print(f"regime: expected {rep.expected_regime}, observed {rep.observed_regime}")
    return EXIT_OK


def cmd_reduce(cfg: RunConfig) -> int:
    params = cfg.system_params()
    if not params.gamma < 0:
        raise ConfigError(f"gamma = {params.gamma}: the mean curvature must be negative")
    _, ec = _constants(cfg)
    model = ReducedEnergyModel.from_constants(ec, params)
    doc = dict(summary(model), lambda_numeric=maximize_numeric(model), config=cfg.record())
    export_curve_csv(cfg.out / "energy_curve.csv", model)
    if cfg.k_sweep:
        # k enters F as an overall factor; epsilon is held at the configured value
        ls = doc["lambda_star"]
        doc["k_sweep"] = [{"k": k, "F_at_lambda_star": F_leading(model.with_k(k), ls)}
                          for k in cfg.k_sweep]
    _write_json(cfg.out / "reduce.json", doc)
    print(f"lambda* = {doc['lambda_star']:.12g}  numeric = {doc['lambda_numeric']:.12g}  "
          f"window ok = {doc['window_ok']}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    ctx = VerifyContext(quick=cfg.quick, seed=cfg.seed, tol=cfg.tol, fault=cfg.fault)
    results = run_suite(ctx)
    for r in results:
        print(r.line())
    doc = summarize(results)
    for chk in doc["checks"]:
        _drop_timings(chk)
    doc["config"] = cfg.record()
    _write_json(cfg.out / "verify.json", doc)
    if not doc["passed"]:
        print("failed checks: " + ", ".join(doc["failed"]), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _drop_timings(d: dict) -> None:
    """Wall-clock numbers would make reruns differ; keep them out of artifacts."""
    for key in [k for k in d if "seconds" in k]:
        del d[key]
    for v in d.values():
        if isinstance(v, dict):
            _drop_timings(v)


def cmd_export(cfg: RunConfig) -> int:
    """Profile, constants, reduced-energy curve and lattice sweep in one go."""
    params, prof = _solve(cfg)
    prof.save(cfg.out / "profile.csv", cfg.out / "profile.json")
    ec = compute_energy_constants(prof, params)
    ec.to_json(cfg.out / "constants.json", config=_finite(cfg.record()))
    if params.gamma < 0:
        export_curve_csv(cfg.out / "energy_curve.csv", ReducedEnergyModel.from_constants(ec, params))
    ks = cfg.k_sweep or [64, 256, 1024]
    export_sweep_csv(cfg.out / "lattice_sweep.csv", params.N, params.N - 2.0, ks)
    _write_json(cfg.out / "manifest.json",
                {"config": cfg.record(),
                 "files": sorted(p.name for p in cfg.out.iterdir() if p.name != "manifest.json")})
    print(f"wrote artifacts to {cfg.out}")
    return EXIT_OK


COMMANDS = {"ground-state": cmd_ground_state, "constants": cmd_constants,
            "lattice": cmd_lattice, "reduce": cmd_reduce, "verify": cmd_verify,
            "export": cmd_export}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, help="dimension (>= 5)")
    common.add_argument("--p", type=float, help="exponent p; q follows from the critical hyperbola")
    common.add_argument("--k", type=int, help="number of peaks")
    common.add_argument("--gamma", type=float, help="mean curvature along the circle")
    common.add_argument("--mu", type=float, help="coupling coefficient")
    common.add_argument("--delta", type=float, help="concentration window parameter")
    common.add_argument("--tol", type=float, help="shooting tolerance on beta")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for sample generators")
    common.add_argument("--quick", action="store_true", help="reduced sweep sizes")
    common.add_argument("--config", help="JSON file; flags override its values")
    common.add_argument("--k-sweep", dest="k_sweep", type=int, nargs="+",
                        help="list of k values for sweeps")
    common.add_argument("--alpha", type=float, help="lattice exponent (default N-2)")
    common.add_argument("--inject-fault", dest="inject_fault", choices=FAULTS,
                        help=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="neumann-peaks",
                                     description="Numerics for multi-peak Neumann solutions "
                                                 "of critical Hamiltonian elliptic systems.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GroundStateError, QuadratureError, EnergyConstantError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
