"""Command-line front end: `constants`, `verify`, `simulate`, `estimate`.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 theorem inapplicable, 4 numerical blow-up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__, bounds, verify
from .config import ConfigError, ExperimentConfig, load_config
from .dynamics import run_chain
from .errors import BlowUpError, GibbsUndefinedError
from .estimators import estimate_gap_autocorr
from .spectral1d import proximal_gibbs_fixed_point

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_INAPPLICABLE = 3
EXIT_BLOWUP = 4


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-mfgibbs-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(payload: dict, out_path: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        _atomic_write(out_path, text)
    else:
        sys.stdout.write(text)


def _wrap(cfg: ExperimentConfig, body: dict) -> dict:
    return {"version": __version__, "config": cfg.resolved(), **body}


def _stationary_variance(cfg: ExperimentConfig, energy) -> float:
    fp = proximal_gibbs_fixed_point(
        energy,
        float(cfg.analysis["grid_lo"]),
        float(cfg.analysis["grid_hi"]),
        int(cfg.analysis["grid_n"]),
    )
    return fp.variance()


def cmd_constants(cfg: ExperimentConfig, out_path: str | None) -> int:
    eps = float(cfg.analysis["epsilon"])
    p = cfg.energy_params
    extras: dict = {}
    if cfg.energy_type in ("quadratic", "parametrized"):
        a = float(p["a"])
        try:
            q = bounds.quadratic_example_constants(a, cfg.N)
        except GibbsUndefinedError as exc:
            _emit({"version": __version__, "error": str(exc)}, out_path)
            return EXIT_INAPPLICABLE
        par = verify.quadratic_as_parametrized(a)
        var_phi = _stationary_variance(cfg, cfg.build_energy())
        lam_p, alpha_N = bounds.parametrized_cost_bound(par, var_phi, eps)
        # the proximal Gibbs measure of this energy is a unit-variance
        # Gaussian for every input measure, hence LSI constant 1
        lsi = bounds.LsiInputs(
            rho=1.0, lambda_prime=lam_p, alpha_N=alpha_N, Mmm=a,
            epsilon=eps, N=cfg.N, d=cfg.d,
        )
        report = bounds.full_report(lsi, q.inputs)
        extras = {
            "exact_poincare": q.exact_poincare,
            "gap_to_exact": q.gap,
            "var_phi": var_phi,
        }
    elif cfg.energy_type == "kernel":
        k = bounds.kernel_example_constants(
            L=float(p.get("l", 0.0)),
            alpha=float(p.get("alpha", 0.0)),
            eta=float(p.get("eta", 1.0)),
            v1_sup=float(p.get("v1_sup", 0.0)),
        )
        energy = cfg.build_energy()
        var_phi = _stationary_variance(cfg, energy)
        alpha = float(p.get("alpha", 0.0))
        lam_p = alpha * (1.0 + eps)
        alpha_N = alpha * (1.0 + 1.0 / eps) * var_phi
        lsi = bounds.LsiInputs(
            rho=k.rho, lambda_prime=lam_p, alpha_N=alpha_N, Mmm=k.Mmm,
            epsilon=eps, N=cfg.N, d=cfg.d,
        )
        poin = bounds.PoincareInputs(
            rho_N=k.rho_N, lam=energy.declared_lambda, Mmm=k.Mmm, N=cfg.N
        )
        report = bounds.full_report(lsi, poin)
        extras = {
            "rho": k.rho,
            "Mmm": k.Mmm,
            "condition_holds": k.condition_holds,
            "beta_max": k.beta_max,
            "var_phi": var_phi,
        }
    else:
        raise ConfigError(f"constants: unsupported energy type {cfg.energy_type!r}")
    payload = _wrap(cfg, {"report": report.to_dict(), "example": extras})
    _emit(payload, out_path)
    if not report.flags.get("corollary_valid", False):
        return EXIT_INAPPLICABLE
    return EXIT_OK


def cmd_verify(suite: str) -> int:
    try:
        results = verify.run_suite(suite)
    except KeyError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    width = max(len(name) for name, _, _ in results)
    all_ok = True
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
        all_ok &= ok
    print(f"suite {suite}: {'PASS' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAIL


def cmd_simulate(cfg: ExperimentConfig, out_path: str | None) -> int:
    system = cfg.build_system()
    traj = run_chain(system, cfg.sim)
    path = out_path or cfg.out_path
    if path is None:
        raise ConfigError("simulate needs an output path (--out or [output] path)")
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-mfgibbs-")
    os.close(fd)
    try:
        traj.to_csv(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    meta = _wrap(cfg, {"acceptance_rates": [None if np.isnan(r) else r
                                            for r in traj.acceptance_rates]})
    _atomic_write(path + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_estimate(cfg: ExperimentConfig, out_path: str | None) -> int:
    system = cfg.build_system()
    n_records = (cfg.sim.n_steps - cfg.sim.burn_in + cfg.sim.thin - 1) // cfg.sim.thin
    max_lag = int(cfg.analysis["max_lag"])
    if n_records <= max_lag:
        raise ConfigError("trajectory too short for the requested max_lag")
    traj = run_chain(system, cfg.sim)
    est = estimate_gap_autocorr(traj, str(cfg.analysis["observable"]), max_lag)
    payload = _wrap(cfg, {"estimate": json.loads(est.to_json())})
    _emit(payload, out_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfgibbs",
        description="Mean-field Gibbs measures: theorem constants, samplers, "
        "and numerical verification of Poincare/log-Sobolev bounds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="experiment config file")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--replicas", type=int, default=None, help="override replica count")

    common(sub.add_parser("constants", help="compute the theorem constants report"))
    vp = sub.add_parser("verify", help="run a verification suite")
    vp.add_argument("suite", choices=sorted(verify.SUITES))
    common(sub.add_parser("simulate", help="sample the Gibbs measure, write CSV"))
    common(sub.add_parser("estimate", help="estimate the spectral gap from a chain"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.suite)
    try:
        cfg = load_config(args.config, seed=args.seed, replicas=args.replicas)
        if args.command == "constants":
            return cmd_constants(cfg, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        if args.command == "estimate":
            return cmd_estimate(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
