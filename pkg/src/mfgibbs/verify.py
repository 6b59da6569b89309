"""Verification batteries behind `mfgibbs verify <suite>`.

Each battery returns a list of (check name, passed, detail) tuples so the
CLI can print a table and pick an exit code.
"""

from __future__ import annotations

import numpy as np

from . import bounds, spectral1d
from .dynamics import SimConfig
from .energies import (
    LinearPotentialEnergy,
    ParametrizedEnergy,
    PairwiseKernelEnergy,
    ParticleSystem,
    QuadraticMeanEnergy,
)
from .estimators import conditional_gap_mc, entropy_decay_gaussian
from .measures import DiscreteMeasure, empirical

__all__ = ["SUITES", "run_suite"]

SHARPNESS_A = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SHARPNESS_N = (10, 50, 200)


def quadratic_as_parametrized(a: float) -> ParametrizedEnergy:
    """The quadratic-mean energy in parametrized form: F0 = 1/2 int |x|^2,
    identity features, outer R(m) = -(a/2) m^2 (so alpha_r = a/2)."""
    base = LinearPotentialEnergy(
        v=lambda x: 0.5 * float(x @ x),
        v_grad=lambda x: np.asarray(x, float),
        v_hess=lambda x: np.eye(len(x)),
    )
    return ParametrizedEnergy(
        base=base,
        phi=lambda x: np.asarray(x, float),
        phi_jac=lambda x: np.eye(len(x)),
        phi_lip=1.0,
        r=lambda m: -0.5 * a * float(m @ m),
        r_grad=lambda m: -a * np.asarray(m, float),
        r_hess=lambda m: -a * np.eye(len(np.atleast_1d(m))),
        alpha_r=a / 2.0,
        r_hess_bound=a,
    )


def _random_measure(rng, max_atoms=6, d=1) -> DiscreteMeasure:
    n = int(rng.integers(1, max_atoms + 1))
    w = rng.random(n) + 0.05
    return DiscreteMeasure(rng.normal(size=(n, d)) * 2.0, w / w.sum())


def suite_sharpness(rng=None):
    results = []
    for a in SHARPNESS_A:
        for N in SHARPNESS_N:
            q = bounds.quadratic_example_constants(a, N)
            system = ParticleSystem(QuadraticMeanEnergy(a), N, 1)
            exact = spectral1d.gaussian_exact(system).poincare
            name = f"sharpness a={a} N={N}"
            ok = (
                abs(q.theorem_bound - (1.0 - a * (1.0 + 2.0 / N))) < 1e-12
                and abs(exact - (1.0 - a)) < 1e-10
                and q.theorem_bound <= exact + 1e-12
                and abs((exact - q.theorem_bound) - 2.0 * a / N) < 1e-10
            )
            results.append((name, ok, f"bound={q.theorem_bound:.6f} exact={exact:.6f}"))
    return results


def _concrete_energies():
    return [
        ("quadratic(a=0.5)", QuadraticMeanEnergy(0.5)),
        ("kernel(L=1,alpha=0.05,eta=1)", PairwiseKernelEnergy(eta=1.0, L=1.0, alpha=0.05)),
        ("parametrized(a=0.5)", quadratic_as_parametrized(0.5)),
    ]


def suite_curvature(rng=None, n_pairs=1000):
    rng = rng or np.random.default_rng(0)
    results = []
    quad = QuadraticMeanEnergy(0.5)
    # equality case on Dirac pairs
    worst = max(
        abs(
            bounds.check_semi_convexity(
                quad, empirical([[x]]), empirical([[y]])
            )
        )
        for x, y in [(0.0, 2.0), (-1.0, 3.0), (0.5, 0.5)]
    )
    results.append(("quadratic Dirac equality", worst <= 1e-12, f"|deficit|={worst:.2e}"))
    # sensitivity: an understated modulus must be caught
    deficit = bounds.check_semi_convexity(
        quad, empirical([[0.0]]), empirical([[2.0]]), lam=0.25
    )
    results.append(("understated lambda detected", deficit > 1e-6, f"deficit={deficit:.3e}"))
    for name, energy in _concrete_energies():
        worst = -np.inf
        for _ in range(n_pairs):
            mu = _random_measure(rng)
            nu = _random_measure(rng)
            worst = max(worst, bounds.check_semi_convexity(energy, mu, nu))
        results.append((f"semi-convexity {name}", worst <= 1e-9, f"worst={worst:.2e}"))
    # cost-convexity for the parametrized route
    par = quadratic_as_parametrized(0.5)
    worst = -np.inf
    for _ in range(200):
        worst = max(
            worst,
            bounds.check_cost_convexity(par, _random_measure(rng), _random_measure(rng)),
        )
    results.append(("cost-convexity parametrized", worst <= 1e-9, f"worst={worst:.2e}"))
    return results


def suite_hessian(rng=None):
    rng = rng or np.random.default_rng(1)
    results = []
    quad = QuadraticMeanEnergy(0.5)
    ratio = bounds.hessian_block_bound(quad, [rng.normal(size=(4, 1))])
    results.append(
        ("quadratic block bound sharp", abs(ratio + 0.5) <= 1e-9, f"min ratio={ratio:.6f}")
    )
    kern = PairwiseKernelEnergy(eta=1.0, L=1.0, alpha=0.05)
    configs = [rng.normal(size=(8, 1)) for _ in range(100)]
    ratio = bounds.hessian_block_bound(kern, configs)
    results.append(
        (
            "kernel block bound",
            ratio >= -kern.declared_lambda - 1e-9,
            f"min ratio={ratio:.6f} >= {-kern.declared_lambda}",
        )
    )
    return results


def suite_conditional(rng=None):
    results = []
    a, N = 0.5, 20
    system = ParticleSystem(QuadraticMeanEnergy(a), N, 1)
    cfg = SimConfig(step=0.1, n_steps=400, burn_in=100, thin=10, seed=7, sampler="MALA")
    res = conditional_gap_mc(system, cfg, n_frozen=8, claimed_rho_N=1.0 - a / N)
    results.append(
        (
            "quadratic conditional gap",
            abs(res.median - (1.0 - a / N)) <= 1e-3 and res.spread < 1e-6,
            f"median={res.median:.6f} spread={res.spread:.2e}",
        )
    )
    kern = PairwiseKernelEnergy(eta=1.0, L=1.0, alpha=0.05)
    ksys = ParticleSystem(kern, 8, 1)
    kcfg = SimConfig(step=0.05, n_steps=400, burn_in=100, thin=10, seed=8, sampler="MALA")
    kconst = bounds.kernel_example_constants(1.0, 0.05, 1.0)
    kres = conditional_gap_mc(ksys, kcfg, n_frozen=8, claimed_rho_N=kconst.rho_N)
    results.append(
        (
            "kernel conditional gap >= rho",
            bool(kres.passed),
            f"min={kres.minimum:.6f} rho={kconst.rho_N:.6f}",
        )
    )
    return results


def suite_entropy(rng=None):
    results = []
    a, N = 0.2, 50
    system = ParticleSystem(QuadraticMeanEnergy(a), N, 1)
    par = quadratic_as_parametrized(a)
    eps = 0.5
    lam_p, alpha_N = bounds.parametrized_cost_bound(par, var_phi=1.0, epsilon=eps)
    lsi = bounds.LsiInputs(
        rho=1.0, lambda_prime=lam_p, alpha_N=alpha_N, Mmm=a, epsilon=eps, N=N, d=1
    )
    poin = bounds.quadratic_example_constants(a, N).inputs
    report = bounds.full_report(lsi, poin)
    times = np.linspace(0.0, 4.0, 60)
    curve = entropy_decay_gaussian(
        system,
        mean0=np.ones(N),
        cov0=np.eye(N),
        times=times,
        rho_star=report.rho_star,
    )
    target = 2.0 * (1.0 - a)
    ok_rate = abs(curve.rate - target) <= 0.01 * target
    results.append(
        ("entropy decay rate 2(1-a)", ok_rate, f"rate={curve.rate:.5f} target={target}")
    )
    results.append(("entropy floor ~ 0", curve.floor < 1e-8, f"floor={curve.floor:.2e}"))
    if report.rho_star is not None:
        results.append(
            (
                "rate >= 2 rho_star",
                bool(curve.flags.get("rate_geq_2rho_star", False)),
                f"2 rho_star={2 * report.rho_star:.5f}",
            )
        )
    return results


SUITES = {
    "sharpness": suite_sharpness,
    "curvature": suite_curvature,
    "hessian": suite_hessian,
    "conditional": suite_conditional,
    "entropy": suite_entropy,
}


def run_suite(name: str):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()
