"""Theorem constants and structural checkers.

Implements the Poincare constant rho_N - lambda - M/N, the defective
log-Sobolev constants (N_0, lambda_tilde, delta_N, beta_N, rho'_{N,*}),
the tightened constant rho_{N,*}, closed-form inputs for the worked
examples, and the mixture-convexity / Hessian-block checkers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .energies import MeanFieldEnergy, ParametrizedEnergy
from .errors import GibbsUndefinedError, TheoremInvalidError
from .measures import DiscreteMeasure, empirical, mix, w2_squared

__all__ = [
    "PoincareInputs",
    "LsiInputs",
    "ConstantsReport",
    "poincare_constant",
    "defective_lsi_constants",
    "tight_lsi_constant",
    "full_report",
    "quadratic_example_constants",
    "kernel_example_constants",
    "parametrized_cost_bound",
    "check_semi_convexity",
    "check_cost_convexity",
    "hessian_block_bound",
    "DEFAULT_T_GRID",
]

#: coarse mixture grid; includes t = 1/2, the value used in the Hessian lemma
DEFAULT_T_GRID = tuple(np.round(np.arange(0.1, 1.0, 0.1), 10))


@dataclass(frozen=True)
class PoincareInputs:
    """Inputs of the Poincare theorem: conditional constant rho_N,
    semi-convexity modulus lambda, second-derivative bound Mmm, system size N."""

    rho_N: float
    lam: float
    Mmm: float
    N: int

    def __post_init__(self):
        if not (
            math.isfinite(self.rho_N)
            and math.isfinite(self.lam)
            and math.isfinite(self.Mmm)
        ):
            raise ValueError("non-finite inputs")
        if self.rho_N <= 0 or self.lam < 0 or self.Mmm < 0 or self.N < 1:
            raise ValueError("invalid Poincare inputs")


@dataclass(frozen=True)
class LsiInputs:
    """Inputs of the defective-LSI theorem."""

    rho: float
    lambda_prime: float
    alpha_N: float
    Mmm: float
    epsilon: float
    N: int
    d: int

    def __post_init__(self):
        vals = (self.rho, self.lambda_prime, self.alpha_N, self.Mmm, self.epsilon)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite inputs")
        if self.rho <= 0 or self.lambda_prime < 0 or self.alpha_N < 0 or self.Mmm < 0:
            raise ValueError("invalid LSI inputs")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie strictly inside (0, 1)")
        if self.N < 1 or self.d < 1:
            raise ValueError("N and d must be positive")


@dataclass
class ConstantsReport:
    """All theorem constants for one parameter point, with validity flags."""

    poincare_bound: float = math.nan
    N0: float = math.nan
    lambda_tilde: float = math.nan
    beta_N: float = math.nan
    delta_N: float = math.nan
    rho_prime_star: float = math.nan
    rho_star: float | None = None
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "poincare_bound": self.poincare_bound,
            "N0": self.N0,
            "lambda_tilde": self.lambda_tilde,
            "beta_N": self.beta_N,
            "delta_N": self.delta_N,
            "rho_prime_star": self.rho_prime_star,
            "rho_star": self.rho_star,
            "flags": dict(self.flags),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def poincare_constant(inputs: PoincareInputs) -> float:
    """rho_N - lambda - Mmm/N; may be nonpositive (caller checks the flag)."""
    return inputs.rho_N - inputs.lam - inputs.Mmm / inputs.N


def defective_lsi_constants(inputs: LsiInputs) -> ConstantsReport:
    """Defective-LSI constants (N0, lambda_tilde, delta_N, beta_N, rho'_{N,*}).

    When 4 lambda' >= rho or N <= N0 only the computable pieces and flags
    are filled in; callers inspect flags["defective_valid"].
    """
    rho, lp, M, eps = inputs.rho, inputs.lambda_prime, inputs.Mmm, inputs.epsilon
    aN, N, d = inputs.alpha_N, inputs.N, inputs.d
    report = ConstantsReport()
    # shared bracket 4 + 3M(1/eps - 1) / (2 rho (1 - eps))
    bracket = 4.0 + 3.0 * M * (1.0 / eps - 1.0) / (2.0 * rho * (1.0 - eps))
    gap_cond = 4.0 * lp < rho
    report.N0 = 4.0 * M / (rho - 4.0 * lp) * bracket if gap_cond else math.inf
    report.lambda_tilde = lp + M / N * bracket
    report.delta_N = (
        4.0
        * rho
        * (1.0 - eps)
        * (
            2.0 * aN
            + M * d / rho * (2.5 + 3.0 * M * (1.0 / eps - 1.0) / (4.0 * rho * (1.0 - eps)))
        )
    )
    ratio = 2.0 * report.lambda_tilde / rho
    report.beta_N = ratio / (1.0 - ratio) if ratio != 1.0 else math.inf
    report.rho_prime_star = 2.0 * (1.0 - eps) * (1.0 - report.beta_N) * rho
    beta_ok = 0.0 <= report.beta_N < 1.0
    report.flags = {
        "gap_condition": gap_cond,
        "N_above_N0": N > report.N0,
        "beta_in_range": beta_ok,
        "defective_valid": gap_cond and N > report.N0 and beta_ok,
    }
    return report


def tight_lsi_constant(report: ConstantsReport, poincare_bound: float) -> float:
    """Tighten the defective LSI with a positive Poincare constant:
    rho_{N,*} = rho'_{N,*} / (1 + delta_N / (4 poincare_bound))."""
    if poincare_bound <= 0 or not report.flags.get("defective_valid", False):
        raise TheoremInvalidError("corollary-invalid")
    return report.rho_prime_star / (1.0 + report.delta_N / (4.0 * poincare_bound))


def full_report(lsi: LsiInputs, poincare: PoincareInputs) -> ConstantsReport:
    """Defective constants + Poincare bound + tightened LSI, with all flags."""
    report = defective_lsi_constants(lsi)
    report.poincare_bound = poincare_constant(poincare)
    report.flags["poincare_positive"] = report.poincare_bound > 0
    report.flags["corollary_valid"] = (
        report.flags["defective_valid"] and report.flags["poincare_positive"]
    )
    if report.flags["corollary_valid"]:
        report.rho_star = tight_lsi_constant(report, report.poincare_bound)
    return report


@dataclass(frozen=True)
class QuadraticExampleConstants:
    """Closed-form constants of the quadratic-mean energy at (a, N)."""

    inputs: PoincareInputs
    theorem_bound: float
    exact_poincare: float  # optimal constant 1 - a of the Gaussian target
    gap: float  # exact - bound = 2a/N


def quadratic_example_constants(a: float, N: int) -> QuadraticExampleConstants:
    """rho_N = 1 - a/N, lambda = Mmm = a; exact optimal constant 1 - a."""
    if a >= 1.0:
        raise GibbsUndefinedError("gibbs-undefined: quadratic-mean energy needs a < 1")
    if not 0.0 < a:
        raise ValueError("a must lie in (0, 1)")
    if N <= a:
        raise ValueError("need N > a")
    inputs = PoincareInputs(rho_N=1.0 - a / N, lam=a, Mmm=a, N=N)
    # algebraically equal to poincare_constant(inputs); this grouping keeps
    # the round-off of the two a/N terms from polluting the closed form
    bound = (1.0 - a) - 2.0 * a / N
    return QuadraticExampleConstants(
        inputs=inputs,
        theorem_bound=bound,
        exact_poincare=1.0 - a,
        gap=2.0 * a / N,
    )


@dataclass(frozen=True)
class KernelExampleConstants:
    """Closed-form skeleton of the Gaussian-kernel pairwise example."""

    Mmm: float
    rho: float  # proximal-Gibbs LSI constant eta exp(-v1_sup - L)
    rho_N: float  # conditional Poincare constant, same closed form
    condition_holds: bool  # uniform-LSI condition 4 alpha < rho
    beta_max: float  # inverse-temperature threshold; inf when alpha = 0


def kernel_example_constants(
    L: float, alpha: float, eta: float, v1_sup: float = 0.0
) -> KernelExampleConstants:
    if L < 0 or alpha < 0 or v1_sup < 0:
        raise ValueError("L, alpha, v1_sup must be nonnegative")
    if eta <= 0:
        raise ValueError("eta must be positive")
    Mmm = 2.0 * L * (1.0 + 2.0 * math.exp(-1.0)) + 2.0 * alpha
    rho = eta * math.exp(-v1_sup - L)
    if alpha == 0.0:
        beta_max = math.inf
    elif 4.0 * alpha >= eta:
        beta_max = 0.0  # no admissible temperature
    elif v1_sup + L == 0.0:
        # the admissibility condition is temperature-free in this case
        beta_max = math.inf
    else:
        beta_max = (math.log(eta) - math.log(4.0 * alpha)) / (v1_sup + L)
    return KernelExampleConstants(
        Mmm=Mmm,
        rho=rho,
        rho_N=rho,
        condition_holds=4.0 * alpha < rho,
        beta_max=beta_max,
    )


def parametrized_cost_bound(
    energy: ParametrizedEnergy, var_phi: float, epsilon: float
) -> tuple[float, float]:
    """(lambda', alpha_N) for a parametrized energy:
    lambda' = alpha_r (1 + eps) Lip(phi)^2, alpha_N = alpha_r (1 + 1/eps) Var(phi)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly inside (0, 1)")
    if var_phi < 0:
        raise ValueError("variance must be nonnegative")
    lam_p = energy.alpha_r * (1.0 + epsilon) * energy.phi_lip**2
    alpha_N = energy.alpha_r * (1.0 + 1.0 / epsilon) * var_phi
    return lam_p, alpha_N


def _mixture_deficit(energy, mu, nu, t_grid, penalty) -> float:
    f_mu = energy.eval(mu)
    f_nu = energy.eval(nu)
    worst = -math.inf
    for t in t_grid:
        lhs = energy.eval(mix(mu, nu, t))
        deficit = lhs - t * f_mu - (1.0 - t) * f_nu - t * (1.0 - t) * penalty
        worst = max(worst, deficit)
    return worst


def check_semi_convexity(
    energy: MeanFieldEnergy,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    t_grid=DEFAULT_T_GRID,
    lam: float | None = None,
) -> float:
    """Worst mixture-convexity deficit against the lambda/2 W2^2 penalty.

    Nonpositive (up to 1e-9) means the declared modulus holds on this pair.
    """
    if lam is None:
        lam = energy.declared_lambda
    penalty = 0.5 * lam * w2_squared(nu, mu)
    return _mixture_deficit(energy, mu, nu, t_grid, penalty)


def check_cost_convexity(
    energy: MeanFieldEnergy,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    t_grid=DEFAULT_T_GRID,
    cost=None,
) -> float:
    """Worst mixture-convexity deficit against a cost functional C(nu, mu).

    Defaults to the parametrized energy's alpha_r |int phi d(nu - mu)|^2.
    """
    if cost is None:
        if not isinstance(energy, ParametrizedEnergy):
            raise TypeError("cost functional required for non-parametrized energies")
        penalty = energy.cost_functional(mu, nu)
    else:
        penalty = cost(mu, nu)
    return _mixture_deficit(energy, mu, nu, t_grid, penalty)


def hessian_block_bound(energy: MeanFieldEnergy, configs) -> float:
    """min over configs of lambda_min(K)/N for the D_m^2 F block matrix K.

    The Hessian lemma asserts this is >= -declared_lambda.
    """
    worst = math.inf
    for x in configs:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        N, d = x.shape
        mu = empirical(x)
        K = np.zeros((N * d, N * d))
        for i in range(N):
            for j in range(i, N):
                blk = energy.intrinsic_hess(mu, x[i], x[j])
                K[i * d : (i + 1) * d, j * d : (j + 1) * d] = blk
                K[j * d : (j + 1) * d, i * d : (i + 1) * d] = blk.T
        lam_min = float(np.linalg.eigvalsh(K)[0])
        worst = min(worst, lam_min / N)
    return worst
