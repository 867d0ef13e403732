"""Hierarchical Normal-Gamma shrinkage machinery.

Each prior family (constant coefficients c, state innovation sds theta,
their common means mu_c / mu_theta, idiosyncratic volatility sds sigma,
and factor loadings L) carries local scales tau, a global scale lambda,
and a hyperparameter a updated by an adaptive Metropolis-Hastings step
on the log scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import geninvgauss

# chi guard: keeps the GIG conditional proper when a quadratic statistic
# underflows to exactly zero
CHI_FLOOR = 1e-300
# below this sqrt(chi*psi) the GIG is numerically indistinguishable from
# its Gamma (p>0) / inverse-Gamma (p<0) limit and scipy's sampler fails
_GIG_B_FLOOR = 1e-12

KAPPA_MIN = 1e-6
KAPPA_MAX = 1e2
ACCEPT_LOW = 0.15
ACCEPT_HIGH = 0.35
TUNE_WINDOW = 50


def sample_gig(p: float, chi: float, psi: float, rng: np.random.Generator) -> float:
    """One draw from GIG(p, chi, psi) with density ~ x^{p-1} e^{-(chi/x + psi x)/2}.

    chi = 0 requires p > 0 (Gamma reduction).  Very small chi*psi falls
    back to the exact limiting Gamma / inverse-Gamma law.
    """
    return float(_sample_gig_vec(p, np.atleast_1d(float(chi)), float(psi), rng)[0])


def _sample_gig_vec(
    p: float, chi: np.ndarray, psi: float, rng: np.random.Generator
) -> np.ndarray:
    if psi <= 0:
        raise ValueError("psi must be positive")
    if np.any(chi < 0):
        raise ValueError("chi must be nonnegative")
    chi = np.asarray(chi, dtype=float)
    if p <= 0 and np.any(chi == 0):
        raise ValueError("chi = 0 requires p > 0")
    out = np.empty(chi.shape)
    b = np.sqrt(chi * psi)
    small = b < _GIG_B_FLOOR
    if np.any(~small):
        bs = b[~small]
        z = geninvgauss.rvs(p, bs, random_state=rng)
        out[~small] = np.sqrt(chi[~small] / psi) * z
    if np.any(small):
        n = int(small.sum())
        if p > 0:
            # chi/x term negligible: Gamma(p, rate psi/2)
            out[small] = rng.gamma(p, 2.0 / psi, size=n)
        elif p < 0:
            # psi*x term negligible: inverse-Gamma(-p, chi/2)
            out[small] = (chi[small] / 2.0) / rng.gamma(-p, 1.0, size=n)
        else:
            # p == 0: floor b; mass scale sqrt(chi/psi) is exact either way
            z = geninvgauss.rvs(p, np.full(n, _GIG_B_FLOOR), random_state=rng)
            out[small] = np.sqrt(chi[small] / psi) * z
    return out


@dataclass
class NgFamilyState:
    """Normal-Gamma hierarchy state for one prior family."""

    name: str
    tau: np.ndarray
    lam: float = 1.0
    a: float = 1.0
    kappa: float = 0.3
    d0: float = 0.01
    d1: float = 0.01
    n_proposed: int = 0
    n_accepted: int = 0

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        if np.any(self.tau <= 0) or self.lam <= 0 or self.a <= 0 or self.kappa <= 0:
            raise ValueError("tau, lambda, a, kappa must all be positive")

    def reset_window(self):
        self.n_proposed = 0
        self.n_accepted = 0


@dataclass
class CommonMean:
    """Pooled coefficient means for the c and theta families."""

    mu_c: np.ndarray
    mu_theta: np.ndarray


def update_local_scales(
    family: NgFamilyState,
    chi: np.ndarray,
    shape_offset: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw every local scale from its exact GIG conditional.

    tau_j ~ GIG(a - shape_offset, chi_j, a * lambda) where chi_j is the
    family-specific quadratic statistic (sum of squared deviations for
    the pooled families, squared coefficient otherwise).  shape_offset is
    N/2 for c/theta and 1/2 elsewhere.
    """
    chi = np.maximum(np.asarray(chi, dtype=float), CHI_FLOOR)
    p = family.a - shape_offset
    psi = family.a * family.lam
    family.tau = _sample_gig_vec(p, chi, psi, rng)
    return family.tau


def update_global_lambda(family: NgFamilyState, rng: np.random.Generator) -> float:
    """Gamma draw for the global scale: shape d0 + count*a, rate d1 + (a/2) sum tau."""
    shape = family.d0 + family.tau.size * family.a
    rate = family.d1 + 0.5 * family.a * family.tau.sum()
    family.lam = rng.gamma(shape, 1.0 / rate)
    return family.lam


def update_common_mean(
    coeffs: np.ndarray,
    tau_s: np.ndarray,
    tau_mu: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Gaussian draw of the pooled mean for each coefficient index.

    coeffs has shape (N, J): one row per country.  Posterior variance is
    (N/tau_s + 1/tau_mu)^{-1}, posterior mean V * sum_i coeffs[i] / tau_s.
    """
    N = coeffs.shape[0]
    V = 1.0 / (N / tau_s + 1.0 / tau_mu)
    m = V * coeffs.sum(axis=0) / tau_s
    return m + np.sqrt(V) * rng.standard_normal(m.shape)


def _log_cond_a(a: float, tau: np.ndarray, lam: float) -> float:
    """log p(a) p(tau | a, lambda) up to a constant; prior a ~ E(1)."""
    n = tau.size
    return (
        -a
        + n * (a * np.log(a * lam / 2.0) - gammaln(a))
        + (a - 1.0) * np.log(tau).sum()
        - 0.5 * a * lam * tau.sum()
    )


def mh_update_a(
    family: NgFamilyState, rng: np.random.Generator
) -> tuple[float, bool]:
    """Log-random-walk MH update of the family hyperparameter a.

    Proposal a* = exp(N(ln a, kappa)); acceptance includes the a*/a
    change-of-variables Jacobian.
    """
    a_old = family.a
    a_new = np.exp(np.log(a_old) + np.sqrt(family.kappa) * rng.standard_normal())
    log_ratio = (
        _log_cond_a(a_new, family.tau, family.lam)
        - _log_cond_a(a_old, family.tau, family.lam)
        + np.log(a_new)
        - np.log(a_old)
    )
    accepted = np.log(rng.uniform()) < log_ratio
    family.n_proposed += 1
    if accepted:
        family.a = a_new
        family.n_accepted += 1
    return family.a, bool(accepted)


def tune_kappa(kappa: float, acceptance_rate: float) -> float:
    """Widen/narrow the proposal to steer acceptance into [0.15, 0.35]."""
    if acceptance_rate > ACCEPT_HIGH:
        kappa *= 1.1
    elif acceptance_rate < ACCEPT_LOW:
        kappa *= 0.9
    return float(np.clip(kappa, KAPPA_MIN, KAPPA_MAX))
