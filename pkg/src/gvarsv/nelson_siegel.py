"""Nelson-Siegel level/slope/curvature extraction from raw yield curves.

Per-period cross-sectional least squares with the decay parameter fixed
(default 0.0609, maturities in months).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LAMBDA = 0.0609


@dataclass(frozen=True)
class YieldPanel:
    """Raw government bond yields: shape (T, N, M) over M maturities."""

    maturities: np.ndarray
    yields: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.maturities, dtype=float)
        r = np.asarray(self.yields, dtype=float)
        if tau.ndim != 1 or tau.size < 3:
            raise ValueError("need at least 3 maturities")
        if np.any(tau <= 0) or np.any(np.diff(tau) <= 0):
            raise ValueError("maturities must be positive and strictly increasing")
        if r.ndim != 3 or r.shape[2] != tau.size:
            raise ValueError("yields must have shape (T, N, M)")
        object.__setattr__(self, "maturities", tau)
        object.__setattr__(self, "yields", r)


@dataclass(frozen=True)
class NsFactors:
    """Fitted level/slope/curvature paths, each of shape (T, N)."""

    level: np.ndarray
    slope: np.ndarray
    curvature: np.ndarray
    lam: float

    def stacked(self) -> np.ndarray:
        """Factors as a (T, N, 3) array ordered (level, slope, curvature)."""
        return np.stack([self.level, self.slope, self.curvature], axis=-1)


def ns_loadings(tau: float | np.ndarray, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Nelson-Siegel loading vector at maturity tau (months).

    Returns (1, (1-e^{-lam tau})/(lam tau), (1-e^{-lam tau})/(lam tau) - e^{-lam tau}).
    For array input the result has shape (len(tau), 3).
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    x = lam * tau
    decay = np.exp(-x)
    slope = (1.0 - decay) / x
    out = np.stack([np.ones_like(tau), slope, slope - decay], axis=-1)
    return out


def _design(maturities: np.ndarray, lam: float) -> np.ndarray:
    Z = ns_loadings(maturities, lam)
    if np.linalg.matrix_rank(Z) < 3:
        raise ValueError("rank-deficient Nelson-Siegel design (duplicate maturities?)")
    return Z


def fit_ns_factors(panel: YieldPanel, lam: float = DEFAULT_LAMBDA) -> NsFactors:
    """Per-(t, country) OLS of yields on the three loading columns.

    NaN yields are dropped from the individual regression if at least
    three maturities remain, otherwise an error is raised.
    """
    r = panel.yields
    T, N, M = r.shape
    Z_full = _design(panel.maturities, lam)
    level = np.empty((T, N))
    slope = np.empty((T, N))
    curv = np.empty((T, N))
    complete = np.isfinite(r).all(axis=2)
    if complete.all():
        # single batched solve for the common design
        ZtZ = Z_full.T @ Z_full
        coef = np.linalg.solve(ZtZ, Z_full.T @ r.reshape(T * N, M).T).T
        coef = coef.reshape(T, N, 3)
        level, slope, curv = coef[..., 0], coef[..., 1], coef[..., 2]
        return NsFactors(level, slope, curv, lam)
    for t in range(T):
        for i in range(N):
            obs = r[t, i]
            mask = np.isfinite(obs)
            if mask.sum() < 3:
                raise ValueError(
                    f"fewer than 3 finite yields at (t={t}, country={i})"
                )
            Z = Z_full[mask]
            b, *_ = np.linalg.lstsq(Z, obs[mask], rcond=None)
            level[t, i], slope[t, i], curv[t, i] = b
    return NsFactors(level, slope, curv, lam)
