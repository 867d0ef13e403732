"""Structural data types for the multi-country VAR.

Holds model dimensions, trade-based link weights, the observed panel,
coefficient/volatility/factor blocks of a parameter draw, per-equation
regressor assembly and the stacked (global) representation of the system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class IsolatedCountryError(ValueError):
    """A country has no positive off-diagonal trade flow."""


@dataclass(frozen=True)
class Dimensions:
    """Dimensions of the panel model.

    N countries with k variables each (K = N*k total), P domestic and Q
    foreign lags, d latent factors and T time points.  Each equation has
    Ktilde = k*(P+Q) + 2 regressors (intercept, domestic lags, foreign
    lags, common log-volatility).  With a single country the foreign
    block is dropped and Ktilde = k*P + 2.
    """

    N: int
    k: int
    P: int
    Q: int
    d: int
    T: int

    def __post_init__(self):
        if self.N < 1 or self.k < 1:
            raise ValueError("need N >= 1 and k >= 1")
        if self.P < 1 or self.Q < 1:
            raise ValueError("need P >= 1 and Q >= 1")
        if self.d < 1:
            raise ValueError("need d >= 1")
        if self.d >= self.K:
            raise ValueError(f"factor count d={self.d} must be < K={self.K}")
        if self.T <= max(self.P, self.Q):
            raise ValueError("T must exceed max(P, Q)")

    @property
    def K(self) -> int:
        return self.N * self.k

    @property
    def Ktilde(self) -> int:
        if self.N == 1:
            return self.k * self.P + 2
        return self.k * (self.P + self.Q) + 2

    @property
    def max_lag(self) -> int:
        return max(self.P, self.Q) if self.N > 1 else self.P

    @property
    def T_eff(self) -> int:
        """Time points available after conditioning on initial lags."""
        return self.T - self.max_lag


@dataclass(frozen=True)
class LinkWeights:
    """Row-stochastic cross-country weight matrix with zero diagonal."""

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        object.__setattr__(self, "W", W)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("W must be square")
        if np.any(np.diag(W) != 0.0):
            raise ValueError("diagonal weights must be exactly zero")
        if np.any(W < 0.0):
            raise ValueError("weights must be nonnegative")
        if not np.allclose(W.sum(axis=1), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("rows must sum to 1 within 1e-12")

    @property
    def N(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class PanelData:
    """Observed endogenous panel: y has shape (T, N, k)."""

    y: np.ndarray
    country_names: tuple[str, ...] = ()
    variable_names: tuple[str, ...] = ()
    trade_flows: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 3:
            raise ValueError("y must be a T x N x k array")
        if not np.isfinite(y).all():
            raise ValueError("panel contains missing or non-finite values")
        object.__setattr__(self, "y", y)
        if self.country_names and len(self.country_names) != y.shape[1]:
            raise ValueError("country_names length mismatch")
        if self.variable_names and len(self.variable_names) != y.shape[2]:
            raise ValueError("variable_names length mismatch")
        if self.trade_flows is not None:
            tf = np.asarray(self.trade_flows, dtype=float)
            if tf.shape != (y.shape[1], y.shape[1]):
                raise ValueError("trade_flows must be N x N")
            object.__setattr__(self, "trade_flows", tf)

    @property
    def T(self) -> int:
        return self.y.shape[0]

    @property
    def N(self) -> int:
        return self.y.shape[1]

    @property
    def k(self) -> int:
        return self.y.shape[2]

    def flat(self) -> np.ndarray:
        """Country-major stacked observations, shape (T, N*k)."""
        return self.y.reshape(self.T, self.N * self.k)


@dataclass
class CoefficientBlock:
    """Non-centered coefficient state for all equations.

    C0 and sqrt_theta have shape (N, k, Ktilde); ctilde has shape
    (N, k, T_eff, Ktilde) and starts from a zero initial state, so the
    effective coefficient is c_t = C0 + sqrt_theta * ctilde_t.
    """

    C0: np.ndarray
    sqrt_theta: np.ndarray
    ctilde: np.ndarray

    def materialize(self) -> np.ndarray:
        """Effective coefficient paths, shape (N, k, T_eff, Ktilde)."""
        return self.C0[:, :, None, :] + self.sqrt_theta[:, :, None, :] * self.ctilde


@dataclass
class VolatilityBlock:
    """Common and idiosyncratic log-volatility state.

    omega_tilde holds the standardized idiosyncratic paths; the actual
    log-volatility is omega = sqrt_sigma_omega * omega_tilde.  sigma_h is
    the fixed state variance of the common log-volatility h.
    """

    h: np.ndarray
    omega_tilde: np.ndarray
    sqrt_sigma_omega: np.ndarray
    sigma_h: float = 0.2

    def omega(self) -> np.ndarray:
        """Idiosyncratic log-volatility paths, shape (T_eff, K)."""
        return self.omega_tilde * self.sqrt_sigma_omega[None, :]


@dataclass
class FactorBlock:
    """Loadings L (K x d) and factor draws f (T_eff x d); factor scale
    matrix is fixed at the identity."""

    L: np.ndarray
    f: np.ndarray

    def error_covariance(self, h_t: float, omega_t: np.ndarray) -> np.ndarray:
        """Var(eps_t) = exp(h_t) L L' + diag(exp(omega_t))."""
        return np.exp(h_t) * (self.L @ self.L.T) + np.diag(np.exp(omega_t))


def average_flows(annual_flows: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Mean of a stack of annual N x N trade-flow matrices."""
    stack = np.asarray(annual_flows, dtype=float)
    if stack.ndim == 2:
        return stack
    return stack.mean(axis=0)


def build_weights(trade_flows: np.ndarray) -> LinkWeights:
    """Normalize bilateral flows into row-stochastic link weights.

    w_ij = flow_ij / sum_{m != i} flow_im with w_ii = 0.  Diagonal
    entries of the input are ignored.
    """
    flows = np.asarray(trade_flows, dtype=float)
    if flows.ndim != 2 or flows.shape[0] != flows.shape[1]:
        raise ValueError("trade flows must be square")
    if np.any(flows < 0):
        raise ValueError("trade flows must be nonnegative")
    off = flows.copy()
    np.fill_diagonal(off, 0.0)
    row_sums = off.sum(axis=1)
    if np.any(row_sums <= 0.0):
        bad = int(np.argmin(row_sums))
        raise IsolatedCountryError(f"isolated country at index {bad}")
    W = off / row_sums[:, None]
    # exact renormalization so the LinkWeights invariant holds bitwise
    W = W / W.sum(axis=1, keepdims=True)
    return LinkWeights(W)


def foreign_aggregate(y_t: np.ndarray, weights: LinkWeights, i: int) -> np.ndarray:
    """Trade-weighted foreign aggregate y*_it = sum_j w_ij y_jt.

    y_t may be a (N, k) array or a flat K-vector in country-major order.
    """
    W = weights.W
    N = weights.N
    y_t = np.asarray(y_t, dtype=float)
    if y_t.ndim == 1:
        y_t = y_t.reshape(N, -1)
    if y_t.shape[0] != N:
        raise ValueError("y_t first axis must index countries")
    return W[i] @ y_t


def build_regressor(
    y: np.ndarray,
    t: int,
    h_t: float,
    weights: LinkWeights | None,
    i: int,
    dims: Dimensions,
) -> np.ndarray:
    """Regressor vector x_it = (1, domestic lags 1..P, foreign lags 1..Q, h_t).

    y has shape (T, N, k) and t indexes the original time axis, so all
    lags up to max(P, Q) must be available below t.
    """
    if t < dims.max_lag:
        raise ValueError(f"insufficient history at t={t}, need {dims.max_lag} lags")
    parts = [np.ones(1)]
    for p in range(1, dims.P + 1):
        parts.append(y[t - p, i, :])
    if dims.N > 1:
        if weights is None:
            raise ValueError("weights required for N > 1")
        for q in range(1, dims.Q + 1):
            parts.append(foreign_aggregate(y[t - q], weights, i))
    parts.append(np.array([h_t]))
    x = np.concatenate(parts)
    assert x.shape[0] == dims.Ktilde
    return x


def build_regressor_panel(
    y: np.ndarray,
    h: np.ndarray,
    weights: LinkWeights | None,
    dims: Dimensions,
) -> np.ndarray:
    """All regressors at once: shape (T_eff, N, Ktilde).

    Row s corresponds to original time index s + max_lag; h has length
    T_eff and fills the last column.
    """
    L = dims.max_lag
    X = np.empty((dims.T_eff, dims.N, dims.Ktilde))
    X[:, :, 0] = 1.0
    col = 1
    for p in range(1, dims.P + 1):
        # y lagged by p over the effective window, per country
        X[:, :, col:col + dims.k] = y[L - p:dims.T - p]
        col += dims.k
    if dims.N > 1:
        ystar = np.einsum("ij,tjv->tiv", weights.W, y)
        for q in range(1, dims.Q + 1):
            X[:, :, col:col + dims.k] = ystar[L - q:dims.T - q]
            col += dims.k
    X[:, :, col] = h[:, None]
    return X


def stack_global_system(
    coeffs_t: np.ndarray,
    dims: Dimensions,
    weights: LinkWeights | None,
) -> tuple[list[np.ndarray], np.ndarray, np.ndarray]:
    """Collect the per-country equations at one period into a single VAR.

    coeffs_t has shape (N, k, Ktilde): the materialized coefficient rows
    at some period.  Returns (G, intercept, beta) where G is a list of
    max(P, Q) square K x K lag matrices such that

        y_t = intercept + sum_l G[l] y_{t-l} + beta * h_t + eps_t

    reproduces every country equation exactly (foreign lags enter through
    w_ij-scaled blocks on the other countries' columns).
    """
    N, k, K = dims.N, dims.k, dims.K
    n_lags = dims.max_lag
    G = [np.zeros((K, K)) for _ in range(n_lags)]
    intercept = np.empty(K)
    beta = np.empty(K)
    for i in range(N):
        rows = slice(i * k, (i + 1) * k)
        C = coeffs_t[i]  # (k, Ktilde)
        intercept[rows] = C[:, 0]
        beta[rows] = C[:, -1]
        col = 1
        for p in range(dims.P):
            G[p][rows, i * k:(i + 1) * k] += C[:, col:col + k]
            col += k
        if N > 1:
            for q in range(dims.Q):
                B = C[:, col:col + k]
                for j in range(N):
                    if j != i:
                        G[q][rows, j * k:(j + 1) * k] += weights.W[i, j] * B
                col += k
    return G, intercept, beta
