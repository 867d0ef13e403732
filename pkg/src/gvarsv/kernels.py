"""Numba kernels for the Gibbs sweep hot loops.

All kernels are pure given pregenerated noise arrays, so random-number
consumption stays in the caller and results are deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _chol_clamped(A):
    """Cholesky factor tolerating zero (deterministic) directions.

    Pivots below a relative floor are clamped to zero; substantially
    negative pivots signal loss of positive-definiteness and raise.
    """
    m = A.shape[0]
    L = np.zeros((m, m))
    scale = 1.0
    for i in range(m):
        if A[i, i] > scale:
            scale = A[i, i]
    floor = 1e-13 * scale
    for i in range(m):
        for j in range(i + 1):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if s < -1e-8 * scale:
                    raise ValueError("filter covariance lost positive-definiteness")
                L[i, i] = np.sqrt(s) if s > floor else 0.0
            else:
                L[i, j] = s / L[j, j] if L[j, j] > 0.0 else 0.0
    return L


@njit(cache=True)
def ffbs_random_walk(y, Z, R, normals):
    """Joint smoothing draw for a random-walk state with scalar observations.

    Model: y_t = Z[t] @ c_t + e_t, e_t ~ N(0, R[t]);
           c_t = c_{t-1} + v_t, v_t ~ N(0, I); c_0 pinned at zero.
    y, R have length T; Z and normals are (T, m).  Returns the sampled
    path (T, m).  Raises on loss of positive-definiteness in the
    backward pass (covariances are symmetrized first).
    """
    T, m = Z.shape
    a = np.zeros((T, m))
    P = np.zeros((T, m, m))
    a_prev = np.zeros(m)
    P_prev = np.zeros((m, m))
    eye = np.eye(m)
    for t in range(T):
        P_pred = P_prev + eye
        z = Z[t]
        Pz = P_pred @ z
        S = z @ Pz + R[t]
        K = Pz / S
        resid = y[t] - z @ a_prev
        a[t] = a_prev + K * resid
        Pt = P_pred - np.outer(K, Pz)
        Pt = 0.5 * (Pt + Pt.T)
        P[t] = Pt
        a_prev = a[t]
        P_prev = Pt
    draw = np.zeros((T, m))
    C = _chol_clamped(P[T - 1])
    draw[T - 1] = a[T - 1] + C @ normals[T - 1]
    for t in range(T - 2, -1, -1):
        Pt = P[t]
        # c_t | c_{t+1}: gain G = P_t (P_t + I)^{-1}
        G = np.linalg.solve((Pt + eye).T, Pt.T).T
        mean = a[t] + G @ (draw[t + 1] - a[t])
        cov = Pt - G @ Pt
        cov = 0.5 * (cov + cov.T)
        C = _chol_clamped(cov)
        draw[t] = mean + C @ normals[t]
    return draw


@njit(cache=True)
def ffbs_moments_random_walk(y, Z, R):
    """Marginal smoothed means and variances for the same model.

    Returns (means (T, m), covs (T, m, m)) of c_t | y_{1:T}.
    """
    T, m = Z.shape
    a = np.zeros((T, m))
    P = np.zeros((T, m, m))
    a_prev = np.zeros(m)
    P_prev = np.zeros((m, m))
    eye = np.eye(m)
    for t in range(T):
        P_pred = P_prev + eye
        z = Z[t]
        Pz = P_pred @ z
        S = z @ Pz + R[t]
        K = Pz / S
        a[t] = a_prev + K * (y[t] - z @ a_prev)
        Pt = P_pred - np.outer(K, Pz)
        P[t] = 0.5 * (Pt + Pt.T)
        a_prev = a[t]
        P_prev = P[t]
    means = np.zeros((T, m))
    covs = np.zeros((T, m, m))
    means[T - 1] = a[T - 1]
    covs[T - 1] = P[T - 1]
    for t in range(T - 2, -1, -1):
        Pt = P[t]
        G = np.linalg.solve((Pt + eye).T, Pt.T).T
        means[t] = a[t] + G @ (means[t + 1] - a[t])
        covs[t] = Pt - G @ (Pt - covs[t + 1] @ G.T)
        covs[t] = 0.5 * (covs[t] + covs[t].T)
    return means, covs


@njit(cache=True)
def ffbs_scalar_random_walk(y, z, R, normals):
    """Scalar-state specialization: y_t = z[t] * c_t + e_t, c_0 = 0."""
    T = y.shape[0]
    a = np.zeros(T)
    P = np.zeros(T)
    a_prev = 0.0
    P_prev = 0.0
    for t in range(T):
        P_pred = P_prev + 1.0
        S = z[t] * P_pred * z[t] + R[t]
        K = P_pred * z[t] / S
        a[t] = a_prev + K * (y[t] - z[t] * a_prev)
        P[t] = P_pred - K * z[t] * P_pred
        a_prev = a[t]
        P_prev = P[t]
    draw = np.zeros(T)
    draw[T - 1] = a[T - 1] + np.sqrt(max(P[T - 1], 0.0)) * normals[T - 1]
    for t in range(T - 2, -1, -1):
        G = P[t] / (P[t] + 1.0)
        mean = a[t] + G * (draw[t + 1] - a[t])
        var = P[t] - G * P[t]
        draw[t] = mean + np.sqrt(max(var, 0.0)) * normals[t]
    return draw


@njit(cache=True)
def h_single_site_sweep(h, sigma_h, d, S, lin, quad, normals, log_unifs):
    """One single-site independence-MH pass over the common log-volatility.

    The conditional of h_t combines the random-walk prior (h_0 pinned at
    zero), the factor likelihood f_t ~ N(0, e^{h_t} I_d) with S[t] =
    ||f_t||^2, and the mean-side likelihood, which is Gaussian in h_t
    with log-density lin[t]*h - 0.5*quad[t]*h^2 (up to a constant).  The
    Gaussian pieces are folded into the proposal exactly; the factor
    term is linearized, leaving only its remainder in the acceptance
    ratio.  Mutates h in place and returns the acceptance count.
    """
    T = h.shape[0]
    accepted = 0
    for t in range(T):
        h_prev = h[t - 1] if t > 0 else 0.0
        if t < T - 1:
            mu = 0.5 * (h_prev + h[t + 1])
            v = 0.5 * sigma_h
        else:
            mu = h_prev
            v = sigma_h
        prec = 1.0 / v + quad[t]
        m0 = (mu / v + lin[t]) / prec
        v0 = 1.0 / prec
        e0 = np.exp(-m0)
        m_star = m0 + v0 * (0.5 * S[t] * e0 - 0.5 * d)
        h_new = m_star + np.sqrt(v0) * normals[t]
        # remainder of the factor likelihood vs its linearization at m0
        r_new = -0.5 * S[t] * (np.exp(-h_new) - e0 * (1.0 + m0 - h_new))
        r_old = -0.5 * S[t] * (np.exp(-h[t]) - e0 * (1.0 + m0 - h[t]))
        if log_unifs[t] < r_new - r_old:
            h[t] = h_new
            accepted += 1
    return accepted
