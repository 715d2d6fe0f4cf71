"""Independent brute-force oracles used to pin expected values.

Everything here deliberately avoids the library's own solve paths: linear
systems go through hand-rolled Gaussian elimination, eigenvalues through
inertia-count bisection, and conditional expectations through Monte-Carlo
moment estimates.
"""

import numpy as np


def gauss_solve(a, b):
    """Solve a @ x = b by Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    n = a.shape[0]
    aug = np.hstack([a, b])
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[pivot, col]) == 0.0:
            raise ZeroDivisionError("singular system")
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] /= aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, n:]


def brute_ridge(rows, features, lam):
    """Ridge coefficients by explicit normal-equation elimination."""
    rows = np.asarray(rows, dtype=float)
    H = np.asarray(features, dtype=float)
    if H.ndim == 1:
        H = H[:, None]
    normal = rows.T @ rows + lam * np.eye(rows.shape[1])
    return gauss_solve(normal, rows.T @ H)


def _count_eigs_below(sym, x):
    """Number of eigenvalues of sym below x, from the LDL pivot signs."""
    a = np.array(sym, dtype=float) - x * np.eye(sym.shape[0])
    n = a.shape[0]
    count = 0
    for k in range(n):
        pivot = a[k, k]
        if pivot == 0.0:
            pivot = 1e-300
        if pivot < 0.0:
            count += 1
        for i in range(k + 1, n):
            factor = a[i, k] / pivot
            a[i, k:] -= factor * a[k, k:]
    return count


def smallest_eig_bisect(sym, tol=1e-12, max_iter=200):
    """Smallest eigenvalue of a symmetric matrix by inertia bisection."""
    sym = np.asarray(sym, dtype=float)
    bound = float(np.max(np.sum(np.abs(sym), axis=1)))  # Gershgorin
    lo, hi = -bound - 1.0, bound + 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _count_eigs_below(sym, mid) >= 1:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol * max(1.0, bound):
            break
    return 0.5 * (lo + hi)


def taylor_uniform_prediction(values, stride, steps_ahead, order):
    """Backward-difference Taylor form on a uniformly spaced history.

    values[-1] is the anchor; stride is the spacing of the history; the
    prediction extrapolates steps_ahead * stride past the anchor.
    """
    values = np.asarray(values, dtype=float)
    pred = values[-1].copy()
    diff = values.copy()
    fact = 1.0
    for p in range(1, order + 1):
        diff = diff[1:] - diff[:-1]
        fact *= p
        pred = pred + diff[-1] / fact * steps_ahead**p
    return pred


def mc_velocity_single_gaussian(mean, variance, x, t, n_samples=10**6, seed=0):
    """Monte-Carlo moment oracle for the single-Gaussian flow velocity.

    Simulates (noise, data) pairs, then applies per-dimension Gaussian
    conditioning with the estimated moments instead of the closed form.
    """
    mean = np.asarray(mean, dtype=float)
    std = np.sqrt(np.asarray(variance, dtype=float))
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n_samples, mean.size))
    data = mean + std * rng.standard_normal((n_samples, mean.size))
    x_t = (1.0 - t) * noise + t * data
    dot = data - noise
    out = np.empty(mean.size)
    for d in range(mean.size):
        cov = np.cov(dot[:, d], x_t[:, d])[0, 1]
        var = np.var(x_t[:, d])
        out[d] = dot[:, d].mean() + cov / var * (x[d] - x_t[:, d].mean())
    return out
