"""Closed-form ridge regression on a Chebyshev design matrix.

The design matrix stacks basis rows at the projected cached timesteps; the
coefficient matrix solves

    (Phi^T Phi + lambda I) C = Phi^T H

through a Cholesky factorization of the (M+1) x (M+1) normal matrix.  The
normal matrix is tiny, so everything runs in float64 and precision wins over
cleverness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import basis_matrix

DEFAULT_LAMBDA = 0.1


class RidgeFitError(RuntimeError):
    """Normal-matrix factorization failed (rank-deficient design at lambda = 0)."""


@dataclass(frozen=True)
class DesignMatrix:
    """K x (M+1) stack of Chebyshev basis rows at strictly increasing taus."""

    rows: np.ndarray
    cached_taus: np.ndarray

    @property
    def n_points(self) -> int:
        return self.rows.shape[0]

    @property
    def degree(self) -> int:
        return self.rows.shape[1] - 1


@dataclass(frozen=True)
class CoefficientMatrix:
    """(M+1) x F fitted coefficients; jitter records any stabilizing diagonal added."""

    coeffs: np.ndarray
    jitter: float = field(default=0.0, compare=False)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def n_channels(self) -> int:
        return self.coeffs.shape[1]


def build_design(cached_taus, degree: int) -> DesignMatrix:
    """Assemble the design matrix from projected cached timesteps.

    The taus must be strictly increasing and inside [-1, 1]; duplicates would
    make interpolation fits singular for no good reason, so they are rejected.
    """
    taus = np.asarray(cached_taus, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise ValueError("cached taus must be a non-empty 1-D sequence")
    if np.any(np.diff(taus) <= 0.0):
        raise ValueError("cached taus must be strictly increasing")
    return DesignMatrix(rows=basis_matrix(degree, taus), cached_taus=taus)


def _as_feature_matrix(values, n_points: int) -> np.ndarray:
    H = np.asarray(values, dtype=float)
    if H.ndim == 1:
        H = H[:, None]
    if H.ndim != 2 or H.shape[0] != n_points:
        raise ValueError(
            f"feature matrix must have one row per design row ({n_points}), got shape {H.shape}"
        )
    return H


def solve_ridge(phi: DesignMatrix, features, lam: float = DEFAULT_LAMBDA) -> CoefficientMatrix:
    """Solve the ridge normal equations for the coefficient matrix.

    At lambda = 0 the design must have at least M+1 rows (full column rank);
    a short cache is a deterministic RidgeFitError, not a silent fallback.
    If the factorization fails numerically despite K >= M+1, one retry with a
    trace-scaled jitter is attempted and recorded on the result.
    """
    lam = float(lam)
    if lam < 0.0:
        raise ValueError(f"regularization strength must be >= 0, got {lam}")
    H = _as_feature_matrix(features, phi.n_points)
    n_coef = phi.degree + 1
    if lam == 0.0 and phi.n_points < n_coef:
        raise RidgeFitError(
            f"cannot solve at lambda=0 with {phi.n_points} points and {n_coef} coefficients"
        )

    gram = phi.rows.T @ phi.rows
    rhs = phi.rows.T @ H

    def attempt(diag: float) -> np.ndarray:
        normal = gram + diag * np.eye(n_coef)
        factor = scipy.linalg.cho_factor(normal, lower=True)
        return scipy.linalg.cho_solve(factor, rhs)

    jitter = 0.0
    try:
        coeffs = attempt(lam)
    except scipy.linalg.LinAlgError:
        if lam > 0.0:
            raise RidgeFitError("normal matrix not SPD despite positive lambda") from None
        jitter = 1e-10 * np.trace(gram) / n_coef
        try:
            coeffs = attempt(jitter)
        except scipy.linalg.LinAlgError:
            raise RidgeFitError(
                "normal matrix not numerically SPD at lambda=0 (rank-deficient design)"
            ) from None

    if not np.all(np.isfinite(coeffs)):
        raise RidgeFitError("ridge solve produced non-finite coefficients")
    return CoefficientMatrix(coeffs=coeffs, jitter=jitter)


def min_singular(phi: DesignMatrix) -> float:
    """Smallest singular value of the design matrix.

    Computed as sqrt of the smallest eigenvalue of the (M+1) x (M+1) Gram
    matrix; tiny negative eigenvalues from round-off clamp to zero.
    """
    gram = phi.rows.T @ phi.rows
    smallest = float(np.linalg.eigvalsh(gram)[0])
    return float(np.sqrt(max(smallest, 0.0)))


def ridge_objective(phi: DesignMatrix, features, coeffs: CoefficientMatrix, lam: float) -> float:
    """||Phi C - H||_F^2 + lambda * ||C||_F^2."""
    lam = float(lam)
    if lam < 0.0:
        raise ValueError(f"regularization strength must be >= 0, got {lam}")
    H = _as_feature_matrix(features, phi.n_points)
    C = coeffs.coeffs
    if C.shape != (phi.degree + 1, H.shape[1]):
        raise ValueError(
            f"coefficient shape {C.shape} does not match design degree {phi.degree} "
            f"and {H.shape[1]} channels"
        )
    resid = phi.rows @ C - H
    return float(np.sum(resid * resid) + lam * np.sum(C * C))
