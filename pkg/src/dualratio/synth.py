"""Seeded synthetic populations with a controlled correlation structure.

Used by the validation suite and handy for generating demo CSVs. The recipe
is a one-shot Gaussian draw: z ~ N(0, R) row-wise, then each variable is
scaled to its target mean and coefficient of variation. Realized population
moments therefore fluctuate around the targets (exactly what a finite
population should do); callers that need guarantees should assert them on
the returned population.
"""

from __future__ import annotations

import numpy as np

from .model import Population


def population_from_correlation(
    N: int,
    means,
    cvs,
    corr,
    rng: np.random.Generator,
) -> Population:
    """Population with len(means) - 1 auxiliaries; index 0 is the study variable.

    ``corr`` is the (k+1) x (k+1) target correlation matrix (y first). Raises
    numpy.linalg.LinAlgError if it is not positive definite.
    """
    means = np.asarray(means, dtype=float)
    cvs = np.asarray(cvs, dtype=float)
    corr = np.asarray(corr, dtype=float)
    p = means.size
    if cvs.size != p or corr.shape != (p, p):
        raise ValueError("means, cvs and corr must agree on the variable count")
    chol = np.linalg.cholesky(corr)
    z = rng.standard_normal((N, p)) @ chol.T
    data = means * (1.0 + cvs * z)
    return Population(y=data[:, 0], x=data[:, 1:])


def correlated_population(
    N: int,
    *,
    ybar: float,
    xbar,
    cv_y: float,
    cv_x,
    rho_yx,
    rho_xx=0.0,
    seed: int,
) -> Population:
    """Convenience wrapper: scalar/vector targets instead of a full matrix.

    ``rho_xx`` may be a scalar (common pairwise auxiliary correlation) or a
    full k x k matrix.
    """
    xbar = np.atleast_1d(np.asarray(xbar, dtype=float))
    k = xbar.size
    cv_x = np.broadcast_to(np.asarray(cv_x, dtype=float), (k,))
    rho_yx = np.broadcast_to(np.asarray(rho_yx, dtype=float), (k,))
    corr = np.eye(k + 1)
    corr[0, 1:] = rho_yx
    corr[1:, 0] = rho_yx
    rho_xx = np.asarray(rho_xx, dtype=float)
    if rho_xx.ndim == 0:
        xx = np.full((k, k), float(rho_xx))
        np.fill_diagonal(xx, 1.0)
    else:
        xx = rho_xx
    corr[1:, 1:] = xx
    rng = np.random.default_rng(seed)
    return population_from_correlation(
        N, np.concatenate([[ybar], xbar]), np.concatenate([[cv_y], cv_x]), corr, rng
    )
