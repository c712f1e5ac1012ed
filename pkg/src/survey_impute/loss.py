"""Oracle loss of an imputation model, conditional on the realized
sample, response set, and covariates.

Both routes below target the same quantity: with G denoting the HT-sum
gap over the missing units, sum_{S_m} (z_k' beta_hat - y_k) / pi_k,

    E[G^2] = l1 + l2 + sigma^2 * sum_{S_m} pi_k^{-2},

where l1 is the squared omitted-variable bias pushed through the
response-set projection and l2 is the estimation variance term. The
last term does not involve the model and is subtracted off, so l1 + l2
is what separates candidate models.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SingularFitError
from .estimators import RCOND_MIN, design_matrix


@dataclass(frozen=True)
class LossValue:
    l1: float
    l2: float

    @property
    def total(self):
        return self.l1 + self.l2


def _qr_checked(Z, model):
    Q, R = np.linalg.qr(Z)
    d = np.abs(np.diag(R))
    if Z.shape[0] < Z.shape[1] or d.min() <= RCOND_MIN * d.max():
        raise SingularFitError("rank deficient design matrix", model)
    return Q, R


def loss_closed_form(sample, mask, X, model, beta_true, sigma):
    """Exact l1 and l2 for one model on one realized configuration.

    X is aligned with sample.unit_ids; beta_true has length p + 1 with
    the intercept first.
    """
    X = np.asarray(X, dtype=np.float64)
    beta_true = np.asarray(beta_true, dtype=np.float64)
    resp, miss = mask.respondents, mask.nonrespondents
    if miss.size == 0:
        return LossValue(0.0, 0.0)

    Z_r = design_matrix(X[resp], model)
    Q, R = _qr_checked(Z_r, model)

    pi_m = sample.pi_first[miss]
    w = design_matrix(X[miss], model).T @ (1.0 / pi_m)
    u = solve_triangular(R, w, trans="T")

    # noiseless respondent means under the full generating model
    mu_r = beta_true[0] + X[resp] @ beta_true[1:]
    t1 = float(np.sum((beta_true[0] + X[miss] @ beta_true[1:]) / pi_m))

    l1 = (t1 - float(u @ (Q.T @ mu_r))) ** 2
    l2 = sigma * sigma * float(u @ u)
    return LossValue(l1, l2)


def mc_loss_oracle(sample, mask, X, model, beta_true, sigma, draws, rng,
                   chunk=50_000):
    """Monte Carlo estimate of l1 + l2 by redrawing the noise vector with
    the sample, response set, and covariates held fixed.

    Returns (estimate, standard_error). Matches loss_closed_form up to
    MC error; the model-free sigma^2 * sum pi^-2 term is subtracted.
    """
    X = np.asarray(X, dtype=np.float64)
    beta_true = np.asarray(beta_true, dtype=np.float64)
    resp, miss = mask.respondents, mask.nonrespondents
    if miss.size == 0:
        return 0.0, 0.0

    Z_r = design_matrix(X[resp], model)
    Q, R = _qr_checked(Z_r, model)
    pi_m = sample.pi_first[miss]
    inv_pi_m = 1.0 / pi_m
    w = design_matrix(X[miss], model).T @ inv_pi_m

    mu_r = beta_true[0] + X[resp] @ beta_true[1:]
    t1 = float(np.sum((beta_true[0] + X[miss] @ beta_true[1:]) * inv_pi_m))
    const = sigma * sigma * float(inv_pi_m @ inv_pi_m)

    samples = np.empty(draws, dtype=np.float64)
    done = 0
    while done < draws:
        b = min(chunk, draws - done)
        E_r = rng.standard_normal((resp.size, b))
        Y_r = mu_r[:, None] + sigma * E_r
        # beta_hat for every draw at once: R beta = Q'Y
        B = solve_triangular(R, Q.T @ Y_r)
        e_m = rng.standard_normal((miss.size, b))
        G = w @ B - t1 - sigma * (inv_pi_m @ e_m)
        samples[done:done + b] = G * G - const
        done += b

    est = float(samples.mean())
    se = float(samples.std(ddof=1) / np.sqrt(draws)) if draws > 1 else float("nan")
    return est, se
