"""Variance estimation for the imputation estimator and the resulting
confidence interval.

The estimator is linearized through per-unit values eta_hat whose HT
mean reproduces mu_hat exactly; v1 is the design variance of that HT
mean and v2 adds the model component from predicting the missing y.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtri

from .errors import DegenerateFitError, EstimationFailureError, SingularFitError
from .estimators import design_matrix, imputed_mean
from .design import joint_matrix
from .selection import select


@dataclass(frozen=True)
class VarianceEstimate:
    v1: float
    v2: float
    sigma2_hat: float
    c_hat: np.ndarray

    @property
    def v_total(self):
        return self.v1 + self.v2


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    point: float


def c_hat(sample, mask, X, model):
    """Solve (sum_r z z') c = sum_m z / pi for the weighting vector that
    carries the missing units' leverage back onto the respondents."""
    X = np.asarray(X, dtype=np.float64)
    resp, miss = mask.respondents, mask.nonrespondents
    Z_r = design_matrix(X[resp], model)
    q = Z_r.shape[1]
    if miss.size == 0:
        return np.zeros(q)
    w = design_matrix(X[miss], model).T @ (1.0 / sample.pi_first[miss])
    A = Z_r.T @ Z_r
    try:
        return cho_solve(cho_factor(A), w)
    except np.linalg.LinAlgError as exc:
        raise SingularFitError(str(exc), model) from exc


def eta_hat(sample, mask, X, y, model, fit, c):
    """Per-sampled-unit linearized values
    z'b + r_k (1 + pi_k c'z_k)(y_k - z'b); nonrespondents keep the bare
    prediction. Their HT mean reproduces the imputation estimator."""
    return _eta(sample, mask, X, y, model, fit.beta_hat, c)


def _eta(sample, mask, X, y, model, beta, c):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Z = design_matrix(X, model)
    pred = Z @ beta
    eta = pred.copy()
    resp = mask.respondents
    adj = 1.0 + sample.pi_first[resp] * (Z[resp] @ c)
    eta[resp] = pred[resp] + adj * (y[resp] - pred[resp])
    return eta


def v1_hat(sample, eta):
    """Double-sum HT variance of the eta values:
    (1/N^2) sum_kl (Delta_kl / pi_kl) (eta_k/pi_k)(eta_l/pi_l)."""
    eta = np.asarray(eta, dtype=np.float64)
    pi = sample.pi_first
    J = joint_matrix(sample.design, sample.unit_ids)
    Delta = J - np.outer(pi, pi)  # diag: pi - pi^2, correct as J_kk = pi_k
    t = eta / pi
    N = sample.design.population_size
    return float(t @ ((Delta / J) @ t)) / (N * N)


def sigma2_hat(fit, model):
    nu = fit.n_r_used - model.p_alpha
    if nu <= 0:
        raise DegenerateFitError(
            f"no residual degrees of freedom: n_r={fit.n_r_used}, p_alpha={model.p_alpha}"
        )
    return fit.rss / nu


def v2_hat(sample, mask, X, model, sigma2, c):
    """Model component: sigma^2 sum_k [1 - r_k + r_k (pi_k c'z_k)^2] /
    (N^2 pi_k). Every summand is nonnegative."""
    X = np.asarray(X, dtype=np.float64)
    Z = design_matrix(X, model)
    pi = sample.pi_first
    r = np.zeros(pi.size)
    r[mask.respondents] = 1.0
    term = (1.0 - r) + r * (pi * (Z @ c)) ** 2
    N = sample.design.population_size
    return float(sigma2 * np.sum(term / pi) / (N * N))


def confidence_interval(point, v_total, level):
    """Normal interval point +/- z * sqrt(v_total) at the given
    confidence level (z taken at (1 + level) / 2)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if v_total < 0.0:
        raise EstimationFailureError(f"negative variance estimate {v_total}")
    z = float(ndtri((1.0 + level) / 2.0))
    half = z * np.sqrt(v_total)
    return ConfidenceInterval(float(point - half), float(point + half), level, float(point))


@dataclass(frozen=True)
class EstimateBundle:
    model: object
    mu_hat: float
    fit: object
    variance: VarianceEstimate
    ci: ConfidenceInterval
    scores: tuple


def variance_for_model(sample, mask, X, y, model, fit):
    c = c_hat(sample, mask, X, model)
    eta = eta_hat(sample, mask, X, y, model, fit, c)
    v1 = v1_hat(sample, eta)
    s2 = sigma2_hat(fit, model)
    v2 = v2_hat(sample, mask, X, model, s2, c)
    return VarianceEstimate(v1, v2, s2, c)


def estimate_with_inference(sample, mask, X, y, candidates, criterion, level, rng=None):
    """Full pipeline on one dataset: select a model on the respondents,
    impute, estimate the variance, and build the interval."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    resp = mask.respondents
    model, scores = select(criterion, candidates, X[resp], y[resp], rng)
    mu, fit = imputed_mean(sample, mask, X, y, model)
    var = variance_for_model(sample, mask, X, y, model, fit)
    ci = confidence_interval(mu, var.v_total, level)
    return EstimateBundle(model, mu, fit, var, ci, tuple(scores))
