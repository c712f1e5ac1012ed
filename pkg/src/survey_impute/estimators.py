"""Point estimation: Horvitz-Thompson and regression imputation.

Working models are unweighted OLS fits on the respondents; the missing
units are filled with fitted values and everything is HT-averaged.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SingularFitError

# relative cutoff on the triangular factor's diagonal below which the
# normal equations are treated as numerically singular
RCOND_MIN = 1e-10


class ModelClass(enum.Enum):
    TRUE = "true"
    CORRECT_OVERFIT = "overfit"
    WRONG = "wrong"


@dataclass(frozen=True)
class ModelSpec:
    """A working model: which covariates (1-based indices) and whether an
    intercept is included. Indices are stored sorted and deduplicated."""

    included: tuple
    with_intercept: bool = True

    def __post_init__(self):
        idx = tuple(sorted(set(int(j) for j in self.included)))
        if any(j < 1 for j in idx):
            raise ValueError("covariate indices are 1-based")
        object.__setattr__(self, "included", idx)

    @property
    def p_alpha(self):
        """Number of fitted coefficients."""
        return len(self.included) + (1 if self.with_intercept else 0)

    def label(self):
        return ("i" if self.with_intercept else "") + "+".join(map(str, self.included))


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    rss: float
    n_r_used: int


def classify_model(model, true_support, beta0_nonzero=False):
    """TRUE if the model keeps exactly the active covariates, overfit if a
    strict superset, wrong otherwise. A model that drops a nonzero
    intercept cannot be correct; including an intercept whose true value
    is zero costs nothing but never upgrades the class."""
    if beta0_nonzero and not model.with_intercept:
        return ModelClass.WRONG
    truth = tuple(sorted(true_support))
    if model.included == truth:
        return ModelClass.TRUE
    if set(model.included) > set(truth):
        return ModelClass.CORRECT_OVERFIT
    return ModelClass.WRONG


def design_matrix(X, model):
    """Columns of X for the model, intercept first when present."""
    X = np.asarray(X, dtype=np.float64)
    cols = [np.ones((X.shape[0], 1))] if model.with_intercept else []
    if model.included:
        cols.append(X[:, [j - 1 for j in model.included]])
    if not cols:
        raise ValueError("empty model: no intercept and no covariates")
    return np.hstack(cols)


def fit_ols(X_r, y_r, model):
    """Unweighted least squares via orthogonal decomposition.

    Raises SingularFitError when there are fewer rows than coefficients
    or the triangular factor's diagonal falls below RCOND_MIN relatively.
    """
    Z = design_matrix(X_r, model)
    y_r = np.asarray(y_r, dtype=np.float64)
    n, q = Z.shape
    if n < q:
        raise SingularFitError(f"{n} respondents cannot identify {q} coefficients", model)
    Q, R = np.linalg.qr(Z)
    d = np.abs(np.diag(R))
    if d.min() <= RCOND_MIN * d.max():
        raise SingularFitError("rank deficient design matrix", model)
    beta = solve_triangular(R, Q.T @ y_r)
    resid = y_r - Z @ beta
    return FitResult(beta, float(resid @ resid), n)


def ht_mean(sample, y):
    """Horvitz-Thompson mean of y over the draw; y is aligned with
    sample.unit_ids."""
    y = np.asarray(y, dtype=np.float64)
    return float(np.sum(y / sample.pi_first) / sample.design.population_size)


def imputed_mean(sample, mask, X, y, model, fit=None):
    """Imputation estimator: observed y for respondents, model
    predictions for the missing, averaged with HT weights.

    X and y are aligned with sample.unit_ids. Returns (mu_hat, fit).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    resp, miss = mask.respondents, mask.nonrespondents
    if fit is None:
        fit = fit_ols(X[resp], y[resp], model)
    filled = y.copy()
    if miss.size:
        filled[miss] = design_matrix(X[miss], model) @ fit.beta_hat
    return ht_mean(sample, filled), fit


def nested_candidates(p):
    """The nested sequence: model j keeps covariates 1..j plus an
    intercept."""
    return [ModelSpec(tuple(range(1, j + 1))) for j in range(1, p + 1)]
