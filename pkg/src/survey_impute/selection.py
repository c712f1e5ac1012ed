"""Model selection on the respondent set: AIC, BIC, K-fold CV.

Criterion names are the strings "aic", "bic", or "cvK" (e.g. "cv5").
Scores are compared as (score, p_alpha, included), so ties go to the
smaller model and then lexicographically; an interpolating fit scores
-inf and therefore wins against any positive-rss fit.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import SelectionFailureError, SingularFitError
from .estimators import design_matrix, fit_ols

# rss at or below this fraction of the centered total sum of squares is
# treated as an exact interpolation that only floating point kept nonzero
RSS_INTERP_REL = 1e-16

_CV_RE = re.compile(r"^cv([0-9]+)$")


@dataclass(frozen=True)
class CriterionScore:
    model: object
    score: float
    criterion: str


def parse_criterion(name):
    """-> ("aic", None), ("bic", None), or ("cv", K)."""
    if name == "aic":
        return "aic", None
    if name == "bic":
        return "bic", None
    m = _CV_RE.match(name)
    if m:
        k = int(m.group(1))
        if k < 2:
            raise ValueError(f"cv criterion needs K >= 2, got {name!r}")
        return "cv", k
    raise ValueError(f"unknown criterion {name!r}; expected 'aic', 'bic', or 'cvK'")


def score_aic(rss, n_r, p_alpha):
    if rss == 0.0:
        return float("-inf")
    return n_r * np.log(rss / n_r) + 2.0 * p_alpha


def score_bic(rss, n_r, p_alpha):
    if rss == 0.0:
        return float("-inf")
    return n_r * np.log(rss / n_r) + np.log(n_r) * p_alpha


def make_folds(n, k, rng):
    """Near-equal random fold index arrays (first n mod k folds get the
    extra unit)."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    return np.array_split(rng.permutation(n), k)


def score_kfold_cv(X_r, y_r, model, folds):
    """Mean held-out MSE over the folds."""
    X_r = np.asarray(X_r, dtype=np.float64)
    y_r = np.asarray(y_r, dtype=np.float64)
    mses = []
    for test in folds:
        train = np.setdiff1d(np.arange(y_r.size), test, assume_unique=False)
        fit = fit_ols(X_r[train], y_r[train], model)
        resid = y_r[test] - design_matrix(X_r[test], model) @ fit.beta_hat
        mses.append(float(resid @ resid) / test.size)
    return float(np.mean(mses))


def score_candidates(criterion, candidates, X_r, y_r, rng=None):
    """Score every candidate; unscorable (rank deficient) ones get +inf.

    Returns a list of CriterionScore in candidate order.
    """
    kind, k = parse_criterion(criterion)
    y_r = np.asarray(y_r, dtype=np.float64)
    n_r = y_r.size
    if kind == "cv" and rng is None:
        raise ValueError("cv scoring needs an rng for the fold split")
    # n_r = 0 leaves every fit singular; keep the guard quiet about it
    tss = float(np.sum((y_r - y_r.mean()) ** 2)) if n_r else 0.0

    out = []
    for model in candidates:
        try:
            if kind == "cv":
                # each candidate gets its own random split, as when a CV
                # routine is called once per model
                score = score_kfold_cv(X_r, y_r, model, make_folds(n_r, k, rng))
            else:
                fit = fit_ols(X_r, y_r, model)
                rss = fit.rss
                if rss <= RSS_INTERP_REL * tss:
                    rss = 0.0
                scorer = score_aic if kind == "aic" else score_bic
                score = scorer(rss, n_r, model.p_alpha)
        except SingularFitError:
            score = float("inf")
        out.append(CriterionScore(model, float(score), criterion))
    return out


def select(criterion, candidates, X_r, y_r, rng=None):
    """Pick the best candidate. Returns (model, scores)."""
    if not candidates:
        raise SelectionFailureError("no candidate models")
    scores = score_candidates(criterion, candidates, X_r, y_r, rng)
    finite = [s for s in scores if s.score < float("inf")]
    if not finite:
        raise SelectionFailureError("all candidate models were rank deficient")
    best = min(finite, key=lambda s: (s.score, s.model.p_alpha, s.model.included))
    return best.model, scores
