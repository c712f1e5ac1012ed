"""Finite population generation and the response mechanism.

The response model only ever sees the stored response probabilities;
nothing downstream of generation can couple response to y.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigError


@dataclass(frozen=True)
class Population:
    """A realized finite population and the truths behind it."""

    X: np.ndarray
    y: np.ndarray
    beta_true: np.ndarray
    sigma: float
    resp_prob: np.ndarray
    true_support: tuple

    def __post_init__(self):
        for name in ("X", "y", "beta_true", "resp_prob"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        N, p = self.X.shape
        if self.y.shape != (N,) or self.resp_prob.shape != (N,):
            raise ConfigError("population", "y and resp_prob must match X rows")
        if self.beta_true.shape != (p + 1,):
            raise ConfigError("population", "beta_true must have length p + 1")

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def mu(self):
        return float(self.y.mean())


def _draw_covariates(N, p, law, rng):
    name = law.get("name")
    if name == "gamma":
        return rng.gamma(law["shape"], law["scale"], size=(N, p))
    if name == "normal":
        return rng.normal(law.get("loc", 0.0), law["scale"], size=(N, p))
    if name == "uniform":
        return rng.uniform(law.get("low", 0.0), law.get("high", 1.0), size=(N, p))
    raise ConfigError("covariate_law.name", f"unknown law {name!r}")


def generate_population(N, p, covariate_law, beta, sigma, response, rng):
    """Draw X, build y = [1 X] beta + eps, and store logistic response
    probabilities expit(scale * (offset + x' zeta)).

    beta has length p + 1 (intercept first); response is an
    (offset, scale, zeta) triple with zeta of length p. sigma >= 0; the
    noise stream is drawn even at sigma = 0 so downstream draws stay
    aligned across noise levels.
    """
    beta = np.asarray(beta, dtype=np.float64)
    offset, scale, zeta = response
    zeta = np.asarray(zeta, dtype=np.float64)
    if N < 1 or p < 1:
        raise ConfigError("population", "need N >= 1 and p >= 1")
    if beta.shape != (p + 1,):
        raise ConfigError("beta", f"expected length {p + 1}, got {beta.shape}")
    if zeta.shape != (p,):
        raise ConfigError("response_coefs", f"expected length {p}, got {zeta.shape}")
    if not (np.isfinite(offset) and np.isfinite(scale)):
        raise ConfigError("response", "offset and scale must be finite")
    if not sigma >= 0:
        raise ConfigError("sigma", "must be >= 0")

    X = _draw_covariates(N, p, covariate_law, rng)
    eps = rng.normal(0.0, 1.0, size=N) * sigma
    y = beta[0] + X @ beta[1:] + eps
    resp_prob = expit(scale * (offset + X @ zeta))
    if np.any(resp_prob <= 0.0) or np.any(resp_prob >= 1.0):
        # expit saturates to exactly 0/1 around |arg| ~ 37; refuse rather
        # than clip, since pi-weighting assumes an interior probability
        raise ConfigError("response_coefs", "response probabilities hit 0 or 1")

    support = tuple(int(j) for j in np.flatnonzero(beta[1:]) + 1)
    return Population(X, y, beta, float(sigma), resp_prob, support)


@dataclass(frozen=True)
class ResponseMask:
    """Respondent indicator over a sample, with position lookups."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=bool)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def respondents(self):
        return np.flatnonzero(self.r)

    @property
    def nonrespondents(self):
        return np.flatnonzero(~self.r)

    @property
    def n_r(self):
        return int(self.r.sum())

    @property
    def n_m(self):
        return int((~self.r).sum())


def generate_response(resp_prob, unit_ids, rng):
    """Bernoulli response for the sampled units. Takes probabilities
    only; y never enters."""
    resp_prob = np.asarray(resp_prob, dtype=np.float64)
    unit_ids = np.asarray(unit_ids, dtype=np.int64)
    return ResponseMask(rng.random(unit_ids.size) < resp_prob[unit_ids])


def write_population_csv(path, pop):
    """Dump a population for inspection: unit_id, x1..xp, y, resp_prob."""
    header = ["unit_id"] + [f"x{j}" for j in range(1, pop.p + 1)] + ["y", "resp_prob"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(pop.N):
            row = [k] + [f"{v:.10g}" for v in pop.X[k]]
            row += [f"{pop.y[k]:.10g}", f"{pop.resp_prob[k]:.10g}"]
            w.writerow(row)
