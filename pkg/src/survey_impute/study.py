"""Monte Carlo replication engine and metric aggregation.

Each replication derives its own RNG streams from
SeedSequence([master_seed, rep_id]).spawn(4), one stream per stage
(population, sample, response, criteria), so results are identical for
any worker count and any execution order; aggregation is a fold over
rep_id order.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .design import draw_srswor, draw_stratified
from .errors import (
    DegenerateFitError,
    EstimationFailureError,
    MetricError,
    SelectionFailureError,
    SingularFitError,
)
from .estimators import ModelSpec, classify_model, ht_mean, imputed_mean, nested_candidates
from .loss import loss_closed_form
from .population import generate_population, generate_response
from .variance import estimate_with_inference

_FAILURES = (SingularFitError, DegenerateFitError, SelectionFailureError, EstimationFailureError)


@dataclass(frozen=True)
class ModelResult:
    label: str
    model_class: str          # "true" | "overfit" | "wrong"
    ok: bool
    mu_hat: float = None
    l1: float = None
    l2: float = None


@dataclass(frozen=True)
class CriterionResult:
    criterion: str
    ok: bool
    selected: str = None
    selected_class: str = None
    mu_hat: float = None
    v1: float = None
    v2: float = None
    ci_lower: float = None
    ci_upper: float = None
    covered: bool = None
    failure: str = None

    @property
    def v_total(self):
        if self.v1 is None or self.v2 is None:
            return None
        return self.v1 + self.v2


@dataclass(frozen=True)
class ReplicationRecord:
    rep_id: int
    mu_true: float
    ht_complete: float
    models: tuple
    criteria: tuple


def build_candidates(cfg):
    if cfg.candidates == "nested":
        return nested_candidates(cfg.p)
    return [ModelSpec(idx) for idx in cfg.candidates]


def candidate_labels(cfg):
    if cfg.candidates == "nested":
        return [f"alpha{j}" for j in range(1, cfg.p + 1)]
    return [m.label() for m in build_candidates(cfg)]


def run_replication(cfg, rep_id, master_seed=None):
    seed = cfg.master_seed if master_seed is None else master_seed
    streams = np.random.SeedSequence([seed, rep_id]).spawn(4)
    pop_rng, samp_rng, resp_rng, crit_rng = map(np.random.default_rng, streams)

    pop = generate_population(
        cfg.N, cfg.p, cfg.covariate_law, cfg.beta, cfg.sigma,
        (cfg.response_offset, cfg.response_scale, cfg.response_coefs), pop_rng
    )
    if cfg.design_kind == "srswor":
        sample = draw_srswor(cfg.N, cfg.n, samp_rng)
    else:
        sort_key = pop.X @ np.asarray(cfg.sort_coefs)
        sample = draw_stratified(
            sort_key, pop.X[:, cfg.alloc_covariate - 1], cfg.fractions, cfg.n, samp_rng
        )
    mask = generate_response(pop.resp_prob, sample.unit_ids, resp_rng)

    X_s = pop.X[sample.unit_ids]
    y_s = pop.y[sample.unit_ids]
    ht_complete = ht_mean(sample, y_s)
    beta0_nonzero = cfg.beta[0] != 0.0

    candidates = build_candidates(cfg)
    labels = candidate_labels(cfg)
    models = []
    for label, m in zip(labels, candidates):
        klass = classify_model(m, pop.true_support, beta0_nonzero).value
        try:
            mu_hat, _ = imputed_mean(sample, mask, X_s, y_s, m)
            lv = loss_closed_form(sample, mask, X_s, m, pop.beta_true, pop.sigma)
            models.append(ModelResult(label, klass, True, mu_hat, lv.l1, lv.l2))
        except _FAILURES:
            models.append(ModelResult(label, klass, False))

    by_model = dict(zip(candidates, labels))
    crit_results = []
    for crit in cfg.criteria:
        try:
            bundle = estimate_with_inference(
                sample, mask, X_s, y_s, candidates, crit, cfg.level, crit_rng
            )
        except _FAILURES as exc:
            crit_results.append(
                CriterionResult(crit, False, failure=type(exc).__name__)
            )
            continue
        label = by_model[bundle.model]
        klass = classify_model(bundle.model, pop.true_support, beta0_nonzero).value
        covered = bool(bundle.ci.lower <= pop.mu <= bundle.ci.upper)
        crit_results.append(
            CriterionResult(
                crit, True, label, klass, bundle.mu_hat,
                bundle.variance.v1, bundle.variance.v2,
                bundle.ci.lower, bundle.ci.upper, covered,
            )
        )

    return ReplicationRecord(rep_id, pop.mu, ht_complete, tuple(models), tuple(crit_results))


def _run_chunk(args):
    cfg, master_seed, rep_ids = args
    return [run_replication(cfg, r, master_seed) for r in rep_ids]


def run_records(cfg, master_seed=None, threads=1):
    """All replication records, in rep_id order."""
    B = cfg.replications
    if threads <= 1:
        return [run_replication(cfg, r, master_seed) for r in range(B)]
    chunks = [
        (cfg, master_seed, tuple(ids))
        for ids in np.array_split(np.arange(B), min(B, threads * 4))
        if ids.size
    ]
    records = []
    # spawn, not fork: workers must re-import with a clean RNG/BLAS state
    with ProcessPoolExecutor(max_workers=threads, mp_context=get_context("spawn")) as pool:
        for batch in pool.map(_run_chunk, chunks):
            records.extend(batch)
    return records


# --- metrics ---------------------------------------------------------------

def relative_bias(mu_hat, mu_true):
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    mu_true = np.asarray(mu_true, dtype=np.float64)
    if mu_hat.size == 0:
        raise MetricError("no replications")
    if np.any(mu_true == 0.0):
        raise MetricError("true mean is zero in some replication")
    return float(100.0 * np.mean((mu_hat - mu_true) / mu_true))


def relative_efficiency(mu_hat, mu_true, ht):
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    mu_true = np.asarray(mu_true, dtype=np.float64)
    ht = np.asarray(ht, dtype=np.float64)
    denom = float(np.sum((ht - mu_true) ** 2))
    if mu_hat.size == 0 or denom <= 0.0:
        raise MetricError("HT mean squared error is zero")
    return float(100.0 * np.sum((mu_hat - mu_true) ** 2) / denom)


def identification_probability(selected, target, B):
    hits = sum(1 for s in selected if s == target)
    return 100.0 * hits / B


def coverage_probability(covered):
    covered = np.asarray(covered, dtype=bool)
    if covered.size == 0:
        raise MetricError("no replications")
    return float(100.0 * covered.mean())


def variance_rb(v_totals, mu_hats, mu_true):
    """Relative bias of the variance estimator against the Monte Carlo
    variance of the errors mu_hat - mu (B - 1 divisor). The target is
    the variance of the error, so each replication's estimate is
    centered at its own population mean; the finite population is
    redrawn every replication and its own mean variability is not part
    of what v_total estimates."""
    v_totals = np.asarray(v_totals, dtype=np.float64)
    err = np.asarray(mu_hats, dtype=np.float64) - np.asarray(mu_true, dtype=np.float64)
    if err.size < 2:
        raise MetricError("need at least 2 replications")
    v_mc = float(np.var(err, ddof=1))
    if v_mc == 0.0:
        raise MetricError("Monte Carlo variance is zero")
    return float(100.0 * (np.mean(v_totals) - v_mc) / v_mc)


def mc_loss(mu_hat, ht, N):
    """Mean of N * (mu_hat - ht)^2 across replications. The N scaling is
    a fixed reporting convention; rankings do not depend on it."""
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    ht = np.asarray(ht, dtype=np.float64)
    if mu_hat.size == 0:
        raise MetricError("no replications")
    return float(np.mean(N * (mu_hat - ht) ** 2))


# --- aggregation -----------------------------------------------------------

@dataclass(frozen=True)
class ModelSummary:
    label: str
    model_class: str
    rb: float
    re: float
    loss: float
    failures: float


@dataclass(frozen=True)
class CriterionSummary:
    name: str
    rb: float
    re: float
    loss: float
    freq_wrong: float
    freq_true: float
    freq_overfit: float
    cp: float
    var_rb: float
    failures: float


@dataclass(frozen=True)
class StudySummary:
    name: str
    replications: int
    model_rows: tuple
    criterion_rows: tuple

    @property
    def failure_rate(self):
        """Worst failure fraction over all rows, for the CLI threshold."""
        rates = [r.failures for r in self.model_rows + self.criterion_rows]
        return max(rates, default=0.0) / 100.0


def _guarded(fn, *args):
    try:
        return fn(*args)
    except MetricError:
        return None


def summarize(cfg, records):
    B = len(records)
    mu_true = np.array([r.mu_true for r in records])
    ht = np.array([r.ht_complete for r in records])
    labels = candidate_labels(cfg)

    model_rows = []
    for i, label in enumerate(labels):
        ok = np.array([r.models[i].ok for r in records])
        mu = np.array([r.models[i].mu_hat if r.models[i].ok else np.nan for r in records])
        klass = records[0].models[i].model_class if records else ""
        rb = _guarded(relative_bias, mu[ok], mu_true[ok])
        re = _guarded(relative_efficiency, mu[ok], mu_true[ok], ht[ok])
        loss = _guarded(mc_loss, mu[ok], ht[ok], cfg.N)
        model_rows.append(
            ModelSummary(label, klass, rb, re, loss, 100.0 * (B - ok.sum()) / B)
        )

    criterion_rows = []
    for j, crit in enumerate(cfg.criteria):
        results = [r.criteria[j] for r in records]
        ok = np.array([c.ok for c in results])
        mu = np.array([c.mu_hat if c.ok else np.nan for c in results])
        vt = np.array([c.v_total if c.ok else np.nan for c in results])
        covered = np.array([bool(c.covered) for c in results])[ok]
        classes = [c.selected_class for c in results if c.ok]
        n_class = {k: sum(1 for c in classes if c == k) for k in ("wrong", "true", "overfit")}
        criterion_rows.append(
            CriterionSummary(
                name=crit,
                rb=_guarded(relative_bias, mu[ok], mu_true[ok]),
                re=_guarded(relative_efficiency, mu[ok], mu_true[ok], ht[ok]),
                loss=_guarded(mc_loss, mu[ok], ht[ok], cfg.N),
                freq_wrong=100.0 * n_class["wrong"] / B,
                freq_true=100.0 * n_class["true"] / B,
                freq_overfit=100.0 * n_class["overfit"] / B,
                cp=_guarded(coverage_probability, covered),
                var_rb=_guarded(variance_rb, vt[ok], mu[ok], mu_true[ok]),
                failures=100.0 * (B - ok.sum()) / B,
            )
        )

    return StudySummary(cfg.name, B, tuple(model_rows), tuple(criterion_rows))


def run_study(cfg, master_seed=None, threads=1, keep_records=False):
    """-> StudySummary, or (StudySummary, records) with keep_records."""
    records = run_records(cfg, master_seed, threads)
    summary = summarize(cfg, records)
    if keep_records:
        return summary, records
    return summary


# --- CSV output ------------------------------------------------------------

SUMMARY_COLUMNS = (
    "scope", "name", "RB", "RE", "loss",
    "freqW", "freqTrue", "freqOverfit", "CP", "varRB", "failures",
)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def summary_to_csv(summary, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for m in summary.model_rows:
            w.writerow(
                ["model", m.label, _fmt(m.rb), _fmt(m.re), _fmt(m.loss),
                 "", "", "", "", "", _fmt(m.failures)]
            )
        for c in summary.criterion_rows:
            w.writerow(
                ["criterion", c.name, _fmt(c.rb), _fmt(c.re), _fmt(c.loss),
                 _fmt(c.freq_wrong), _fmt(c.freq_true), _fmt(c.freq_overfit),
                 _fmt(c.cp), _fmt(c.var_rb), _fmt(c.failures)]
            )


def reps_to_csv(records, path, cfg):
    labels = candidate_labels(cfg)
    header = ["rep_id", "mu_true", "ht_complete"]
    header += [f"mu_{lab}" for lab in labels]
    for crit in cfg.criteria:
        header += [f"{crit}_{f}" for f in ("selected", "mu", "v1", "v2", "lo", "hi", "covered")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in records:
            row = [r.rep_id, _fmt(r.mu_true), _fmt(r.ht_complete)]
            row += [_fmt(m.mu_hat) for m in r.models]
            for c in r.criteria:
                if c.ok:
                    row += [c.selected, _fmt(c.mu_hat), _fmt(c.v1), _fmt(c.v2),
                            _fmt(c.ci_lower), _fmt(c.ci_upper), int(c.covered)]
                else:
                    row += [c.failure or "failed", "", "", "", "", "", ""]
            w.writerow(row)
