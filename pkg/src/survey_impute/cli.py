"""Command line front end.

survey-impute simulate --config study.json [--out-dir D] [--threads K]
                       [--reps-out reps.csv] [--dry-run]
survey-impute estimate --data sample.csv --config est.json
                       [--out-dir D] [--dry-run]

SURVEY_IMPUTE_SEED overrides the config's master_seed. Exit codes:
0 success, 2 malformed config or data, 3 failure rate above the
configured threshold, 1 anything else.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import (
    load_json,
    parse_estimate_config,
    parse_study_config,
    resolved_estimate_config,
    resolved_study_config,
)
from .design import SRSWOR, STRATIFIED, DesignDescriptor, SampleDraw, Stratum, first_order
from .errors import ConfigError, SurveyImputeError
from .estimators import ModelSpec, nested_candidates
from .population import ResponseMask
from .study import run_study, reps_to_csv, summary_to_csv
from .variance import estimate_with_inference

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_FAILURE_RATE = 3


def _round10(x):
    """Floats leave the program with 10 significant digits."""
    return float(f"{x:.10g}")


def _env_seed():
    raw = os.environ.get("SURVEY_IMPUTE_SEED")
    if raw is None or raw == "":
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError("SURVEY_IMPUTE_SEED", f"not an integer: {raw!r}")
    if seed < 0:
        raise ConfigError("SURVEY_IMPUTE_SEED", "must be >= 0")
    return seed


def _print_summary_table(cfg, summary, out):
    cols = ("scope", "name", "RB", "RE", "loss", "freqW", "freqTrue",
            "freqOverfit", "CP", "varRB", "failures")
    print(
        f"study {cfg.name}: B={summary.replications} design={cfg.design_kind} "
        f"N={cfg.N} n={cfg.n} seed={cfg.master_seed}",
        file=out,
    )
    rows = []
    for m in summary.model_rows:
        rows.append(["model", m.label, m.rb, m.re, m.loss, None, None, None,
                     None, None, m.failures])
    for c in summary.criterion_rows:
        rows.append(["criterion", c.name, c.rb, c.re, c.loss, c.freq_wrong,
                     c.freq_true, c.freq_overfit, c.cp, c.var_rb, c.failures])
    text = [[("" if v is None else f"{v:.10g}" if isinstance(v, float) else str(v))
             for v in row] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in text)) for i, c in enumerate(cols)]
    print("  ".join(c.ljust(widths[i]) for i, c in enumerate(cols)), file=out)
    for r in text:
        print("  ".join(r[i].ljust(widths[i]) for i in range(len(cols))), file=out)


def cmd_simulate(args):
    cfg = parse_study_config(load_json(args.config))
    seed = _env_seed()
    if seed is not None:
        cfg = parse_study_config({**resolved_study_config(cfg), "master_seed": seed})
    if args.dry_run:
        print(json.dumps(resolved_study_config(cfg), indent=2))
        return EXIT_OK

    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    keep = args.reps_out is not None
    result = run_study(cfg, threads=args.threads, keep_records=keep)
    summary, records = result if keep else (result, None)

    summary_to_csv(summary, os.path.join(out_dir, "summary.csv"))
    if keep:
        reps_to_csv(records, args.reps_out, cfg)
    _print_summary_table(cfg, summary, sys.stdout)

    if summary.failure_rate > cfg.failure_threshold:
        print(
            f"error: failure rate {summary.failure_rate:.4f} exceeds "
            f"threshold {cfg.failure_threshold:.4f}",
            file=sys.stderr,
        )
        return EXIT_FAILURE_RATE
    return EXIT_OK


def read_estimate_csv(path):
    """sample CSV with header unit_id, x1..xp, y, pi; empty y = missing.

    Returns (unit_ids, X, y, pi, respondent mask) in unit-id-sorted order.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read data file: {exc}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError("header", "data file is empty")
        header = [h.strip() for h in header]
        p = len(header) - 3
        expected = ["unit_id"] + [f"x{j}" for j in range(1, p + 1)] + ["y", "pi"]
        if p < 1 or header != expected:
            raise ConfigError(
                "header",
                f"expected columns unit_id, x1..xp, y, pi; got {', '.join(header)}",
            )
        ids, X, y, pi, resp = [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 3:
                raise ConfigError(f"line {lineno}", f"expected {p + 3} fields, got {len(row)}")
            try:
                ids.append(int(row[0]))
                X.append([float(v) for v in row[1:p + 1]])
                missing = row[p + 1].strip() == ""
                resp.append(not missing)
                y.append(np.nan if missing else float(row[p + 1]))
                pi.append(float(row[p + 2]))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}", f"bad value: {exc}")
    if not ids:
        raise ConfigError(str(path), "data file has no rows")
    if len(set(ids)) != len(ids):
        raise ConfigError("unit_id", "duplicate unit ids")
    order = np.argsort(np.asarray(ids, dtype=np.int64), kind="stable")
    ids = np.asarray(ids, dtype=np.int64)[order]
    X = np.asarray(X, dtype=np.float64)[order]
    y = np.asarray(y, dtype=np.float64)[order]
    pi = np.asarray(pi, dtype=np.float64)[order]
    resp = np.asarray(resp, dtype=bool)[order]
    if np.any(pi <= 0.0) or np.any(pi > 1.0):
        raise ConfigError("pi", "inclusion probabilities must lie in (0, 1]")
    if not resp.any():
        raise ConfigError("y", "no respondents: every y is missing")
    return ids, X, y, pi, resp


def build_estimate_design(cfg, ids, pi):
    """Rebuild a full design descriptor from the estimate config.

    Original unit ids are opaque labels here: joint inclusion depends
    only on (N, n) per stratum, so sampled units are mapped onto a
    synthetic 0..N-1 universe in sorted-id order.
    """
    n = ids.size
    if cfg.design_kind == "srswor":
        if n > cfg.N:
            raise ConfigError("design.N", f"{n} sampled units exceed N={cfg.N}")
        design = DesignDescriptor(SRSWOR, cfg.N, n)
        synth = np.arange(n, dtype=np.int64)
    else:
        declared = sorted(u for _, units in cfg.strata for u in units)
        if list(ids) != declared:
            raise ConfigError(
                "design.strata", "sampled_units do not match the data file's unit ids"
            )
        strata, synth_map = [], {}
        offset = 0
        for N_h, units in cfg.strata:
            block = np.arange(offset, offset + N_h, dtype=np.int64)
            for s, u in zip(block[:len(units)], sorted(units)):
                synth_map[u] = s
            strata.append(Stratum(block, len(units)))
            offset += N_h
        design = DesignDescriptor(STRATIFIED, offset, n, tuple(strata))
        synth = np.asarray([synth_map[u] for u in ids], dtype=np.int64)
    expected = first_order(design, synth)
    if np.max(np.abs(pi - expected)) > 1e-9:
        raise ConfigError("pi", "pi column inconsistent with the declared design")
    return SampleDraw(np.sort(synth), expected[np.argsort(synth)], design), np.argsort(synth)


def cmd_estimate(args):
    cfg = parse_estimate_config(load_json(args.config))
    seed = _env_seed()
    if seed is not None:
        cfg = parse_estimate_config(
            {**resolved_estimate_config(cfg), "master_seed": seed}
        )
    if args.dry_run:
        print(json.dumps(resolved_estimate_config(cfg), indent=2))
        return EXIT_OK

    ids, X, y, pi, resp = read_estimate_csv(args.data)
    p = X.shape[1]
    if cfg.candidates == "nested":
        candidates = nested_candidates(p)
    else:
        bad = [m for m in cfg.candidates if m[-1] > p]
        if bad:
            raise ConfigError("candidates", f"covariate index {bad[0][-1]} exceeds p={p}")
        candidates = [ModelSpec(idx) for idx in cfg.candidates]

    sample, order = build_estimate_design(cfg, ids, pi)
    X, y, resp, ids = X[order], y[order], resp[order], ids[order]
    mask = ResponseMask(resp)
    # missing y stay NaN: every downstream read goes through the mask, so
    # a stray NaN in the output would expose a bookkeeping bug loudly

    rng = np.random.default_rng(np.random.SeedSequence([cfg.master_seed, 0]))
    bundle = estimate_with_inference(
        sample, mask, X, y, candidates, cfg.criterion, cfg.level, rng
    )

    out = {
        "criterion": cfg.criterion,
        "selected": {
            "included": list(bundle.model.included),
            "with_intercept": bundle.model.with_intercept,
        },
        "n": int(ids.size),
        "n_respondents": int(mask.n_r),
        "mu_hat": _round10(bundle.mu_hat),
        "v1": _round10(bundle.variance.v1),
        "v2": _round10(bundle.variance.v2),
        "v_total": _round10(bundle.variance.v_total),
        "sigma2_hat": _round10(bundle.variance.sigma2_hat),
        "ci": {
            "lower": _round10(bundle.ci.lower),
            "upper": _round10(bundle.ci.upper),
            "level": cfg.level,
        },
    }
    text = json.dumps(out, indent=2)
    print(text)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "estimate.json"), "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="survey-impute",
        description="Regression imputation for survey samples: simulation "
        "studies and single-dataset estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo study from a JSON config")
    sim.add_argument("--config", required=True, help="study config (JSON)")
    sim.add_argument("--out-dir", default=".", help="directory for summary.csv")
    sim.add_argument("--threads", type=int, default=1, help="worker processes")
    sim.add_argument("--reps-out", default=None, help="also write raw records to this CSV")
    sim.add_argument("--dry-run", action="store_true",
                     help="validate and echo the resolved config, run nothing")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="select, impute, and build a CI on one dataset")
    est.add_argument("--data", required=True, help="sample CSV: unit_id, x1..xp, y, pi")
    est.add_argument("--config", required=True, help="estimation config (JSON)")
    est.add_argument("--out-dir", default=None, help="also write estimate.json here")
    est.add_argument("--dry-run", action="store_true",
                     help="validate and echo the resolved config, run nothing")
    est.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc.field}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except SurveyImputeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
