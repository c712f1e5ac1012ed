"""Build the variance estimator piece by piece and verify its key identity.

The imputed estimator is linearized by treating the regression fit as an
estimating-equation solution: each respondent's value is expanded into a
pseudo-value eta that absorbs both its own residual and the influence its
residual exerts on every imputed unit. The Horvitz-Thompson mean of eta
then reproduces the imputed point estimate exactly, which is the identity
that makes the plug-in variance formula legitimate. V1 applies the usual
joint-inclusion variance machinery to eta; V2 adds the (typically small)
noise contribution from imputing rather than observing.
"""

import numpy as np

from survey_impute import (
    ModelSpec,
    c_hat,
    confidence_interval,
    draw_srswor,
    eta_hat,
    fit_ols,
    generate_population,
    generate_response,
    ht_mean,
    imputed_mean,
    sigma2_hat,
    v1_hat,
    v2_hat,
)

N = 2_000
n = 200
p = 8
BETA = np.array([0.0, 10.0, 9.0, 8.0, 0.0, 0.0, 0.0, 0.0, 0.0])
SIGMA = 40.0
RESPONSE = (-25.0, 0.1, np.array([1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]))
LAW = {"name": "gamma", "shape": 5.0, "scale": 2.0}
SEED = 20260816


def main():
    rng = np.random.default_rng(np.random.SeedSequence([SEED, 2]))
    pop = generate_population(N, p, LAW, BETA, SIGMA, RESPONSE, rng)
    sample = draw_srswor(N, n, rng)
    X_s = pop.X[sample.unit_ids]
    y_s = pop.y[sample.unit_ids]
    mask = generate_response(pop.resp_prob, sample.unit_ids, rng)

    model = ModelSpec((1, 2, 3))
    resp = mask.respondents
    fit = fit_ols(X_s[resp], y_s[resp], model)
    mu_hat, _ = imputed_mean(sample, mask, X_s, y_s, model, fit)
    print(f"n={sample.n}, respondents={mask.n_r}, model {model.label()},"
          f" mu_hat = {mu_hat:.6f}")

    # --- step 1: the correction vector --------------------------------------
    c = c_hat(sample, mask, X_s, model)
    print(f"\nc_hat = {np.array2string(c, precision=4)}")
    print("c weights each respondent residual by how much leverage it has"
          " over the imputed units")

    # --- step 2: pseudo-values and the exact identity ------------------------
    eta = eta_hat(sample, mask, X_s, y_s, model, fit, c)
    ht_eta = ht_mean(sample, eta)
    print(f"\nHT mean of eta = {ht_eta:.6f}")
    print(f"gap to mu_hat  = {abs(ht_eta - mu_hat):.2e}   (identical up to rounding)")

    # --- step 3: the two variance components ---------------------------------
    v1 = v1_hat(sample, eta)
    s2 = sigma2_hat(fit, model)
    v2 = v2_hat(sample, mask, X_s, model, s2, c)
    print(f"\nV1 (design variance of the eta total) = {v1:.4f}")
    print(f"sigma2_hat = {s2:.1f}   (true sigma^2 = {SIGMA ** 2:.0f})")
    print(f"V2 (imputation noise)                 = {v2:.4f}")

    ci = confidence_interval(mu_hat, v1 + v2, 0.95)
    print(f"\n95% CI [{ci.lower:.4f}, {ci.upper:.4f}]"
          f"   true mean {pop.mu:.4f}, covered: {ci.lower <= pop.mu <= ci.upper}")

    # the identity is structural, not luck: check it across fresh draws
    worst = 0.0
    for rep in range(50):
        r2 = np.random.default_rng(np.random.SeedSequence([SEED, 3, rep]))
        s = draw_srswor(N, n, r2)
        m = generate_response(pop.resp_prob, s.unit_ids, r2)
        if m.n_r <= model.p_alpha or m.n_m == 0:
            continue
        Xs, ys = pop.X[s.unit_ids], pop.y[s.unit_ids]
        f = fit_ols(Xs[m.respondents], ys[m.respondents], model)
        mu_r, _ = imputed_mean(s, m, Xs, ys, model, f)
        e = eta_hat(s, m, Xs, ys, model, f, c_hat(s, m, Xs, model))
        worst = max(worst, abs(ht_mean(s, e) - mu_r) / abs(mu_r))
    print(f"\nidentity over 50 fresh draws: worst relative gap = {worst:.2e}")


if __name__ == "__main__":
    main()
