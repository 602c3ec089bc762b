#include "reserve/resampling.hpp"

#include <cmath>

namespace reserve {

namespace {

Triangle as_cumulative(const Triangle& t) {
    return t.flavor() == Flavor::Cumulative ? t : to_cumulative(t);
}

Triangle as_incremental(const Triangle& t) {
    return t.flavor() == Flavor::Incremental ? t : to_incremental(t);
}

double process_draw(double mean, double phi, VariancePower q, Rng& rng,
                    int& clamp_warnings) {
    if (mean <= 0.0) {
        ++clamp_warnings;
        return 0.0;
    }
    if (phi <= 0.0)
        return mean; // zero dispersion: process collapses to its mean
    if (q == VariancePower::ODP) {
        const double lambda = mean / phi;
        if (lambda > 1e9) {
            // counts this large overflow the integer sampler; the normal
            // limit is exact to double precision here
            std::normal_distribution<double> approx(lambda,
                                                    std::sqrt(lambda));
            return phi * std::max(0.0, approx(rng));
        }
        std::poisson_distribution<long long> dist(lambda);
        return phi * static_cast<double>(dist(rng));
    }
    // Gamma process with Var = phi * mean^2: shape 1/phi, scale phi*mean.
    std::gamma_distribution<double> dist(1.0 / phi, phi * mean);
    return dist(rng);
}

} // namespace

PredictiveSample bootstrap_predict(const Triangle& upper,
                                   const BootstrapConfig& cfg, Target target,
                                   Rng& rng) {
    if (cfg.replicates < 1)
        throw EstimatorError("bootstrap needs at least one replicate");
    const Triangle cum = as_cumulative(upper);
    const Triangle inc = as_incremental(upper);
    const int n = cum.n();

    const DevFactors dev = estimate_dev_factors(cum);
    const PayoutPattern pattern = payout_pattern(dev);
    const std::vector<double> mu = row_levels(inc, pattern);
    const VariancePower q = cfg.variance_power;
    const Dispersion disp = pearson_dispersion(inc, mu, pattern, q);
    const std::vector<double> adj =
        adjust_residuals(disp, n, cfg.residual_adjustment);
    const double phi = disp.phi;
    const double diag = diagonal_sum(cum);

    std::uniform_int_distribution<std::size_t> pick(0, adj.size() - 1);

    PredictiveSample out;
    out.values.reserve(cfg.replicates);
    for (int rep = 0; rep < cfg.replicates; ++rep) {
        Triangle pseudo(n, Flavor::Incremental, Mask::UpperOnly);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n - i + 1; ++j) {
                const double m = mu[i - 1] * pattern.gamma[j - 1];
                const double scale =
                    q == VariancePower::ODP ? std::sqrt(m) : m;
                pseudo.set(i, j, m + adj[pick(rng)] * scale);
            }

        std::vector<double> mu_t;
        PayoutPattern pattern_t;
        try {
            const Triangle pseudo_cum = to_cumulative(pseudo);
            pattern_t = payout_pattern(estimate_dev_factors(pseudo_cum));
            mu_t = row_levels(pseudo, pattern_t);
        } catch (const EstimatorError&) {
            ++out.failures;
            continue;
        }

        double total = 0.0;
        for (int i = 2; i <= n; ++i) {
            const int j_hi = target == Target::UltimateClaim ? n : n - i + 2;
            for (int j = n - i + 2; j <= j_hi; ++j) {
                const double m = mu_t[i - 1] * pattern_t.gamma[j - 1];
                total += process_draw(m, phi, q, rng, out.clamp_warnings);
            }
        }
        out.values.push_back(target == Target::UltimateClaim ? diag + total
                                                             : total);
    }
    return out;
}

FactorPool factor_pools(const Triangle& t) {
    if (t.flavor() != Flavor::Cumulative)
        throw EstimatorError("factor pools need a cumulative triangle");
    const int n = t.n();
    FactorPool fp;
    fp.pools.resize(n - 1);
    for (int j = 1; j <= n - 1; ++j) {
        fp.pools[j - 1].reserve(n - j);
        for (int i = 1; i <= n - j; ++i) {
            const double denom = t.at(i, j);
            if (denom == 0.0)
                throw EstimatorError("degenerate factor: C(" +
                                     std::to_string(i) + "," +
                                     std::to_string(j) + ") is zero");
            fp.pools[j - 1].push_back(t.at(i, j + 1) / denom);
        }
    }
    return fp;
}

PredictiveSample uniform_predict(const Triangle& upper, int m, Target target,
                                 Rng& rng) {
    const Triangle cum = as_cumulative(upper);
    const int n = cum.n();
    const FactorPool fp = factor_pools(cum);

    PredictiveSample out;
    out.values.reserve(m);
    std::vector<double> alpha(n - 1);
    for (int s = 0; s < m; ++s) {
        // one factor per development column, shared by every open row; each
        // open row's development path is resimulated in full from its
        // first-column value (C_{i,j} = C_{i,1} * alpha_1 * ... * alpha_{j-1})
        for (int j = 1; j <= n - 1; ++j) {
            const auto& pool = fp.pools[j - 1];
            std::uniform_int_distribution<std::size_t> pick(0,
                                                            pool.size() - 1);
            alpha[j - 1] = pool[pick(rng)];
        }
        double total = target == Target::UltimateClaim ? cum.at(1, n) : 0.0;
        for (int i = 2; i <= n; ++i) {
            double c = cum.at(i, 1);
            double prev = c;
            const int j_hi =
                target == Target::UltimateClaim ? n : n - i + 2;
            for (int j = 2; j <= j_hi; ++j) {
                prev = c;
                c *= alpha[j - 2];
            }
            total += target == Target::UltimateClaim ? c : c - prev;
        }
        out.values.push_back(total);
    }
    return out;
}

PredictiveSample unifnorm_predict(const Triangle& upper, int m, Target target,
                                  Rng& rng, bool literal_variance) {
    const Triangle cum = as_cumulative(upper);
    const int n = cum.n();
    const FactorPool fp = factor_pools(cum);

    std::vector<double> e1(n - 1), e2(n - 1);
    for (int j = 1; j <= n - 1; ++j) {
        double s1 = 0.0, s2 = 0.0;
        for (double a : fp.pools[j - 1]) {
            s1 += a;
            s2 += a * a;
        }
        e1[j - 1] = s1 / fp.pools[j - 1].size();
        e2[j - 1] = s2 / fp.pools[j - 1].size();
    }

    double mean = 0.0, var = 0.0;
    PredictiveSample out;
    if (literal_variance) {
        // printed closed forms: diagonal-anchored mean and a variance with
        // unsquared diagonal weights
        if (target == Target::UltimateClaim) {
            for (int j = 1; j <= n; ++j) {
                const double c = cum.at(n - j + 1, j);
                double p1 = 1.0, p2 = 1.0;
                for (int k = j; k <= n - 1; ++k) {
                    p1 *= e1[k - 1];
                    p2 *= e2[k - 1];
                }
                mean += c * p1;
                var += c * (p2 - p1 * p1);
            }
        } else {
            for (int i = 2; i <= n; ++i) {
                const double c = cum.at(i, n - i + 1);
                const int j = n - i + 1;
                mean += c * (e1[j - 1] - 1.0);
                var += c * (e2[j - 1] - e1[j - 1] * e1[j - 1]);
            }
        }
    } else if (target == Target::UltimateClaim) {
        // exact moments of the full-path resimulation: every open row is
        // C_{i,1} * alpha_1 * ... * alpha_{n-1} with the factors shared
        // across rows, so the open-row total is S * prod(alpha) with
        // S = sum of open first-column values
        double s = 0.0;
        for (int i = 2; i <= n; ++i)
            s += cum.at(i, 1);
        double p1 = 1.0, p2 = 1.0;
        for (int k = 1; k <= n - 1; ++k) {
            p1 *= e1[k - 1];
            p2 *= e2[k - 1];
        }
        mean = cum.at(1, n) + s * p1;
        var = s * s * (p2 - p1 * p1);
    } else {
        // next-year total is sum_j w_j (P_j - P_{j-1}) with P_j the shared
        // partial factor product and w_j = C_{n-j+1,1}; E(P_a P_b) factors
        // column by column
        std::vector<double> cp1(n, 1.0); // cp1[j] = E(P_j)
        for (int j = 1; j <= n - 1; ++j)
            cp1[j] = cp1[j - 1] * e1[j - 1];
        const auto epp = [&](int a, int b) {
            double v = 1.0;
            const int lo = std::min(a, b), hi = std::max(a, b);
            for (int k = 1; k <= lo; ++k)
                v *= e2[k - 1];
            for (int k = lo + 1; k <= hi; ++k)
                v *= e1[k - 1];
            return v;
        };
        double m2 = 0.0;
        for (int j = 1; j <= n - 1; ++j) {
            const double wj = cum.at(n - j + 1, 1);
            mean += wj * (cp1[j] - cp1[j - 1]);
            for (int j2 = 1; j2 <= n - 1; ++j2) {
                const double w2 = cum.at(n - j2 + 1, 1);
                m2 += wj * w2 *
                      (epp(j, j2) - epp(j, j2 - 1) - epp(j - 1, j2) +
                       epp(j - 1, j2 - 1));
            }
        }
        var = m2 - mean * mean;
    }
    if (var < 0.0) {
        ++out.clamp_warnings;
        var = 0.0;
    }

    out.values.reserve(m);
    if (var == 0.0) {
        out.values.assign(m, mean);
        return out;
    }
    std::normal_distribution<double> dist(mean, std::sqrt(var));
    for (int s = 0; s < m; ++s)
        out.values.push_back(dist(rng));
    return out;
}

} // namespace reserve
