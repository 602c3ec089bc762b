#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reserve/resampling.hpp"

using namespace reserve;

namespace {

// Exactly multiplicative: X_ij = mu_i * gamma_j with mu = (20, 30, 40),
// gamma = (0.5, 0.3, 0.2). All Pearson residuals vanish.
Triangle multiplicative_3x3() {
    Triangle x(3, Flavor::Incremental, Mask::UpperOnly);
    x.set(1, 1, 10);
    x.set(1, 2, 6);
    x.set(1, 3, 4);
    x.set(2, 1, 15);
    x.set(2, 2, 9);
    x.set(3, 1, 20);
    return x;
}

Triangle upper_cumulative_2x2() {
    Triangle t(2, Flavor::Cumulative, Mask::UpperOnly);
    t.set(1, 1, 1);
    t.set(1, 2, 3);
    t.set(2, 1, 2);
    return t;
}

Triangle noisy_4x4() {
    Triangle t(4, Flavor::Cumulative, Mask::UpperOnly);
    t.set(1, 1, 102);
    t.set(1, 2, 205);
    t.set(1, 3, 262);
    t.set(1, 4, 290);
    t.set(2, 1, 95);
    t.set(2, 2, 211);
    t.set(2, 3, 258);
    t.set(3, 1, 110);
    t.set(3, 2, 219);
    t.set(4, 1, 98);
    return t;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

} // namespace

TEST_CASE("zero residuals make the bootstrap deterministic") {
    BootstrapConfig cfg;
    cfg.replicates = 200;
    Rng rng(1);
    const PredictiveSample s =
        bootstrap_predict(multiplicative_3x3(), cfg, Target::UltimateClaim, rng);
    REQUIRE(s.values.size() == 200);
    CHECK(s.failures == 0);
    CHECK(s.clamp_warnings == 0);
    // diagonal 20 + 24 + 20, lower means 6 + 12 + 8
    for (double v : s.values)
        CHECK(v == doctest::Approx(90.0));

    cfg.variance_power = VariancePower::Gamma;
    Rng rng2(1);
    const PredictiveSample g =
        bootstrap_predict(multiplicative_3x3(), cfg, Target::UltimateClaim, rng2);
    for (double v : g.values)
        CHECK(v == doctest::Approx(90.0));
}

TEST_CASE("single replicate is allowed, zero is not") {
    BootstrapConfig cfg;
    cfg.replicates = 1;
    Rng rng(2);
    CHECK(bootstrap_predict(multiplicative_3x3(), cfg, Target::UltimateClaim,
                            rng)
              .values.size() == 1);
    cfg.replicates = 0;
    CHECK_THROWS_AS(bootstrap_predict(multiplicative_3x3(), cfg,
                                      Target::UltimateClaim, rng),
                    EstimatorError);
}

TEST_CASE("bootstrap draws are seed deterministic") {
    BootstrapConfig cfg;
    cfg.replicates = 100;
    Rng a(42), b(42);
    const auto s1 = bootstrap_predict(noisy_4x4(), cfg, Target::UltimateClaim, a);
    const auto s2 = bootstrap_predict(noisy_4x4(), cfg, Target::UltimateClaim, b);
    CHECK(s1.values == s2.values);
    CHECK(s1.failures == s2.failures);
}

TEST_CASE("bootstrap mean tracks the chain-ladder projection") {
    const Triangle cum = noisy_4x4();
    const DevFactors d = estimate_dev_factors(cum);
    const PayoutPattern g = payout_pattern(d);
    const auto mu = row_levels(to_incremental(cum), g);
    double cl = diagonal_sum(cum);
    for (int i = 2; i <= 4; ++i)
        for (int j = 4 - i + 2; j <= 4; ++j)
            cl += mu[i - 1] * g.gamma[j - 1];

    BootstrapConfig cfg;
    cfg.replicates = 4000;
    Rng rng(7);
    const auto s = bootstrap_predict(cum, cfg, Target::UltimateClaim, rng);
    CHECK(s.failures < 100);
    CHECK(mean_of(s.values) == doctest::Approx(cl).epsilon(0.05));
}

TEST_CASE("single-entry factor pool pins every uniform draw") {
    Rng rng(3);
    const auto s =
        uniform_predict(upper_cumulative_2x2(), 50, Target::UltimateClaim, rng);
    for (double v : s.values)
        CHECK(v == doctest::Approx(9.0)); // 3 + 2 * 3

    Rng rng2(3);
    const auto ny = uniform_predict(upper_cumulative_2x2(), 50,
                                    Target::NextYearPayments, rng2);
    for (double v : ny.values)
        CHECK(v == doctest::Approx(4.0)); // 2 * 3 - 2
}

TEST_CASE("uniform draws stay inside the min and max factor products") {
    const Triangle cum = noisy_4x4();
    const FactorPool fp = factor_pools(cum);
    // every open row is resimulated from its first column through all three
    // development factors, so the bounds use the full factor-product range
    double open = 0.0;
    for (int i = 2; i <= 4; ++i)
        open += cum.at(i, 1);
    double plo = 1.0, phi = 1.0;
    for (const auto& pool : fp.pools) {
        plo *= *std::min_element(pool.begin(), pool.end());
        phi *= *std::max_element(pool.begin(), pool.end());
    }
    const double lo = cum.at(1, 4) + open * plo;
    const double hi = cum.at(1, 4) + open * phi;
    Rng rng(5);
    const auto s = uniform_predict(cum, 2000, Target::UltimateClaim, rng);
    for (double v : s.values) {
        CHECK(v >= lo - 1e-9);
        CHECK(v <= hi + 1e-9);
    }
}

TEST_CASE("uniform mean matches the product of pool means") {
    const Triangle cum = noisy_4x4();
    const FactorPool fp = factor_pools(cum);
    double p1 = 1.0;
    for (const auto& pool : fp.pools)
        p1 *= mean_of(pool);
    double open = 0.0;
    for (int i = 2; i <= 4; ++i)
        open += cum.at(i, 1);
    const double expected = cum.at(1, 4) + open * p1;
    Rng rng(11);
    const int m = 100000;
    const auto s = uniform_predict(cum, m, Target::UltimateClaim, rng);
    CHECK(mean_of(s.values) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("degenerate pools are collapsed by the normal approximation") {
    Rng rng(13);
    const auto s =
        unifnorm_predict(upper_cumulative_2x2(), 40, Target::UltimateClaim, rng);
    CHECK(s.clamp_warnings == 0);
    for (double v : s.values)
        CHECK(v == 9.0); // variance 0: all draws sit at the mean

    Rng rng2(13);
    const auto ny = unifnorm_predict(upper_cumulative_2x2(), 40,
                                     Target::NextYearPayments, rng2);
    for (double v : ny.values)
        CHECK(v == 4.0);
}

TEST_CASE("normal approximation has the pooled moments") {
    const Triangle cum = noisy_4x4();
    const FactorPool fp = factor_pools(cum);
    std::vector<double> e1, e2;
    for (const auto& pool : fp.pools) {
        double s1 = 0, s2 = 0;
        for (double a : pool) {
            s1 += a;
            s2 += a * a;
        }
        e1.push_back(s1 / pool.size());
        e2.push_back(s2 / pool.size());
    }
    double p1 = 1.0, p2 = 1.0;
    for (int k = 0; k < 3; ++k) {
        p1 *= e1[k];
        p2 *= e2[k];
    }
    double open = 0.0;
    for (int i = 2; i <= 4; ++i)
        open += cum.at(i, 1);
    const double mean = cum.at(1, 4) + open * p1;

    // the printed diagonal-anchored closed form, used by the literal variant
    double lit_mean = 0.0;
    for (int j = 1; j <= 4; ++j) {
        const double c = cum.at(4 - j + 1, j);
        double q1 = 1.0;
        for (int k = j; k <= 3; ++k)
            q1 *= e1[k - 1];
        lit_mean += c * q1;
    }
    (void)p2;

    // the normal approximation must carry the same first two moments as the
    // factor-resampling method it approximates
    const int m = 200000;
    Rng urng(23);
    const auto uni = uniform_predict(cum, m, Target::UltimateClaim, urng);
    const double u_mean = mean_of(uni.values);
    double u_var = 0.0;
    for (double x : uni.values)
        u_var += (x - u_mean) * (x - u_mean);
    u_var /= m;
    REQUIRE(u_var > 0.0);

    Rng rng(17);
    const auto s = unifnorm_predict(cum, m, Target::UltimateClaim, rng);
    const double mc = mean_of(s.values);
    CHECK(std::abs(mc - mean) < 3.0 * std::sqrt(u_var / m));
    CHECK(std::abs(u_mean - mean) < 3.0 * std::sqrt(u_var / m));
    double v2 = 0.0;
    for (double x : s.values)
        v2 += (x - mc) * (x - mc);
    v2 /= m;
    CHECK(v2 == doctest::Approx(u_var).epsilon(0.05));

    // the literal variant anchors the mean on the diagonal and weights the
    // variance by C instead of C^2, so it is much tighter here
    Rng rng2(17);
    const auto lit =
        unifnorm_predict(cum, m, Target::UltimateClaim, rng2, true);
    double vl = 0.0;
    const double ml = mean_of(lit.values);
    CHECK(ml == doctest::Approx(lit_mean).epsilon(0.01));
    for (double x : lit.values)
        vl += (x - ml) * (x - ml);
    CHECK(vl / m < v2);

    // same moment match for the next-year target
    Rng urng2(29);
    const auto uny = uniform_predict(cum, m, Target::NextYearPayments, urng2);
    const double uny_mean = mean_of(uny.values);
    double uny_var = 0.0;
    for (double x : uny.values)
        uny_var += (x - uny_mean) * (x - uny_mean);
    uny_var /= m;
    Rng rng3(31);
    const auto sny = unifnorm_predict(cum, m, Target::NextYearPayments, rng3);
    const double ny_mean = mean_of(sny.values);
    CHECK(std::abs(ny_mean - uny_mean) < 4.0 * std::sqrt(uny_var / m));
    double ny_var = 0.0;
    for (double x : sny.values)
        ny_var += (x - ny_mean) * (x - ny_mean);
    ny_var /= m;
    CHECK(ny_var == doctest::Approx(uny_var).epsilon(0.05));
}

TEST_CASE("factor pools reject a zero denominator") {
    Triangle t(2, Flavor::Cumulative, Mask::UpperOnly);
    t.set(1, 1, 0);
    t.set(1, 2, 3);
    t.set(2, 1, 2);
    CHECK_THROWS_AS(factor_pools(t), EstimatorError);
}
