#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "reserve/harness.hpp"
#include "reserve/models.hpp"

using namespace reserve;

namespace {

// Asymptotic Kolmogorov-Smirnov p-value (Numerical Recipes form).
double ks_pvalue(double d, std::size_t n) {
    const double en = std::sqrt(static_cast<double>(n));
    const double lambda = (en + 0.12 + 0.11 / en) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        p += sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        sign = -sign;
    }
    return std::clamp(p, 0.0, 1.0);
}

double lognormal_cdf(double x, double mu, double sigma) {
    if (x <= 0.0)
        return 0.0;
    return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

} // namespace

TEST_CASE("lognormal fit on the e-triangle") {
    Triangle t(2, Flavor::Cumulative, Mask::UpperOnly);
    t.set(1, 1, 1.0);
    t.set(1, 2, std::exp(1.0));
    t.set(2, 1, std::exp(2.0));
    const ModelParams p = fit(ModelKind::LogNormal, t);
    const auto& ln = p.get<LogNormalParams>();
    CHECK(ln.mu[0] == doctest::Approx(1.0));
    CHECK(ln.mu[1] == doctest::Approx(1.0));
    CHECK(ln.sigma2[0] == doctest::Approx(2.0));
    CHECK(ln.sigma2[1] == 0.0);
}

TEST_CASE("lognormal fit rejects non-positive ratios") {
    Triangle t(2, Flavor::Cumulative, Mask::UpperOnly);
    t.set(1, 1, 1.0);
    t.set(1, 2, -2.0);
    t.set(2, 1, 3.0);
    CHECK_THROWS_AS(fit(ModelKind::LogNormal, t), NonPositiveCumulative);
}

TEST_CASE("poisson fit chains the chain-ladder estimators") {
    Triangle x(2, Flavor::Incremental, Mask::UpperOnly);
    x.set(1, 1, 1);
    x.set(1, 2, 2);
    x.set(2, 1, 3);
    const ModelParams p = fit(ModelKind::Poisson, x);
    const auto& pp = p.get<PoissonParams>();
    CHECK(pp.mu_rows[0] == doctest::Approx(3.0));
    CHECK(pp.mu_rows[1] == doctest::Approx(9.0));
    CHECK(pp.pattern.gamma[0] == doctest::Approx(1.0 / 3.0));
    CHECK(pp.pattern.gamma[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("gamma fit fails on a degenerate column") {
    Triangle x(3, Flavor::Incremental, Mask::UpperOnly);
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3 - i + 1; ++j)
            x.set(i, j, 0.0);
    CHECK_THROWS_AS(fit(ModelKind::Gamma, x), EstimatorError);
}

TEST_CASE("gamma scenario cell matches its mean by CLT") {
    GammaParams gp;
    gp.mu_rows = {200.0, 100.0};
    gp.pattern.gamma = {0.5, 0.5};
    gp.nu = 2.22;
    const ModelParams params{ModelKind::Gamma, gp};
    Rng rng(42);
    const int reps = 10000;
    double sum = 0.0;
    for (int r = 0; r < reps; ++r)
        sum += generate_scenario(params, rng).full_square.at(1, 1);
    const double mean = sum / reps; // cell mean 100, var 100^2/nu
    CHECK(std::abs(mean - 100.0) < 3.0 * 100.0 / std::sqrt(2.22 * reps));
}

TEST_CASE("a supplied base column pins the first development column") {
    GammaParams gp;
    gp.mu_rows = {200.0, 100.0};
    gp.pattern.gamma = {0.5, 0.5};
    gp.nu = 2.22;
    gp.base_column = {100.0, 50.0};
    const ModelParams params{ModelKind::Gamma, gp};
    Rng rng(11);
    for (int r = 0; r < 5; ++r) {
        const ScenarioTruth s = generate_scenario(params, rng);
        const Triangle inc = to_incremental(s.full_square);
        CHECK(inc.at(1, 1) == 100.0);
        CHECK(inc.at(2, 1) == 50.0);
        CHECK(inc.at(1, 2) != doctest::Approx(100.0)); // later columns random
    }
    GammaParams bad = gp;
    bad.base_column = {100.0};
    Rng rng2(12);
    CHECK_THROWS_AS(
        generate_scenario(ModelParams{ModelKind::Gamma, bad}, rng2),
        EstimatorError);
}

TEST_CASE("deterministic lognormal square when all variances vanish") {
    LogNormalParams lp;
    lp.mu = {0.5, 0.25, 0.1};
    lp.sigma2 = {0.0, 0.0, 0.0};
    const ModelParams params{ModelKind::LogNormal, lp};
    Rng rng(1);
    const ScenarioTruth s = generate_scenario(params, rng);
    double acc = 0.0;
    for (int j = 1; j <= 3; ++j) {
        acc += lp.mu[j - 1];
        for (int i = 1; i <= 3; ++i)
            CHECK(s.full_square.at(i, j) == doctest::Approx(std::exp(acc)));
    }
}

TEST_CASE("poisson cells with zero mean are exactly zero") {
    PoissonParams pp;
    pp.mu_rows = {10.0, 0.0};
    pp.pattern.gamma = {1.0, 0.0};
    const ModelParams params{ModelKind::Poisson, pp};
    Rng rng(3);
    const ScenarioTruth s = generate_scenario(params, rng);
    const Triangle inc = to_incremental(s.full_square);
    CHECK(inc.at(1, 2) == 0.0);
    CHECK(inc.at(2, 1) == 0.0);
    CHECK(inc.at(2, 2) == 0.0);
}

TEST_CASE("negbinom conditional mean is C (f - 1)") {
    Rng rng(7);
    const double size = 50.0, p = 0.8;
    const int reps = 100000;
    double sum = 0.0;
    for (int r = 0; r < reps; ++r)
        sum += negbinom_draw(size, p, rng);
    const double expected = size * (1.0 / p - 1.0); // 12.5
    CHECK(std::abs(sum / reps - expected) < 0.01 * expected);
}

TEST_CASE("poisson predictive collapses when lower means vanish") {
    PoissonParams pp;
    pp.mu_rows = {6.0, 9.0};
    pp.pattern.gamma = {1.0, 0.0};
    const ModelParams params{ModelKind::Poisson, pp};
    Triangle upper(2, Flavor::Cumulative, Mask::UpperOnly);
    upper.set(1, 1, 4);
    upper.set(1, 2, 4);
    upper.set(2, 1, 9);
    Rng rng(11);
    for (int r = 0; r < 10; ++r)
        CHECK(simulate_ultimate(params, upper, rng) == 13.0);
}

TEST_CASE("odp predictive mean and poisson predictive variance") {
    OdpParams op;
    op.mu_rows = {10.0, 20.0, 30.0};
    op.pattern.gamma = {0.5, 0.3, 0.2};
    op.phi = 2.0;
    Triangle upper(3, Flavor::Cumulative, Mask::UpperOnly);
    upper.set(1, 1, 5);
    upper.set(1, 2, 8);
    upper.set(1, 3, 10);
    upper.set(2, 1, 10);
    upper.set(2, 2, 16);
    upper.set(3, 1, 15);
    const double diag = 10.0 + 16.0 + 15.0;
    // lower-triangle mean: mu_2 g_3 + mu_3 (g_2 + g_3) = 4 + 15 = 19
    const double lower_mean = 19.0;

    Rng rng(13);
    const int reps = 10000;
    double sum = 0.0;
    const ModelParams odp{ModelKind::OverdispersedPoisson, op};
    for (int r = 0; r < reps; ++r)
        sum += simulate_ultimate(odp, upper, rng);
    const double mc = sum / reps;
    CHECK(std::abs(mc - (diag + lower_mean)) <
          3.0 * std::sqrt(op.phi * lower_mean / reps));

    // plain poisson: predictive variance above the diagonal equals its mean
    PoissonParams pp;
    pp.mu_rows = op.mu_rows;
    pp.pattern = op.pattern;
    const ModelParams pois{ModelKind::Poisson, pp};
    double s1 = 0.0, s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        const double y = simulate_ultimate(pois, upper, rng) - diag;
        s1 += y;
        s2 += y * y;
    }
    const double mean = s1 / reps;
    const double var = s2 / reps - mean * mean;
    CHECK(mean == doctest::Approx(lower_mean).epsilon(0.05));
    CHECK(var == doctest::Approx(lower_mean).epsilon(0.10));
}

TEST_CASE("negbinom predictive never falls below the diagonal sum") {
    NegBinomialParams np;
    np.pattern.gamma = {0.4, 0.35, 0.25};
    np.dev.p = {0.4 / 0.75, 0.75};
    np.dev.f = {0.75 / 0.4, 1.0 / 0.75};
    const ModelParams params{ModelKind::NegBinomial, np};
    Triangle upper(3, Flavor::Cumulative, Mask::UpperOnly);
    upper.set(1, 1, 8);
    upper.set(1, 2, 15);
    upper.set(1, 3, 20);
    upper.set(2, 1, 10);
    upper.set(2, 2, 19);
    upper.set(3, 1, 12);
    const double diag = 20.0 + 19.0 + 12.0;
    Rng rng(17);
    for (int r = 0; r < 200; ++r)
        CHECK(simulate_ultimate(params, upper, rng) >= diag);
}

TEST_CASE("lognormal row ultimate follows the closed-form law") {
    // n = 2: UC - C_{1,2} = C_{2,1} * LN(mu_2, sigma2_2)
    LogNormalParams lp;
    lp.mu = {0.2, 0.3};
    lp.sigma2 = {0.1, 0.25};
    const ModelParams params{ModelKind::LogNormal, lp};
    Triangle upper(2, Flavor::Cumulative, Mask::UpperOnly);
    upper.set(1, 1, 2.0);
    upper.set(1, 2, 3.0);
    upper.set(2, 1, 5.0);
    Rng rng(19);
    const int reps = 10000;
    std::vector<double> draws(reps);
    for (int r = 0; r < reps; ++r)
        draws[r] = simulate_ultimate(params, upper, rng) - 3.0;
    std::sort(draws.begin(), draws.end());
    const double mu = std::log(5.0) + lp.mu[1];
    const double sigma = std::sqrt(lp.sigma2[1]);
    double d = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double cdf = lognormal_cdf(draws[i], mu, sigma);
        d = std::max(d, std::abs(cdf - (i + 1.0) / reps));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / reps));
    }
    CHECK(ks_pvalue(d, reps) > 0.001);
}

TEST_CASE("fitting recovers the generator pattern as noise vanishes") {
    // the per-cell coefficient of variation is 1/sqrt(nu), so a huge nu
    // makes the single observed triangle nearly deterministic
    ModelParams gen = gamma_case_study_generator();
    auto& gp = gen.get<GammaParams>();
    gp.nu = 1e6;
    Rng rng(23);
    const ScenarioTruth s = generate_scenario(gen, rng);
    const ModelParams fitted = fit(ModelKind::Gamma, s.upper);
    const auto& fg = fitted.get<GammaParams>();
    for (std::size_t j = 0; j < fg.pattern.gamma.size(); ++j)
        CHECK(std::abs(fg.pattern.gamma[j] / gp.pattern.gamma[j] - 1.0) <
              0.05);
}

TEST_CASE("negbinom scenario generation requires a base column") {
    NegBinomialParams np;
    np.pattern.gamma = {0.5, 0.5};
    np.dev.p = {0.5};
    np.dev.f = {2.0};
    const ModelParams params{ModelKind::NegBinomial, np};
    Rng rng(29);
    CHECK_THROWS_AS(generate_scenario(params, rng), EstimatorError);

    NegBinomialParams with_base = np;
    with_base.base_column = {40.0, 60.0};
    const ModelParams ok{ModelKind::NegBinomial, with_base};
    const ScenarioTruth s = generate_scenario(ok, rng);
    CHECK(s.full_square.at(1, 1) == 40.0);
    CHECK(s.true_uc >= 100.0);
}

TEST_CASE("model params survive a json round trip") {
    const ModelParams gen = gamma_case_study_generator();
    const ModelParams back = ModelParams::from_json(gen.to_json());
    CHECK(back.kind() == ModelKind::Gamma);
    CHECK(back.to_json() == gen.to_json());

    NegBinomialParams np;
    np.pattern.gamma = {0.25, 0.5, 0.25};
    np.dev.p = {0.25 / 0.75, 0.75};
    np.dev.f = {3.0, 1.0 / 0.75};
    np.base_column = {10, 20, 30};
    const ModelParams nb{ModelKind::NegBinomial, np};
    const ModelParams nb_back = ModelParams::from_json(nb.to_json());
    CHECK(nb_back.get<NegBinomialParams>().dev.p[0] ==
          doctest::Approx(np.dev.p[0]));
    CHECK(nb_back.get<NegBinomialParams>().base_column == np.base_column);
}
