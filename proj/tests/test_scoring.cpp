#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "reserve/scoring.hpp"

using namespace reserve;

namespace {

double crps_brute(const std::vector<double>& x, double obs) {
    const double m = static_cast<double>(x.size());
    double pair = 0.0, dev = 0.0;
    for (double a : x) {
        dev += std::abs(a - obs);
        for (double b : x)
            pair += std::abs(a - b);
    }
    return 0.5 * pair / (m * m) - dev / m;
}

std::vector<double> sorted_random(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<double> x(m);
    for (double& v : x)
        v = u(rng);
    std::sort(x.begin(), x.end());
    return x;
}

} // namespace

TEST_CASE("quantile by ceil index") {
    const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(empirical_quantile(x, 0.05) == 1.0);
    CHECK(empirical_quantile(x, 0.1) == 1.0);
    CHECK(empirical_quantile(x, 0.11) == 2.0);
    CHECK(empirical_quantile(x, 0.95) == 10.0);
    CHECK(empirical_quantile(x, 0.0) == 1.0);
    CHECK(empirical_quantile(x, 1.0) == 10.0);
}

TEST_CASE("crps of a near point mass at the observation") {
    const std::vector<double> x = {5.0, 5.0, 5.0, 5.0};
    CHECK(crps(x, 5.0) == doctest::Approx(0.0));
    CHECK(crps(x, 7.0) == doctest::Approx(-2.0));
}

TEST_CASE("crps two-point example") {
    const std::vector<double> x = {0.0, 2.0};
    // 0.5 * (2 * 2 / 4) - (1 + 1)/2 = 0.5 - 1
    CHECK(crps(x, 1.0) == doctest::Approx(-0.5));
}

TEST_CASE("fast crps matches the all-pairs oracle") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int m = 2 + static_cast<int>(rng() % 60);
        const std::vector<double> x = sorted_random(rng, m);
        const double obs = u(rng);
        const double fast = crps(x, obs);
        const double slow = crps_brute(x, obs);
        CHECK(std::abs(fast - slow) <= 1e-9 * std::max(1.0, std::abs(slow)));
    }
}

TEST_CASE("energy score with beta=1 is the crps") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        const std::vector<double> x = sorted_random(rng, 40);
        const double obs = x[rep];
        CHECK(energy_score(x, obs, 1.0, 0, nullptr) ==
              doctest::Approx(crps(x, obs)).epsilon(1e-12));
    }
}

TEST_CASE("energy score beta=1/2 two-point example") {
    const std::vector<double> x = {0.0, 2.0};
    // 0.5 * (2 sqrt(2) / 4) - (1 + 1)/2 = sqrt(2)/4 - 1
    CHECK(energy_score(x, 1.0, 0.5, 0, nullptr) ==
          doctest::Approx(std::sqrt(2.0) / 4.0 - 1.0));
}

TEST_CASE("subsampled energy score converges to the exhaustive value") {
    std::mt19937_64 seed(29);
    const std::vector<double> x = sorted_random(seed, 500);
    const double obs = 3.0;
    const double exact = energy_score(x, obs, 0.5, 0, nullptr);
    Rng rng(31);
    const double approx = energy_score(x, obs, 0.5, 200000, &rng);
    CHECK(approx == doctest::Approx(exact).epsilon(0.01));
    CHECK_THROWS(energy_score(x, obs, 0.5, 100, nullptr));
    CHECK_THROWS(energy_score(x, obs, 2.5, 0, nullptr));
}

TEST_CASE("pit extremes and ties") {
    Rng rng(37);
    const std::vector<double> x = {1, 2, 3, 3, 3, 4, 5, 6, 7, 8};
    CHECK(pit_value(x, 0.5, true, rng) == 0.0);
    CHECK(pit_value(x, 9.0, true, rng) == 1.0);
    CHECK(pit_value(x, 3.0, false, rng) == doctest::Approx(0.5));
    for (int r = 0; r < 100; ++r) {
        const double p = pit_value(x, 3.0, true, rng);
        CHECK(p >= 0.2);
        CHECK(p <= 0.5);
    }
    // monotone in the observation
    double prev = -1.0;
    for (double obs : {0.0, 1.5, 3.5, 6.5, 9.0}) {
        const double p = pit_value(x, obs, false, rng);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("central interval coverage and width") {
    std::vector<double> x(100);
    for (int i = 0; i < 100; ++i)
        x[i] = i + 1.0;
    const IntervalResult mid = coverage_and_width(x, 50.0, 0.90);
    CHECK(mid.covered);
    CHECK(mid.width == 90.0); // order statistics 5 and 95
    CHECK_FALSE(coverage_and_width(x, 5.0, 0.90).covered);
    CHECK_FALSE(coverage_and_width(x, 95.0, 0.90).covered);
    CHECK(coverage_and_width(x, 5.5, 0.90).covered);

    const std::vector<double> flat = {4.0, 4.0, 4.0};
    CHECK_FALSE(coverage_and_width(flat, 4.0, 0.66).covered);
    CHECK(coverage_and_width(flat, 4.0, 0.66).width == 0.0);
}

TEST_CASE("msep of a sample against itself is its variance") {
    std::mt19937_64 rng(41);
    const std::vector<double> z = sorted_random(rng, 1000);
    const Msep m = msep_conditional(z, z);
    CHECK(m.bias_part == doctest::Approx(0.0));
    double mean = 0.0;
    for (double v : z)
        mean += v;
    mean /= z.size();
    double ss = 0.0;
    for (double v : z)
        ss += (v - mean) * (v - mean);
    CHECK(m.value == doctest::Approx(ss / (z.size() - 1)).epsilon(1e-9));
    CHECK(m.variance_part == doctest::Approx(m.value));
}

TEST_CASE("msep of constant samples is the squared gap") {
    const std::vector<double> y = {3.0, 3.0};
    const std::vector<double> z = {7.0, 7.0};
    const Msep m = msep_conditional(y, z);
    CHECK(m.value == doctest::Approx(16.0));
    CHECK(m.variance_part == doctest::Approx(0.0));
    CHECK(m.bias_part == doctest::Approx(16.0));
}

TEST_CASE("msep is translation invariant and scales quadratically") {
    std::mt19937_64 rng(43);
    const std::vector<double> y = sorted_random(rng, 200);
    const std::vector<double> z = sorted_random(rng, 300);
    const Msep base = msep_conditional(y, z);

    std::vector<double> ys = y, zs = z;
    for (double& v : ys)
        v += 13.0;
    for (double& v : zs)
        v += 13.0;
    CHECK(msep_conditional(ys, zs).value ==
          doctest::Approx(base.value).epsilon(1e-9));

    ys = y;
    zs = z;
    for (double& v : ys)
        v *= 2.5;
    for (double& v : zs)
        v *= 2.5;
    CHECK(msep_conditional(ys, zs).value ==
          doctest::Approx(6.25 * base.value).epsilon(1e-9));
}

TEST_CASE("pp curve of a degenerate setup") {
    // observation always below the quantile: curve of ones
    std::vector<std::vector<double>> q = {{1.0, 2.0}, {1.0, 2.0}};
    const std::vector<double> obs = {0.0, 0.5};
    const std::vector<double> grid = {0.3, 0.7};
    const auto curve = pp_curve(q, obs, grid);
    CHECK(curve[0] == 1.0);
    CHECK(curve[1] == 1.0);
}

TEST_CASE("pp curve of a calibrated forecaster hugs the diagonal") {
    std::mt19937_64 rng(47);
    std::normal_distribution<double> g(0.0, 1.0);
    const int scenarios = 2000, m = 400;
    std::vector<double> grid;
    for (int k = 1; k <= 99; ++k)
        grid.push_back(k / 100.0);
    std::vector<std::vector<double>> q(scenarios);
    std::vector<double> obs(scenarios);
    for (int s = 0; s < scenarios; ++s) {
        std::vector<double> sample(m);
        for (double& v : sample)
            v = g(rng);
        std::sort(sample.begin(), sample.end());
        obs[s] = g(rng);
        q[s].reserve(grid.size());
        for (double p : grid)
            q[s].push_back(empirical_quantile(sample, p));
    }
    const auto curve = pp_curve(q, obs, grid);
    double dev = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        dev = std::max(dev, std::abs(curve[k] - grid[k]));
    CHECK(dev < 0.04);
}
