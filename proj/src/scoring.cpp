#include "reserve/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reserve {

double empirical_quantile(std::span<const double> sorted, double q) {
    const long m = static_cast<long>(sorted.size());
    if (m == 0)
        throw std::invalid_argument("empty sample");
    long idx = static_cast<long>(std::ceil(q * m));
    idx = std::clamp(idx, 1L, m);
    return sorted[idx - 1];
}

double crps(std::span<const double> sorted, double obs) {
    const long m = static_cast<long>(sorted.size());
    if (m < 2)
        throw std::invalid_argument("CRPS needs at least 2 sample values");
    // sum_{i,j} |x_i - x_j| = 2 * sum_i (2i - m - 1) x_(i), i 1-based
    double pair_sum = 0.0;
    double abs_sum = 0.0;
    for (long i = 1; i <= m; ++i) {
        pair_sum += (2.0 * i - m - 1) * sorted[i - 1];
        abs_sum += std::abs(sorted[i - 1] - obs);
    }
    const double e_pair = 2.0 * pair_sum / (static_cast<double>(m) * m);
    return 0.5 * e_pair - abs_sum / m;
}

namespace {

double pow_beta(double x, double beta) {
    if (beta == 1.0)
        return x;
    if (beta == 0.5)
        return std::sqrt(x);
    return std::pow(x, beta);
}

} // namespace

double energy_score(std::span<const double> sample, double obs, double beta,
                    long pairs, Rng* rng) {
    const long m = static_cast<long>(sample.size());
    if (m < 2)
        throw std::invalid_argument("energy score needs at least 2 values");
    if (beta <= 0.0 || beta >= 2.0)
        throw std::invalid_argument("beta must lie in (0,2)");

    double obs_term = 0.0;
    for (double x : sample)
        obs_term += pow_beta(std::abs(x - obs), beta);
    obs_term /= m;

    double pair_term = 0.0;
    if (pairs == 0) {
        // exhaustive over all m^2 ordered pairs (diagonal contributes 0)
        double acc = 0.0;
        for (long i = 0; i < m; ++i)
            for (long j = i + 1; j < m; ++j)
                acc += pow_beta(std::abs(sample[i] - sample[j]), beta);
        pair_term = 2.0 * acc / (static_cast<double>(m) * m);
    } else {
        if (rng == nullptr)
            throw std::invalid_argument("subsampled energy score needs an rng");
        std::uniform_int_distribution<long> pick(0, m - 1);
        double acc = 0.0;
        for (long k = 0; k < pairs; ++k) {
            long i = pick(*rng);
            long j = pick(*rng);
            while (j == i)
                j = pick(*rng);
            acc += pow_beta(std::abs(sample[i] - sample[j]), beta);
        }
        // rescale i != j estimate to the all-pairs mean
        pair_term = (acc / pairs) * (m - 1.0) / m;
    }
    return 0.5 * pair_term - obs_term;
}

double pit_value(std::span<const double> sample, double obs, bool randomize,
                 Rng& rng) {
    const double m = static_cast<double>(sample.size());
    long below = 0, at_or_below = 0;
    for (double x : sample) {
        if (x < obs)
            ++below;
        if (x <= obs)
            ++at_or_below;
    }
    const double hi = at_or_below / m;
    if (!randomize)
        return hi;
    const double lo = below / m;
    if (lo == hi)
        return hi;
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
}

IntervalResult coverage_and_width(std::span<const double> sorted, double obs,
                                  double level) {
    const double lower = empirical_quantile(sorted, (1.0 - level) / 2.0);
    const double upper = empirical_quantile(sorted, (1.0 + level) / 2.0);
    return IntervalResult{lower < obs && obs < upper, upper - lower};
}

Msep msep_conditional(std::span<const double> y, std::span<const double> z) {
    const long m = static_cast<long>(z.size());
    if (m < 2 || y.size() < 2)
        throw std::invalid_argument("MSEP needs at least 2 values per sample");
    double y_mean = 0.0, z_mean = 0.0;
    for (double v : y)
        y_mean += v;
    y_mean /= static_cast<double>(y.size());
    for (double v : z)
        z_mean += v;
    z_mean /= m;
    double ss = 0.0;
    for (double v : z)
        ss += (v - z_mean) * (v - z_mean);
    return msep_from_moments(y_mean, z_mean, ss / (m - 1));
}

Msep msep_from_moments(double y_mean, double z_mean, double z_variance) {
    const double bias = (y_mean - z_mean) * (y_mean - z_mean);
    return Msep{z_variance + bias, z_variance, bias};
}

std::vector<double> pp_curve(const std::vector<std::vector<double>>& quantiles,
                             std::span<const double> observations,
                             std::span<const double> grid) {
    const std::size_t n = observations.size();
    if (quantiles.size() != n)
        throw std::invalid_argument("quantile rows must match observations");
    std::vector<double> curve(grid.size(), 0.0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t g = 0; g < grid.size(); ++g)
            if (observations[s] < quantiles[s][g])
                curve[g] += 1.0;
    for (double& c : curve)
        c /= static_cast<double>(n);
    return curve;
}

} // namespace reserve
