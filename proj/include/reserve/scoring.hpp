#pragma once

#include <span>
#include <vector>

#include "reserve/rng.hpp"

namespace reserve {

/// Empirical quantile by order statistic: index = ceil(q * M), clamped to
/// [1, M]. `sorted` must be ascending.
double empirical_quantile(std::span<const double> sorted, double q);

/// CRPS of the empirical distribution, negatively oriented:
/// CRPS = 1/2 E|X-X'| - E|X-c| over all M^2 pairs, computed in O(M log M)
/// from the sorted sample.
double crps(std::span<const double> sorted, double obs);

/// Energy score 1/2 E|X-X'|^beta - E|X-c|^beta. E|X-c|^beta is exact;
/// E|X-X'|^beta is exact over all M^2 pairs when pairs == 0, otherwise
/// estimated from `pairs` random index pairs (i != j).
double energy_score(std::span<const double> sample, double obs, double beta,
                    long pairs, Rng* rng);

/// Probability integral transform of obs under the empirical CDF. The
/// randomized variant draws uniformly in [F(obs-), F(obs)].
double pit_value(std::span<const double> sample, double obs, bool randomize,
                 Rng& rng);

struct IntervalResult {
    bool covered;
    double width;
};

/// Central interval at the given level with strict-inequality coverage.
IntervalResult coverage_and_width(std::span<const double> sorted, double obs,
                                  double level);

struct Msep {
    double value;
    double variance_part;
    double bias_part;
};

/// Conditional MSEP approximation: variance of the oracle sample z plus the
/// squared difference of means between the method sample y and z.
Msep msep_conditional(std::span<const double> y, std::span<const double> z);
Msep msep_from_moments(double y_mean, double z_mean, double z_variance);

/// P-P curve: for each grid probability p, the fraction of scenarios whose
/// observation lies strictly below the empirical p-quantile of that
/// scenario's predictive sample. quantiles[s][g] is the p_g-quantile for
/// scenario s.
std::vector<double> pp_curve(const std::vector<std::vector<double>>& quantiles,
                             std::span<const double> observations,
                             std::span<const double> grid);

} // namespace reserve
