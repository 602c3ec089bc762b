#pragma once

#include <vector>

#include "reserve/chainladder.hpp"
#include "reserve/models.hpp"
#include "reserve/rng.hpp"
#include "reserve/triangle.hpp"

namespace reserve {

/// One method's predictive draws for one scenario, plus failure accounting.
struct PredictiveSample {
    std::vector<double> values;
    int failures = 0;       // replicates dropped (degenerate refit)
    int clamp_warnings = 0; // non-positive process means forced to 0
};

struct BootstrapConfig {
    int replicates = 5000;
    VariancePower variance_power = VariancePower::ODP;
    ResidualAdjustment residual_adjustment = ResidualAdjustment::Dof;
};

/// Residual bootstrap: resample adjusted Pearson residuals, rebuild a pseudo
/// upper triangle, refit chain-ladder, and draw the lower triangle from the
/// process distribution with mean m~ and variance phi * m~^q.
PredictiveSample bootstrap_predict(const Triangle& upper,
                                   const BootstrapConfig& cfg, Target target,
                                   Rng& rng);

/// Per development column j, the observed link ratios C_{i,j+1}/C_{i,j}.
struct FactorPool {
    std::vector<std::vector<double>> pools; // pools[j-1] has n-j entries
};

FactorPool factor_pools(const Triangle& cumulative_upper);

/// Factor resampling: each simulated outcome draws one factor per
/// development column, uniformly from that column's pool and shared by every
/// open row, then resimulates each open row's full development path from its
/// first-column value.
PredictiveSample uniform_predict(const Triangle& cumulative_upper, int m,
                                 Target target, Rng& rng);

/// Normal approximation to the factor-resampling method. By default the mean
/// and variance are the exact moments of uniform_predict's full-path
/// resimulation; literal_variance switches to the diagonal-anchored closed
/// forms (mean from the diagonal extension, variance with unsquared diagonal
/// weights).
PredictiveSample unifnorm_predict(const Triangle& cumulative_upper, int m,
                                  Target target, Rng& rng,
                                  bool literal_variance = false);

} // namespace reserve
