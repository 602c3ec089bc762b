#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "reserve/triangle.hpp"

namespace reserve {

struct EstimatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateColumn : EstimatorError {
    explicit DegenerateColumn(int j)
        : EstimatorError("degenerate column sum at j=" + std::to_string(j)),
          column(j) {}
    int column;
};

struct DegeneratePattern : EstimatorError {
    explicit DegeneratePattern(int i)
        : EstimatorError("non-positive pattern partial sum for row " +
                         std::to_string(i)),
          row(i) {}
    int row;
};

struct DegenerateDispersion : EstimatorError {
    using EstimatorError::EstimatorError;
};

struct NonPositiveFit : EstimatorError {
    NonPositiveFit(int i, int j)
        : EstimatorError("fitted value <= 0 at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")") {}
};

/// Chain-ladder development factors: p_j = 1/f_j, j = 1..n-1.
struct DevFactors {
    std::vector<double> p;
    std::vector<double> f;
};

/// Payout pattern gamma_1..gamma_n, summing to 1 by construction.
struct PayoutPattern {
    std::vector<double> gamma;
};

enum class VariancePower { ODP = 1, Gamma = 2 };
enum class ResidualAdjustment { Paper, Dof };

struct Dispersion {
    double phi;
    std::vector<double> residuals; // upper cells, row-major
    int dof;                       // n(n+1)/2 - (2n-1)
};

/// p_j = sum_{i<=n-j} C_{i,j} / sum_{i<=n-j} C_{i,j+1}.
DevFactors estimate_dev_factors(const Triangle& cumulative_upper);

/// gamma_1 = prod p_k; gamma_i = (1-p_{i-1}) prod_{k>=i} p_k; gamma_n = 1-p_{n-1}.
PayoutPattern payout_pattern(const DevFactors& d);

/// mu_i = (sum_{k<=n-i+1} X_{ik}) / (sum_{k<=n-i+1} gamma_k).
std::vector<double> row_levels(const Triangle& incremental_upper,
                               const PayoutPattern& g);

/// Pearson residuals r = (x - m) / m^(q/2) with fitted m_ij = mu_i gamma_j,
/// and phi = sum r^2 / dof.
Dispersion pearson_dispersion(const Triangle& incremental_upper,
                              const std::vector<double>& mu,
                              const PayoutPattern& g, VariancePower q);

/// Bootstrap adjustment. Dof variant (default) inflates by sqrt(N / (N - p))
/// with N upper cells and p fitted parameters; Paper variant multiplies by
/// sqrt(n / (n(n+1)/2 - 2n + 1)) with n the triangle dimension.
std::vector<double> adjust_residuals(const Dispersion& d, int n,
                                     ResidualAdjustment adj =
                                         ResidualAdjustment::Dof);

} // namespace reserve
