#pragma once

#include <string>
#include <variant>
#include <vector>

#include "reserve/chainladder.hpp"
#include "reserve/rng.hpp"
#include "reserve/triangle.hpp"

namespace reserve {

enum class ModelKind {
    LogNormal,
    NegBinomial,
    Poisson,
    OverdispersedPoisson,
    Gamma,
};

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct NonPositiveCumulative : EstimatorError {
    using EstimatorError::EstimatorError;
};

/// Development factors C_{i,j}/C_{i,j-1} are LN(mu_j, sigma2_j), C_{i,0} = 1.
struct LogNormalParams {
    std::vector<double> mu;     // length n
    std::vector<double> sigma2; // length n, sigma2[n-1] == 0
};

/// X_{i,j} | C_{i,j-1} ~ NegBinom(C_{i,j-1}, p_{j-1}). Scenario generation
/// conditions on a fixed first column, supplied via base_column.
struct NegBinomialParams {
    PayoutPattern pattern;
    DevFactors dev;
    std::vector<double> base_column; // may be empty for predictive-only use
};

/// For the cross-classified models an optional base_column pins the first
/// development column during scenario generation (the same conditioning the
/// negative binomial model uses); when empty, the first column is drawn from
/// the cell law like every other column.
struct PoissonParams {
    std::vector<double> mu_rows;
    PayoutPattern pattern;
    std::vector<double> base_column; // optional fixed first column
};

struct OdpParams {
    std::vector<double> mu_rows;
    PayoutPattern pattern;
    double phi;
    std::vector<double> base_column; // optional fixed first column
};

struct GammaParams {
    std::vector<double> mu_rows;
    PayoutPattern pattern;
    double nu;
    std::vector<double> base_column; // optional fixed first column
};

class ModelParams {
public:
    using Value = std::variant<LogNormalParams, NegBinomialParams,
                               PoissonParams, OdpParams, GammaParams>;

    ModelParams(ModelKind kind, Value value)
        : kind_(kind), value_(std::move(value)) {}

    ModelKind kind() const { return kind_; }
    int n() const;

    template <class T> const T& get() const { return std::get<T>(value_); }
    template <class T> T& get() { return std::get<T>(value_); }

    std::string to_json() const;
    static ModelParams from_json(const std::string& text);

private:
    ModelKind kind_;
    Value value_;
};

/// What the simulated statistic sums: the full ultimate claim, or only the
/// next calendar-year payments (the next diagonal of increments).
enum class Target { UltimateClaim, NextYearPayments };

struct ScenarioTruth {
    Triangle full_square;   // cumulative, Full
    Triangle upper;         // cumulative, UpperOnly
    double true_uc;
    double true_next_year;  // sum of next-diagonal increments
};

/// Estimate model parameters from an upper triangle (either flavor).
ModelParams fit(ModelKind kind, const Triangle& upper);

/// Draw a full development square from known parameters.
ScenarioTruth generate_scenario(const ModelParams& params, Rng& rng);

/// One draw from the predictive distribution of the target statistic,
/// conditional on the observed cumulative upper triangle.
double simulate_statistic(const ModelParams& params, const Triangle& upper,
                          Target target, Rng& rng);

inline double simulate_ultimate(const ModelParams& params,
                                const Triangle& upper, Rng& rng) {
    return simulate_statistic(params, upper, Target::UltimateClaim, rng);
}

/// Gamma-Poisson mixture draw of NegBinom(r, p) for real-valued r > 0.
double negbinom_draw(double r, double p, Rng& rng);

double diagonal_sum(const Triangle& cumulative_upper);

} // namespace reserve
