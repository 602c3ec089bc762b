#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reserve/chainladder.hpp"
#include "reserve/models.hpp"

namespace reserve {

enum class Method {
    LogNormal,
    NegBinomial,
    Poisson,
    OverdispersedPoisson,
    Gamma,
    Uniform,
    Unifnorm,
    BootstrapGamma,
    BootstrapODP,
    Ideal,
};

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();

enum class PitTies { Auto, Randomized, NonRandomized };

struct StudyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StudyConfig {
    ModelParams generator;
    int n_scenarios = 2000;
    int m_draws = 5000;
    std::vector<Method> methods = all_methods();
    double energy_beta = 0.5;
    std::vector<double> intervals = {0.6667, 0.90};
    int pit_bins = 20;
    std::uint64_t master_seed = 0;
    Target target = Target::UltimateClaim;
    ResidualAdjustment residual_adjustment = ResidualAdjustment::Dof;
    bool unifnorm_literal_variance = false;
    PitTies pit_ties = PitTies::Auto;
    long energy_pairs = -1; // -1: exhaustive when M <= 2000, else 10*M
    int threads = 0;        // 0: OpenMP default; 1: serial reference path
    double max_failure_fraction = 0.5;

    std::string to_json() const;
    static StudyConfig from_json(const std::string& text);
    static StudyConfig from_json_file(const std::filesystem::path& path);
};

struct MethodReport {
    Method method;
    int n_scored = 0;
    int failures = 0;          // scenarios where the method could not run
    long replicate_failures = 0;
    long clamp_warnings = 0;
    double mean_crps = 0.0;
    double crps_se = 0.0;
    double mean_energy = 0.0;
    double msep_mean = 0.0;
    double msep_median = 0.0;
    std::vector<double> coverage_pct; // per interval level
    std::vector<double> avg_width;
    std::vector<long> pit_hist;
    std::vector<double> pp; // per grid point

    // per-scenario values (NaN where the method failed)
    std::vector<double> crps_values;
    std::vector<double> energy_values;
    std::vector<double> msep_values;
    std::vector<double> msep_variance;
    std::vector<double> msep_bias;
    std::vector<double> pit_values;
};

struct StudyReport {
    std::uint64_t seed = 0;
    int n_scenarios = 0;
    int m_draws = 0;
    Target target = Target::UltimateClaim;
    double energy_beta = 0.5;
    std::vector<double> intervals;
    int pit_bins = 20;
    std::vector<double> pp_grid;
    double wall_seconds = 0.0;
    std::vector<MethodReport> methods;

    const MethodReport& find(Method m) const;

    /// Full JSON including wall time (summary.json content).
    std::string to_json() const;
    /// Deterministic JSON without wall time, for reproducibility checks.
    std::string canonical_json() const;
    static StudyReport from_json(const std::string& text);
};

/// The three-step Monte Carlo study: generate scenarios from the ground-truth
/// generator, build every method's predictive sample per scenario, and score.
StudyReport run_study(const StudyConfig& cfg);

/// Writes summary.json, scores.csv, pit.csv, ppcurve.csv, coverage.csv.
void emit_report(const StudyReport& r, const std::filesystem::path& dir);

/// Ground-truth Gamma generator for the case study (n = 10).
ModelParams gamma_case_study_generator();

} // namespace reserve
