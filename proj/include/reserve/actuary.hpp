#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace reserve {

enum class ActuaryKind { Ideal, LongTerm, Ordinary, Intern };
enum class ExampleSetting { LogNormalEx1, PoissonEx2 };

std::string to_string(ActuaryKind k);
std::string to_string(ExampleSetting s);

struct MsepReference {
    double value;
    bool analytic; // false: tabulated empirical reference, not a closed form
};

/// Closed-form MSEP for the Poisson example; tabulated reference values for
/// the log-normal example.
MsepReference analytic_msep(ExampleSetting setting, ActuaryKind kind);

struct ActuaryStats {
    double mean_crps = 0.0;
    double crps_se = 0.0;
    double coverage66 = 0.0; // percent
    double coverage90 = 0.0;
    double width66 = 0.0;
    double width90 = 0.0;
    double msep_mean = 0.0;
    double msep_se = 0.0;
    std::vector<long> pit_hist;
};

struct ExampleReport {
    ExampleSetting setting;
    int n_sims;
    int m_draws;
    std::uint64_t seed;
    std::array<ActuaryStats, 4> actuaries; // indexed by ActuaryKind
};

/// Simulate the single-year forecasting examples: draw the latent parameter
/// and the realization, build each actuary's predictive sample, and score it.
ExampleReport run_example(ExampleSetting setting, int n_sims, int m_draws,
                          std::uint64_t seed, int pit_bins = 20,
                          int threads = 0);

/// CSV rendering of the per-actuary summary table.
std::string example_csv(const ExampleReport& r);

} // namespace reserve
