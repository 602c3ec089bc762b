// Compares the serial reference path of the study loop against the
// OpenMP-parallel one and checks that both produce identical reports.

#include <chrono>
#include <iostream>

#include <omp.h>

#include "reserve/harness.hpp"

int main(int argc, char** argv) {
    using namespace reserve;

    int n_scenarios = 50;
    int m_draws = 500;
    if (argc > 1)
        n_scenarios = std::atoi(argv[1]);
    if (argc > 2)
        m_draws = std::atoi(argv[2]);

    StudyConfig cfg{gamma_case_study_generator()};
    cfg.n_scenarios = n_scenarios;
    cfg.m_draws = m_draws;
    cfg.master_seed = 7;

    auto time_run = [&](int threads) {
        cfg.threads = threads;
        const auto t0 = std::chrono::steady_clock::now();
        StudyReport r = run_study(cfg);
        const auto t1 = std::chrono::steady_clock::now();
        return std::pair{std::chrono::duration<double>(t1 - t0).count(),
                         r.canonical_json()};
    };

    std::cout << "study benchmark: N=" << n_scenarios << " M=" << m_draws
              << " (" << omp_get_max_threads() << " hardware threads)\n";
    const auto [t_serial, json_serial] = time_run(1);
    std::cout << "serial reference: " << t_serial << " s\n";
    const auto [t_parallel, json_parallel] = time_run(0);
    std::cout << "openmp parallel:  " << t_parallel << " s  (speedup "
              << t_serial / t_parallel << "x)\n";
    if (json_serial != json_parallel) {
        std::cout << "MISMATCH: serial and parallel reports differ\n";
        return 1;
    }
    std::cout << "reports identical\n";
    return 0;
}
