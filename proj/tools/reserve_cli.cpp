#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reserve/actuary.hpp"
#include "reserve/harness.hpp"
#include "reserve/models.hpp"
#include "reserve/triangle.hpp"

namespace {

using namespace reserve;

int threads_default() {
    if (const char* env = std::getenv("RESERVE_BENCH_THREADS"))
        return std::atoi(env);
    return 0;
}

Triangle load_triangle(const std::string& path, const std::string& flavor,
                       bool skip_header) {
    std::ifstream in(path);
    if (!in)
        throw TriangleError("cannot open triangle file " + path);
    const Flavor f = flavor == "cumulative" ? Flavor::Cumulative
                                            : Flavor::Incremental;
    return parse_csv(in, f, skip_header);
}

void print_study_table(const StudyReport& r) {
    std::cout << "method            mean_crps   mean_energy   msep_mean     "
                 "msep_median   failures\n";
    for (const auto& mr : r.methods) {
        std::ostringstream line;
        line.precision(6);
        line << to_string(mr.method);
        for (std::size_t pad = line.str().size(); pad < 18; ++pad)
            line << ' ';
        line << mr.mean_crps << "  " << mr.mean_energy << "  " << mr.msep_mean
             << "  " << mr.msep_median << "  " << mr.failures;
        std::cout << line.str() << '\n';
    }
    std::cout << "coverage (level: pct / width):\n";
    for (const auto& mr : r.methods) {
        std::cout << "  " << to_string(mr.method) << ':';
        for (std::size_t l = 0; l < r.intervals.size(); ++l)
            std::cout << "  " << r.intervals[l] << ": "
                      << mr.coverage_pct[l] << "% / " << mr.avg_width[l];
        std::cout << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Stochastic claims-reserving method comparison"};
    app.require_subcommand(1);

    // study run
    auto* study = app.add_subcommand("study", "Monte Carlo study");
    study->require_subcommand(1);
    auto* study_run = study->add_subcommand("run", "run a study");
    std::string config_path, out_dir = "results";
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_scen, m_draws, threads_opt;
    std::optional<double> beta;
    std::vector<std::string> method_names;
    bool paper_literal = false;
    study_run->add_option("--config", config_path, "study config JSON")
        ->required();
    study_run->add_option("--out", out_dir, "output directory");
    study_run->add_option("--preset", preset, "paper (N=2000,M=5000) or desk "
                                              "(N=200,M=1000)")
        ->check(CLI::IsMember({"paper", "desk"}));
    study_run->add_option("--seed", seed, "master seed override");
    study_run->add_option("--scenarios", n_scen, "override N");
    study_run->add_option("--draws", m_draws, "override M");
    study_run->add_option("--methods", method_names, "method subset")
        ->delimiter(',');
    study_run->add_option("--beta", beta, "energy score beta");
    study_run->add_option("--threads", threads_opt, "worker cap");
    study_run->add_flag("--paper-literal", paper_literal,
                        "use the paper-verbatim residual adjustment and "
                        "unifnorm variance");

    // study report
    auto* study_report = study->add_subcommand("report",
                                               "print a stored summary");
    std::string summary_path;
    study_report->add_option("--summary", summary_path, "summary.json path")
        ->required();

    // examples run
    auto* examples = app.add_subcommand("examples", "single-year examples");
    auto* examples_run = examples->add_subcommand("run", "run an example");
    std::string setting = "ex1";
    int sims = 10000, draws = 1000;
    std::uint64_t ex_seed = 1;
    std::string ex_out;
    examples_run->add_option("--setting", setting, "ex1 or ex2")
        ->check(CLI::IsMember({"ex1", "ex2"}));
    examples_run->add_option("--sims", sims, "number of simulated years");
    examples_run->add_option("--draws", draws, "predictive sample size");
    examples_run->add_option("--seed", ex_seed, "seed");
    examples_run->add_option("--out", ex_out, "write CSV here instead of "
                                              "stdout");

    // triangle utilities
    auto* triangle = app.add_subcommand("triangle", "triangle utilities");
    triangle->require_subcommand(1);
    std::string tri_path, tri_flavor = "incremental", model_name = "gamma";
    bool skip_header = false, tri_full = false;
    auto* tri_validate = triangle->add_subcommand("validate",
                                                  "parse and check a CSV "
                                                  "triangle");
    tri_validate->add_option("--triangle", tri_path, "CSV file")->required();
    tri_validate->add_option("--flavor", tri_flavor, "incremental or "
                                                     "cumulative")
        ->check(CLI::IsMember({"incremental", "cumulative"}));
    tri_validate->add_flag("--skip-header", skip_header);
    tri_validate->add_flag("--full", tri_full, "require a full square");

    auto* tri_fit = triangle->add_subcommand("fit", "fit a model and print "
                                                    "its parameters as JSON");
    tri_fit->add_option("--triangle", tri_path, "CSV file")->required();
    tri_fit->add_option("--model", model_name, "model kind");
    tri_fit->add_option("--flavor", tri_flavor, "incremental or cumulative")
        ->check(CLI::IsMember({"incremental", "cumulative"}));
    tri_fit->add_flag("--skip-header", skip_header);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (*study_run) {
            StudyConfig cfg = StudyConfig::from_json_file(config_path);
            if (preset == "desk") {
                cfg.n_scenarios = 200;
                cfg.m_draws = 1000;
            } else if (preset == "paper") {
                cfg.n_scenarios = 2000;
                cfg.m_draws = 5000;
            }
            if (n_scen) cfg.n_scenarios = *n_scen;
            if (m_draws) cfg.m_draws = *m_draws;
            if (seed) cfg.master_seed = *seed;
            if (beta) cfg.energy_beta = *beta;
            if (!method_names.empty()) {
                cfg.methods.clear();
                for (const auto& m : method_names)
                    cfg.methods.push_back(method_from_string(m));
            }
            cfg.threads = threads_opt ? *threads_opt : threads_default();
            if (paper_literal) {
                cfg.residual_adjustment = ResidualAdjustment::Paper;
                cfg.unifnorm_literal_variance = true;
            }
            const StudyReport rep = run_study(cfg);
            emit_report(rep, out_dir);
            print_study_table(rep);
            return 0;
        }
        if (*study_report) {
            std::ifstream in(summary_path);
            if (!in) {
                std::cerr << "error[io]: cannot open " << summary_path
                          << '\n';
                return 2;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            print_study_table(StudyReport::from_json(buf.str()));
            return 0;
        }
        if (*examples_run) {
            const auto s = setting == "ex1" ? ExampleSetting::LogNormalEx1
                                            : ExampleSetting::PoissonEx2;
            const auto rep =
                run_example(s, sims, draws, ex_seed, 20, threads_default());
            const std::string csv = example_csv(rep);
            if (ex_out.empty()) {
                std::cout << csv;
            } else {
                std::filesystem::create_directories(
                    std::filesystem::path(ex_out).parent_path().empty()
                        ? "."
                        : std::filesystem::path(ex_out).parent_path());
                std::ofstream out(ex_out);
                out << csv;
            }
            return 0;
        }
        if (*tri_validate) {
            const Triangle t = load_triangle(tri_path, tri_flavor,
                                             skip_header);
            if (tri_full && t.mask() != Mask::Full) {
                std::cerr << "error[shape]: expected a full square\n";
                return 2;
            }
            std::cout << "ok: n=" << t.n() << ", mask="
                      << (t.mask() == Mask::Full ? "full" : "upper") << '\n';
            return 0;
        }
        if (*tri_fit) {
            Triangle t = load_triangle(tri_path, tri_flavor, skip_header);
            if (t.mask() == Mask::Full)
                t = t.masked_upper();
            const ModelParams p =
                fit(model_kind_from_string(model_name), t);
            std::cout << p.to_json() << '\n';
            return 0;
        }
    } catch (const StudyError& e) {
        std::cerr << "error[study]: " << e.what() << '\n';
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error[parse]: " << e.what() << '\n';
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "error[shape]: " << e.what() << '\n';
        return 2;
    } catch (const TriangleError& e) {
        std::cerr << "error[data]: " << e.what() << '\n';
        return 2;
    } catch (const EstimatorError& e) {
        std::cerr << "error[estimator]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error[config]: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
