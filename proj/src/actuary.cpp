#include "reserve/actuary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "reserve/models.hpp"
#include "reserve/rng.hpp"
#include "reserve/scoring.hpp"

namespace reserve {

namespace {

constexpr double kGammaShape = 1.5; // latent lambda ~ Gamma(1.5, 0.5)
constexpr double kGammaScale = 0.5;
constexpr double kExposure = 1000.0; // x in the Poisson example

} // namespace

std::string to_string(ActuaryKind k) {
    switch (k) {
    case ActuaryKind::Ideal: return "ideal";
    case ActuaryKind::LongTerm: return "long-term";
    case ActuaryKind::Ordinary: return "ordinary";
    case ActuaryKind::Intern: return "intern";
    }
    return "?";
}

std::string to_string(ExampleSetting s) {
    return s == ExampleSetting::LogNormalEx1 ? "ex1" : "ex2";
}

MsepReference analytic_msep(ExampleSetting setting, ActuaryKind kind) {
    if (setting == ExampleSetting::PoissonEx2) {
        const double x = kExposure, a = kGammaShape, b = kGammaScale;
        switch (kind) {
        case ActuaryKind::Ideal:
        case ActuaryKind::Intern:
            return {x * a * b, true};
        case ActuaryKind::LongTerm:
            return {x * a * b * (1.0 + x * b), true};
        case ActuaryKind::Ordinary:
            return {x * a * b * (1.0 + x * (1.0 + a) * b / 400.0), true};
        }
    }
    // log-normal example: empirical reference values, no closed form
    switch (kind) {
    case ActuaryKind::Ideal: return {34.5, false};
    case ActuaryKind::LongTerm: return {47.2, false};
    case ActuaryKind::Ordinary: return {37.2, false};
    case ActuaryKind::Intern: return {34.5, false};
    }
    throw std::invalid_argument("unsupported setting/actuary combination");
}

namespace {

struct SimRecord {
    std::array<double, 4> crps;
    std::array<double, 4> msep;
    std::array<double, 4> pit;
    std::array<bool, 4> cov66, cov90;
    std::array<double, 4> w66, w90;
};

std::vector<double> draw_predictive_ex1(ActuaryKind kind, double mu,
                                        double delta, int m, Rng& rng) {
    std::vector<double> out(m);
    switch (kind) {
    case ActuaryKind::Ideal: {
        std::lognormal_distribution<double> d(mu, 1.0);
        for (auto& v : out) v = d(rng);
        break;
    }
    case ActuaryKind::LongTerm: {
        std::lognormal_distribution<double> d(0.0, std::sqrt(2.0));
        for (auto& v : out) v = d(rng);
        break;
    }
    case ActuaryKind::Ordinary: {
        std::lognormal_distribution<double> a(mu, 1.0);
        std::lognormal_distribution<double> b(mu + delta, 1.0);
        std::bernoulli_distribution coin(0.5);
        for (auto& v : out) v = coin(rng) ? a(rng) : b(rng);
        break;
    }
    case ActuaryKind::Intern: {
        // variance solves -|mu| + s2 = mu + 1/2, so the predictive mean is
        // misspecified whenever mu != 0
        const double s2 = mu + std::abs(mu) + 0.5;
        std::lognormal_distribution<double> d(-std::abs(mu), std::sqrt(s2));
        for (auto& v : out) v = d(rng);
        break;
    }
    }
    return out;
}

std::vector<double> draw_predictive_ex2(ActuaryKind kind, double lambda,
                                        double delta, int m, Rng& rng) {
    std::vector<double> out(m);
    const double x = kExposure;
    auto poisson = [&](double mean) {
        if (mean <= 0.0)
            return 0.0;
        std::poisson_distribution<long long> d(mean);
        return static_cast<double>(d(rng));
    };
    switch (kind) {
    case ActuaryKind::Ideal:
        for (auto& v : out) v = poisson(x * lambda);
        break;
    case ActuaryKind::LongTerm: {
        const double p = 1.0 / (1.0 + x * kGammaScale);
        for (auto& v : out) v = negbinom_draw(kGammaShape, p, rng);
        break;
    }
    case ActuaryKind::Ordinary: {
        // the interval forecast hedges both signs of the estimation error,
        // even though the point estimate (see run_one) carries only one
        std::bernoulli_distribution coin(0.5);
        for (auto& v : out)
            v = poisson(coin(rng) ? x * lambda * delta
                                  : x * lambda * (2.0 - delta));
        break;
    }
    case ActuaryKind::Intern:
        for (auto& v : out) v = negbinom_draw(2.0 * x * lambda, 2.0 / 3.0, rng);
        break;
    }
    return out;
}

SimRecord run_one(ExampleSetting setting, int sim, int m_draws,
                  std::uint64_t seed) {
    const bool ex1 = setting == ExampleSetting::LogNormalEx1;
    Rng latent_rng = make_stream(seed, sim, 100);

    double latent, obs;
    if (ex1) {
        latent = std::normal_distribution<double>(0.0, 1.0)(latent_rng);
        obs = std::lognormal_distribution<double>(latent, 1.0)(latent_rng);
    } else {
        latent = std::gamma_distribution<double>(kGammaShape,
                                                 kGammaScale)(latent_rng);
        std::poisson_distribution<long long> d(kExposure * latent);
        obs = static_cast<double>(d(latent_rng));
    }

    SimRecord rec{};
    double z_mean = 0.0, z_var = 0.0;
    for (int a = 0; a < 4; ++a) {
        const auto kind = static_cast<ActuaryKind>(a);
        Rng rng = make_stream(seed, sim, a);
        double delta = 0.0;
        if (kind == ActuaryKind::Ordinary) {
            std::bernoulli_distribution sign(0.5);
            delta = ex1 ? (sign(rng) ? 1.0 : -1.0)
                        : (sign(rng) ? 1.1 : 0.9);
        }
        std::vector<double> sample =
            ex1 ? draw_predictive_ex1(kind, latent, delta, m_draws, rng)
                : draw_predictive_ex2(kind, latent, delta, m_draws, rng);

        double y_mean = 0.0;
        for (double v : sample)
            y_mean += v;
        y_mean /= sample.size();

        std::vector<double> sorted = sample;
        std::sort(sorted.begin(), sorted.end());

        if (kind == ActuaryKind::Ideal) {
            z_mean = y_mean;
            double ss = 0.0;
            for (double v : sample)
                ss += (v - y_mean) * (v - y_mean);
            z_var = ss / (sample.size() - 1);
        }

        // the count-example ordinary forecaster's point estimate averages
        // the true rate and its one realized misestimate
        double y_point = y_mean;
        if (!ex1 && kind == ActuaryKind::Ordinary)
            y_point = 0.5 * kExposure * latent * (1.0 + delta);

        rec.crps[a] = crps(sorted, obs);
        rec.msep[a] = msep_from_moments(y_point, z_mean, z_var).value;
        Rng score_rng = make_stream(seed, sim, a, 2);
        rec.pit[a] = pit_value(sorted, obs, /*randomize=*/!ex1, score_rng);
        const auto c66 = coverage_and_width(sorted, obs, 2.0 / 3.0);
        const auto c90 = coverage_and_width(sorted, obs, 0.90);
        rec.cov66[a] = c66.covered;
        rec.cov90[a] = c90.covered;
        rec.w66[a] = c66.width;
        rec.w90[a] = c90.width;
    }
    return rec;
}

} // namespace

ExampleReport run_example(ExampleSetting setting, int n_sims, int m_draws,
                          std::uint64_t seed, int pit_bins, int threads) {
    if (n_sims < 1 || m_draws < 2)
        throw std::invalid_argument("need n_sims >= 1 and m_draws >= 2");

    std::vector<SimRecord> recs(n_sims);
    if (threads == 1) {
        for (int i = 0; i < n_sims; ++i)
            recs[i] = run_one(setting, i, m_draws, seed);
    } else {
#pragma omp parallel for schedule(dynamic, 16) \
    num_threads(threads > 0 ? threads : omp_get_max_threads())
        for (int i = 0; i < n_sims; ++i)
            recs[i] = run_one(setting, i, m_draws, seed);
    }

    ExampleReport rep;
    rep.setting = setting;
    rep.n_sims = n_sims;
    rep.m_draws = m_draws;
    rep.seed = seed;
    for (int a = 0; a < 4; ++a) {
        auto& st = rep.actuaries[a];
        st.pit_hist.assign(pit_bins, 0);
        double crps_sum = 0.0, crps_sq = 0.0;
        double msep_sum = 0.0, msep_sq = 0.0;
        long n66 = 0, n90 = 0;
        double w66 = 0.0, w90 = 0.0;
        for (const auto& r : recs) {
            crps_sum += r.crps[a];
            crps_sq += r.crps[a] * r.crps[a];
            msep_sum += r.msep[a];
            msep_sq += r.msep[a] * r.msep[a];
            n66 += r.cov66[a];
            n90 += r.cov90[a];
            w66 += r.w66[a];
            w90 += r.w90[a];
            int bin = static_cast<int>(r.pit[a] * pit_bins);
            bin = std::clamp(bin, 0, pit_bins - 1);
            ++st.pit_hist[bin];
        }
        const double n = static_cast<double>(n_sims);
        st.mean_crps = crps_sum / n;
        st.msep_mean = msep_sum / n;
        if (n_sims > 1) {
            st.crps_se = std::sqrt(std::max(
                0.0, (crps_sq / n - st.mean_crps * st.mean_crps) / (n - 1)));
            st.msep_se = std::sqrt(std::max(
                0.0, (msep_sq / n - st.msep_mean * st.msep_mean) / (n - 1)));
        }
        st.coverage66 = 100.0 * n66 / n;
        st.coverage90 = 100.0 * n90 / n;
        st.width66 = w66 / n;
        st.width90 = w90 / n;
    }
    return rep;
}

std::string example_csv(const ExampleReport& r) {
    std::ostringstream out;
    out << "actuary,mean_crps,crps_se,coverage66,coverage90,width66,width90,"
           "msep_mc,msep_se,msep_reference,reference_is_analytic\n";
    for (int a = 0; a < 4; ++a) {
        const auto kind = static_cast<ActuaryKind>(a);
        const auto& st = r.actuaries[a];
        const auto ref = analytic_msep(r.setting, kind);
        out << to_string(kind) << ',' << st.mean_crps << ',' << st.crps_se
            << ',' << st.coverage66 << ',' << st.coverage90 << ','
            << st.width66 << ',' << st.width90 << ',' << st.msep_mean << ','
            << st.msep_se << ',' << ref.value << ','
            << (ref.analytic ? 1 : 0) << '\n';
    }
    return out.str();
}

} // namespace reserve
