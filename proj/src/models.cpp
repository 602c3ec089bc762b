#include "reserve/models.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

namespace reserve {

using nlohmann::json;

std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::LogNormal: return "lognormal";
    case ModelKind::NegBinomial: return "negbinomial";
    case ModelKind::Poisson: return "poisson";
    case ModelKind::OverdispersedPoisson: return "odp";
    case ModelKind::Gamma: return "gamma";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "lognormal") return ModelKind::LogNormal;
    if (s == "negbinomial") return ModelKind::NegBinomial;
    if (s == "poisson") return ModelKind::Poisson;
    if (s == "odp") return ModelKind::OverdispersedPoisson;
    if (s == "gamma") return ModelKind::Gamma;
    throw EstimatorError("unknown model kind '" + s + "'");
}

int ModelParams::n() const {
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LogNormalParams>)
                return static_cast<int>(v.mu.size());
            else if constexpr (std::is_same_v<T, NegBinomialParams>)
                return static_cast<int>(v.pattern.gamma.size());
            else
                return static_cast<int>(v.mu_rows.size());
        },
        value_);
}

namespace {

DevFactors dev_from_pattern(const PayoutPattern& g) {
    const int n = static_cast<int>(g.gamma.size());
    DevFactors d;
    d.p.resize(n - 1);
    d.f.resize(n - 1);
    double beta = g.gamma[0];
    for (int j = 1; j <= n - 1; ++j) {
        const double next = beta + g.gamma[j];
        d.p[j - 1] = beta / next;
        d.f[j - 1] = next / beta;
        beta = next;
    }
    return d;
}

Triangle as_cumulative(const Triangle& t) {
    return t.flavor() == Flavor::Cumulative ? t : to_cumulative(t);
}

Triangle as_incremental(const Triangle& t) {
    return t.flavor() == Flavor::Incremental ? t : to_incremental(t);
}

double poisson_draw(double mean, Rng& rng) {
    if (mean <= 0.0)
        return 0.0;
    if (mean > 1e9) {
        // beyond the integer sampler's range; the normal limit is exact to
        // double precision here
        std::normal_distribution<double> approx(mean, std::sqrt(mean));
        return std::max(0.0, approx(rng));
    }
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(rng));
}

double gamma_draw(double shape, double rate, Rng& rng) {
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

/// Returns the base column to condition generation on, or nullptr when the
/// first column should be drawn from the cell law.
const std::vector<double>* validated_base_column(
    const std::vector<double>& base, int n) {
    if (base.empty())
        return nullptr;
    if (static_cast<int>(base.size()) != n)
        throw EstimatorError("base column length must match the triangle "
                             "dimension");
    for (double v : base)
        if (v < 0.0)
            throw EstimatorError("base column entries must be non-negative");
    return &base;
}

} // namespace

double negbinom_draw(double r, double p, Rng& rng) {
    if (r <= 0.0)
        throw EstimatorError("negative binomial size must be positive");
    if (p >= 1.0)
        return 0.0;
    if (p <= 0.0)
        throw EstimatorError("negative binomial probability must be in (0,1]");
    const double theta = gamma_draw(r, 1.0, rng);
    return poisson_draw(theta * (1.0 - p) / p, rng);
}

double diagonal_sum(const Triangle& t) {
    if (t.flavor() != Flavor::Cumulative)
        throw TriangleError("diagonal sum needs a cumulative triangle");
    double s = 0.0;
    for (int i = 1; i <= t.n(); ++i)
        s += t.at(i, t.n() - i + 1);
    return s;
}

ModelParams fit(ModelKind kind, const Triangle& upper) {
    if (upper.mask() != Mask::UpperOnly)
        throw EstimatorError("fit expects an upper-only triangle");
    const int n = upper.n();
    switch (kind) {
    case ModelKind::LogNormal: {
        const Triangle cum = as_cumulative(upper);
        LogNormalParams p;
        p.mu.resize(n);
        p.sigma2.assign(n, 0.0);
        for (int j = 1; j <= n; ++j) {
            std::vector<double> logs;
            for (int i = 1; i <= n - j + 1; ++i) {
                const double prev = j == 1 ? 1.0 : cum.at(i, j - 1);
                const double cur = cum.at(i, j);
                if (prev <= 0.0 || cur <= 0.0)
                    throw NonPositiveCumulative(
                        "non-positive cumulative ratio at (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
                logs.push_back(std::log(cur / prev));
            }
            const double m =
                std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
            p.mu[j - 1] = m;
            if (j <= n - 1) {
                double ss = 0.0;
                for (double l : logs)
                    ss += (l - m) * (l - m);
                p.sigma2[j - 1] = ss / (n - j);
            }
        }
        return {kind, std::move(p)};
    }
    case ModelKind::NegBinomial: {
        const Triangle cum = as_cumulative(upper);
        NegBinomialParams p;
        p.dev = estimate_dev_factors(cum);
        p.pattern = payout_pattern(p.dev);
        return {kind, std::move(p)};
    }
    case ModelKind::Poisson: {
        const Triangle cum = as_cumulative(upper);
        const Triangle inc = as_incremental(upper);
        PoissonParams p;
        p.pattern = payout_pattern(estimate_dev_factors(cum));
        p.mu_rows = row_levels(inc, p.pattern);
        return {kind, std::move(p)};
    }
    case ModelKind::OverdispersedPoisson: {
        const Triangle cum = as_cumulative(upper);
        const Triangle inc = as_incremental(upper);
        OdpParams p;
        p.pattern = payout_pattern(estimate_dev_factors(cum));
        p.mu_rows = row_levels(inc, p.pattern);
        p.phi =
            pearson_dispersion(inc, p.mu_rows, p.pattern, VariancePower::ODP)
                .phi;
        return {kind, std::move(p)};
    }
    case ModelKind::Gamma: {
        const Triangle cum = as_cumulative(upper);
        const Triangle inc = as_incremental(upper);
        GammaParams p;
        p.pattern = payout_pattern(estimate_dev_factors(cum));
        p.mu_rows = row_levels(inc, p.pattern);
        const double phi =
            pearson_dispersion(inc, p.mu_rows, p.pattern, VariancePower::Gamma)
                .phi;
        if (phi <= 0.0)
            throw EstimatorError("gamma dispersion estimate is zero");
        p.nu = 1.0 / phi;
        return {kind, std::move(p)};
    }
    }
    throw EstimatorError("unreachable model kind");
}

ScenarioTruth generate_scenario(const ModelParams& params, Rng& rng) {
    const int n = params.n();
    Triangle inc(n, Flavor::Incremental, Mask::Full);

    switch (params.kind()) {
    case ModelKind::LogNormal: {
        const auto& p = params.get<LogNormalParams>();
        for (int i = 1; i <= n; ++i) {
            double c = 1.0, prev = 0.0;
            for (int j = 1; j <= n; ++j) {
                double factor;
                if (p.sigma2[j - 1] == 0.0) {
                    factor = std::exp(p.mu[j - 1]);
                } else {
                    std::lognormal_distribution<double> dist(
                        p.mu[j - 1], std::sqrt(p.sigma2[j - 1]));
                    factor = dist(rng);
                }
                c *= factor;
                inc.set(i, j, c - prev);
                prev = c;
            }
        }
        break;
    }
    case ModelKind::NegBinomial: {
        const auto& p = params.get<NegBinomialParams>();
        if (static_cast<int>(p.base_column.size()) != n)
            throw EstimatorError(
                "negbinomial scenario generation needs a base column of "
                "length n");
        for (int i = 1; i <= n; ++i) {
            double c = p.base_column[i - 1];
            if (c <= 0.0)
                throw EstimatorError("base column entries must be positive");
            inc.set(i, 1, c);
            for (int j = 2; j <= n; ++j) {
                const double x = negbinom_draw(c, p.dev.p[j - 2], rng);
                inc.set(i, j, x);
                c += x;
            }
        }
        break;
    }
    case ModelKind::Poisson: {
        const auto& p = params.get<PoissonParams>();
        const auto* base = validated_base_column(p.base_column, n);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                if (j == 1 && base) {
                    inc.set(i, 1, (*base)[i - 1]);
                    continue;
                }
                inc.set(i, j,
                        poisson_draw(p.mu_rows[i - 1] * p.pattern.gamma[j - 1],
                                     rng));
            }
        break;
    }
    case ModelKind::OverdispersedPoisson: {
        const auto& p = params.get<OdpParams>();
        const auto* base = validated_base_column(p.base_column, n);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                if (j == 1 && base) {
                    inc.set(i, 1, (*base)[i - 1]);
                    continue;
                }
                const double m = p.mu_rows[i - 1] * p.pattern.gamma[j - 1];
                inc.set(i, j, p.phi * poisson_draw(m / p.phi, rng));
            }
        break;
    }
    case ModelKind::Gamma: {
        const auto& p = params.get<GammaParams>();
        const auto* base = validated_base_column(p.base_column, n);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) {
                if (j == 1 && base) {
                    inc.set(i, 1, (*base)[i - 1]);
                    continue;
                }
                const double m = p.mu_rows[i - 1] * p.pattern.gamma[j - 1];
                if (m <= 0.0) {
                    inc.set(i, j, 0.0);
                    continue;
                }
                inc.set(i, j, gamma_draw(p.nu, p.nu / m, rng));
            }
        break;
    }
    }

    Triangle full = to_cumulative(inc);
    double next_year = 0.0;
    for (int i = 2; i <= n; ++i)
        next_year += inc.at(i, n - i + 2);
    return ScenarioTruth{full, full.masked_upper(), ultimate(full).value,
                         next_year};
}

double simulate_statistic(const ModelParams& params, const Triangle& upper,
                          Target target, Rng& rng) {
    if (upper.mask() != Mask::UpperOnly)
        throw EstimatorError("predictive simulation conditions on an "
                             "upper-only triangle");
    const Triangle cum = as_cumulative(upper);
    const int n = cum.n();
    if (params.n() != n)
        throw EstimatorError("parameter dimension does not match triangle");

    switch (params.kind()) {
    case ModelKind::LogNormal: {
        const auto& p = params.get<LogNormalParams>();
        double total = 0.0;
        for (int i = 1; i <= n; ++i) {
            double c = cum.at(i, n - i + 1);
            double first_step = 0.0;
            for (int j = n - i + 2; j <= n; ++j) {
                const double before = c;
                if (p.sigma2[j - 1] == 0.0) {
                    c *= std::exp(p.mu[j - 1]);
                } else {
                    std::lognormal_distribution<double> dist(
                        p.mu[j - 1], std::sqrt(p.sigma2[j - 1]));
                    c *= dist(rng);
                }
                if (j == n - i + 2)
                    first_step = c - before;
            }
            total += target == Target::UltimateClaim ? c : first_step;
        }
        return total;
    }
    case ModelKind::NegBinomial: {
        const auto& p = params.get<NegBinomialParams>();
        double lower = 0.0, next_year = 0.0;
        for (int i = 2; i <= n; ++i) {
            double c = cum.at(i, n - i + 1);
            for (int j = n - i + 2; j <= n; ++j) {
                const double x = negbinom_draw(c, p.dev.p[j - 2], rng);
                if (j == n - i + 2)
                    next_year += x;
                lower += x;
                c += x;
            }
        }
        return target == Target::UltimateClaim ? diagonal_sum(cum) + lower
                                               : next_year;
    }
    case ModelKind::Poisson: {
        const auto& p = params.get<PoissonParams>();
        double rate = 0.0;
        for (int i = 2; i <= n; ++i) {
            const int j_hi = target == Target::UltimateClaim ? n : n - i + 2;
            for (int j = n - i + 2; j <= j_hi; ++j)
                rate += p.mu_rows[i - 1] * p.pattern.gamma[j - 1];
        }
        const double y = poisson_draw(rate, rng);
        return target == Target::UltimateClaim ? diagonal_sum(cum) + y : y;
    }
    case ModelKind::OverdispersedPoisson: {
        const auto& p = params.get<OdpParams>();
        double rate = 0.0;
        for (int i = 2; i <= n; ++i) {
            const int j_hi = target == Target::UltimateClaim ? n : n - i + 2;
            for (int j = n - i + 2; j <= j_hi; ++j)
                rate += p.mu_rows[i - 1] * p.pattern.gamma[j - 1];
        }
        const double y = p.phi * poisson_draw(rate / p.phi, rng);
        return target == Target::UltimateClaim ? diagonal_sum(cum) + y : y;
    }
    case ModelKind::Gamma: {
        const auto& p = params.get<GammaParams>();
        double lower = 0.0;
        for (int i = 2; i <= n; ++i) {
            const int j_hi = target == Target::UltimateClaim ? n : n - i + 2;
            for (int j = n - i + 2; j <= j_hi; ++j) {
                const double m = p.mu_rows[i - 1] * p.pattern.gamma[j - 1];
                if (m > 0.0)
                    lower += gamma_draw(p.nu, p.nu / m, rng);
            }
        }
        return target == Target::UltimateClaim ? diagonal_sum(cum) + lower
                                               : lower;
    }
    }
    throw EstimatorError("unreachable model kind");
}

std::string ModelParams::to_json() const {
    json j;
    j["model"] = to_string(kind_);
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LogNormalParams>) {
                j["mu"] = v.mu;
                j["sigma2"] = v.sigma2;
            } else if constexpr (std::is_same_v<T, NegBinomialParams>) {
                j["gamma"] = v.pattern.gamma;
                if (!v.base_column.empty())
                    j["base_column"] = v.base_column;
            } else if constexpr (std::is_same_v<T, PoissonParams>) {
                j["mu"] = v.mu_rows;
                j["gamma"] = v.pattern.gamma;
                if (!v.base_column.empty())
                    j["base_column"] = v.base_column;
            } else if constexpr (std::is_same_v<T, OdpParams>) {
                j["mu"] = v.mu_rows;
                j["gamma"] = v.pattern.gamma;
                j["phi"] = v.phi;
                if (!v.base_column.empty())
                    j["base_column"] = v.base_column;
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                j["mu"] = v.mu_rows;
                j["gamma"] = v.pattern.gamma;
                j["nu"] = v.nu;
                if (!v.base_column.empty())
                    j["base_column"] = v.base_column;
            }
        },
        value_);
    return j.dump(2);
}

ModelParams ModelParams::from_json(const std::string& text) {
    const json j = json::parse(text);
    const ModelKind kind = model_kind_from_string(j.at("model"));
    switch (kind) {
    case ModelKind::LogNormal: {
        LogNormalParams p;
        p.mu = j.at("mu").get<std::vector<double>>();
        p.sigma2 = j.at("sigma2").get<std::vector<double>>();
        return {kind, std::move(p)};
    }
    case ModelKind::NegBinomial: {
        NegBinomialParams p;
        p.pattern.gamma = j.at("gamma").get<std::vector<double>>();
        p.dev = dev_from_pattern(p.pattern);
        if (j.contains("base_column"))
            p.base_column = j.at("base_column").get<std::vector<double>>();
        return {kind, std::move(p)};
    }
    case ModelKind::Poisson: {
        PoissonParams p;
        p.mu_rows = j.at("mu").get<std::vector<double>>();
        p.pattern.gamma = j.at("gamma").get<std::vector<double>>();
        if (j.contains("base_column"))
            p.base_column = j.at("base_column").get<std::vector<double>>();
        return {kind, std::move(p)};
    }
    case ModelKind::OverdispersedPoisson: {
        OdpParams p;
        p.mu_rows = j.at("mu").get<std::vector<double>>();
        p.pattern.gamma = j.at("gamma").get<std::vector<double>>();
        p.phi = j.at("phi").get<double>();
        if (j.contains("base_column"))
            p.base_column = j.at("base_column").get<std::vector<double>>();
        return {kind, std::move(p)};
    }
    case ModelKind::Gamma: {
        GammaParams p;
        p.mu_rows = j.at("mu").get<std::vector<double>>();
        p.pattern.gamma = j.at("gamma").get<std::vector<double>>();
        p.nu = j.at("nu").get<double>();
        if (j.contains("base_column"))
            p.base_column = j.at("base_column").get<std::vector<double>>();
        return {kind, std::move(p)};
    }
    }
    throw EstimatorError("unreachable model kind");
}

} // namespace reserve
