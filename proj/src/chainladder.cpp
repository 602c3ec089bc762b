#include "reserve/chainladder.hpp"

#include <cmath>

namespace reserve {

DevFactors estimate_dev_factors(const Triangle& t) {
    if (t.flavor() != Flavor::Cumulative)
        throw EstimatorError("dev factors need a cumulative triangle");
    const int n = t.n();
    DevFactors d;
    d.p.resize(n - 1);
    d.f.resize(n - 1);
    for (int j = 1; j <= n - 1; ++j) {
        double num = 0.0, den = 0.0;
        for (int i = 1; i <= n - j; ++i) {
            num += t.at(i, j);
            den += t.at(i, j + 1);
        }
        if (num <= 0.0 || den <= 0.0)
            throw DegenerateColumn(j);
        d.p[j - 1] = num / den;
        d.f[j - 1] = den / num;
    }
    return d;
}

PayoutPattern payout_pattern(const DevFactors& d) {
    const int n = static_cast<int>(d.p.size()) + 1;
    PayoutPattern g;
    g.gamma.resize(n);
    // tail[i] = prod_{k=i..n-1} p_k, 1-based over factor index
    double tail = 1.0;
    std::vector<double> tails(n + 1, 1.0);
    for (int k = n - 1; k >= 1; --k) {
        tail *= d.p[k - 1];
        tails[k] = tail;
    }
    g.gamma[0] = tails[1];
    for (int i = 2; i <= n - 1; ++i)
        g.gamma[i - 1] = (1.0 - d.p[i - 2]) * tails[i];
    g.gamma[n - 1] = 1.0 - d.p[n - 2];
    return g;
}

std::vector<double> row_levels(const Triangle& t, const PayoutPattern& g) {
    if (t.flavor() != Flavor::Incremental)
        throw EstimatorError("row levels need an incremental triangle");
    const int n = t.n();
    std::vector<double> mu(n);
    double gsum = 0.0;
    std::vector<double> partial(n);
    for (int k = 1; k <= n; ++k) {
        gsum += g.gamma[k - 1];
        partial[k - 1] = gsum;
    }
    for (int i = 1; i <= n; ++i) {
        const int cols = n - i + 1;
        double xsum = 0.0;
        for (int k = 1; k <= cols; ++k)
            xsum += t.at(i, k);
        if (partial[cols - 1] <= 0.0)
            throw DegeneratePattern(i);
        mu[i - 1] = xsum / partial[cols - 1];
    }
    return mu;
}

Dispersion pearson_dispersion(const Triangle& t, const std::vector<double>& mu,
                              const PayoutPattern& g, VariancePower q) {
    if (t.flavor() != Flavor::Incremental)
        throw EstimatorError("dispersion needs an incremental triangle");
    const int n = t.n();
    const int dof = n * (n + 1) / 2 - (2 * n - 1);
    if (dof < 1)
        throw DegenerateDispersion("no degrees of freedom for n=" +
                                   std::to_string(n));
    Dispersion d;
    d.dof = dof;
    double ss = 0.0;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n - i + 1; ++j) {
            const double m = mu[i - 1] * g.gamma[j - 1];
            if (m <= 0.0)
                throw NonPositiveFit(i, j);
            const double denom = q == VariancePower::ODP ? std::sqrt(m) : m;
            const double r = (t.at(i, j) - m) / denom;
            d.residuals.push_back(r);
            ss += r * r;
        }
    }
    d.phi = ss / dof;
    return d;
}

std::vector<double> adjust_residuals(const Dispersion& d, int n,
                                     ResidualAdjustment adj) {
    const int N = n * (n + 1) / 2;
    const int p = 2 * n - 1;
    double factor;
    if (adj == ResidualAdjustment::Paper)
        factor = std::sqrt(static_cast<double>(n) / (N - p));
    else
        factor = std::sqrt(static_cast<double>(N) / (N - p));
    std::vector<double> out(d.residuals);
    for (double& r : out)
        r *= factor;
    return out;
}

} // namespace reserve
