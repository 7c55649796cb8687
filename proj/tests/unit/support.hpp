#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace testing {

// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
inline double kolmogorov_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample Kolmogorov-Smirnov p-value against a continuous CDF.
inline double ks_pvalue(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return kolmogorov_pvalue(d, x.size());
}

// Pearson chi-square p-value of observed counts against expected probabilities.
inline double chi_square_pvalue(const std::vector<double>& counts, const std::vector<double>& probs) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    double stat = 0.0;
    std::size_t cells = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = n * probs[k];
        if (e <= 0.0) continue;
        stat += (counts[k] - e) * (counts[k] - e) / e;
        ++cells;
    }
    boost::math::chi_squared dist(static_cast<double>(cells - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

inline double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

inline double variance(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 2000) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace testing
