#include "ldpd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ldpd/distributions.hpp"
#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& x, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += x[i];
    return s / static_cast<double>(end - begin);
}

double var_of(const std::vector<double>& x, std::size_t begin, std::size_t end, double m) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += (x[i] - m) * (x[i] - m);
    return s / static_cast<double>(end - begin - 1);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double effective_sample_size(const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    if (n < 4) return kNaN;
    const double m = mean_of(trace, 0, n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = trace[i] - m;
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
        return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return kNaN;
    double sum = 0.0;
    double previous = kInf;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
        if (pair <= 0.0) break;
        pair = std::min(pair, previous);
        previous = pair;
        sum += pair;
    }
    const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(static_cast<double>(n)));
    return static_cast<double>(n) / tau;
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    double total = 0.0;
    for (const auto& c : chains) total += effective_sample_size(c);
    return total;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) return kNaN;
    std::size_t len = chains.front().size();
    for (const auto& c : chains) len = std::min(len, c.size());
    const std::size_t half = len / 2;
    if (half < 2) return kNaN;
    std::vector<double> means;
    std::vector<double> vars;
    for (const auto& c : chains) {
        for (std::size_t h = 0; h < 2; ++h) {
            const std::size_t begin = h * half;
            const double m = mean_of(c, begin, begin + half);
            means.push_back(m);
            vars.push_back(var_of(c, begin, begin + half, m));
        }
    }
    const auto k = static_cast<double>(means.size());
    const auto n = static_cast<double>(half);
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / k;
    double between = 0.0;
    for (double m : means) between += (m - grand) * (m - grand);
    between *= n / (k - 1.0);
    const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / k;
    if (!(within > 0.0)) return kNaN;
    const double pooled = (n - 1.0) / n * within + between / n;
    return std::sqrt(pooled / within);
}

double batch_means_se(const std::vector<double>& trace, std::size_t batches) {
    if (batches < 2 || trace.size() < 2 * batches) throw DomainError("batch_means_se: trace too short");
    const std::size_t size = trace.size() / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) means[b] = mean_of(trace, b * size, (b + 1) * size);
    const double m = mean_of(means, 0, batches);
    return std::sqrt(var_of(means, 0, batches, m) / static_cast<double>(batches));
}

MannKendallResult mann_kendall(const std::vector<double>& series) {
    const std::size_t n = series.size();
    MannKendallResult r;
    if (n < 3) return r;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s += (series[j] > series[i]) - (series[j] < series[i]);
    std::map<double, std::size_t> ties;
    for (double x : series) ++ties[x];
    const auto nd = static_cast<double>(n);
    double var = nd * (nd - 1.0) * (2.0 * nd + 5.0);
    for (const auto& [value, count] : ties) {
        const auto t = static_cast<double>(count);
        if (count > 1) var -= t * (t - 1.0) * (2.0 * t + 5.0);
    }
    var /= 18.0;
    r.statistic = s;
    if (!(var > 0.0)) return r;
    r.z = s > 0.0 ? (s - 1.0) / std::sqrt(var) : (s < 0.0 ? (s + 1.0) / std::sqrt(var) : 0.0);
    r.p_value = 2.0 * normal_sf(std::abs(r.z));
    return r;
}

TraceSummary summarize_trace(const std::string& name, const std::vector<std::vector<double>>& chains) {
    TraceSummary s;
    s.name = name;
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    if (all.empty()) throw DomainError("summarize_trace: no draws");
    s.mean = mean_of(all, 0, all.size());
    s.sd = all.size() > 1 ? std::sqrt(var_of(all, 0, all.size(), s.mean)) : 0.0;
    std::sort(all.begin(), all.end());
    s.q025 = quantile_sorted(all, 0.025);
    s.q500 = quantile_sorted(all, 0.5);
    s.q975 = quantile_sorted(all, 0.975);
    s.ess = effective_sample_size(chains);
    s.rhat = split_rhat(chains);
    return s;
}

}  // namespace ldpd
