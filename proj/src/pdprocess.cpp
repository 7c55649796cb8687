#include "ldpd/pdprocess.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "ldpd/distributions.hpp"
#include "ldpd/errors.hpp"

namespace ldpd {

void PDParams::validate() const {
    if (!valid()) throw DomainError("PD parameters must satisfy 0 <= a < 1 and b > -a");
}

StickState::StickState(std::vector<double> sticks) : sticks_(std::move(sticks)) { recompute(); }

void StickState::set_sticks(std::vector<double> sticks) {
    sticks_ = std::move(sticks);
    recompute();
}

void StickState::recompute() {
    const std::size_t n = sticks_.size();
    if (n == 0) throw DomainError("StickState: truncation level must be positive");
    sticks_.back() = 1.0;
    weights_.assign(n, 0.0);
    log_weights_.assign(n, 0.0);
    double log_remaining = 0.0;
    double remaining = 1.0;
    double partial = 0.0;
    for (std::size_t l = 0; l + 1 < n; ++l) {
        const double v = sticks_[l];
        log_weights_[l] = std::log(v) + log_remaining;
        weights_[l] = v * remaining;
        partial += weights_[l];
        log_remaining += std::log1p(-v);
        remaining *= 1.0 - v;
    }
    log_weights_[n - 1] = log_remaining;
    weights_[n - 1] = std::max(0.0, 1.0 - partial);
}

double clamp_stick(double v) { return std::clamp(v, DBL_MIN, 1.0 - DBL_EPSILON); }

StickState sample_sticks_prior(const PDParams& params, std::size_t truncation, Rng& rng) {
    params.validate();
    if (truncation < 2) throw DomainError("sample_sticks_prior: truncation level must be >= 2");
    std::vector<double> sticks(truncation, 1.0);
    for (std::size_t l = 0; l + 1 < truncation; ++l) {
        const double j = static_cast<double>(l + 1);
        sticks[l] = clamp_stick(sample_beta(1.0 - params.a, params.b + j * params.a, rng));
    }
    return StickState(std::move(sticks));
}

double stick_log_likelihood(const std::vector<double>& sticks, const PDParams& params) {
    if (!params.valid()) return -kInf;
    double total = 0.0;
    for (std::size_t l = 0; l + 1 < sticks.size(); ++l) {
        const double j = static_cast<double>(l + 1);
        total += log_beta_density(sticks[l], 1.0 - params.a, params.b + j * params.a);
    }
    return total;
}

double expected_tail_mass(const PDParams& params, std::size_t truncation) {
    params.validate();
    double log_mass = 0.0;
    for (std::size_t l = 1; l < truncation; ++l) {
        const double shape_b = params.b + static_cast<double>(l) * params.a;
        log_mass += std::log(shape_b) - std::log(1.0 - params.a + shape_b);
    }
    return std::exp(log_mass);
}

std::size_t truncation_for_tail(const PDParams& params, double tolerance, std::size_t max_level) {
    params.validate();
    double log_mass = 0.0;
    const double log_tol = std::log(tolerance);
    for (std::size_t n = 1; n < max_level; ++n) {
        if (log_mass < log_tol) return n;
        const double shape_b = params.b + static_cast<double>(n) * params.a;
        log_mass += std::log(shape_b) - std::log(1.0 - params.a + shape_b);
    }
    return max_level;
}

std::vector<std::size_t> sample_partition(const PDParams& params, std::size_t m, Rng& rng) {
    params.validate();
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < m; ++i) {
        if (i == 0) {
            sizes.push_back(1);
            continue;
        }
        const double denom = static_cast<double>(i) + params.b;
        double u = rng.uniform() * denom;
        const double p_new = params.b + static_cast<double>(sizes.size()) * params.a;
        if (u < p_new) {
            sizes.push_back(1);
            continue;
        }
        u -= p_new;
        std::size_t c = 0;
        for (; c + 1 < sizes.size(); ++c) {
            const double w = static_cast<double>(sizes[c]) - params.a;
            if (u < w) break;
            u -= w;
        }
        ++sizes[c];
    }
    return sizes;
}

std::vector<std::size_t> prior_cluster_counts(const PDParams& params, std::size_t m, std::size_t reps, Rng& rng) {
    params.validate();
    if (m < 1) throw DomainError("prior_cluster_counts: m must be >= 1");
    std::vector<std::size_t> counts(reps, 0);
    for (auto& k : counts) {
        k = 1;
        for (std::size_t i = 1; i < m; ++i) {
            const double p_new = (params.b + static_cast<double>(k) * params.a) / (static_cast<double>(i) + params.b);
            if (rng.uniform() < p_new) ++k;
        }
    }
    return counts;
}

namespace {
void check_mass(double mass) {
    if (!(mass >= 0.0 && mass <= 1.0)) throw DomainError("base-measure mass must lie in [0, 1]");
}
}  // namespace

double measure_variance(const PDParams& params, double g0_mass) {
    params.validate();
    check_mass(g0_mass);
    return g0_mass * (1.0 - g0_mass) * (1.0 - params.a) / (params.b + 1.0);
}

double measure_covariance(const PDParams& params, double g0_mass_1, double g0_mass_2) {
    params.validate();
    check_mass(g0_mass_1);
    check_mass(g0_mass_2);
    if (g0_mass_1 + g0_mass_2 > 1.0 + 1e-12) throw DomainError("measure_covariance: disjoint sets need total mass <= 1");
    return -g0_mass_1 * g0_mass_2 * (1.0 - params.a) / (params.b + 1.0);
}

std::pair<double, double> sample_measure_masses(const PDParams& params, std::size_t truncation, double g0_mass_1,
                                                double g0_mass_2, Rng& rng) {
    params.validate();
    check_mass(g0_mass_1);
    check_mass(g0_mass_2);
    double remaining = 1.0;
    double mass_1 = 0.0;
    double mass_2 = 0.0;
    for (std::size_t l = 1; l < truncation; ++l) {
        const double v = sample_beta(1.0 - params.a, params.b + static_cast<double>(l) * params.a, rng);
        const double w = v * remaining;
        remaining *= 1.0 - v;
        const double u = rng.uniform();
        if (u < g0_mass_1)
            mass_1 += w;
        else if (u < g0_mass_1 + g0_mass_2)
            mass_2 += w;
    }
    return {mass_1 + remaining * g0_mass_1, mass_2 + remaining * g0_mass_2};
}

}  // namespace ldpd
