#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ldpd/rng.hpp"

namespace ldpd {

/// Two-parameter Poisson-Dirichlet parameters restricted to
/// {0 <= a < 1, b > -a}. a = 0 gives the Dirichlet process with mass b.
struct PDParams {
    double a = 0.0;  // discount
    double b = 1.0;  // concentration

    bool valid() const { return a >= 0.0 && a < 1.0 && b > -a; }
    void validate() const;  // throws DomainError
};

/// Truncated stick-breaking weights. sticks[N-1] is fixed to 1 so that the
/// weights sum to one.
class StickState {
public:
    StickState() = default;
    /// Takes V_1..V_N (the last entry is overwritten with 1).
    explicit StickState(std::vector<double> sticks);

    std::size_t truncation_level() const { return sticks_.size(); }
    const std::vector<double>& sticks() const { return sticks_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& log_weights() const { return log_weights_; }

    void set_sticks(std::vector<double> sticks);

private:
    void recompute();

    std::vector<double> sticks_;
    std::vector<double> weights_;
    std::vector<double> log_weights_;
};

/// Sticks are kept away from exactly 0 and 1 so that the stick likelihood
/// stays finite; the adjustment is far below double resolution of the weights.
double clamp_stick(double v);

/// V_j ~ Beta(1 - a, b + j a), j = 1..N-1, V_N = 1.
StickState sample_sticks_prior(const PDParams& params, std::size_t truncation, Rng& rng);

/// log prod_{l=1}^{N-1} Beta(V_l | 1 - a, b + l a).
double stick_log_likelihood(const std::vector<double>& sticks, const PDParams& params);

/// E[prod_{j<N} (1 - V_j)]: prior mass left to the last truncation atom.
double expected_tail_mass(const PDParams& params, std::size_t truncation);

/// Smallest N whose expected tail mass is below `tolerance` (capped at `max_level`).
std::size_t truncation_for_tail(const PDParams& params, double tolerance, std::size_t max_level = 1000000);

/// Cluster sizes from the sequential generalized restaurant process with m
/// customers: customer i+1 joins cluster c w.p. (n_c - a)/(i + b) and opens a
/// new cluster w.p. (b + k a)/(i + b).
std::vector<std::size_t> sample_partition(const PDParams& params, std::size_t m, Rng& rng);

/// `reps` independent draws of the number of occupied clusters n*(m). Only the
/// count chain is simulated, which has the same law as counting the clusters
/// of sample_partition.
std::vector<std::size_t> prior_cluster_counts(const PDParams& params, std::size_t m, std::size_t reps, Rng& rng);

/// Var(G(B)) = G0(B)(1 - G0(B))(1 - a)/(b + 1).
double measure_variance(const PDParams& params, double g0_mass);
/// Cov(G(B1), G(B2)) = -G0(B1) G0(B2)(1 - a)/(b + 1) for disjoint B1, B2.
double measure_covariance(const PDParams& params, double g0_mass_1, double g0_mass_2);

/// One prior draw of (G(B1), G(B2)) for disjoint sets with base masses
/// (g0_mass_1, g0_mass_2). The first N-1 stick-breaking atoms are drawn
/// explicitly; the remaining mass prod_{j<N}(1 - V_j) is credited to each set
/// at its base-measure proportion.
std::pair<double, double> sample_measure_masses(const PDParams& params, std::size_t truncation, double g0_mass_1,
                                                double g0_mass_2, Rng& rng);

}  // namespace ldpd
