#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ldpd/mcmc.hpp"

namespace ldpd {

enum class Target { Onset, Gap };

/// Covariate values at which a marginal survival functional is evaluated.
/// `item` is 0-based.
struct CovariateProfile {
    std::string id;
    Vector onset_covariates;  // p
    Vector event_covariates;  // q
    std::size_t item = 0;
    Target target = Target::Onset;
};

/// Marginal law of one coordinate T_ij under a single posterior draw: a finite
/// mixture of lognormals sharing the log-scale variance Sigma_jj.
class MarginalMixture {
public:
    MarginalMixture(std::vector<double> weights, std::vector<double> log_shifts, double sigma2);

    /// Builds the marginal of the profile's coordinate from a snapshot.
    static MarginalMixture from_snapshot(const Snapshot& draw, const CovariateProfile& profile);

    double cdf(double t) const;
    double survival(double t) const;
    double density(double t) const;
    /// density / survival; NaN (missing) once survival drops below 1e-12.
    double hazard(double t) const;
    /// sum_l w_l exp(shift_l + sigma2 / 2); saturates at +inf.
    double mean() const;
    /// Root of cdf(t) = 1/2 by bisection on (1e-6, 1e3), widened once to
    /// (1e-12, 1e6) if the root is not bracketed.
    double median() const;
    double quantile(double p, double lo = 1e-12, double hi = 1e12) const;

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& log_shifts() const { return shifts_; }
    double sigma2() const { return sigma2_; }

private:
    std::vector<double> weights_;
    std::vector<double> shifts_;
    double sigma2_;
};

/// Minimum survival for which the hazard is reported.
inline constexpr double kHazardSurvivalFloor = 1e-12;

double cdf_at(const Snapshot& draw, const CovariateProfile& profile, double t);
double survival_at(const Snapshot& draw, const CovariateProfile& profile, double t);
double density_at(const Snapshot& draw, const CovariateProfile& profile, double t);
double hazard_at(const Snapshot& draw, const CovariateProfile& profile, double t);
double mean_at(const Snapshot& draw, const CovariateProfile& profile);
double median_at(const Snapshot& draw, const CovariateProfile& profile);

/// Shortest interval containing round(mass * n) + 1 consecutive sorted values.
std::pair<double, double> hpd_interval(std::vector<double> values, double mass = 0.95);

struct IntervalSummary {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Mean and HPD interval of the finite entries of `values`; all NaN if none.
IntervalSummary summarize_draws(const std::vector<double>& values, double mass = 0.95);

enum class CurveKind { Survival, Cdf, Density, Hazard };

const char* curve_kind_name(CurveKind kind);

struct FunctionalGrid {
    std::string profile_id;
    CurveKind kind = CurveKind::Survival;
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> hpd_lo;
    std::vector<double> hpd_hi;
    Matrix per_draw;  // draws x grid points
};

/// Pointwise posterior mean and 95% HPD of a functional over all draws.
FunctionalGrid posterior_curves(const std::vector<Snapshot>& draws, const CovariateProfile& profile,
                                const std::vector<double>& grid, CurveKind kind = CurveKind::Survival,
                                double mass = 0.95);

/// `points` log-spaced times between the 0.1% and 99.9% quantiles of the
/// posterior mean predictive CDF.
std::vector<double> default_time_grid(const std::vector<Snapshot>& draws, const CovariateProfile& profile,
                                      std::size_t points = 201);

std::vector<double> log_spaced(double lo, double hi, std::size_t points);

struct CorrelationSummary {
    std::string label;  // e.g. "onset1:onset2", "gap1:gap2", "onset1:gap2"
    std::size_t row = 0;  // coordinate indices into the 2n-vector
    std::size_t col = 0;
    IntervalSummary summary;
};

/// Posterior mean and 95% HPD of Sigma_jk / sqrt(Sigma_jj Sigma_kk) for all
/// pairs j < k of the 2n log-scale coordinates.
std::vector<CorrelationSummary> log_scale_correlations(const std::vector<Snapshot>& draws, double mass = 0.95);

struct BayesFactorResult {
    double posterior_prob_zero = 0.0;
    double prior_prob_zero = 0.0;
    double bayes_factor = 0.0;  // LDPD (a > 0) against LDDP (a = 0)
    bool degenerate = false;    // posterior probability of a = 0 was 0 or 1
};

/// BF = [(1 - pi0) / pi0] / [(1 - lambda) / lambda].
BayesFactorResult bayes_factor_from_probability(double posterior_prob_zero, double lambda);
BayesFactorResult bayes_factor_spike(const std::vector<Snapshot>& draws, double lambda);

/// Local maxima of `values` after a centred moving average of width `window`
/// (shrinking at the ends).
std::size_t count_local_maxima(const std::vector<double>& values, std::size_t window = 5);

}  // namespace ldpd
