#include "ldpd/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_time(double t) {
    if (!(t > 0.0)) throw DomainError("time must be positive");
}

std::string coordinate_label(std::size_t k, std::size_t n) {
    return k < n ? "onset" + std::to_string(k + 1) : "gap" + std::to_string(k - n + 1);
}

// Bisection on log t for an increasing function crossing `level`.
template <class F>
double log_bisect(F&& f, double level, double lo, double hi, double tolerance) {
    double llo = std::log(lo);
    double lhi = std::log(hi);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (llo + lhi);
        if (f(std::exp(mid)) < level)
            llo = mid;
        else
            lhi = mid;
        if (std::exp(lhi) - std::exp(llo) < tolerance) break;
    }
    return std::exp(0.5 * (llo + lhi));
}

}  // namespace

MarginalMixture::MarginalMixture(std::vector<double> weights, std::vector<double> log_shifts, double sigma2)
    : weights_(std::move(weights)), shifts_(std::move(log_shifts)), sigma2_(sigma2) {
    if (weights_.size() != shifts_.size() || weights_.empty())
        throw DomainError("MarginalMixture: weights and shifts must have equal nonzero length");
    if (!(sigma2_ > 0.0)) throw DomainError("MarginalMixture: variance must be positive");
}

MarginalMixture MarginalMixture::from_snapshot(const Snapshot& draw, const CovariateProfile& profile) {
    const auto n = static_cast<std::size_t>(draw.Sigma.rows()) / 2;
    const auto p = static_cast<std::size_t>(profile.onset_covariates.size());
    const auto q = static_cast<std::size_t>(profile.event_covariates.size());
    if (draw.atoms.empty() || static_cast<std::size_t>(draw.atoms.front().size()) != n * (p + q))
        throw DomainError("profile covariate dimensions do not match the draw");
    if (profile.item >= n) throw DomainError("profile item index out of range");
    const std::size_t coord = profile.target == Target::Onset ? profile.item : n + profile.item;
    std::vector<double> shifts(draw.atoms.size());
    for (std::size_t l = 0; l < draw.atoms.size(); ++l) {
        const auto& beta = draw.atoms[l];
        shifts[l] = profile.target == Target::Onset
                        ? beta.segment(static_cast<Eigen::Index>(profile.item * p), static_cast<Eigen::Index>(p)).dot(profile.onset_covariates)
                        : beta.segment(static_cast<Eigen::Index>(n * p + profile.item * q), static_cast<Eigen::Index>(q)).dot(profile.event_covariates);
    }
    const auto c = static_cast<Eigen::Index>(coord);
    return MarginalMixture(draw.sticks.weights(), std::move(shifts), draw.Sigma(c, c));
}

double MarginalMixture::cdf(double t) const {
    check_time(t);
    double total = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] > 0.0) total += weights_[l] * lognormal_cdf(t, shifts_[l], sigma2_);
    return std::min(total, 1.0);
}

double MarginalMixture::survival(double t) const {
    check_time(t);
    double total = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] > 0.0) total += weights_[l] * lognormal_sf(t, shifts_[l], sigma2_);
    return std::min(total, 1.0);
}

double MarginalMixture::density(double t) const {
    check_time(t);
    double total = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] > 0.0) total += weights_[l] * lognormal_pdf(t, shifts_[l], sigma2_);
    return total;
}

double MarginalMixture::hazard(double t) const {
    const double s = survival(t);
    if (s < kHazardSurvivalFloor) return kNaN;
    return density(t) / s;
}

double MarginalMixture::mean() const {
    double total = 0.0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] > 0.0) total += weights_[l] * std::exp(shifts_[l] + 0.5 * sigma2_);
    return std::isnan(total) ? kInf : total;
}

double MarginalMixture::quantile(double p, double lo, double hi) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
    if (cdf(lo) > p || cdf(hi) < p) throw NumericalError("quantile: root not bracketed");
    return log_bisect([this](double t) { return cdf(t); }, p, lo, hi, 1e-10 * lo);
}

double MarginalMixture::median() const {
    double lo = 1e-6;
    double hi = 1e3;
    if (cdf(lo) > 0.5 || cdf(hi) < 0.5) {
        lo = 1e-12;
        hi = 1e6;
        if (cdf(lo) > 0.5 || cdf(hi) < 0.5) throw NumericalError("median: root not bracketed");
    }
    return log_bisect([this](double t) { return cdf(t); }, 0.5, lo, hi, 1e-8);
}

double cdf_at(const Snapshot& draw, const CovariateProfile& profile, double t) {
    return MarginalMixture::from_snapshot(draw, profile).cdf(t);
}
double survival_at(const Snapshot& draw, const CovariateProfile& profile, double t) {
    return MarginalMixture::from_snapshot(draw, profile).survival(t);
}
double density_at(const Snapshot& draw, const CovariateProfile& profile, double t) {
    return MarginalMixture::from_snapshot(draw, profile).density(t);
}
double hazard_at(const Snapshot& draw, const CovariateProfile& profile, double t) {
    return MarginalMixture::from_snapshot(draw, profile).hazard(t);
}
double mean_at(const Snapshot& draw, const CovariateProfile& profile) {
    return MarginalMixture::from_snapshot(draw, profile).mean();
}
double median_at(const Snapshot& draw, const CovariateProfile& profile) {
    return MarginalMixture::from_snapshot(draw, profile).median();
}

std::pair<double, double> hpd_interval(std::vector<double> values, double mass) {
    if (values.empty()) throw DomainError("hpd_interval: no values");
    if (!(mass > 0.0 && mass < 1.0)) throw DomainError("hpd_interval: mass must lie in (0, 1)");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return {values[0], values[0]};
    const auto gap = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(mass * static_cast<double>(n))), 1, n - 1);
    std::size_t best = 0;
    double width = kInf;
    for (std::size_t i = 0; i + gap < n; ++i) {
        const double w = values[i + gap] - values[i];
        if (w < width) {
            width = w;
            best = i;
        }
    }
    return {values[best], values[best + gap]};
}

IntervalSummary summarize_draws(const std::vector<double>& values, double mass) {
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    if (finite.empty()) return {kNaN, kNaN, kNaN};
    IntervalSummary s;
    s.mean = std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(finite.size());
    std::tie(s.lo, s.hi) = hpd_interval(std::move(finite), mass);
    return s;
}

const char* curve_kind_name(CurveKind kind) {
    switch (kind) {
        case CurveKind::Survival: return "survival";
        case CurveKind::Cdf: return "cdf";
        case CurveKind::Density: return "density";
        case CurveKind::Hazard: return "hazard";
    }
    return "unknown";
}

FunctionalGrid posterior_curves(const std::vector<Snapshot>& draws, const CovariateProfile& profile,
                                const std::vector<double>& grid, CurveKind kind, double mass) {
    if (draws.empty()) throw DomainError("posterior_curves: no draws");
    for (std::size_t g = 0; g < grid.size(); ++g) {
        check_time(grid[g]);
        if (g > 0 && !(grid[g] > grid[g - 1])) throw DomainError("posterior_curves: grid must be strictly increasing");
    }
    FunctionalGrid out;
    out.profile_id = profile.id;
    out.kind = kind;
    out.times = grid;
    out.per_draw.resize(static_cast<Eigen::Index>(draws.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t d = 0; d < draws.size(); ++d) {
        const auto marginal = MarginalMixture::from_snapshot(draws[d], profile);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double v = 0.0;
            switch (kind) {
                case CurveKind::Survival: v = marginal.survival(grid[g]); break;
                case CurveKind::Cdf: v = marginal.cdf(grid[g]); break;
                case CurveKind::Density: v = marginal.density(grid[g]); break;
                case CurveKind::Hazard: v = marginal.hazard(grid[g]); break;
            }
            out.per_draw(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(g)) = v;
        }
    }
    std::vector<double> column(draws.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t d = 0; d < draws.size(); ++d)
            column[d] = out.per_draw(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(g));
        const auto s = summarize_draws(column, mass);
        out.mean.push_back(s.mean);
        out.hpd_lo.push_back(s.lo);
        out.hpd_hi.push_back(s.hi);
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) throw DomainError("log_spaced: need 0 < lo < hi and >= 2 points");
    std::vector<double> grid(points);
    const double llo = std::log(lo);
    const double step = (std::log(hi) - llo) / static_cast<double>(points - 1);
    for (std::size_t g = 0; g < points; ++g) grid[g] = std::exp(llo + step * static_cast<double>(g));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

std::vector<double> default_time_grid(const std::vector<Snapshot>& draws, const CovariateProfile& profile,
                                      std::size_t points) {
    if (draws.empty()) throw DomainError("default_time_grid: no draws");
    std::vector<MarginalMixture> marginals;
    marginals.reserve(draws.size());
    for (const auto& d : draws) marginals.push_back(MarginalMixture::from_snapshot(d, profile));
    auto mean_cdf = [&](double t) {
        double total = 0.0;
        for (const auto& m : marginals) total += m.cdf(t);
        return total / static_cast<double>(marginals.size());
    };
    const double lo = log_bisect(mean_cdf, 0.001, 1e-12, 1e12, 1e-9);
    const double hi = log_bisect(mean_cdf, 0.999, 1e-12, 1e12, 1e-9);
    return log_spaced(lo, hi, points);
}

std::vector<CorrelationSummary> log_scale_correlations(const std::vector<Snapshot>& draws, double mass) {
    if (draws.empty()) throw DomainError("log_scale_correlations: no draws");
    const auto dim = static_cast<std::size_t>(draws.front().Sigma.rows());
    if (dim < 2) throw DomainError("log_scale_correlations: need at least two coordinates");
    const std::size_t n = dim / 2;
    std::vector<CorrelationSummary> out;
    std::vector<double> values(draws.size());
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t k = j + 1; k < dim; ++k) {
            for (std::size_t d = 0; d < draws.size(); ++d) {
                const auto& s = draws[d].Sigma;
                const auto jj = static_cast<Eigen::Index>(j);
                const auto kk = static_cast<Eigen::Index>(k);
                values[d] = s(jj, kk) / std::sqrt(s(jj, jj) * s(kk, kk));
            }
            out.push_back({coordinate_label(j, n) + ":" + coordinate_label(k, n), j, k, summarize_draws(values, mass)});
        }
    }
    return out;
}

BayesFactorResult bayes_factor_from_probability(double posterior_prob_zero, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("bayes_factor: lambda must lie in (0, 1)");
    if (!(posterior_prob_zero >= 0.0 && posterior_prob_zero <= 1.0))
        throw DomainError("bayes_factor: posterior probability must lie in [0, 1]");
    BayesFactorResult r;
    r.posterior_prob_zero = posterior_prob_zero;
    r.prior_prob_zero = lambda;
    const double prior_odds = (1.0 - lambda) / lambda;
    if (posterior_prob_zero == 0.0) {
        r.bayes_factor = kInf;
        r.degenerate = true;
    } else if (posterior_prob_zero == 1.0) {
        r.bayes_factor = 0.0;
        r.degenerate = true;
    } else {
        r.bayes_factor = ((1.0 - posterior_prob_zero) / posterior_prob_zero) / prior_odds;
    }
    return r;
}

BayesFactorResult bayes_factor_spike(const std::vector<Snapshot>& draws, double lambda) {
    if (draws.empty()) throw DomainError("bayes_factor_spike: no draws");
    const auto zeros = std::count_if(draws.begin(), draws.end(), [](const Snapshot& s) { return s.pd.a == 0.0; });
    return bayes_factor_from_probability(static_cast<double>(zeros) / static_cast<double>(draws.size()), lambda);
}

std::size_t count_local_maxima(const std::vector<double>& values, std::size_t window) {
    const std::size_t n = values.size();
    if (n < 3) return 0;
    const std::size_t half = window / 2;
    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i >= half ? i - half : 0;
        const std::size_t b = std::min(n - 1, i + half);
        double s = 0.0;
        for (std::size_t k = a; k <= b; ++k) s += values[k];
        smooth[i] = s / static_cast<double>(b - a + 1);
    }
    // Interior maxima; a plateau counts once if both neighbours are lower.
    std::size_t count = 0;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (smooth[i] > smooth[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && smooth[j + 1] == smooth[i]) ++j;
            if (j + 1 < n && smooth[j + 1] < smooth[i]) ++count;
            i = j + 1;
        } else {
            ++i;
        }
    }
    return count;
}

}  // namespace ldpd
