#include "ldpd/distributions.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kTailCut = 4.0;
constexpr double kNarrowWidth = 0.25;

// Draw a standard normal restricted to [a, b] with a < b finite by uniform
// proposals and acceptance exp((m^2 - x^2) / 2), m being the point of [a, b]
// closest to zero.
double uniform_rejection(double a, double b, Rng& rng) {
    const double m = (a > 0.0) ? a : ((b < 0.0) ? b : 0.0);
    for (;;) {
        const double x = a + (b - a) * rng.uniform();
        if (std::log(rng.uniform()) <= 0.5 * (m * m - x * x)) return x;
    }
}

// Standard normal restricted to [a, b], a > kTailCut, b possibly infinite.
double upper_tail(double a, double b, Rng& rng) {
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    if (std::isfinite(b) && (b - a) < 1.0 / alpha) return uniform_rejection(a, b, rng);
    for (;;) {
        const double x = a + rng.exponential() / alpha;
        if (x > b) continue;
        const double d = x - alpha;
        if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
    }
}

// Standardized draw on (a, b].
double standard_truncated(double a, double b, Rng& rng) {
    if (a > kTailCut) return upper_tail(a, b, rng);
    if (b < -kTailCut) return -upper_tail(-b, -a, rng);
    if (std::isfinite(a) && std::isfinite(b) && (b - a) <= kNarrowWidth) return uniform_rejection(a, b, rng);
    if (a > 0.0) {
        const double pa = normal_sf(a);
        const double pb = normal_sf(b);
        const double u = pb + (pa - pb) * rng.uniform();
        return -normal_quantile(u);
    }
    const double pa = normal_cdf(a);
    const double pb = normal_cdf(b);
    const double u = pa + (pb - pa) * rng.uniform();
    return normal_quantile(u);
}

// log(Phi(b) - Phi(a)) computed on the side that avoids cancellation.
double log_normal_mass(double a, double b) {
    if (a > 0.0) return std::log(normal_sf(a) - normal_sf(b));
    return std::log(normal_cdf(b) - normal_cdf(a));
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5); }

double normal_sf(double x) { return 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5); }

double normal_log_pdf(double x) { return -0.5 * (kLogTwoPi + x * x); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        throw DomainError("normal_quantile: p outside [0, 1]");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double sample_truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sample_truncated_normal: sigma must be positive");
    if (!(lo < hi)) throw DomainError("sample_truncated_normal: requires lo < hi");
    const double a = (lo - mu) / sigma;
    const double b = (hi - mu) / sigma;
    double x = mu + sigma * standard_truncated(a, b, rng);
    // Rounding in the back-transform can land on or just past a bound.
    if (x <= lo) x = std::nextafter(lo, hi);
    if (x > hi) x = hi;
    return x;
}

double log_truncated_normal_density(double x, double mu, double sigma, double lo, double hi) {
    if (!(x > lo) || x > hi) return -kInf;
    const double z = (x - mu) / sigma;
    return normal_log_pdf(z) - std::log(sigma) - log_normal_mass((lo - mu) / sigma, (hi - mu) / sigma);
}

double sample_beta(double alpha, double beta, Rng& rng) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("sample_beta: shapes must be positive");
    const double log_x = rng.log_gamma(alpha);
    const double log_y = rng.log_gamma(beta);
    // x / (x + y) evaluated without forming x and y.
    return 1.0 / (1.0 + std::exp(log_y - log_x));
}

double log_beta_density(double v, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("log_beta_density: shapes must be positive");
    if (!(v > 0.0 && v < 1.0)) return -kInf;
    const double log_norm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    return log_norm + (alpha - 1.0) * std::log(v) + (beta - 1.0) * std::log1p(-v);
}

double lognormal_cdf(double t, double log_scale_shift, double sigma2) {
    if (!(t > 0.0)) throw DomainError("lognormal_cdf: t must be positive");
    if (!(sigma2 > 0.0)) throw DomainError("lognormal_cdf: variance must be positive");
    return normal_cdf((std::log(t) - log_scale_shift) / std::sqrt(sigma2));
}

double lognormal_sf(double t, double log_scale_shift, double sigma2) {
    if (!(t > 0.0)) throw DomainError("lognormal_sf: t must be positive");
    if (!(sigma2 > 0.0)) throw DomainError("lognormal_sf: variance must be positive");
    return normal_sf((std::log(t) - log_scale_shift) / std::sqrt(sigma2));
}

double lognormal_pdf(double t, double log_scale_shift, double sigma2) {
    if (!(t > 0.0)) throw DomainError("lognormal_pdf: t must be positive");
    if (!(sigma2 > 0.0)) throw DomainError("lognormal_pdf: variance must be positive");
    const double sigma = std::sqrt(sigma2);
    const double z = (std::log(t) - log_scale_shift) / sigma;
    return std::exp(normal_log_pdf(z)) / (t * sigma);
}

Matrix cholesky_lower(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw NumericalError("cholesky: matrix must be square and nonempty");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NumericalError("cholesky: matrix is not symmetric");
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("cholesky: matrix is not positive definite");
    Matrix lower = llt.matrixL();
    if (!lower.allFinite() || (lower.diagonal().array() <= 0.0).any())
        throw NumericalError("cholesky: matrix is not positive definite");
    return lower;
}

double log_det_from_lower(const Matrix& lower) { return 2.0 * lower.diagonal().array().log().sum(); }

double mv_normal_log_density(const Vector& x, const Vector& mean, const Matrix& lower) {
    if (x.size() != mean.size() || x.size() != lower.rows())
        throw DomainError("mv_normal_log_density: dimension mismatch");
    const Vector y = lower.triangularView<Eigen::Lower>().solve(x - mean);
    const auto d = static_cast<double>(x.size());
    return -0.5 * (y.squaredNorm() + log_det_from_lower(lower) + d * kLogTwoPi);
}

MvNormalParams::MvNormalParams(Vector mean, const Matrix& covariance)
    : mean_(std::move(mean)), covariance_(covariance), lower_(cholesky_lower(covariance)) {
    if (covariance_.rows() != mean_.size()) throw DomainError("MvNormalParams: dimension mismatch");
    log_det_ = log_det_from_lower(lower_);
}

double MvNormalParams::log_density(const Vector& x) const { return mv_normal_log_density(x, mean_, lower_); }

Vector sample_mv_normal(const MvNormalParams& params, Rng& rng) {
    Vector eps(params.dim());
    for (Eigen::Index k = 0; k < eps.size(); ++k) eps(k) = rng.normal();
    return params.mean() + params.lower().triangularView<Eigen::Lower>() * eps;
}

Vector sample_mv_normal_canonical(const Matrix& precision, const Vector& linear, Rng& rng) {
    const Matrix lower = cholesky_lower(precision);
    const auto l = lower.triangularView<Eigen::Lower>();
    const auto u = lower.transpose().triangularView<Eigen::Upper>();
    const Vector mean = u.solve(l.solve(linear));
    Vector eps(linear.size());
    for (Eigen::Index k = 0; k < eps.size(); ++k) eps(k) = rng.normal();
    return mean + u.solve(eps);
}

InverseWishartParams::InverseWishartParams(double degrees, const Matrix& scale)
    : degrees_(degrees), scale_(scale), scale_lower_(cholesky_lower(scale)) {
    if (!(degrees > static_cast<double>(scale.rows()) - 1.0))
        throw DomainError("InverseWishartParams: degrees must exceed dimension - 1");
}

Matrix sample_inverse_wishart(const InverseWishartParams& params, Rng& rng) {
    const Eigen::Index d = params.dim();
    // Bartlett factor A of a Wishart(degrees, I) draw W = A A'.
    Matrix bartlett = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        bartlett(i, i) = std::sqrt(2.0 * rng.gamma(0.5 * (params.degrees() - static_cast<double>(i))));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    // X = L A'^{-1}, so X X' = L (A A')^{-1} L' ~ IW(degrees, L L').
    const Matrix inv_upper =
        bartlett.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
    const Matrix factor = params.scale_lower().triangularView<Eigen::Lower>() * inv_upper;
    Matrix draw = factor * factor.transpose();
    return 0.5 * (draw + draw.transpose());
}

}  // namespace ldpd
