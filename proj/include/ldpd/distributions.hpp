#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <limits>

#include "ldpd/rng.hpp"

namespace ldpd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Scalar normal helpers

double normal_cdf(double x);
double normal_sf(double x);  // 1 - Phi(x), accurate in the upper tail
double normal_log_pdf(double x);
double normal_quantile(double p);

/// Draw from N(mu, sigma^2) restricted to (lo, hi]. Either bound may be
/// infinite. Uses inverse-CDF sampling when the interval touches the body of
/// the distribution and exponential (or uniform) rejection when it lies
/// entirely more than 4 standard deviations into a tail.
double sample_truncated_normal(double mu, double sigma, double lo, double hi, Rng& rng);

/// Log density of N(mu, sigma^2) truncated to (lo, hi]; -inf outside.
double log_truncated_normal_density(double x, double mu, double sigma, double lo, double hi);

// ---------------------------------------------------------------------------
// Beta

double sample_beta(double alpha, double beta, Rng& rng);
double log_beta_density(double v, double alpha, double beta);

// ---------------------------------------------------------------------------
// Lognormal kernel: log T ~ N(log_scale_shift, sigma2)

double lognormal_cdf(double t, double log_scale_shift, double sigma2);
double lognormal_sf(double t, double log_scale_shift, double sigma2);
double lognormal_pdf(double t, double log_scale_shift, double sigma2);

// ---------------------------------------------------------------------------
// Multivariate normal

/// Mean and covariance of a d-variate normal; the covariance is factorized on
/// construction so that every draw and density evaluation uses the triangular
/// factor.
class MvNormalParams {
public:
    MvNormalParams(Vector mean, const Matrix& covariance);

    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    const Matrix& lower() const { return lower_; }
    Eigen::Index dim() const { return mean_.size(); }
    double log_det() const { return log_det_; }

    double log_density(const Vector& x) const;

private:
    Vector mean_;
    Matrix covariance_;
    Matrix lower_;
    double log_det_ = 0.0;
};

Vector sample_mv_normal(const MvNormalParams& params, Rng& rng);

/// Lower Cholesky factor of a symmetric matrix; throws NumericalError when the
/// matrix is not positive definite or not symmetric to 1e-10 relative.
Matrix cholesky_lower(const Matrix& m);

/// log N_d(x | mean, L L') given the lower factor L.
double mv_normal_log_density(const Vector& x, const Vector& mean, const Matrix& lower);
/// Sum of log of the factor diagonal doubled: log det(L L').
double log_det_from_lower(const Matrix& lower);

/// Draw x ~ N(P^{-1} h, P^{-1}) given the precision P and linear term h.
Vector sample_mv_normal_canonical(const Matrix& precision, const Vector& linear, Rng& rng);

// ---------------------------------------------------------------------------
// Inverse Wishart with density proportional to
// |X|^{-(degrees+d+1)/2} exp(-tr(scale X^{-1}) / 2); mean scale / (degrees - d - 1).

class InverseWishartParams {
public:
    InverseWishartParams(double degrees, const Matrix& scale);

    double degrees() const { return degrees_; }
    const Matrix& scale() const { return scale_; }
    const Matrix& scale_lower() const { return scale_lower_; }
    Eigen::Index dim() const { return scale_.rows(); }

private:
    double degrees_;
    Matrix scale_;
    Matrix scale_lower_;
};

Matrix sample_inverse_wishart(const InverseWishartParams& params, Rng& rng);

}  // namespace ldpd
