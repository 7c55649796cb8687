#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ldpd/data.hpp"
#include "ldpd/distributions.hpp"
#include "ldpd/pdprocess.hpp"

namespace ldpd {

/// Fixed hyperparameters of the hierarchical model.
///
///   a ~ lambda delta_0 + (1 - lambda) Beta(alpha0, alpha1)
///   b | a ~ N(mu_b, sigma_b^2) restricted to (-a, inf)
///   Sigma ~ IW_{2n}(nu, Omega)
///   m ~ N(eta, Upsilon),  S ~ IW_{n(p+q)}(gamma, Gamma)
///
/// sigma_b is a standard deviation.
struct PriorSpec {
    double lambda = 0.5;
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    double mu_b = 10.0;
    double sigma_b = 200.0;
    double nu = 4.0;
    Matrix Omega;
    double gamma = 5.0;
    Matrix Gamma;
    Vector eta;
    Matrix Upsilon;
    std::size_t truncation_level = 50;

    /// nu = 2n + 2, Omega = I, gamma = n(p+q) + 1, Gamma = I, eta = 0,
    /// Upsilon = 100 I, N = 50.
    static PriorSpec defaults(std::size_t n_items, std::size_t p, std::size_t q);

    std::size_t latent_dim() const { return static_cast<std::size_t>(Omega.rows()); }
    std::size_t coef_dim() const { return static_cast<std::size_t>(Gamma.rows()); }

    void validate() const;  // throws ValidationError
    void validate_for(const Dataset& data) const;

    /// log p(a) with respect to (point mass at 0) + Lebesgue on (0, 1).
    double log_prior_a(double a) const;
    /// log p(b | a), the truncated normal density on (-a, inf).
    double log_prior_b(double b, double a) const;
};

/// One weighted bivariate normal component of log(T^O, T^T).
struct MixtureComponent {
    double weight = 1.0;
    Vector mean;     // length 2
    Matrix covariance;  // 2 x 2
};

/// Generating distribution of log(T^O, T^T) for one group.
struct ScenarioTruth {
    std::vector<MixtureComponent> components;

    void validate() const;
};

/// Complete sampler state. Labels and atom indices are 0-based.
struct ModelState {
    Matrix z;                             // m x 2n latent log-times (onsets, then gaps)
    std::vector<std::size_t> allocations;  // length m
    std::vector<Vector> atoms;            // N coefficient vectors of length n(p+q)
    StickState sticks;
    Matrix Sigma;                         // 2n x 2n kernel covariance
    PDParams pd;
    Vector base_mean;                     // m (location of G0)
    Matrix base_cov;                      // S (covariance of G0)

    std::size_t truncation_level() const { return atoms.size(); }
    std::size_t occupied_clusters() const;
    std::vector<std::size_t> cluster_counts() const;
};

double log_likelihood_unit(const Vector& z, const DesignMatrix& design, const Vector& atom, const Matrix& Sigma);
/// Same with Sigma supplied through its lower Cholesky factor.
double log_likelihood_unit_lower(const Vector& z, const DesignMatrix& design, const Vector& atom, const Matrix& lower);

/// sum_l w_l N_{2n}(log t | X beta_l, Sigma) prod_j 1/t_j.
double mixture_density(const Vector& times, const DesignMatrix& design, const StickState& sticks,
                       const std::vector<Vector>& atoms, const Matrix& Sigma);

/// Interior point of the feasible latent region for every unit; absent items
/// get log-time 0.
Matrix feasible_latent(const Dataset& data);

/// Returns a description of the first violated state invariant, if any.
/// `tolerance` is relative slack on the censoring bounds after exponentiation.
std::optional<std::string> find_invariant_violation(const ModelState& state, const Dataset& data,
                                                    double tolerance = 1e-9);

/// Full draw of every parameter block from its prior; latent times are set to
/// a feasible interior point and allocations drawn from the weights.
ModelState draw_prior_state(const Dataset& data, const PriorSpec& priors, Rng& rng);

/// Deterministic-shape starting point: pooled least-squares fit for the base
/// mean, atoms scattered around it, feasible latent times.
ModelState initial_state(const Dataset& data, const std::vector<DesignMatrix>& designs, const PriorSpec& priors,
                         Rng& rng);

}  // namespace ldpd
