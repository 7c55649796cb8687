#include "ldpd/model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

bool is_pd(const Matrix& m) {
    try {
        cholesky_lower(m);
        return true;
    } catch (const NumericalError&) {
        return false;
    }
}

double log_sum_exp(const std::vector<double>& v) {
    const double top = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - top);
    return top + std::log(sum);
}

}  // namespace

PriorSpec PriorSpec::defaults(std::size_t n_items, std::size_t p, std::size_t q) {
    const auto d_latent = static_cast<Eigen::Index>(2 * n_items);
    const auto d_coef = static_cast<Eigen::Index>(n_items * (p + q));
    PriorSpec spec;
    spec.nu = static_cast<double>(d_latent) + 2.0;
    spec.Omega = Matrix::Identity(d_latent, d_latent);
    spec.gamma = static_cast<double>(d_coef) + 1.0;
    spec.Gamma = Matrix::Identity(d_coef, d_coef);
    spec.eta = Vector::Zero(d_coef);
    spec.Upsilon = 100.0 * Matrix::Identity(d_coef, d_coef);
    return spec;
}

void PriorSpec::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("prior: lambda must lie in [0, 1]");
    if (!(alpha0 > 0.0 && alpha1 > 0.0)) throw ValidationError("prior: alpha0 and alpha1 must be positive");
    if (!(sigma_b > 0.0)) throw ValidationError("prior: sigma_b must be positive");
    if (!std::isfinite(mu_b)) throw ValidationError("prior: mu_b must be finite");
    if (Omega.rows() == 0 || Gamma.rows() == 0) throw ValidationError("prior: Omega and Gamma must be set");
    if (!(nu > static_cast<double>(Omega.rows()) - 1.0)) throw ValidationError("prior: nu must exceed 2n - 1");
    if (!(gamma > static_cast<double>(Gamma.rows()) - 1.0)) throw ValidationError("prior: gamma must exceed n(p+q) - 1");
    if (eta.size() != Gamma.rows() || Upsilon.rows() != Gamma.rows())
        throw ValidationError("prior: eta, Upsilon and Gamma dimensions disagree");
    if (!is_pd(Omega)) throw ValidationError("prior: Omega must be positive definite");
    if (!is_pd(Gamma)) throw ValidationError("prior: Gamma must be positive definite");
    if (!is_pd(Upsilon)) throw ValidationError("prior: Upsilon must be positive definite");
    if (truncation_level < 1) throw ValidationError("prior: truncation level must be >= 1");
}

void PriorSpec::validate_for(const Dataset& data) const {
    validate();
    if (latent_dim() != data.latent_dim() || coef_dim() != data.coef_dim())
        throw ValidationError("prior dimensions do not match the dataset (2n = " + std::to_string(data.latent_dim()) +
                              ", n(p+q) = " + std::to_string(data.coef_dim()) + ")");
}

double PriorSpec::log_prior_a(double a) const {
    if (a == 0.0) return lambda > 0.0 ? std::log(lambda) : -kInf;
    if (!(a > 0.0 && a < 1.0) || lambda >= 1.0) return -kInf;
    return std::log1p(-lambda) + log_beta_density(a, alpha0, alpha1);
}

double PriorSpec::log_prior_b(double b, double a) const {
    return log_truncated_normal_density(b, mu_b, sigma_b, -a, kInf);
}

void ScenarioTruth::validate() const {
    if (components.empty()) throw ValidationError("scenario truth needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0)) throw ValidationError("scenario truth: weights must be positive");
        if (c.mean.size() != 2 || c.covariance.rows() != 2 || c.covariance.cols() != 2)
            throw ValidationError("scenario truth: components must be bivariate");
        if (!is_pd(c.covariance)) throw ValidationError("scenario truth: covariance must be positive definite");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("scenario truth: weights must sum to 1");
}

std::vector<std::size_t> ModelState::cluster_counts() const {
    std::vector<std::size_t> counts(atoms.size(), 0);
    for (auto c : allocations) ++counts[c];
    return counts;
}

std::size_t ModelState::occupied_clusters() const {
    const auto counts = cluster_counts();
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
}

double log_likelihood_unit_lower(const Vector& z, const DesignMatrix& design, const Vector& atom, const Matrix& lower) {
    if (design.cols() != atom.size() || design.rows() != z.size())
        throw DomainError("log_likelihood_unit: dimension mismatch");
    return mv_normal_log_density(z, design.values * atom, lower);
}

double log_likelihood_unit(const Vector& z, const DesignMatrix& design, const Vector& atom, const Matrix& Sigma) {
    if (Sigma.rows() != z.size()) throw DomainError("log_likelihood_unit: dimension mismatch");
    return log_likelihood_unit_lower(z, design, atom, cholesky_lower(Sigma));
}

double mixture_density(const Vector& times, const DesignMatrix& design, const StickState& sticks,
                       const std::vector<Vector>& atoms, const Matrix& Sigma) {
    if ((times.array() <= 0.0).any()) throw DomainError("mixture_density: times must be positive");
    if (sticks.truncation_level() != atoms.size()) throw DomainError("mixture_density: weights and atoms disagree");
    const Matrix lower = cholesky_lower(Sigma);
    const Vector logt = times.array().log().matrix();
    std::vector<double> terms(atoms.size());
    for (std::size_t l = 0; l < atoms.size(); ++l)
        terms[l] = sticks.log_weights()[l] + log_likelihood_unit_lower(logt, design, atoms[l], lower);
    return std::exp(log_sum_exp(terms) - logt.sum());
}

Matrix feasible_latent(const Dataset& data) {
    const auto n = data.n_items;
    Matrix z = Matrix::Zero(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(2 * n));
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& it = data.units[i].items[j];
            if (!it.present) continue;
            const double lo = it.onset.lower;
            const double hi = std::min(it.onset.upper, it.event.upper);
            const double onset = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 1.0;
            const double elo = std::max(it.event.lower, onset);
            const double ehi = it.event.upper;
            const double event = std::isfinite(ehi) ? 0.5 * (elo + ehi) : elo + 1.0;
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::log(onset);
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + j)) = std::log(event - onset);
        }
    }
    return z;
}

std::optional<std::string> find_invariant_violation(const ModelState& state, const Dataset& data, double tolerance) {
    const auto n = data.n_items;
    const auto m = data.size();
    const auto N = state.atoms.size();
    if (static_cast<std::size_t>(state.z.rows()) != m || static_cast<std::size_t>(state.z.cols()) != 2 * n)
        return "latent matrix has the wrong shape";
    if (state.allocations.size() != m) return "allocation count differs from unit count";
    if (state.sticks.truncation_level() != N) return "stick and atom counts differ";
    for (std::size_t i = 0; i < m; ++i)
        if (state.allocations[i] >= N) return "unit " + data.units[i].unit_id + " allocated to invalid atom";
    if (!state.pd.valid()) return "PD parameters outside the admissible region";
    if (!is_pd(state.Sigma)) return "Sigma is not positive definite";
    if (!is_pd(state.base_cov)) return "base covariance is not positive definite";
    const auto& w = state.sticks.weights();
    double total = 0.0;
    for (double x : w) {
        if (!(x >= 0.0)) return "negative stick weight";
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-12) return "stick weights do not sum to one";
    auto slack = [tolerance](double x) { return tolerance * std::max(1.0, std::abs(x)); };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& it = data.units[i].items[j];
            if (!it.present) continue;
            const double onset = std::exp(state.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            const double gap = std::exp(state.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + j)));
            const double event = onset + gap;
            const std::string where = "unit " + data.units[i].unit_id + ", item " + std::to_string(j + 1);
            if (!(onset > it.onset.lower - slack(it.onset.lower)) || onset > it.onset.upper + slack(it.onset.upper))
                return where + ": onset outside its interval";
            if (!(event > it.event.lower - slack(it.event.lower)) || event > it.event.upper + slack(it.event.upper))
                return where + ": event outside its interval";
            if (!(gap > 0.0)) return where + ": nonpositive gap";
        }
    }
    return std::nullopt;
}

namespace {

double draw_a(const PriorSpec& priors, Rng& rng) {
    if (rng.uniform() < priors.lambda) return 0.0;
    return std::clamp(sample_beta(priors.alpha0, priors.alpha1, rng), DBL_MIN, 1.0 - DBL_EPSILON);
}

}  // namespace

ModelState draw_prior_state(const Dataset& data, const PriorSpec& priors, Rng& rng) {
    priors.validate_for(data);
    ModelState state;
    state.pd.a = draw_a(priors, rng);
    state.pd.b = sample_truncated_normal(priors.mu_b, priors.sigma_b, -state.pd.a, kInf, rng);
    const std::size_t N = priors.truncation_level;
    state.sticks = N >= 2 ? sample_sticks_prior(state.pd, N, rng) : StickState(std::vector<double>{1.0});
    state.base_mean = sample_mv_normal(MvNormalParams(priors.eta, priors.Upsilon), rng);
    state.base_cov = sample_inverse_wishart(InverseWishartParams(priors.gamma, priors.Gamma), rng);
    const MvNormalParams g0(state.base_mean, state.base_cov);
    state.atoms.resize(N);
    for (auto& atom : state.atoms) atom = sample_mv_normal(g0, rng);
    state.Sigma = sample_inverse_wishart(InverseWishartParams(priors.nu, priors.Omega), rng);
    state.allocations.resize(data.size());
    const auto& w = state.sticks.weights();
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    for (auto& c : state.allocations) c = pick(rng.engine());
    state.z = feasible_latent(data);
    return state;
}

ModelState initial_state(const Dataset& data, const std::vector<DesignMatrix>& designs, const PriorSpec& priors,
                         Rng& rng) {
    priors.validate_for(data);
    const auto d = static_cast<Eigen::Index>(data.coef_dim());
    const auto k = static_cast<Eigen::Index>(data.latent_dim());
    ModelState state;
    state.z = feasible_latent(data);

    Matrix xtx = 1e-6 * Matrix::Identity(d, d);
    Vector xtz = Vector::Zero(d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Matrix& x = designs[i].values;
        xtx.noalias() += x.transpose() * x;
        xtz.noalias() += x.transpose() * state.z.row(static_cast<Eigen::Index>(i)).transpose();
    }
    const Vector beta_hat = xtx.ldlt().solve(xtz);
    Matrix resid_cov = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vector r = state.z.row(static_cast<Eigen::Index>(i)).transpose() - designs[i].values * beta_hat;
        resid_cov.noalias() += r * r.transpose();
    }
    resid_cov /= static_cast<double>(std::max<std::size_t>(data.size(), 1));
    resid_cov += 1e-2 * Matrix::Identity(k, k);

    state.pd.a = priors.lambda > 0.0 ? 0.0 : priors.alpha0 / (priors.alpha0 + priors.alpha1);
    state.pd.b = std::max(priors.mu_b, 1.0);
    const std::size_t N = priors.truncation_level;
    std::vector<double> sticks(N, 1.0);
    for (std::size_t l = 0; l + 1 < N; ++l)
        sticks[l] = (1.0 - state.pd.a) / (1.0 - state.pd.a + state.pd.b + static_cast<double>(l + 1) * state.pd.a);
    state.sticks = StickState(std::move(sticks));

    state.base_mean = beta_hat;
    state.base_cov = Matrix::Identity(d, d);
    state.atoms.resize(N);
    state.atoms[0] = beta_hat;
    for (std::size_t l = 1; l < N; ++l) {
        Vector jitter(d);
        for (Eigen::Index c = 0; c < d; ++c) jitter(c) = 0.5 * rng.normal();
        state.atoms[l] = beta_hat + jitter;
    }
    state.Sigma = resid_cov;
    state.allocations.assign(data.size(), 0);
    return state;
}

}  // namespace ldpd
