#include "ldpd/mcmc.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <exception>
#include <thread>

#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kStepLogitA = 0.3;
constexpr double kStepLogB = 0.3;

Matrix inverse_from_lower(const Matrix& lower) {
    const auto d = lower.rows();
    const Matrix inv_lower = lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
    Matrix inv = inv_lower.transpose() * inv_lower;
    return 0.5 * (inv + inv.transpose());
}

double log_upper(double hi) {
    if (hi == kInf) return kInf;
    return hi > 0.0 ? std::log(hi) : -kInf;
}

double log_lower(double lo) { return lo > 0.0 ? std::log(lo) : -kInf; }

// Feasible (log lo, log hi] for coordinate k of one unit's latent vector given
// the current values of the other coordinates.
std::pair<double, double> latent_bounds(const ItemRecord& item, std::size_t n, std::size_t k, const Vector& z) {
    const bool onset = k < n;
    const std::size_t j = onset ? k : k - n;
    if (onset) {
        const double gap = std::exp(z(static_cast<Eigen::Index>(n + j)));
        const double lo = std::max({item.onset.lower, item.event.lower - gap, 0.0});
        const double hi = std::min(item.onset.upper, item.event.upper - gap);
        return {log_lower(lo), log_upper(hi)};
    }
    const double onset_time = std::exp(z(static_cast<Eigen::Index>(j)));
    const double lo = std::max(item.event.lower - onset_time, 0.0);
    const double hi = item.event.upper - onset_time;
    return {log_lower(lo), log_upper(hi)};
}

std::size_t sample_log_categorical(std::vector<double>& log_p, Rng& rng) {
    const double top = *std::max_element(log_p.begin(), log_p.end());
    if (!std::isfinite(top)) return log_p.size();
    double total = 0.0;
    for (auto& x : log_p) {
        x = std::exp(x - top);
        total += x;
    }
    double u = rng.uniform() * total;
    for (std::size_t l = 0; l < log_p.size(); ++l) {
        if (u < log_p[l]) return l;
        u -= log_p[l];
    }
    // Rounding left u at the very top; return the last positive entry.
    for (std::size_t l = log_p.size(); l-- > 0;)
        if (log_p[l] > 0.0) return l;
    return log_p.size();
}

Matrix atom_matrix(const std::vector<Vector>& atoms) {
    Matrix b(atoms.front().size(), static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t l = 0; l < atoms.size(); ++l) b.col(static_cast<Eigen::Index>(l)) = atoms[l];
    return b;
}

// Per-unit log weights + kernel log densities, written into `out`.
void allocation_log_weights(const ModelState& state, const DesignMatrix& design, const Vector& z, const Matrix& lower,
                            double log_norm, const Matrix& atoms, std::vector<double>& out) {
    const auto N = atoms.cols();
    Matrix resid = -(design.values * atoms);
    resid.colwise() += z;
    lower.triangularView<Eigen::Lower>().solveInPlace(resid);
    const auto& log_w = state.sticks.log_weights();
    out.resize(static_cast<std::size_t>(N));
    for (Eigen::Index l = 0; l < N; ++l)
        out[static_cast<std::size_t>(l)] = log_w[static_cast<std::size_t>(l)] + log_norm - 0.5 * resid.col(l).squaredNorm();
}

}  // namespace

void ChainConfig::validate() const {
    if (iterations == 0) throw ValidationError("chain: iterations must be positive");
    if (!(burn_in < iterations)) throw ValidationError("chain: burn_in must be smaller than iterations");
    if (thin < 1) throw ValidationError("chain: thin must be >= 1");
    if (n_chains < 1) throw ValidationError("chain: n_chains must be >= 1");
}

ModelContext::ModelContext(Dataset data_in, PriorSpec priors_in)
    : data(std::move(data_in)), designs(build_designs(data)), priors(std::move(priors_in)) {
    data.validate();
    priors.validate_for(data);
}

Snapshot take_snapshot(const ModelState& state, std::size_t iteration, double log_likelihood) {
    Snapshot s;
    s.iteration = iteration;
    s.pd = state.pd;
    s.sticks = state.sticks;
    s.atoms = state.atoms;
    s.Sigma = state.Sigma;
    s.base_mean = state.base_mean;
    s.base_cov = state.base_cov;
    s.log_likelihood = log_likelihood;
    s.occupied = state.occupied_clusters();
    return s;
}

void update_latent_times(ModelState& state, const ModelContext& ctx, Rng& rng) {
    const std::size_t n = ctx.data.n_items;
    const auto dim = static_cast<Eigen::Index>(2 * n);
    const Matrix precision = inverse_from_lower(cholesky_lower(state.Sigma));
    Vector mean(dim);
    Vector z(dim);

    auto conditional = [&](Eigen::Index k) {
        double s = 0.0;
        for (Eigen::Index l = 0; l < dim; ++l)
            if (l != k) s += precision(k, l) * (z(l) - mean(l));
        const double var = 1.0 / precision(k, k);
        return std::pair{mean(k) - var * s, std::sqrt(var)};
    };

    for (std::size_t i = 0; i < ctx.data.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto& unit = ctx.data.units[i];
        mean.noalias() = ctx.designs[i].values * state.atoms[state.allocations[i]];
        z = state.z.row(row).transpose();
        for (Eigen::Index k = 0; k < dim; ++k) {
            const auto [cm, csd] = conditional(k);
            const auto& item = unit.items[static_cast<std::size_t>(k) % n];
            if (!item.present) {
                z(k) = cm + csd * rng.normal();
                continue;
            }
            auto [lo, hi] = latent_bounds(item, n, static_cast<std::size_t>(k), z);
            if (!(lo < hi)) {
                // Move the partner coordinate within its own feasible range and retry.
                const auto partner = static_cast<Eigen::Index>(static_cast<std::size_t>(k) < n ? k + static_cast<Eigen::Index>(n)
                                                                                               : k - static_cast<Eigen::Index>(n));
                const auto [pm, psd] = conditional(partner);
                const auto [plo, phi] = latent_bounds(item, n, static_cast<std::size_t>(partner), z);
                if (plo < phi) z(partner) = sample_truncated_normal(pm, psd, plo, phi, rng);
                std::tie(lo, hi) = latent_bounds(item, n, static_cast<std::size_t>(k), z);
                if (!(lo < hi))
                    throw NumericalError("latent update: empty feasible interval for unit " + unit.unit_id + ", item " +
                                         std::to_string(static_cast<std::size_t>(k) % n + 1));
            }
            z(k) = sample_truncated_normal(cm, csd, lo, hi, rng);
        }
        state.z.row(row) = z.transpose();
    }
}

std::vector<double> allocation_probabilities(const ModelState& state, const ModelContext& ctx, std::size_t unit) {
    const Matrix lower = cholesky_lower(state.Sigma);
    const double log_norm = -0.5 * (log_det_from_lower(lower) + static_cast<double>(lower.rows()) * kLogTwoPi);
    std::vector<double> log_p;
    allocation_log_weights(state, ctx.designs[unit], state.z.row(static_cast<Eigen::Index>(unit)).transpose(), lower,
                           log_norm, atom_matrix(state.atoms), log_p);
    const double top = *std::max_element(log_p.begin(), log_p.end());
    if (!std::isfinite(top)) throw NumericalError("allocation: all weights vanish for unit " + ctx.data.units[unit].unit_id);
    double total = 0.0;
    for (auto& x : log_p) {
        x = std::exp(x - top);
        total += x;
    }
    for (auto& x : log_p) x /= total;
    return log_p;
}

void update_allocations(ModelState& state, const ModelContext& ctx, Rng& rng) {
    const Matrix lower = cholesky_lower(state.Sigma);
    const double log_norm = -0.5 * (log_det_from_lower(lower) + static_cast<double>(lower.rows()) * kLogTwoPi);
    const Matrix atoms = atom_matrix(state.atoms);
    std::vector<double> log_p;
    for (std::size_t i = 0; i < ctx.data.size(); ++i) {
        allocation_log_weights(state, ctx.designs[i], state.z.row(static_cast<Eigen::Index>(i)).transpose(), lower,
                               log_norm, atoms, log_p);
        const auto label = sample_log_categorical(log_p, rng);
        if (label >= log_p.size())
            throw NumericalError("allocation: all weights vanish for unit " + ctx.data.units[i].unit_id);
        state.allocations[i] = label;
    }
}

void update_sticks(ModelState& state, Rng& rng) {
    const std::size_t N = state.truncation_level();
    const auto counts = state.cluster_counts();
    std::vector<double> sticks(N, 1.0);
    std::size_t beyond = 0;
    for (auto c : counts) beyond += c;
    for (std::size_t l = 0; l + 1 < N; ++l) {
        beyond -= counts[l];
        const double j = static_cast<double>(l + 1);
        const double shape_a = 1.0 - state.pd.a + static_cast<double>(counts[l]);
        const double shape_b = state.pd.b + j * state.pd.a + static_cast<double>(beyond);
        sticks[l] = clamp_stick(sample_beta(shape_a, shape_b, rng));
    }
    state.sticks.set_sticks(std::move(sticks));
}

void update_atoms(ModelState& state, const ModelContext& ctx, Rng& rng) {
    const std::size_t N = state.truncation_level();
    const Matrix base_lower = cholesky_lower(state.base_cov);
    const Matrix base_precision = inverse_from_lower(base_lower);
    const Vector base_linear = base_precision * state.base_mean;
    const Matrix kernel_precision = inverse_from_lower(cholesky_lower(state.Sigma));

    std::vector<Matrix> precision(N);
    std::vector<Vector> linear(N);
    std::vector<bool> occupied(N, false);
    Matrix xt_prec;
    for (std::size_t i = 0; i < ctx.data.size(); ++i) {
        const auto c = state.allocations[i];
        if (!occupied[c]) {
            occupied[c] = true;
            precision[c] = base_precision;
            linear[c] = base_linear;
        }
        const Matrix& x = ctx.designs[i].values;
        xt_prec.noalias() = x.transpose() * kernel_precision;
        precision[c].noalias() += xt_prec * x;
        linear[c].noalias() += xt_prec * state.z.row(static_cast<Eigen::Index>(i)).transpose();
    }
    const MvNormalParams g0(state.base_mean, state.base_cov);
    for (std::size_t l = 0; l < N; ++l) {
        if (occupied[l]) {
            state.atoms[l] = sample_mv_normal_canonical(0.5 * (precision[l] + precision[l].transpose()), linear[l], rng);
        } else {
            state.atoms[l] = sample_mv_normal(g0, rng);
        }
    }
}

void update_kernel_covariance(ModelState& state, const ModelContext& ctx, Rng& rng) {
    Matrix scale = ctx.priors.Omega;
    Vector r;
    for (std::size_t i = 0; i < ctx.data.size(); ++i) {
        r = state.z.row(static_cast<Eigen::Index>(i)).transpose() - ctx.designs[i].values * state.atoms[state.allocations[i]];
        scale.noalias() += r * r.transpose();
    }
    scale = 0.5 * (scale + scale.transpose());
    state.Sigma = sample_inverse_wishart(InverseWishartParams(ctx.priors.nu + static_cast<double>(ctx.data.size()), scale), rng);
}

void update_base_measure(ModelState& state, const PriorSpec& priors, Rng& rng) {
    const auto N = static_cast<double>(state.truncation_level());
    const Matrix ups_precision = inverse_from_lower(cholesky_lower(priors.Upsilon));
    const Matrix base_precision = inverse_from_lower(cholesky_lower(state.base_cov));
    Vector atom_sum = Vector::Zero(state.base_mean.size());
    for (const auto& atom : state.atoms) atom_sum += atom;
    const Matrix precision = ups_precision + N * base_precision;
    const Vector linear = ups_precision * priors.eta + base_precision * atom_sum;
    state.base_mean = sample_mv_normal_canonical(0.5 * (precision + precision.transpose()), linear, rng);

    Matrix scale = priors.Gamma;
    for (const auto& atom : state.atoms) {
        const Vector r = atom - state.base_mean;
        scale.noalias() += r * r.transpose();
    }
    scale = 0.5 * (scale + scale.transpose());
    state.base_cov = sample_inverse_wishart(InverseWishartParams(priors.gamma + N, scale), rng);
}

PdMoveResult update_pd_params(ModelState& state, const PriorSpec& priors, Rng& rng) {
    PdMoveResult result;
    const auto& sticks = state.sticks.sticks();
    auto log_target = [&](double a, double b) {
        if (!(a >= 0.0 && a < 1.0) || !(b > -a)) return -kInf;
        const double prior = priors.log_prior_a(a) + priors.log_prior_b(b, a);
        if (!std::isfinite(prior)) return -kInf;
        return prior + stick_log_likelihood(sticks, {a, b});
    };
    double a = state.pd.a;
    double b = state.pd.b;
    double current = log_target(a, b);

    // Move 1: jump between the spike (a = 0) and the slab. From the spike the
    // proposal is the slab density itself, so it cancels against the prior.
    if (a == 0.0 && priors.lambda < 1.0) {
        result.trans_proposed = true;
        const double a_new = std::clamp(sample_beta(priors.alpha0, priors.alpha1, rng), DBL_MIN, 1.0 - DBL_EPSILON);
        const double proposed = log_target(a_new, b);
        const double log_ratio = proposed - current - log_beta_density(a_new, priors.alpha0, priors.alpha1);
        if (std::log(rng.uniform()) < log_ratio) {
            a = a_new;
            current = proposed;
            result.trans_accepted = true;
        }
    } else if (a > 0.0 && priors.lambda > 0.0) {
        result.trans_proposed = true;
        const double proposed = log_target(0.0, b);
        const double log_ratio = proposed - current + log_beta_density(a, priors.alpha0, priors.alpha1);
        if (std::log(rng.uniform()) < log_ratio) {
            a = 0.0;
            current = proposed;
            result.trans_accepted = true;
        }
    }

    // Move 2: random walk on logit(a) inside the slab.
    if (a > 0.0) {
        result.slab_proposed = true;
        const double x = std::log(a) - std::log1p(-a) + kStepLogitA * rng.normal();
        const double a_new = 1.0 / (1.0 + std::exp(-x));
        if (a_new > 0.0 && a_new < 1.0) {
            const double proposed = log_target(a_new, b);
            const double log_jacobian = std::log(a_new) + std::log1p(-a_new) - std::log(a) - std::log1p(-a);
            if (std::log(rng.uniform()) < proposed - current + log_jacobian) {
                a = a_new;
                current = proposed;
                result.slab_accepted = true;
            }
        }
    }

    // Move 3: random walk on log(b + a).
    {
        const double s = std::log(b + a);
        const double s_new = s + kStepLogB * rng.normal();
        const double b_new = std::exp(s_new) - a;
        const double proposed = log_target(a, b_new);
        if (std::log(rng.uniform()) < proposed - current + (s_new - s)) {
            b = b_new;
            current = proposed;
            result.b_accepted = true;
        }
    }
    state.pd = {a, b};
    return result;
}

double complete_log_likelihood(const ModelState& state, const ModelContext& ctx) {
    const Matrix lower = cholesky_lower(state.Sigma);
    double total = 0.0;
    for (std::size_t i = 0; i < ctx.data.size(); ++i)
        total += log_likelihood_unit_lower(state.z.row(static_cast<Eigen::Index>(i)).transpose(), ctx.designs[i],
                                           state.atoms[state.allocations[i]], lower);
    return total;
}

PdMoveResult sweep(ModelState& state, const ModelContext& ctx, Rng& rng) {
    update_latent_times(state, ctx, rng);
    update_allocations(state, ctx, rng);
    update_sticks(state, rng);
    update_atoms(state, ctx, rng);
    update_kernel_covariance(state, ctx, rng);
    update_base_measure(state, ctx.priors, rng);
    return update_pd_params(state, ctx.priors, rng);
}

PosteriorDraws run_chain(const ModelContext& ctx, const ChainConfig& config, std::size_t chain_id,
                         std::optional<ChainCheckpoint> resume) {
    config.validate();
    ChainCheckpoint cp;
    if (resume) {
        cp = std::move(*resume);
    } else {
        cp.rng = Rng::derive(config.seed, chain_id);
        cp.state = initial_state(ctx.data, ctx.designs, ctx.priors, cp.rng);
    }
    PosteriorDraws out;
    out.chain_id = chain_id;
    out.first_iteration = cp.completed_iterations + 1;
    if (config.iterations > cp.completed_iterations) {
        const auto remaining = config.iterations - cp.completed_iterations;
        out.log_likelihood_trace.reserve(remaining);
        out.occupied_trace.reserve(remaining);
    }
    for (std::size_t t = cp.completed_iterations + 1; t <= config.iterations; ++t) {
        PdMoveResult moves;
        double ll = 0.0;
        try {
            moves = sweep(cp.state, ctx, cp.rng);
            ll = complete_log_likelihood(cp.state, ctx);
            if (config.check_invariants) {
                if (auto violation = find_invariant_violation(cp.state, ctx.data))
                    throw NumericalError("invariant violated: " + *violation);
            }
        } catch (const std::exception& e) {
            throw NumericalError("chain " + std::to_string(chain_id) + ", sweep " + std::to_string(t) + ": " + e.what());
        }
        auto& acc = cp.acceptance;
        acc.trans_proposed += moves.trans_proposed;
        acc.trans_accepted += moves.trans_accepted;
        acc.slab_proposed += moves.slab_proposed;
        acc.slab_accepted += moves.slab_accepted;
        acc.b_proposed += 1;
        acc.b_accepted += moves.b_accepted;
        out.log_likelihood_trace.push_back(ll);
        out.occupied_trace.push_back(cp.state.occupied_clusters());
        if (config.keeps(t)) out.states.push_back(take_snapshot(cp.state, t, ll));
        cp.completed_iterations = t;
    }
    out.acceptance = cp.acceptance;
    out.checkpoint = std::move(cp);
    return out;
}

std::vector<PosteriorDraws> run_chains(const ModelContext& ctx, const ChainConfig& config,
                                       std::vector<ChainCheckpoint> resume) {
    config.validate();
    if (!resume.empty() && resume.size() != config.n_chains)
        throw ValidationError("run_chains: expected one checkpoint per chain");
    std::vector<PosteriorDraws> results(config.n_chains);
    std::vector<std::exception_ptr> errors(config.n_chains);
    {
        std::vector<std::jthread> workers;
        for (std::size_t c = 0; c < config.n_chains; ++c) {
            workers.emplace_back([&, c] {
                try {
                    std::optional<ChainCheckpoint> start;
                    if (!resume.empty()) start = std::move(resume[c]);
                    results[c] = run_chain(ctx, config, c, std::move(start));
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace ldpd
