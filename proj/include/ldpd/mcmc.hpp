#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ldpd/data.hpp"
#include "ldpd/model.hpp"
#include "ldpd/rng.hpp"

namespace ldpd {

struct ChainConfig {
    std::size_t iterations = 1000;
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::size_t n_chains = 1;
    bool check_invariants = false;  // verify ModelState invariants after every sweep

    void validate() const;
    std::size_t expected_snapshots() const { return (iterations - burn_in) / thin; }
    bool keeps(std::size_t iteration) const { return iteration > burn_in && (iteration - burn_in) % thin == 0; }
};

/// Dataset with its prebuilt design matrices and the prior it is fitted under.
struct ModelContext {
    Dataset data;
    std::vector<DesignMatrix> designs;
    PriorSpec priors;

    ModelContext(Dataset data, PriorSpec priors);
};

/// Reduced state kept after thinning. Latent times are not stored.
struct Snapshot {
    std::size_t iteration = 0;
    PDParams pd;
    StickState sticks;
    std::vector<Vector> atoms;
    Matrix Sigma;
    Vector base_mean;
    Matrix base_cov;
    double log_likelihood = 0.0;
    std::size_t occupied = 0;
};

Snapshot take_snapshot(const ModelState& state, std::size_t iteration, double log_likelihood);

struct AcceptanceCounts {
    std::size_t trans_proposed = 0;
    std::size_t trans_accepted = 0;
    std::size_t slab_proposed = 0;
    std::size_t slab_accepted = 0;
    std::size_t b_proposed = 0;
    std::size_t b_accepted = 0;

    static double rate(std::size_t accepted, std::size_t proposed) {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
};

/// Everything needed to continue a chain bit-identically.
struct ChainCheckpoint {
    ModelState state;
    Rng rng;
    std::size_t completed_iterations = 0;
    AcceptanceCounts acceptance;
};

struct PosteriorDraws {
    std::size_t chain_id = 0;
    std::vector<Snapshot> states;
    std::vector<double> log_likelihood_trace;    // one entry per sweep run in this call
    std::vector<std::size_t> occupied_trace;     // one entry per sweep run in this call
    std::size_t first_iteration = 1;             // sweep index of the first trace entry
    AcceptanceCounts acceptance;
    ChainCheckpoint checkpoint;                  // state after the last sweep
};

struct PdMoveResult {
    bool trans_proposed = false;
    bool trans_accepted = false;
    bool slab_proposed = false;
    bool slab_accepted = false;
    bool b_accepted = false;
};

// Individual Gibbs blocks. Each leaves its full conditional invariant.

/// Single-site update of every latent log-time given its 2n - 1 partners,
/// truncated to the censoring region it is consistent with.
void update_latent_times(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_allocations(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_sticks(ModelState& state, Rng& rng);
void update_atoms(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_kernel_covariance(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_base_measure(ModelState& state, const PriorSpec& priors, Rng& rng);
PdMoveResult update_pd_params(ModelState& state, const PriorSpec& priors, Rng& rng);

/// Allocation probabilities for one unit (exposed for testing).
std::vector<double> allocation_probabilities(const ModelState& state, const ModelContext& ctx, std::size_t unit);

/// sum_i log N_{2n}(z_i | X_i beta_{c_i}, Sigma)
double complete_log_likelihood(const ModelState& state, const ModelContext& ctx);

/// One full sweep in the fixed order latent times, allocations, sticks,
/// atoms, Sigma, (m, S), (a, b).
PdMoveResult sweep(ModelState& state, const ModelContext& ctx, Rng& rng);

/// Runs sweeps completed+1 .. config.iterations of one chain. Without a
/// checkpoint the chain starts from initial_state with the stream derived from
/// (config.seed, chain_id).
PosteriorDraws run_chain(const ModelContext& ctx, const ChainConfig& config, std::size_t chain_id = 0,
                         std::optional<ChainCheckpoint> resume = std::nullopt);

/// config.n_chains chains on worker threads; results ordered by chain id.
/// `resume`, if non-empty, holds one checkpoint per chain.
std::vector<PosteriorDraws> run_chains(const ModelContext& ctx, const ChainConfig& config,
                                       std::vector<ChainCheckpoint> resume = {});

}  // namespace ldpd
