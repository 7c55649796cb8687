#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ldpd/mcmc.hpp"

namespace ldpd {

/// On-disk layout of a fitted run (directory `draws/`):
///
///   manifest.json     run dimensions, chain settings, column names, kept
///                     iteration indices per chain
///   chain_K.csv       one row per kept snapshot of chain K
///   trace_K.csv       iteration, loglik, occupied for every sweep of chain K
///   chain_K.state     checkpoint (full state incl. latent times and RNG) as JSON
///
/// chain_K.csv columns, in order:
///   iteration, a, b,
///   V1..VN                      stick fractions
///   beta<l>_<k>                 atom l, coefficient k (l = 1..N, k = 1..n(p+q))
///   Sigma<j>_<k>                kernel covariance, row-major, all 2n x 2n entries
///   m<k>                        base-measure mean
///   S<j>_<k>                    base-measure covariance, row-major
///   loglik, occupied
///
/// Reals are written in shortest round-trip form, so reading a file back
/// reproduces every value bit for bit.
struct DrawDimensions {
    std::size_t n_items = 1;
    std::size_t p = 1;
    std::size_t q = 1;
    std::size_t truncation = 50;

    std::size_t latent_dim() const { return 2 * n_items; }
    std::size_t coef_dim() const { return n_items * (p + q); }
};

std::vector<std::string> draw_column_names(const DrawDimensions& dims);

struct ChainTrace {
    std::size_t first_iteration = 1;
    std::vector<double> log_likelihood;
    std::vector<std::size_t> occupied;
};

struct DrawManifest {
    int format_version = 1;
    DrawDimensions dims;
    std::size_t iterations = 0;
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    std::uint64_t seed = 0;
    double lambda = 0.5;
    std::vector<std::string> onset_covariate_names;
    std::vector<std::string> event_covariate_names;
};

struct DrawStore {
    DrawManifest manifest;
    std::vector<std::vector<Snapshot>> chains;
    std::vector<ChainTrace> traces;

    std::size_t total_draws() const;
    /// All snapshots, chain 0 first.
    std::vector<Snapshot> pooled() const;
};

void write_chain_draws(const std::vector<Snapshot>& draws, const DrawDimensions& dims, std::ostream& out);
std::vector<Snapshot> read_chain_draws(std::istream& in, const DrawDimensions& dims);

/// Writes manifest.json, chain_K.csv and trace_K.csv under `dir` (created if needed).
void save_draw_store(const DrawStore& store, const std::filesystem::path& dir);
/// Throws ValidationError if the manifest or any chain file is missing or malformed.
DrawStore load_draw_store(const std::filesystem::path& dir);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t chain);
void save_checkpoint(const ChainCheckpoint& cp, const std::filesystem::path& path);
ChainCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ldpd
