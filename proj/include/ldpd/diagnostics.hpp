#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ldpd {

/// Effective sample size of one trace using Geyer's initial monotone sequence
/// estimator. NaN for constant traces.
double effective_sample_size(const std::vector<double>& trace);

/// Sum of per-chain effective sample sizes.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Split potential scale reduction: every chain is halved and the classic
/// between/within variance ratio is computed over the 2 * chains halves.
/// Chains are truncated to the shortest length. NaN if a half has zero variance
/// throughout or fewer than 4 draws are available.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Standard error of the mean by non-overlapping batch means.
double batch_means_se(const std::vector<double>& trace, std::size_t batches = 50);

struct MannKendallResult {
    double statistic = 0.0;  // S
    double z = 0.0;
    double p_value = 1.0;    // two-sided
};

/// Mann-Kendall trend test (normal approximation with tie correction).
MannKendallResult mann_kendall(const std::vector<double>& series);

struct TraceSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q500 = 0.0;
    double q975 = 0.0;
    double ess = 0.0;
    double rhat = 0.0;  // NaN when skipped
};

/// Summary of a scalar parameter across chains. R-hat is skipped (NaN) for a
/// single chain shorter than 4 draws.
TraceSummary summarize_trace(const std::string& name, const std::vector<std::vector<double>>& chains);

}  // namespace ldpd
