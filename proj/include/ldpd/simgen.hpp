#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ldpd/data.hpp"
#include "ldpd/functionals.hpp"
#include "ldpd/model.hpp"

namespace ldpd {

enum class Scenario { I, II };
enum class Group { A, B };

Scenario parse_scenario(const std::string& name);  // "I"/"1" or "II"/"2"; ValidationError otherwise
std::string scenario_name(Scenario s);
std::string group_name(Group g);

/// Examination times: first visit ~ N(7, 0.2^2), successive spacings ~ N(1, 0.05^2).
struct VisitSchedule {
    double first_visit_mean = 7.0;
    double first_visit_sd = 0.2;
    double gap_mean = 1.0;
    double gap_sd = 0.05;
    std::size_t n_visits = 6;

    void validate() const;
    /// Strictly increasing positive visit times; nonpositive draws are redrawn.
    std::vector<double> sample(Rng& rng) const;
};

ScenarioTruth scenario_truth(Scenario which, Group group);

/// (last visit before t, first visit >= t]; (0, s_1] before the first visit
/// and (s_K, inf) after the last.
CensoringInterval bracket(double t, const std::vector<double>& visits);

struct TrueTimes {
    std::string unit_id;
    Group group = Group::A;
    double onset = 0.0;
    double gap = 0.0;
    double event() const { return onset + gap; }
};

struct SimulatedData {
    Dataset data;
    std::vector<TrueTimes> truth;
};

/// m_per_group subjects from each group (A first). Covariates are an
/// intercept and the group-B indicator on both the onset and gap blocks.
SimulatedData generate(const ScenarioTruth& truth_a, const ScenarioTruth& truth_b, std::size_t m_per_group,
                       const VisitSchedule& schedule, std::uint64_t seed);

/// Profile of `group` under the covariate coding used by generate().
CovariateProfile group_profile(Group group, Target target);

// Exact marginal functionals of a generating mixture for T^O (Onset) or T^T (Gap).
double truth_cdf(const ScenarioTruth& truth, Target target, double t);
double truth_survival(const ScenarioTruth& truth, Target target, double t);
double truth_density(const ScenarioTruth& truth, Target target, double t);

void write_truth_csv(const std::vector<TrueTimes>& truth, const std::filesystem::path& path);

}  // namespace ldpd
