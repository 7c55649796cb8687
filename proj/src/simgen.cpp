#include "ldpd/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ldpd/errors.hpp"

namespace ldpd {

namespace {

MixtureComponent component(double weight, double m1, double m2, double scale, double c11, double c12, double c22) {
    MixtureComponent c;
    c.weight = weight;
    c.mean = Vector(2);
    c.mean << m1, m2;
    c.covariance = Matrix(2, 2);
    c.covariance << c11, c12, c12, c22;
    c.covariance *= scale;
    return c;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "I" || name == "1") return Scenario::I;
    if (name == "II" || name == "2") return Scenario::II;
    throw ValidationError("unknown scenario '" + name + "' (expected I or II)");
}

std::string scenario_name(Scenario s) { return s == Scenario::I ? "I" : "II"; }
std::string group_name(Group g) { return g == Group::A ? "A" : "B"; }

void VisitSchedule::validate() const {
    if (!(first_visit_sd > 0.0 && gap_sd > 0.0)) throw ValidationError("visit schedule: sds must be positive");
    if (n_visits < 1) throw ValidationError("visit schedule: need at least one visit");
}

std::vector<double> VisitSchedule::sample(Rng& rng) const {
    std::vector<double> visits;
    visits.reserve(n_visits);
    double first = 0.0;
    do {
        first = first_visit_mean + first_visit_sd * rng.normal();
    } while (!(first > 0.0));
    visits.push_back(first);
    while (visits.size() < n_visits) {
        const double gap = gap_mean + gap_sd * rng.normal();
        if (gap > 0.0) visits.push_back(visits.back() + gap);
    }
    return visits;
}

ScenarioTruth scenario_truth(Scenario which, Group group) {
    ScenarioTruth t;
    if (which == Scenario::I) {
        if (group == Group::A) {
            t.components.push_back(component(0.5, 1.80, 0.75, 1e-3, 5.00, 2.50, 300.0));
            t.components.push_back(component(0.5, 2.40, 3.00, 1e-3, 2.50, 1.25, 100.0));
        } else {
            t.components.push_back(component(1.0, 2.1, 2.2, 1e-2, 3.24, 8.10, 64.0));
        }
    } else {
        if (group == Group::A) {
            t.components.push_back(component(0.5, 1.8, 2.2, 1e-3, 5.50, 2.50, 640.0));
            t.components.push_back(component(0.5, 2.4, 2.2, 1e-3, 2.50, 1.25, 640.0));
        } else {
            t.components.push_back(component(0.5, 2.10, 0.75, 1e-2, 3.24, 8.10, 30.00));
            t.components.push_back(component(0.5, 2.10, 0.75, 1e-3, 32.4, 1.25, 100.0));
        }
    }
    t.validate();
    return t;
}

CensoringInterval bracket(double t, const std::vector<double>& visits) {
    if (visits.empty()) return {0.0, kInf};
    const auto it = std::lower_bound(visits.begin(), visits.end(), t);  // first visit >= t
    if (it == visits.end()) return {visits.back(), kInf};
    if (it == visits.begin()) return {0.0, *it};
    return {*(it - 1), *it};
}

SimulatedData generate(const ScenarioTruth& truth_a, const ScenarioTruth& truth_b, std::size_t m_per_group,
                       const VisitSchedule& schedule, std::uint64_t seed) {
    if (m_per_group < 1) throw ValidationError("generate: m_per_group must be >= 1");
    truth_a.validate();
    truth_b.validate();
    schedule.validate();
    Rng rng(seed);
    SimulatedData out;
    auto& data = out.data;
    data.n_items = 1;
    data.p = 2;
    data.q = 2;
    data.onset_covariate_names = {"intercept", "group"};
    data.event_covariate_names = {"intercept", "group"};

    std::size_t next_id = 1;
    for (const Group group : {Group::A, Group::B}) {
        const auto& truth = group == Group::A ? truth_a : truth_b;
        std::vector<MvNormalParams> kernels;
        std::vector<double> weights;
        for (const auto& c : truth.components) {
            kernels.emplace_back(c.mean, c.covariance);
            weights.push_back(c.weight);
        }
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        for (std::size_t s = 0; s < m_per_group; ++s) {
            const auto k = pick(rng.engine());
            const Vector logt = sample_mv_normal(kernels[k], rng);
            TrueTimes tt;
            tt.unit_id = std::to_string(next_id++);
            tt.group = group;
            tt.onset = std::exp(logt(0));
            tt.gap = std::exp(logt(1));
            const auto visits = schedule.sample(rng);

            ItemRecord rec;
            rec.present = true;
            rec.onset = bracket(tt.onset, visits);
            rec.event = bracket(tt.event(), visits);
            rec.onset_covariates = Vector(2);
            rec.onset_covariates << 1.0, group == Group::B ? 1.0 : 0.0;
            rec.event_covariates = rec.onset_covariates;
            IntervalObservation obs;
            obs.unit_id = tt.unit_id;
            obs.items.push_back(std::move(rec));
            data.units.push_back(std::move(obs));
            out.truth.push_back(tt);
        }
    }
    data.validate();
    return out;
}

CovariateProfile group_profile(Group group, Target target) {
    CovariateProfile p;
    p.id = "group" + group_name(group) + (target == Target::Onset ? "_onset" : "_gap");
    p.onset_covariates = Vector(2);
    p.onset_covariates << 1.0, group == Group::B ? 1.0 : 0.0;
    p.event_covariates = p.onset_covariates;
    p.item = 0;
    p.target = target;
    return p;
}

namespace {
template <class F>
double truth_sum(const ScenarioTruth& truth, Target target, F&& term) {
    const Eigen::Index k = target == Target::Onset ? 0 : 1;
    double total = 0.0;
    for (const auto& c : truth.components) total += c.weight * term(c.mean(k), c.covariance(k, k));
    return total;
}
}  // namespace

double truth_cdf(const ScenarioTruth& truth, Target target, double t) {
    return truth_sum(truth, target, [t](double m, double v) { return lognormal_cdf(t, m, v); });
}

double truth_survival(const ScenarioTruth& truth, Target target, double t) {
    return truth_sum(truth, target, [t](double m, double v) { return lognormal_sf(t, m, v); });
}

double truth_density(const ScenarioTruth& truth, Target target, double t) {
    return truth_sum(truth, target, [t](double m, double v) { return lognormal_pdf(t, m, v); });
}

void write_truth_csv(const std::vector<TrueTimes>& truth, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << "unit_id,item,group,onset_time,gap_time,event_time\n";
    for (const auto& t : truth)
        out << t.unit_id << ",1," << group_name(t.group) << ',' << format_double(t.onset) << ','
            << format_double(t.gap) << ',' << format_double(t.event()) << '\n';
}

}  // namespace ldpd
