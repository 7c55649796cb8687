#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ldpd/errors.hpp"
#include "ldpd/simgen.hpp"
#include "support.hpp"

using namespace ldpd;

TEST_CASE("scenario parameters") {
    const auto ia = scenario_truth(Scenario::I, Group::A);
    REQUIRE(ia.components.size() == 2);
    CHECK(ia.components[0].weight == 0.5);
    CHECK(ia.components[1].weight == 0.5);
    CHECK(ia.components[0].mean(0) == 1.80);
    CHECK(ia.components[0].mean(1) == 0.75);
    CHECK(ia.components[0].covariance(1, 1) == doctest::Approx(0.3));
    CHECK(ia.components[1].covariance(0, 1) == doctest::Approx(1.25e-3));

    const auto ib = scenario_truth(Scenario::I, Group::B);
    REQUIRE(ib.components.size() == 1);
    CHECK(ib.components[0].mean(0) == 2.1);
    CHECK(ib.components[0].mean(1) == 2.2);
    CHECK(ib.components[0].covariance(0, 1) == doctest::Approx(0.081));

    const auto iib = scenario_truth(Scenario::II, Group::B);
    REQUIRE(iib.components.size() == 2);
    for (const auto& c : iib.components) {
        CHECK(c.mean(0) == 2.10);
        CHECK(c.mean(1) == 0.75);
    }
    CHECK(iib.components[0].covariance != iib.components[1].covariance);
    CHECK(scenario_truth(Scenario::II, Group::A).components.size() == 2);

    CHECK(parse_scenario("I") == Scenario::I);
    CHECK(parse_scenario("2") == Scenario::II);
    CHECK_THROWS_AS(parse_scenario("III"), ValidationError);
    CHECK(scenario_name(Scenario::II) == "II");
}

TEST_CASE("bracketing by visit times") {
    const std::vector<double> visits = {7.0, 8.0, 9.0, 10.0, 11.0, 12.0};
    auto iv = bracket(7.5, visits);
    CHECK(iv.lower == 7.0);
    CHECK(iv.upper == 8.0);
    iv = bracket(6.5, visits);
    CHECK(iv.left_censored());
    CHECK(iv.upper == 7.0);
    iv = bracket(13.0, visits);
    CHECK(iv.lower == 12.0);
    CHECK(iv.right_censored());
    iv = bracket(8.0, visits);  // a visit exactly at t closes the interval
    CHECK(iv.lower == 7.0);
    CHECK(iv.upper == 8.0);
}

TEST_CASE("visit schedules are increasing") {
    Rng rng(1);
    VisitSchedule s;
    for (int r = 0; r < 1000; ++r) {
        const auto v = s.sample(rng);
        REQUIRE(v.size() == 6);
        CHECK(v[0] > 0.0);
        CHECK(std::is_sorted(v.begin(), v.end()));
        CHECK(std::adjacent_find(v.begin(), v.end()) == v.end());
    }
    s.gap_sd = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("generate") {
    const auto ta = scenario_truth(Scenario::I, Group::A);
    const auto tb = scenario_truth(Scenario::I, Group::B);
    const auto sim = generate(ta, tb, 250, VisitSchedule{}, 17);
    REQUIRE(sim.data.size() == 500);
    REQUIRE(sim.truth.size() == 500);
    CHECK(sim.data.p == 2);
    CHECK(sim.data.q == 2);
    std::size_t in_b = 0;
    for (std::size_t i = 0; i < 500; ++i) {
        const auto& rec = sim.data.units[i].items[0];
        const bool b = rec.onset_covariates(1) == 1.0;
        in_b += b;
        CHECK(b == (sim.truth[i].group == Group::B));
        CHECK(rec.onset.contains(sim.truth[i].onset));
        CHECK(rec.event.contains(sim.truth[i].event()));
    }
    CHECK(in_b == 250);

    const auto again = generate(ta, tb, 250, VisitSchedule{}, 17);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(again.truth[i].onset == sim.truth[i].onset);
        CHECK(again.truth[i].gap == sim.truth[i].gap);
        CHECK(again.data.units[i].items[0].event.upper == sim.data.units[i].items[0].event.upper);
    }
    CHECK_THROWS_AS(generate(ta, tb, 0, VisitSchedule{}, 1), ValidationError);
}

TEST_CASE("coverage and moments over 10^4 subjects") {
    const auto ta = scenario_truth(Scenario::II, Group::A);
    const auto tb = scenario_truth(Scenario::II, Group::B);
    const auto sim = generate(ta, tb, 10000, VisitSchedule{}, 3);
    std::vector<double> lo, lg;
    for (std::size_t i = 0; i < sim.data.size(); ++i) {
        const auto& rec = sim.data.units[i].items[0];
        REQUIRE(rec.onset.contains(sim.truth[i].onset));
        REQUIRE(rec.event.contains(sim.truth[i].event()));
        if (sim.truth[i].group == Group::A) {
            lo.push_back(std::log(sim.truth[i].onset));
            lg.push_back(std::log(sim.truth[i].gap));
        }
    }
    // Mixture moments: mean sum w mu, variance sum w (s2 + mu^2) - mean^2.
    for (int k = 0; k < 2; ++k) {
        double mu = 0.0, second = 0.0;
        for (const auto& c : ta.components) {
            mu += c.weight * c.mean(k);
            second += c.weight * (c.covariance(k, k) + c.mean(k) * c.mean(k));
        }
        const double var = second - mu * mu;
        const auto& x = k == 0 ? lo : lg;
        CHECK(std::abs(testing::mean(x) - mu) < 4.0 * std::sqrt(var / x.size()));
        CHECK(testing::variance(x) == doctest::Approx(var).epsilon(0.05));
    }
}

TEST_CASE("truth functionals") {
    const auto tb = scenario_truth(Scenario::I, Group::B);
    // Single component: median of T^O is exp(2.1).
    CHECK(truth_cdf(tb, Target::Onset, std::exp(2.1)) == doctest::Approx(0.5));
    CHECK(truth_cdf(tb, Target::Gap, 3.0) + truth_survival(tb, Target::Gap, 3.0) == doctest::Approx(1.0));
    const double integral =
        testing::simpson([&](double t) { return truth_density(tb, Target::Onset, t); }, 1e-9, 60.0, 20000);
    CHECK(integral == doctest::Approx(truth_cdf(tb, Target::Onset, 60.0)).epsilon(1e-6));

    const auto p = group_profile(Group::B, Target::Gap);
    CHECK(p.onset_covariates(1) == 1.0);
    CHECK(p.target == Target::Gap);
}

TEST_CASE("truth csv") {
    const auto sim = generate(scenario_truth(Scenario::I, Group::A), scenario_truth(Scenario::I, Group::B), 2,
                              VisitSchedule{}, 1);
    const auto path = std::filesystem::temp_directory_path() / "ldpd_truth_test.csv";
    write_truth_csv(sim.truth, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "unit_id,item,group,onset_time,gap_time,event_time");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 4);
    std::filesystem::remove(path);
}
