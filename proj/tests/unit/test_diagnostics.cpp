#include "doctest.h"

#include <cmath>

#include "ldpd/diagnostics.hpp"
#include "ldpd/errors.hpp"
#include "ldpd/rng.hpp"

using namespace ldpd;

namespace {

std::vector<double> ar1(double phi, std::size_t n, Rng& rng) {
    std::vector<double> x(n);
    double v = rng.normal() / std::sqrt(1.0 - phi * phi);
    for (auto& e : x) {
        v = phi * v + rng.normal();
        e = v;
    }
    return x;
}

}  // namespace

TEST_CASE("effective sample size") {
    Rng rng(1);
    SUBCASE("iid draws") {
        std::vector<double> x(10000);
        for (auto& v : x) v = rng.normal();
        CHECK(effective_sample_size(x) == doctest::Approx(10000.0).epsilon(0.1));
    }
    SUBCASE("AR(1) with phi = 0.9") {
        const std::size_t n = 100000;
        const auto x = ar1(0.9, n, rng);
        const double expected = n * (1.0 - 0.9) / (1.0 + 0.9);
        CHECK(effective_sample_size(x) == doctest::Approx(expected).epsilon(0.2));
    }
    SUBCASE("several chains add up") {
        const auto a = ar1(0.5, 20000, rng);
        const auto b = ar1(0.5, 20000, rng);
        CHECK(effective_sample_size({a, b}) ==
              doctest::Approx(effective_sample_size(a) + effective_sample_size(b)));
    }
    CHECK(std::isnan(effective_sample_size(std::vector<double>{1.0, 2.0, 3.0})));
    CHECK(std::isnan(effective_sample_size(std::vector<double>(100, 4.0))));
}

TEST_CASE("split R-hat") {
    SUBCASE("identical chains with identical halves") {
        // Halves match exactly, so the between-half variance is 0 and R-hat
        // is sqrt((n - 1) / n).
        std::vector<double> c(2000000);
        for (std::size_t t = 0; t < c.size(); ++t) c[t] = static_cast<double>(t % 8) - 3.5;
        CHECK(std::abs(split_rhat({c, c}) - 1.0) < 1e-6);
    }
    SUBCASE("well mixed and stuck chains") {
        Rng rng(2);
        std::vector<std::vector<double>> mixed(4, std::vector<double>(5000));
        for (auto& c : mixed)
            for (auto& v : c) v = rng.normal();
        CHECK(split_rhat(mixed) == doctest::Approx(1.0).epsilon(0.01));
        auto stuck = mixed;
        for (auto& v : stuck[0]) v += 3.0;
        CHECK(split_rhat(stuck) > 1.1);
        // A trend inside one chain is caught by the split.
        std::vector<double> trend(5000);
        for (std::size_t t = 0; t < trend.size(); ++t) trend[t] = static_cast<double>(t) / 1000.0 + rng.normal();
        CHECK(split_rhat({trend}) > 1.1);
    }
    CHECK(std::isnan(split_rhat({{1.0, 2.0, 3.0}})));
    CHECK(std::isnan(split_rhat({})));
}

TEST_CASE("batch means standard error") {
    Rng rng(3);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.normal();
    CHECK(batch_means_se(x) == doctest::Approx(1.0 / std::sqrt(1e5)).epsilon(0.25));
    const auto a = ar1(0.8, 200000, rng);
    // Long-run variance of AR(1) with unit innovations: 1 / (1 - phi)^2.
    CHECK(batch_means_se(a) == doctest::Approx(std::sqrt(1.0 / 0.04 / 2e5)).epsilon(0.25));
    CHECK_THROWS_AS(batch_means_se({1.0, 2.0}), DomainError);
}

TEST_CASE("Mann-Kendall") {
    std::vector<double> up(10);
    for (int i = 0; i < 10; ++i) up[static_cast<std::size_t>(i)] = i;
    const auto r = mann_kendall(up);
    CHECK(r.statistic == 45.0);
    // var S = n (n - 1)(2n + 5) / 18 = 125, continuity corrected.
    CHECK(r.z == doctest::Approx(44.0 / std::sqrt(125.0)));
    CHECK(r.p_value == doctest::Approx(std::erfc(r.z / std::sqrt(2.0))));

    const auto ties = mann_kendall({1.0, 1.0, 2.0});
    CHECK(ties.statistic == 2.0);
    // var S = [3*2*11 - 2*1*9] / 18
    CHECK(ties.z == doctest::Approx(1.0 / std::sqrt(48.0 / 18.0)));

    const auto down = mann_kendall({5.0, 4.0, 3.0, 2.0, 1.0});
    CHECK(down.statistic == -10.0);
    CHECK(down.z < 0.0);

    Rng rng(4);
    std::vector<double> noise(2000);
    for (auto& v : noise) v = rng.normal();
    CHECK(mann_kendall(noise).p_value > 0.01);
}

TEST_CASE("trace summaries") {
    Rng rng(5);
    std::vector<std::vector<double>> chains(2, std::vector<double>(4000));
    for (auto& c : chains)
        for (auto& v : c) v = 2.0 + rng.normal();
    const auto s = summarize_trace("theta", chains);
    CHECK(s.name == "theta");
    CHECK(s.mean == doctest::Approx(2.0).epsilon(0.02));
    CHECK(s.sd == doctest::Approx(1.0).epsilon(0.05));
    CHECK(s.q025 == doctest::Approx(2.0 - 1.96).epsilon(0.05));
    CHECK(s.q500 == doctest::Approx(2.0).epsilon(0.03));
    CHECK(s.q975 == doctest::Approx(2.0 + 1.96).epsilon(0.05));
    CHECK(s.ess > 6000.0);
    CHECK(s.rhat == doctest::Approx(1.0).epsilon(0.01));

    const auto single = summarize_trace("x", {{1.0, 2.0, 3.0}});
    CHECK(std::isnan(single.rhat));
    CHECK(std::isnan(single.ess));
    CHECK(single.mean == 2.0);
}
