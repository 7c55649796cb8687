#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ldpd/errors.hpp"
#include "ldpd/model.hpp"
#include "support.hpp"

using namespace ldpd;

namespace {

Dataset small_dataset() {
    std::istringstream in(
        "unit_id,item,onset_lo,onset_hi,event_lo,event_hi,intercept,V\n"
        "u1,1,0,7,9,10,1,0\n"
        "u2,1,6,7,7.5,inf,1,1\n"
        "u3,1,2,inf,2.5,inf,1,0\n"
        "u4,1,1,3,3,4,1,1\n");
    return parse_csv(in);
}

DesignMatrix identity_design() {
    DesignMatrix x;
    x.n_items = 1;
    x.p = 1;
    x.q = 1;
    x.values = Matrix::Identity(2, 2);
    return x;
}

}  // namespace

TEST_CASE("prior defaults and validation") {
    const auto spec = PriorSpec::defaults(2, 2, 3);
    CHECK(spec.latent_dim() == 4);
    CHECK(spec.coef_dim() == 10);
    CHECK(spec.nu == 6.0);
    CHECK(spec.gamma == 11.0);
    CHECK(spec.Upsilon(3, 3) == 100.0);
    CHECK(spec.truncation_level == 50);
    CHECK_NOTHROW(spec.validate());

    auto bad = spec;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = spec;
    bad.nu = 3.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = spec;
    bad.sigma_b = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = spec;
    bad.Omega(0, 0) = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = spec;
    bad.truncation_level = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    const auto data = small_dataset();
    CHECK_THROWS_AS(spec.validate_for(data), ValidationError);
    CHECK_NOTHROW(PriorSpec::defaults(1, 2, 2).validate_for(data));
}

TEST_CASE("log prior of a is a spike plus a scaled beta") {
    PriorSpec spec = PriorSpec::defaults(1, 1, 1);
    spec.lambda = 0.3;
    spec.alpha0 = 2.0;
    spec.alpha1 = 3.0;
    CHECK(spec.log_prior_a(0.0) == doctest::Approx(std::log(0.3)));
    // Beta(2,3) density at 0.25 is 12 * 0.25 * 0.75^2.
    CHECK(spec.log_prior_a(0.25) == doctest::Approx(std::log(0.7 * 12 * 0.25 * 0.5625)));
    CHECK(spec.log_prior_a(1.0) == -kInf);
    CHECK(spec.log_prior_a(-0.1) == -kInf);
    const double slab = testing::simpson([&](double a) { return std::exp(spec.log_prior_a(a)); }, 1e-9, 1.0 - 1e-9);
    CHECK(slab == doctest::Approx(0.7).epsilon(1e-6));

    spec.lambda = 0.0;
    CHECK(spec.log_prior_a(0.0) == -kInf);
    spec.lambda = 1.0;
    CHECK(spec.log_prior_a(0.5) == -kInf);
}

TEST_CASE("log prior of b integrates to one on (-a, inf)") {
    PriorSpec spec = PriorSpec::defaults(1, 1, 1);
    for (double a : {0.0, 0.4}) {
        CHECK(spec.log_prior_b(-a - 1e-9, a) == -kInf);
        const double total = testing::simpson([&](double b) { return std::exp(spec.log_prior_b(b, a)); }, -a + 1e-12,
                                              spec.mu_b + 12.0 * spec.sigma_b, 20000);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("unit log likelihood") {
    const auto x = identity_design();
    Vector beta(2);
    beta << 1.5, -0.5;
    SUBCASE("mode of a unit covariance") {
        CHECK(log_likelihood_unit(beta, x, beta, Matrix::Identity(2, 2)) ==
              doctest::Approx(-std::log(2.0 * std::numbers::pi)));
    }
    SUBCASE("explicit 2x2 algebra") {
        Matrix sigma(2, 2);
        sigma << 2.0, 0.5, 0.5, 1.0;
        Vector z(2);
        z << 2.5, -1.5;  // residual (1, -1)
        // Sigma^{-1} = [[1, -0.5], [-0.5, 2]] / 1.75, quadratic form 4 / 1.75.
        const double expected = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(1.75) - 0.5 * 4.0 / 1.75;
        CHECK(log_likelihood_unit(z, x, beta, sigma) == doctest::Approx(expected).epsilon(1e-13));
        CHECK(log_likelihood_unit_lower(z, x, beta, cholesky_lower(sigma)) ==
              doctest::Approx(expected).epsilon(1e-13));
    }
    SUBCASE("translation invariance") {
        Matrix sigma(2, 2);
        sigma << 1.0, 0.3, 0.3, 0.7;
        Vector z(2);
        z << 0.2, 0.9;
        Vector shift(2);
        shift << 3.0, -2.0;
        CHECK(log_likelihood_unit(z + shift, x, beta + shift, sigma) ==
              doctest::Approx(log_likelihood_unit(z, x, beta, sigma)).epsilon(1e-13));
    }
    SUBCASE("two items give -n log(2 pi) at the mode") {
        DesignMatrix x2;
        x2.n_items = 2;
        x2.p = 1;
        x2.q = 1;
        x2.values = Matrix::Identity(4, 4);
        Vector b4 = Vector::LinSpaced(4, -1.0, 2.0);
        CHECK(log_likelihood_unit(b4, x2, b4, Matrix::Identity(4, 4)) ==
              doctest::Approx(-2.0 * std::log(2.0 * std::numbers::pi)));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(log_likelihood_unit(Vector::Zero(3), x, beta, Matrix::Identity(2, 2)), DomainError);
        CHECK_THROWS_AS(log_likelihood_unit(beta, x, Vector::Zero(3), Matrix::Identity(2, 2)), DomainError);
    }
}

TEST_CASE("mixture density") {
    const auto x = identity_design();
    Matrix sigma(2, 2);
    sigma << 0.5, 0.2, 0.2, 0.4;
    Vector b1(2), b2(2);
    b1 << 1.0, 0.5;
    b2 << 2.0, -0.3;
    Vector t(2);
    t << 2.0, 1.5;

    SUBCASE("one atom is a bivariate lognormal") {
        const StickState one(std::vector<double>{1.0});
        const double expected =
            std::exp(log_likelihood_unit(t.array().log().matrix(), x, b1, sigma)) / (t(0) * t(1));
        CHECK(mixture_density(t, x, one, {b1}, sigma) == doctest::Approx(expected).epsilon(1e-13));
    }
    SUBCASE("duplicated atoms and permutations leave the density unchanged") {
        const StickState two(std::vector<double>{0.3, 1.0});
        const double base = mixture_density(t, x, two, {b1, b2}, sigma);
        // weights 0.3, 0.7 -> split the 0.7 atom into 0.35 + 0.35 (V = 0.3, 0.5, 1)
        const StickState three(std::vector<double>{0.3, 0.5, 1.0});
        CHECK(mixture_density(t, x, three, {b1, b2, b2}, sigma) == doctest::Approx(base).epsilon(1e-13));
        // weights 0.7, 0.3
        const StickState swapped(std::vector<double>{0.7, 1.0});
        CHECK(mixture_density(t, x, swapped, {b2, b1}, sigma) == doctest::Approx(base).epsilon(1e-13));
    }
    SUBCASE("integrates to one") {
        const StickState two(std::vector<double>{0.4, 1.0});
        // On the log scale: int int f(e^u) e^{u1 + u2} du.
        const int panels = 400;
        const double lo = -6.0, hi = 7.0, h = (hi - lo) / panels;
        double total = 0.0;
        for (int i = 0; i <= panels; ++i) {
            const double wi = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            for (int k = 0; k <= panels; ++k) {
                const double wk = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                Vector u(2);
                u << lo + i * h, lo + k * h;
                const Vector tt = u.array().exp().matrix();
                total += wi * wk * mixture_density(tt, x, two, {b1, b2}, sigma) * tt(0) * tt(1);
            }
        }
        total *= h * h / 9.0;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("rejects nonpositive times and mismatched atoms") {
        const StickState two(std::vector<double>{0.4, 1.0});
        Vector bad(2);
        bad << 0.0, 1.0;
        CHECK_THROWS_AS(mixture_density(bad, x, two, {b1, b2}, sigma), DomainError);
        CHECK_THROWS_AS(mixture_density(t, x, two, {b1}, sigma), DomainError);
    }
}

TEST_CASE("feasible latent point lies inside every interval") {
    const auto data = small_dataset();
    const Matrix z = feasible_latent(data);
    REQUIRE(z.rows() == 4);
    REQUIRE(z.cols() == 2);
    // u1: onset in (0, 7], event in (9, 10] -> onset 3.5, event 9.5
    CHECK(std::exp(z(0, 0)) == doctest::Approx(3.5));
    CHECK(std::exp(z(0, 0)) + std::exp(z(0, 1)) == doctest::Approx(9.5));
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const auto& it = data.units[static_cast<std::size_t>(i)].items[0];
        const double onset = std::exp(z(i, 0));
        const double event = onset + std::exp(z(i, 1));
        CHECK(it.onset.contains(onset));
        CHECK(it.event.contains(event));
    }
}

TEST_CASE("state invariants") {
    const auto data = small_dataset();
    const auto spec = PriorSpec::defaults(1, 2, 2);

    SUBCASE("prior draws satisfy every invariant") {
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            Rng rng(seed);
            const auto state = draw_prior_state(data, spec, rng);
            const auto violation = find_invariant_violation(state, data);
            if (violation) FAIL("seed " << seed << ": " << *violation);
            CHECK(state.truncation_level() == 50);
        }
    }
    SUBCASE("initial state satisfies every invariant") {
        Rng rng(3);
        const auto state = initial_state(data, build_designs(data), spec, rng);
        CHECK_FALSE(find_invariant_violation(state, data).has_value());
        CHECK(state.occupied_clusters() == 1);
        CHECK(state.cluster_counts()[0] == 4);
    }
    SUBCASE("violations are named") {
        Rng rng(4);
        const auto good = draw_prior_state(data, spec, rng);

        auto s = good;
        s.z(1, 0) = std::log(8.0);  // onset of u2 above 7
        auto v = find_invariant_violation(s, data);
        REQUIRE(v);
        CHECK(v->find("unit u2, item 1") != std::string::npos);
        CHECK(v->find("onset") != std::string::npos);

        s = good;
        s.allocations[0] = 50;
        CHECK(find_invariant_violation(s, data).has_value());

        s = good;
        s.Sigma(0, 1) = s.Sigma(1, 0) = 10.0 * std::sqrt(s.Sigma(0, 0) * s.Sigma(1, 1));
        CHECK(find_invariant_violation(s, data).value().find("Sigma") != std::string::npos);

        s = good;
        s.pd.a = 0.5;
        s.pd.b = -0.7;
        CHECK(find_invariant_violation(s, data).value().find("PD") != std::string::npos);

        s = good;
        s.z(0, 1) = std::log(20.0);  // event of u1 beyond 10
        CHECK(find_invariant_violation(s, data).value().find("event") != std::string::npos);
    }
}

TEST_CASE("scenario truth validation") {
    ScenarioTruth truth;
    CHECK_THROWS_AS(truth.validate(), ValidationError);
    MixtureComponent c;
    c.weight = 1.0;
    c.mean = Vector::Zero(2);
    c.covariance = Matrix::Identity(2, 2);
    truth.components = {c};
    CHECK_NOTHROW(truth.validate());
    truth.components[0].weight = 0.9;
    CHECK_THROWS_AS(truth.validate(), ValidationError);
}
