#include "parisian/models.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace parisian;
using testutil::simpson;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("models") {

TEST_CASE("Black-Scholes coefficients") {
    const ModelSpec m = bs_model(0.1, 0.05, 0.3);
    CHECK(m.coordinate == Coordinate::Price);
    CHECK_FALSE(m.has_jumps());
    CHECK(m.drift(0.0, 90.0) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(m.diffusion_sq(0.0, 90.0) == doctest::Approx(729.0).epsilon(1e-14));

    const ModelSpec flat = bs_model(0.07, 0.07, 0.2);
    for (double x : {1.0, 50.0, 123.4}) CHECK(flat.drift(0.3, x) == 0.0);

    CHECK_THROWS_AS(bs_model(0.1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(bs_model(0.1, 0.0, -0.2), std::invalid_argument);
}

TEST_CASE("Kou jump measure masses") {
    KouParams p;  // λ = 3, η± = 10, p± = 1/2
    const KouJumpMeasure nu(p);
    CHECK(nu.total_activity() == 3.0);
    CHECK(nu.interval_mass(0, 0, Interval{}) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(nu.interval_mass(0, 0, Interval{0.0, kInf}) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(nu.state_independent());

    // Closed form λp⁺(e^{−ηa} − e^{−ηb}) written out here, and an independent
    // Simpson integration of the density.
    const double pairs[][2] = {{0.01, 0.05}, {0.1, 0.4}, {0.5, 2.0}};
    for (const auto& ab : pairs) {
        const double a = ab[0], b = ab[1];
        const double exact = 3.0 * 0.5 * (std::exp(-10 * a) - std::exp(-10 * b));
        const double simp = simpson([](double z) { return 3.0 * 0.5 * 10.0 * std::exp(-10.0 * z); }, a, b);
        CHECK(testutil::rel(nu.interval_mass(0, 0, Interval{a, b}), exact) < 1e-10);
        CHECK(testutil::rel(simp, exact) < 1e-10);
        // Mirror interval on the negative side.
        CHECK(testutil::rel(nu.interval_mass(0, 0, Interval{-b, -a}), exact) < 1e-10);
    }

    // Masses of a partition of the line add up to λ.
    double total = 0.0;
    double edge = -kInf;
    for (double cut = -1.0; cut <= 1.0 + 1e-12; cut += 0.07) {
        total += nu.interval_mass(0, 0, Interval{edge, cut});
        edge = cut;
    }
    total += nu.interval_mass(0, 0, Interval{edge, kInf});
    CHECK(total == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("Kou moments against Simpson") {
    KouParams p;
    p.p_plus = 0.3;
    p.p_minus = 0.7;
    p.eta_plus = 25.0;
    p.eta_minus = 12.0;
    p.lambda = 2.0;
    const KouJumpMeasure nu(p);
    auto k = [&](double z) {
        return z >= 0 ? p.lambda * p.p_plus * p.eta_plus * std::exp(-p.eta_plus * z)
                      : p.lambda * p.p_minus * p.eta_minus * std::exp(p.eta_minus * z);
    };
    const double m2 = simpson([&](double z) { return z * z * k(z); }, -0.2, 0.0) +
                      simpson([&](double z) { return z * z * k(z); }, 0.0, 0.3);
    CHECK(testutil::rel(nu.small_jump_second_moment(0, 0, Interval{-0.2, 0.3}), m2) < 1e-9);
    const double m1 = simpson([&](double z) { return z * k(z); }, -1.0, 0.0) +
                      simpson([&](double z) { return z * k(z); }, 0.0, 1.0);
    CHECK(testutil::rel(nu.truncated_first_moment(0, 0, Interval{-1.0, 1.0}), m1) < 1e-9);
}

TEST_CASE("Kou model is a martingale after discounting") {
    // In log space E[e^{X_t}] = e^{(r_f − d)t} means
    // μ + σ²/2 + ∫ (e^z − 1 − z1{|z|≤1}) ν(dz) = r_f − d.
    KouParams p;
    p.dividend = 0.02;
    const ModelSpec m = kou_model(p);
    CHECK(m.coordinate == Coordinate::Log);
    auto k = [&](double z) {
        return z >= 0 ? p.lambda * p.p_plus * p.eta_plus * std::exp(-p.eta_plus * z)
                      : p.lambda * p.p_minus * p.eta_minus * std::exp(p.eta_minus * z);
    };
    auto integrand = [&](double z) { return (std::exp(z) - 1.0 - (std::abs(z) <= 1.0 ? z : 0.0)) * k(z); };
    const double jump_part = simpson(integrand, -8.0, -1.0) + simpson(integrand, -1.0, 0.0) +
                             simpson(integrand, 0.0, 1.0) + simpson(integrand, 1.0, 8.0);
    const double growth = m.drift(0, 0) + 0.5 * m.diffusion_sq(0, 0) + jump_part;
    CHECK(growth == doctest::Approx(p.r_f - p.dividend).epsilon(1e-8));
    CHECK(m.diffusion_sq(0.0, 1.7) == doctest::Approx(0.09));
}

TEST_CASE("Kou parameter validation") {
    KouParams p;
    p.eta_plus = 1.0;
    CHECK_THROWS(kou_model(p));
    p = KouParams{};
    p.p_plus = 0.6;  // p⁺ + p⁻ ≠ 1
    CHECK_THROWS(kou_model(p));
    p = KouParams{};
    p.lambda = -1.0;
    CHECK_THROWS(kou_model(p));
}

TEST_CASE("Variance Gamma measure") {
    VGParams p;
    const ModelSpec m = vg_model(p);
    REQUIRE(m.has_jumps());
    const JumpMeasure& nu = *m.jumps;
    CHECK(std::isfinite(vg_omega(p)));
    CHECK(nu.total_activity() == kInf);
    CHECK(nu.interval_mass(0, 0, Interval{-0.1, 0.1}) == kInf);
    CHECK(m.diffusion_sq(0, 0) == 0.0);

    // Small-jump second moment vanishes with the interval.
    double prev = kInf;
    for (double eps : {0.1, 0.01, 0.001, 1e-4}) {
        const double s = nu.small_jump_second_moment(0, 0, Interval{-eps, eps});
        CHECK(s > 0.0);
        CHECK(s < prev);
        prev = s;
    }
    CHECK(prev < 1e-4);

    // Interval masses away from zero against Simpson.
    const double ranges[][2] = {{0.01, 0.05}, {0.05, 0.5}, {-0.3, -0.02}, {0.2, 1.5}};
    for (const auto& ab : ranges) {
        const double ref = simpson([&](double z) { return vg_levy_density(p, z); }, ab[0], ab[1], 200000);
        CHECK(testutil::rel(nu.interval_mass(0, 0, Interval{ab[0], ab[1]}), ref) < 1e-8);
    }

    // Second moment is monotone under inclusion.
    const double inner = nu.small_jump_second_moment(0, 0, Interval{-0.05, 0.05});
    const double outer = nu.small_jump_second_moment(0, 0, Interval{-0.2, 0.1});
    CHECK(inner < outer);
    CHECK(nu.state_independent());
    CHECK(nu.interval_mass(0.0, -3.0, Interval{0.1, 0.2}) == nu.interval_mass(0.5, 4.0, Interval{0.1, 0.2}));
}

TEST_CASE("Variance Gamma martingale condition") {
    VGParams p;
    p.dividend = 0.01;
    const ModelSpec m = vg_model(p);
    auto integrand = [&](double z) {
        return (std::exp(z) - 1.0 - (std::abs(z) <= 1.0 ? z : 0.0)) * vg_levy_density(p, z);
    };
    // The integrand behaves like |z|/(2ν) at the origin, so Simpson is fine
    // away from the single point z = 0; start a hair off it.
    const double tiny = 1e-12;
    const double jump_part = simpson(integrand, -6.0, -1.0) + simpson(integrand, -1.0, -tiny, 400000) +
                             simpson(integrand, tiny, 1.0, 400000) + simpson(integrand, 1.0, 6.0);
    CHECK(m.drift(0, 0) + jump_part == doctest::Approx(p.r_f - p.dividend).epsilon(1e-7));
}

TEST_CASE("coordinate maps") {
    const ModelSpec bs = bs_model(0.05, 0.0, 0.2);
    CHECK(bs.to_state(90.0) == 90.0);
    CHECK(bs.to_price(42.0) == 42.0);
    const ModelSpec kou = kou_model(KouParams{});
    CHECK(kou.to_state(90.0) == doctest::Approx(std::log(90.0)));
    CHECK(kou.to_price(kou.to_state(77.0)) == doctest::Approx(77.0));
}

}  // TEST_SUITE
