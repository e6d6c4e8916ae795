#include "parisian/downout.hpp"
#include "parisian/oracle.hpp"
#include "parisian/verify.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace parisian;

TEST_SUITE("oracle") {

TEST_CASE("value iteration basics") {
    std::mt19937_64 rng(10);
    const Matrix G = random_generator(7, true, rng);
    const Vector c = Vector::Constant(7, 2.5);
    CHECK((value_iterate_american(uniformize(G), c, 0.05) - c).lpNorm<Eigen::Infinity>() < 1e-12);

    // Two states swapping at rate a; f = (0, 1). Stopping at once is optimal
    // in state 1, and in state 0 r·v₀ = a(1 − v₀), so v₀ = a/(a + r).
    const double a = 1.7, r = 0.3;
    Matrix two(2, 2);
    two << -a, a, a, -a;
    Vector f(2);
    f << 0.0, 1.0;
    const Vector v = value_iterate_american(uniformize(two), f, r, 1e-13);
    CHECK(v[0] == doctest::Approx(a / (a + r)).epsilon(1e-11));
    CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniformization") {
    std::mt19937_64 rng(11);
    const Matrix G = random_generator(12, true, rng);
    const UniformizedChain u = uniformize(G);
    CHECK(u.rate == doctest::Approx((-G.diagonal()).maxCoeff()));
    CHECK((u.P.rowwise().sum() - Vector::Ones(12)).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK(u.P.minCoeff() >= 0.0);
    CHECK(u.discount(0.1) == doctest::Approx(u.rate / (u.rate + 0.1)));
    const Vector b = Vector::LinSpaced(12, -1.0, 3.0);
    for (double t : {0.1, 1.0, 4.0})
        CHECK((uniformized_action(u, b, t) - Matrix((t * G).exp()) * b).lpNorm<Eigen::Infinity>() < 1e-10);
    // A larger dominating rate changes nothing.
    CHECK((uniformized_action(uniformize(G, 3.0 * u.rate), b, 1.0) - uniformized_action(u, b, 1.0))
              .lpNorm<Eigen::Infinity>() < 1e-10);

    Matrix bad = G;
    bad(0, 1) = -0.5;
    CHECK_THROWS(uniformize(bad));
}

TEST_CASE("joint lattice degenerate cases") {
    std::mt19937_64 rng(12);
    const Matrix G = random_generator(6, false, rng);
    const LatticeProblem zero{G, 2, Vector::Zero(6), 0.05, 0.1, 4, 0.2, 0.05};
    CHECK(dp_downout_lattice(zero).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dp_downin_lattice(zero).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dp_parisian_lattice(zero, LatticeFlavor::DownIn).size() == 6);

    // Joint time generator: slice blocks plus the 1/δ_t ticks.
    const Matrix Q = joint_time_generator(G, 0.1, 3);
    CHECK(Q.rows() == 18);
    CHECK(Q(0, 6) == doctest::Approx(10.0));
    CHECK(std::abs(Q.topRows(12).rowwise().sum().maxCoeff()) < 1e-12);
    CHECK(Q.bottomRows(6).rowwise().sum().maxCoeff() == doctest::Approx(-10.0));
}

TEST_CASE("forced knock-out from a trapped state") {
    // State 0 is absorbing and below L, so the excursion clock runs until D⁺
    // and the option dies. With a flat payoff there, exercising at once beats
    // waiting, and nothing is left at D⁺.
    Matrix G = testutil::birth_death(5, 1.0, 1.0, true);
    Vector f(5);
    f << 2.0, 1.0, 0.0, 0.5, 1.5;
    const double D = 0.05, dd = 0.1, dt = 0.2, r = 0.1;
    const Vector ref = dp_downout_lattice(LatticeProblem{G, 2, f, r, dt, 5, D, dd});
    CHECK(ref[0] == doctest::Approx(2.0).epsilon(1e-12));

    const GeneratorMatrix g = GeneratorMatrix::from_dense(G);
    DownOutOptions o;
    o.keep_surface = true;
    const FiniteDownOutResult res = price_finite_downout(g, testutil::integer_grid(5, 2), TimeGrid(dt, 0.9), f, D, dd, r, o);
    CHECK(res.price()[0] == doctest::Approx(2.0).epsilon(1e-12));
    for (const Vector& slice : res.surface) CHECK(slice[res.space.index(res.space.top(), 0)] == 0.0);
    CHECK((res.price() - ref).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("Black-Scholes-like lattice against the down-out pricer") {
    // 8 price nodes with drift and volatility rates of a coarse BS grid.
    const ModelSpec m = bs_model(0.06, 0.1, 0.4);
    std::vector<double> s;
    for (int i = 0; i < 8; ++i) s.push_back(75.0 + 10.0 * i);
    const SpatialGrid grid(s, 95.0);
    const GeneratorMatrix g = build_generator(m, grid, 0.0);
    Vector f(8);
    for (int i = 0; i < 8; ++i) f[i] = std::max(s[static_cast<std::size_t>(i)] - 100.0, 0.0);
    const double dt = 0.05, D = 0.1, dd = 0.04;  // levels 0, 0.04, 0.08, D⁺ = 0.12
    const TimeGrid time(dt, 0.2);                 // 5 slices
    const FiniteDownOutResult res = price_finite_downout(g, grid, time, f, D, dd, 0.06);
    CHECK(res.space.levels() == 4);
    CHECK(time.steps == 5);
    const Vector ref = dp_downout_lattice(LatticeProblem{g.to_dense(), grid.l_plus(), f, 0.06, dt, time.steps, D, dd});
    CHECK((res.price() - ref).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("first-entrance enumeration") {
    // Symmetric walk on 0..4 started at 2, targets {0, 4}: each with mass 1/2.
    const Matrix Q = testutil::birth_death(5, 1.0, 1.0, true);
    std::vector<char> t = {1, 0, 0, 0, 1};
    const Vector hit = first_entrance_enumeration(Q, 2, t);
    CHECK(hit[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(hit[4] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(first_entrance_enumeration(Q, 0, t)[0] == 1.0);
}

TEST_CASE("brute-force LCP") {
    const LcpSolution s = brute_force_lcp(LcpProblem{Matrix::Identity(3, 3), Vector::Constant(3, -1.0)});
    REQUIRE(s.solved());
    CHECK((s.z - Vector::Ones(3)).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK_THROWS(brute_force_lcp(LcpProblem{Matrix::Identity(21, 21), Vector::Zero(21)}));
}

TEST_CASE("oracle suites on small samples") {
    const SuiteReport lem = verify_lemke(77, 40);
    const SuiteReport van = verify_vanilla(78, 10);
    LatticeCheckOptions lo;
    lo.cases = 6;
    const SuiteReport lat = verify_lattice(79, lo);
    for (const SuiteReport* r : {&lem, &van, &lat}) {
        for (const auto& note : r->notes) MESSAGE(note);
        CHECK(r->passed());
    }
    CHECK(lat.cases == 12);
    CHECK_THROWS(run_verify_suite("nope", 1));
}

}  // TEST_SUITE
