#include "parisian/downin.hpp"
#include "parisian/generator.hpp"
#include "parisian/grid.hpp"
#include "parisian/simulation.hpp"
#include "parisian/study.hpp"
#include "parisian/verify.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace parisian;

TEST_SUITE("ctmc") {

TEST_CASE("piecewise-uniform grid construction") {
    const SpatialGrid g = build_grid(30.0, 270.0, 90.0, 95.0, 128);
    REQUIRE(g.size() == 129);
    CHECK(g[0] == 30.0);
    CHECK(g[g.last()] == doctest::Approx(270.0).epsilon(1e-14));
    const int l = g.l_plus();
    CHECK(g[l] == 90.0);
    CHECK(g.below_count() == l);
    const int k = g.locate(95.0);
    CHECK(g[k] < 95.0);
    CHECK(g[k + 1] > 95.0);
    CHECK(95.0 - g[k] == doctest::Approx(g[k + 1] - 95.0).epsilon(1e-12));
    for (int i = 0; i < g.last(); ++i) CHECK(g[i] < g[i + 1]);

    // Counts always add up, whatever the shape.
    for (int n : {16, 33, 128, 257, 1000}) {
        const SegmentCounts c = split_segments(30.0, 270.0, 90.0, 95.0, n, SplitPolicy::Proportional);
        CHECK(c.n1 + c.n2 + c.n3 == n);
        CHECK(c.n1 >= 1);
        CHECK(c.n2 >= 1);
        CHECK(build_grid(30.0, 270.0, 90.0, 95.0, n).size() == n + 1);
    }

    // Strike below the barrier mirrors the construction.
    const SpatialGrid m = build_grid(30.0, 270.0, 95.0, 90.0, 64);
    CHECK(m[m.l_plus()] == 95.0);
    const int j = m.locate(90.0);
    CHECK(90.0 - m[j] == doctest::Approx(m[j + 1] - 90.0).epsilon(1e-12));
}

TEST_CASE("grid cells partition the line") {
    const SpatialGrid g = build_grid(0.0, 630.0, 90.0, 95.0, 64);
    CHECK(std::isinf(g.cell(0).lo));
    CHECK(std::isinf(g.cell(g.last()).hi));
    for (int i = 0; i < g.last(); ++i) CHECK(g.cell(i).hi == doctest::Approx(g.cell(i + 1).lo).epsilon(1e-14));
    for (int i = 1; i < g.last(); ++i) {
        CHECK(g.delta_plus(i) == doctest::Approx(g[i + 1] - g[i]));
        CHECK(g.delta_minus(i) == doctest::Approx(g[i] - g[i - 1]));
    }
    CHECK(g.locate(-5.0) == 0);
    CHECK(g.locate(1e9) == g.last() - 1);
    Vector lin(g.size());
    for (int i = 0; i < g.size(); ++i) lin[i] = 2.0 * g[i] + 1.0;
    CHECK(g.interpolate(lin, 91.7) == doctest::Approx(184.4));
}

TEST_CASE("time grid") {
    const TimeGrid t(1.0 / 60.0, 1.0);
    CHECK(t.steps == 61);
    CHECK(t.t_plus() > 1.0);
    CHECK(t.exercisable(60));
    CHECK_FALSE(t.exercisable(61));
    CHECK_THROWS(TimeGrid(0.0, 1.0));
}

TEST_CASE("diffusion rates on a uniform grid") {
    const double h = 2.0;
    std::vector<double> s;
    for (int i = 0; i <= 20; ++i) s.push_back(60.0 + h * i);
    const SpatialGrid grid(s, 80.0);
    const ModelSpec m = bs_model(0.08, 0.02, 0.25);
    const GeneratorMatrix g = build_generator(m, grid, 0.0);
    CHECK(g.is_birth_death());
    for (int i = 1; i < 20; ++i) {
        const double x = s[static_cast<std::size_t>(i)];
        const double mu = 0.06 * x, s2 = 0.0625 * x * x;
        CHECK(g.rate(i, i + 1) == doctest::Approx(mu / (2 * h) + s2 / (2 * h * h)).epsilon(1e-13));
        CHECK(g.rate(i, i - 1) == doctest::Approx(-mu / (2 * h) + s2 / (2 * h * h)).epsilon(1e-13));
    }
    g.check_valid();
    CHECK(g.rate(0, 1) == 0.0);
    CHECK(g.rate(20, 19) == 0.0);

    ModelSpec zero;
    zero.drift = [](double, double) { return 0.0; };
    zero.diffusion_sq = [](double, double) { return 0.0; };
    CHECK(build_generator(zero, grid, 0.0).to_dense().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Black-Scholes generator approximates the operator") {
    // Gf − (μf' + ½σ²f'') at x = 100 shrinks at least linearly under refinement.
    const ModelSpec m = bs_model(0.1, 0.05, 0.3);
    auto f = [](double x) { return std::sin(x / 20.0); };
    const double x0 = 100.0;
    const double exact = 0.05 * x0 * std::cos(x0 / 20.0) / 20.0 - 0.5 * 0.09 * x0 * x0 * std::sin(x0 / 20.0) / 400.0;
    double prev = 0.0;
    for (int n : {50, 100, 200, 400}) {
        const SpatialGrid grid = build_grid(40.0, 200.0, 90.0, 95.0, n);
        const GeneratorMatrix g = build_generator(m, grid, 0.0);
        Vector fv(grid.size());
        for (int i = 0; i < grid.size(); ++i) fv[i] = f(grid[i]);
        const Vector gf = g.apply(fv);
        const int i = grid.locate(x0);
        // Compare at a node and move the exact value there.
        const double xi = grid[i];
        const double ex = 0.05 * xi * std::cos(xi / 20.0) / 20.0 - 0.5 * 0.09 * xi * xi * std::sin(xi / 20.0) / 400.0;
        const double err = std::abs(gf[i] - ex);
        if (prev > 0.0) CHECK(err < 0.6 * prev);
        prev = err;
    }
    CHECK(prev < 1e-3 * std::abs(exact) + 1e-4);
}

TEST_CASE("Kou generator jump rates") {
    const KouParams p;
    const ModelSpec m = kou_model(p);
    const SpatialGrid grid = build_grid(std::log(9.0), std::log(1440.0), std::log(90.0), std::log(95.0), 64);
    const GeneratorMatrix g = build_generator(m, grid, 0.0);
    REQUIRE_FALSE(g.is_birth_death());
    g.check_valid(1e-10);
    const Matrix G = g.to_dense();
    for (int i : {5, 20, 40, 60}) {
        const double x = grid[i];
        double total = 0.0;
        for (int j = 0; j < grid.size(); ++j) {
            const Interval c{grid.cell(j).lo - x, grid.cell(j).hi - x};
            const double mass = m.jumps->interval_mass(0, x, c);
            total += mass;
            if (std::abs(j - i) > 1) CHECK(G(i, j) == doctest::Approx(mass).epsilon(1e-12));
        }
        CHECK(total == doctest::Approx(p.lambda).epsilon(1e-10));
        // Rates out of the state are at least the jump mass outside the own cell.
        const Interval own{grid.cell(i).lo - x, grid.cell(i).hi - x};
        CHECK(-G(i, i) >= p.lambda - m.jumps->interval_mass(0, x, own) - 1e-10);
    }
}

TEST_CASE("rate policies on the Variance Gamma grid") {
    ModelParams mp;
    mp.kind = ModelKind::VarianceGamma;
    const ModelSpec m = mp.build();
    const StateRange range = default_state_range(m, 90.0);
    const SpatialGrid grid = build_grid(range.lo, range.hi, std::log(90.0), std::log(95.0), 353);
    CHECK_THROWS_AS(build_generator(m, grid, 0.0), NegativeRateError);
    for (RatePolicy pol : {RatePolicy::Clamp, RatePolicy::Upwind}) {
        GeneratorOptions o;
        o.policy = pol;
        const GeneratorMatrix g = build_generator(m, grid, 0.0, o);
        CHECK(g.repaired_rows() > 0);
        CHECK_NOTHROW(g.check_valid(1e-10));
        CHECK(parse_rate_policy(to_string(pol)) == pol);
    }
}

TEST_CASE("generator checks catch bad matrices") {
    Matrix bad = testutil::birth_death(5, 1.0, 1.0, true);
    CHECK_NOTHROW(GeneratorMatrix::from_dense(bad).check_valid());
    bad(2, 3) = -0.5;
    bad(2, 2) = -bad.row(2).sum() + bad(2, 2);
    CHECK_THROWS(GeneratorMatrix::from_dense(bad).check_valid());
    Matrix leaky = testutil::birth_death(5, 1.0, 1.0, true);
    leaky(1, 1) -= 0.1;
    CHECK_THROWS(GeneratorMatrix::from_dense(leaky).check_valid());
    // Reflecting ends are not absorbing.
    CHECK_THROWS(GeneratorMatrix::from_dense(testutil::birth_death(5, 1.0, 1.0)).check_valid());
}

TEST_CASE("path functionals on a hand-built path") {
    ChainPath p;
    p.start = 5;
    p.horizon = 10.0;
    p.events = {{1.0, 2}, {1.5, 4}, {2.0, 1}, {2.3, 0}, {3.5, 6}};
    const int l = 3;
    CHECK(p.state_at(0.5) == 5);
    CHECK(p.state_at(1.2) == 2);
    CHECK(p.first_down_crossing(l)->time == 1.0);
    CHECK(p.first_up_crossing(l)->time == 0.0);  // starts above
    const auto tau = p.parisian_time(l, 0.6);
    REQUIRE(tau);
    CHECK(tau->time == doctest::Approx(2.6));
    CHECK(tau->state == 0);
    CHECK(p.parisian_time(l, 0.4)->time == doctest::Approx(1.4));
    CHECK_FALSE(p.parisian_time(l, 1.6));
}

TEST_CASE("Parisian time edge cases") {
    const GeneratorMatrix g = GeneratorMatrix::from_dense(testutil::birth_death(9, 1.0, 1.0, true));
    // D = 0 from below: the event happens at once where the chain starts.
    const KernelEstimate now = simulate_paths(g, 4, 2, 0.0, 0.05, 50.0, 1, 2000);
    CHECK(now.mean[2] == doctest::Approx(1.0));
    CHECK(now.mean.sum() == doctest::Approx(1.0));
    // Absorbing start below L: τ = D on every path.
    const KernelEstimate stuck = simulate_paths(g, 4, 0, 0.3, 0.05, 50.0, 1, 1000);
    CHECK(stuck.degenerate);
    CHECK(stuck.mean[0] == doctest::Approx(std::exp(-0.05 * 0.3)).epsilon(1e-14));
    CHECK(stuck.std_error[0] == 0.0);
}

TEST_CASE("simulation is reproducible and standard errors shrink") {
    const GeneratorMatrix g = GeneratorMatrix::from_dense(testutil::birth_death(11, 1.5, 1.2, true));
    const KernelEstimate a = simulate_paths(g, 5, 6, 0.4, 0.05, 200.0, 99, 20000);
    const KernelEstimate b = simulate_paths(g, 5, 6, 0.4, 0.05, 200.0, 99, 20000);
    CHECK((a.mean - b.mean).norm() == 0.0);
    const KernelEstimate c = simulate_paths(g, 5, 6, 0.4, 0.05, 200.0, 99, 80000);
    // Four times the paths, half the standard error.
    const int col = [&] {
        Eigen::Index k;
        a.mean.maxCoeff(&k);
        return static_cast<int>(k);
    }();
    CHECK(c.std_error[col] / a.std_error[col] == doctest::Approx(0.5).epsilon(0.1));

    std::mt19937_64 r1 = path_engine(5, 17), r2 = path_engine(5, 17), r3 = path_engine(5, 18);
    CHECK(r1() == r2());
    CHECK(path_engine(5, 17)() != r3());
}

TEST_CASE("up-crossing kernels against simulation") {
    // Birth–death chain: every up-crossing lands on L⁺, so each checked row
    // has a single nonzero entry.
    const int n = 12, below = 6;
    const Matrix G = testutil::birth_death(n, 2.0, 2.5, true);
    const GeneratorMatrix g = GeneratorMatrix::from_dense(G);
    const SpatialGrid grid = testutil::integer_grid(n, below);
    const double D = 0.5, r = 0.3, dt = 0.1;
    const long paths = 400000;

    const PerpetualKernels K = parisian_transform(g, grid, D, r, 1 << 16);
    const Matrix Uplus = K.U1_plus - K.U2_plus;
    const SliceKernels S = kernel_h(g, grid, D, dt, 1 << 16);
    for (int x : {3, 5}) {
        const KernelEstimate mc = simulate_up_crossing(g, below, x, D, r, 1000 + x, paths);
        CHECK(std::abs(Uplus(x, below) - mc.mean[below]) <= 3.0 * mc.std_error[below]);
        // The δ_t clock race is a discount at rate 1/δ_t.
        const KernelEstimate tick = simulate_up_crossing(g, below, x, D, 1.0 / dt, 2000 + x, paths);
        CHECK(std::abs(S.H_plus(x, below) - tick.mean[below]) <= 3.0 * tick.std_error[below]);
        for (int y = 0; y < n; ++y)
            if (y != below) CHECK(std::abs(S.H_plus(x, y)) < 1e-12);
    }
}

TEST_CASE("Parisian kernel against simulation (reduced sample)") {
    KernelCheckOptions o;
    o.paths = 200000;
    o.rows = {o.below - 1, o.below};
    const SuiteReport rep = verify_parisian_kernel(424242, o);
    for (const auto& note : rep.notes) MESSAGE(note);
    CHECK(rep.passed());
}

}  // TEST_SUITE
