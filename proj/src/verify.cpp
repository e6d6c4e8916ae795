#include "parisian/verify.hpp"

#include "parisian/downin.hpp"
#include "parisian/downout.hpp"
#include "parisian/generator.hpp"
#include "parisian/oracle.hpp"
#include "parisian/simulation.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace parisian {

namespace {

using Clock = std::chrono::steady_clock;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// States 0, 1, …, n−1 with the barrier on node `below`.
SpatialGrid integer_grid(int n, int below) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
    return SpatialGrid(s, static_cast<double>(below));
}

Vector random_payoff(int n, std::mt19937_64& rng) {
    const double k = uniform(rng, 0.3, 0.7) * n;
    Vector f(n);
    for (int i = 0; i < n; ++i) f[i] = std::max(0.0, i - k) + (uniform(rng, 0, 1) < 0.2 ? uniform(rng, 0, 1) : 0.0);
    return f;
}

void record(SuiteReport& r, double err, double tol, const std::string& what) {
    ++r.cases;
    r.max_error = std::max(r.max_error, err);
    if (!(err <= tol)) {
        ++r.failures;
        std::ostringstream os;
        os << what << ": error " << std::setprecision(3) << err << " > " << tol;
        r.notes.push_back(os.str());
    }
}

void fail_case(SuiteReport& r, const std::string& what) {
    ++r.cases;
    ++r.failures;
    r.notes.push_back(what);
}

}  // namespace

void print_report(const SuiteReport& r, std::ostream& out) {
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.cases << " cases, " << r.failures
        << " failures, max error " << std::setprecision(3) << r.max_error << ", " << std::setprecision(3)
        << r.seconds << " s\n";
    for (const auto& n : r.notes) out << "    " << n << '\n';
}

Matrix random_p_matrix(int n, std::mt19937_64& rng) {
    Matrix a(n, n);
    if (uniform(rng, 0, 1) < 0.5) {
        Matrix b(n, n), k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                b(i, j) = uniform(rng, -1, 1);
                k(i, j) = uniform(rng, -1, 1);
            }
        a = b * b.transpose() + 0.1 * Matrix::Identity(n, n) + (k - k.transpose());
    } else {
        for (int i = 0; i < n; ++i) {
            double off = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                a(i, j) = uniform(rng, -1, 1);
                off += std::abs(a(i, j));
            }
            a(i, i) = off + uniform(rng, 0.1, 1.0);
        }
    }
    return a;
}

Matrix random_generator(int n, bool jumps, std::mt19937_64& rng) {
    Matrix g = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            if (std::abs(i - j) == 1)
                g(i, j) = uniform(rng, 0.5, 3.0);
            else if (jumps)
                g(i, j) = uniform(rng, 0.0, 0.4);
        }
        g(i, i) = -g.row(i).sum();
    }
    return g;
}

SuiteReport verify_lemke(std::uint64_t seed, int cases, int max_n, double tol) {
    const auto t0 = Clock::now();
    SuiteReport rep;
    rep.name = "lemke vs enumeration";
    std::mt19937_64 rng(seed);
    for (int c = 0; c < cases; ++c) {
        const int n = uniform_int(rng, 1, max_n);
        LcpProblem p{random_p_matrix(n, rng), Vector(n)};
        for (int i = 0; i < n; ++i) p.q[i] = uniform(rng, -2, 2);
        const LcpSolution exact = brute_force_lcp(p);
        const LcpSolution lem = lemke_solve(p);
        const std::string tag = "case " + std::to_string(c) + " (n=" + std::to_string(n) + ")";
        if (!exact.solved() || !lem.solved()) {
            fail_case(rep, tag + ": solver did not finish");
            continue;
        }
        bool same_set = true;
        for (int i = 0; i < n; ++i) same_set = same_set && ((exact.z[i] > tol) == (lem.z[i] > tol));
        if (!same_set) {
            fail_case(rep, tag + ": active sets differ");
            continue;
        }
        record(rep, (exact.z - lem.z).lpNorm<Eigen::Infinity>(), tol, tag);
    }
    rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

SuiteReport verify_vanilla(std::uint64_t seed, int cases, int max_n, double tol) {
    const auto t0 = Clock::now();
    SuiteReport rep;
    rep.name = "vanilla perpetual vs value iteration";
    std::mt19937_64 rng(seed);
    for (int c = 0; c < cases; ++c) {
        const int n = uniform_int(rng, 2, max_n);
        const bool jumps = c % 2 == 1;
        const Matrix G = random_generator(n, jumps, rng);
        const Vector f = random_payoff(n, rng);
        const double r = uniform(rng, 0.02, 0.3);
        const Vector ref = value_iterate_american(uniformize(G), f, r, 0.1 * tol);
        const Vector v = vanilla_american_perpetual(GeneratorMatrix::from_dense(G), f, r);
        record(rep, (ref - v).lpNorm<Eigen::Infinity>(), tol,
               "case " + std::to_string(c) + " (n=" + std::to_string(n) + (jumps ? ", jumps)" : ")"));
    }
    rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

SuiteReport verify_parisian_kernel(std::uint64_t seed, const KernelCheckOptions& o) {
    const auto t0 = Clock::now();
    SuiteReport rep;
    rep.name = "parisian kernel vs simulation";
    std::mt19937_64 rng(seed);
    const Matrix G = random_generator(o.states, o.jumps, rng);
    const GeneratorMatrix g = GeneratorMatrix::from_dense(G);
    const SpatialGrid grid = integer_grid(o.states, o.below);
    const Matrix H = parisian_transform(g, grid, o.window, o.r).H_p;

    std::vector<int> rows = o.rows;
    if (rows.empty()) rows = {0, o.below - 1, o.below, o.states - 1};
    const double floor_se = 1.0 / static_cast<double>(o.paths);
    for (int x : rows) {
        const KernelEstimate mc = simulate_paths(g, grid.l_plus(), x, o.window, o.r, o.horizon,
                                                 seed + 1000u * static_cast<std::uint64_t>(x + 1), o.paths);
        double worst = 0.0;
        int worst_y = 0;
        for (int y = 0; y < o.states; ++y) {
            const double z = std::abs(H(x, y) - mc.mean[y]) / std::max(mc.std_error[y], floor_se);
            if (z > worst) {
                worst = z;
                worst_y = y;
            }
        }
        std::ostringstream tag;
        tag << "row " << x << " (worst column " << worst_y << ", in standard errors)";
        record(rep, worst, o.sigmas, tag.str());
    }
    rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

SuiteReport verify_lattice(std::uint64_t seed, const LatticeCheckOptions& o) {
    const auto t0 = Clock::now();
    SuiteReport rep;
    rep.name = "finite-maturity pricers vs joint lattice";
    std::mt19937_64 rng(seed);
    for (int c = 0; c < o.cases; ++c) {
        const int n = uniform_int(rng, 4, o.max_states);
        const int below = uniform_int(rng, 1, n - 2);
        const bool jumps = c % 2 == 1;
        const Matrix G = random_generator(n, jumps, rng);
        const Vector f = random_payoff(n, rng);
        const double r = uniform(rng, 0.0, 0.2);
        const double dt = uniform(rng, 0.05, 0.2);
        const int slices = uniform_int(rng, 2, o.max_slices);
        const TimeGrid time(dt, (slices - 0.5) * dt);
        const double dd = uniform(rng, 0.02, 0.1);
        const int top = uniform_int(rng, 1, o.max_levels - 1);  // index of D⁺
        const double D = (top - 1 + uniform(rng, 0.2, 0.8)) * dd;

        const GeneratorMatrix g = GeneratorMatrix::from_dense(G, 0.0, jumps);
        const SpatialGrid grid = integer_grid(n, below);
        const LatticeProblem p{G, below, f, r, dt, time.steps, D, dd};

        std::ostringstream tag;
        tag << "case " << c << " (n=" << n << ", below=" << below << ", slices=" << time.steps
            << ", levels=" << top + 1 << (jumps ? ", jumps" : "") << ")";
        try {
            const Vector out_ref = dp_downout_lattice(p);
            const Vector out = price_finite_downout(g, grid, time, f, D, dd, r).price();
            record(rep, (out_ref - out).lpNorm<Eigen::Infinity>(), o.tol, tag.str() + " down-out");

            DownInOptions di;
            di.expm_steps = o.expm_steps;
            const Vector in_ref = dp_downin_lattice(p);
            const Vector in = price_finite_downin(g, grid, time, f, D, r, di).price(0, r);
            record(rep, (in_ref - in).lpNorm<Eigen::Infinity>(), o.tol, tag.str() + " down-in");
        } catch (const std::exception& e) {
            fail_case(rep, tag.str() + ": " + e.what());
        }
    }
    rep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
}

std::vector<SuiteReport> run_verify_suite(const std::string& suite, std::uint64_t seed, long paths) {
    if (suite == "lcp") return {verify_lemke(seed), verify_vanilla(seed + 1)};
    if (suite == "kernels") {
        KernelCheckOptions o;
        o.paths = paths;
        return {verify_parisian_kernel(seed, o)};
    }
    if (suite == "dp") return {verify_lattice(seed)};
    throw std::invalid_argument("unknown suite '" + suite + "' (expected lcp, kernels or dp)");
}

}  // namespace parisian
