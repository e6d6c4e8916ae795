#include "parisian/expm.hpp"
#include "parisian/lcp.hpp"
#include "parisian/oracle.hpp"
#include "parisian/tridiag.hpp"
#include "parisian/verify.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace parisian;

namespace {

TriDiag random_dominant(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TriDiag a(static_cast<std::size_t>(n));
    for (int i = 0; i + 1 < n; ++i) {
        a.sub[static_cast<std::size_t>(i)] = u(rng);
        a.super[static_cast<std::size_t>(i)] = u(rng);
    }
    for (int i = 0; i < n; ++i) a.main[static_cast<std::size_t>(i)] = 2.5 + u(rng);
    return a;
}

Matrix random_rates(int n, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, scale);
    Matrix g = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (j != i) g(i, j) = u(rng);
        g(i, i) = -g.row(i).sum();
    }
    return g;
}

// Checks z ≥ 0, w = Az + q ≥ 0 and complementarity directly.
void check_lcp(const LcpProblem& p, const Vector& z, double tol) {
    const Vector w = p.A * z + p.q;
    CHECK(z.minCoeff() >= -tol);
    CHECK(w.minCoeff() >= -tol * (1.0 + p.q.lpNorm<Eigen::Infinity>()));
    CHECK(std::abs(z.dot(w)) <= tol * (1.0 + z.lpNorm<Eigen::Infinity>() * w.lpNorm<Eigen::Infinity>()));
}

// Obstacle problem −u'' = 0 on (0, 1), u(0) = u(1) = 0, u ≥ ψ with
// ψ(x) = 0.2 − 2(x − 0.5)². The solution is linear up to the tangency point
// a where ψ'(a)·a = ψ(a), i.e. a = √0.15, and follows ψ on [a, 1 − a].
LcpProblem obstacle(int n, double& h) {
    h = 1.0 / (n + 1);
    Matrix A = Matrix::Zero(n, n);
    Vector psi(n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 2.0 / (h * h);
        if (i > 0) A(i, i - 1) = -1.0 / (h * h);
        if (i + 1 < n) A(i, i + 1) = -1.0 / (h * h);
        const double x = (i + 1) * h;
        psi[i] = 0.2 - 2.0 * (x - 0.5) * (x - 0.5);
    }
    // z = u − ψ, w = A u = A z + A ψ.
    return LcpProblem{A, A * psi};
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("tridiagonal solves") {
    const TriDiag id = TriDiag::identity(5);
    Vector b(5);
    b << 1, -2, 3, 0.5, 7;
    CHECK((solve_tridiag(id, b) - b).norm() == 0.0);

    TriDiag two(2);
    two.main = {2.0, 2.0};
    two.sub = {1.0};
    two.super = {1.0};
    const Vector x = solve_tridiag(two, Vector::Constant(2, 3.0));
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));

    std::mt19937_64 rng(7);
    const TriDiag a = random_dominant(50, rng);
    Vector rhs(50);
    for (int i = 0; i < 50; ++i) rhs[i] = std::sin(i + 1.0);
    const Vector ref = a.to_dense().partialPivLu().solve(rhs);
    CHECK((solve_tridiag(a, rhs) - ref).lpNorm<Eigen::Infinity>() < 1e-10);
    // Factor reuse gives the same answer.
    const TridiagFactor fac(a);
    CHECK((fac.solve(rhs) - ref).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((a.apply(ref) - rhs).lpNorm<Eigen::Infinity>() < 1e-10);

    TriDiag sing(2);
    sing.main = {0.0, 0.0};
    sing.sub = {1.0};
    sing.super = {1.0};
    CHECK_THROWS_AS(solve_tridiag(sing, Vector::Ones(2)), SingularMatrixError);
}

TEST_CASE("backward Euler exponential") {
    Vector b(3);
    b << 1, 2, 3;
    CHECK((expm_action(Matrix(Matrix::Zero(3, 3)), b, 2.0) - b).norm() == 0.0);
    CHECK((expm_action(TriDiag(3), b, 2.0) - b).norm() == 0.0);

    // Scalar case: (1 + 1/k)^{−k} → e^{−1} with error ≈ e^{−1}/(2k).
    Matrix a1(1, 1);
    a1(0, 0) = -1.0;
    for (int k : {64, 1024, 16384}) {
        const double v = expm_action(a1, Vector::Ones(1), 1.0, k)[0];
        CHECK(std::abs(v - std::exp(-1.0)) < 1.0 / k);
    }

    // 20×20 generator with exit rates of order one against Eigen's
    // scaling-and-squaring exponential.
    std::mt19937_64 rng(11);
    const Matrix g = random_rates(20, 2.0 / 19.0, rng);
    Vector v(20);
    for (int i = 0; i < 20; ++i) v[i] = std::max(0.0, i - 8.0);
    const Vector ref = Matrix(g.exp()) * v;
    const Vector approx = expm_action(g, v, 1.0, 4096);
    CHECK((approx - ref).lpNorm<Eigen::Infinity>() / ref.lpNorm<Eigen::Infinity>() < 1e-4);

    // First-order convergence: doubling k roughly halves the error.
    const double e1 = (expm_action(g, v, 1.0, 256) - ref).lpNorm<Eigen::Infinity>();
    const double e2 = (expm_action(g, v, 1.0, 512) - ref).lpNorm<Eigen::Infinity>();
    CHECK(e2 <= 0.75 * e1);

    // Tridiagonal and dense paths agree.
    const Matrix bd = testutil::birth_death(30, 1.3, 0.7);
    TriDiag tri(30);
    for (int i = 0; i < 30; ++i) {
        tri.main[static_cast<std::size_t>(i)] = bd(i, i);
        if (i + 1 < 30) {
            tri.super[static_cast<std::size_t>(i)] = bd(i, i + 1);
            tri.sub[static_cast<std::size_t>(i)] = bd(i + 1, i);
        }
    }
    Vector w = Vector::LinSpaced(30, 0.0, 1.0);
    CHECK((expm_action(tri, w, 0.7, 500) - expm_action(bd, w, 0.7, 500)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("Lemke trivial instances") {
    for (int n : {1, 3, 6}) {
        const Matrix I = Matrix::Identity(n, n);
        const LcpSolution pos = lemke_solve(LcpProblem{I, Vector::LinSpaced(n, 0.0, 2.0)});
        REQUIRE(pos.solved());
        CHECK(pos.z.lpNorm<Eigen::Infinity>() == 0.0);
        const LcpSolution neg = lemke_solve(LcpProblem{I, Vector::Constant(n, -1.0)});
        REQUIRE(neg.solved());
        CHECK((neg.z - Vector::Ones(n)).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("Lemke reports rays") {
    // A = −I with q < 0 has no solution: z ≥ 0 gives w = −z + q < 0.
    const LcpProblem p{-Matrix::Identity(2, 2), Vector::Constant(2, -1.0)};
    const LcpSolution s = lemke_solve(p);
    CHECK(s.status == LcpStatus::RayTermination);
    CHECK(brute_force_lcp(p).status == LcpStatus::RayTermination);
    CHECK_THROWS(require_solved(s, "test"));
}

TEST_CASE("Lemke matches complementary-basis enumeration") {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 10);
    int disagreements = 0;
    for (int c = 0; c < 3000; ++c) {
        const int n = dim(rng);
        LcpProblem p{random_p_matrix(n, rng), Vector(n)};
        for (int i = 0; i < n; ++i) p.q[i] = u(rng);
        const LcpSolution ref = brute_force_lcp(p);
        const LcpSolution lem = lemke_solve(p);
        REQUIRE(ref.solved());
        REQUIRE(lem.solved());
        for (int i = 0; i < n; ++i)
            if ((ref.z[i] > 1e-9) != (lem.z[i] > 1e-9)) ++disagreements;
        CHECK((ref.z - lem.z).lpNorm<Eigen::Infinity>() < 1e-9);
        CHECK(lem.residual < 1e-9);
    }
    CHECK(disagreements == 0);
}

TEST_CASE("PSOR and policy iteration agree with Lemke") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int c = 0; c < 40; ++c) {
        const int n = 3 + c % 10;
        // Symmetric positive definite for PSOR.
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = u(rng);
        LcpProblem spd{b * b.transpose() + Matrix::Identity(n, n), Vector(n)};
        for (int i = 0; i < n; ++i) spd.q[i] = 2.0 * u(rng);
        const LcpSolution lem = lemke_solve(spd);
        const LcpSolution ps = psor_solve(spd);
        REQUIRE(ps.solved());
        CHECK((lem.z - ps.z).lpNorm<Eigen::Infinity>() < 1e-7);
        check_lcp(spd, ps.z, 1e-8);

        // Diagonally dominant M-matrix for policy iteration.
        Matrix m = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j)
                if (j != i) m(i, j) = -std::abs(u(rng));
            m(i, i) = -m.row(i).sum() + 0.2 + std::abs(u(rng));
        }
        LcpProblem mm{m, Vector(n)};
        for (int i = 0; i < n; ++i) mm.q[i] = 2.0 * u(rng);
        const LcpSolution pi = policy_iteration_solve(mm);
        REQUIRE(pi.solved());
        CHECK((lemke_solve(mm).z - pi.z).lpNorm<Eigen::Infinity>() < 1e-9);
        CHECK(pi.residual <= 1e-8);
        check_lcp(mm, pi.z, 1e-9);

        // The sparse and tridiagonal overloads see the same problem.
        const SparseMatrix sp = mm.A.sparseView();
        CHECK((policy_iteration_solve(sp, mm.q).z - pi.z).lpNorm<Eigen::Infinity>() < 1e-9);
    }
    CHECK(psor_solve(LcpProblem{Matrix::Identity(4, 4), Vector::Ones(4)}).z.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("obstacle problem contact point") {
    const int n = 200;
    double h = 0.0;
    const LcpProblem p = obstacle(n, h);
    const double a = std::sqrt(0.15);
    const int expected = static_cast<int>(std::lround(a / h)) - 1;  // node index of x = a

    auto first_contact = [&](const Vector& z) {
        for (int i = 0; i < n; ++i)
            if (z[i] < 1e-9) return i;
        return n;
    };
    const LcpSolution lem = lemke_solve(p);
    REQUIRE(lem.solved());
    CHECK(std::abs(first_contact(lem.z) - expected) <= 1);

    PsorOptions po;
    po.relaxation = 1.9;
    po.tol = 1e-13;
    po.max_iter = 2'000'000;
    const LcpSolution ps = psor_solve(p, po);
    REQUIRE(ps.solved());
    CHECK(std::abs(first_contact(ps.z) - expected) <= 1);
    CHECK((ps.z - lem.z).lpNorm<Eigen::Infinity>() < 1e-7);

    TriDiag tri(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        tri.main[static_cast<std::size_t>(i)] = p.A(i, i);
        if (i + 1 < n) {
            tri.super[static_cast<std::size_t>(i)] = p.A(i, i + 1);
            tri.sub[static_cast<std::size_t>(i)] = p.A(i + 1, i);
        }
    }
    const LcpSolution pi = policy_iteration_solve(tri, p.q);
    REQUIRE(pi.solved());
    CHECK((pi.z - lem.z).lpNorm<Eigen::Infinity>() < 1e-9);
    // Symmetry of the contact set.
    CHECK(first_contact(pi.z) + first_contact(pi.z.reverse()) <= n);
}

TEST_CASE("method names round-trip") {
    for (LcpMethod m : {LcpMethod::Lemke, LcpMethod::Psor, LcpMethod::PolicyIteration})
        CHECK(parse_lcp_method(to_string(m)) == m);
    CHECK_THROWS(parse_lcp_method("simplex"));
}

}  // TEST_SUITE
