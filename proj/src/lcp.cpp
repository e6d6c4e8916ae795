#include "parisian/lcp.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace parisian {

void LcpProblem::validate() const {
    if (A.rows() != A.cols()) throw std::invalid_argument("LCP: matrix must be square");
    if (A.rows() != q.size()) throw std::invalid_argument("LCP: vector length must match matrix");
    if (!A.allFinite() || !q.allFinite()) throw std::invalid_argument("LCP: non-finite entries");
}

std::string to_string(LcpStatus s) {
    switch (s) {
        case LcpStatus::Solved: return "solved";
        case LcpStatus::RayTermination: return "ray-termination";
        case LcpStatus::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

std::string to_string(LcpMethod m) {
    switch (m) {
        case LcpMethod::Lemke: return "lemke";
        case LcpMethod::Psor: return "psor";
        case LcpMethod::PolicyIteration: return "policy";
    }
    return "unknown";
}

LcpMethod parse_lcp_method(const std::string& name) {
    if (name == "lemke") return LcpMethod::Lemke;
    if (name == "psor") return LcpMethod::Psor;
    if (name == "policy" || name == "howard") return LcpMethod::PolicyIteration;
    throw std::invalid_argument("unknown LCP method '" + name + "'");
}

double complementarity_residual(const Vector& z, const Vector& w) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) r = std::max(r, std::abs(std::min(z[i], w[i])));
    return r;
}

void require_solved(const LcpSolution& s, const std::string& context) {
    if (!s.solved())
        throw ConvergenceError(context + ": LCP solver ended with status " + to_string(s.status) +
                               " after " + std::to_string(s.iterations) + " iterations");
}

namespace {

bool trace_enabled() {
    const char* v = std::getenv("PARISIAN_LCP_TRACE");
    return v != nullptr && std::strcmp(v, "1") == 0;
}

LcpSolution finish(Vector z, const Vector& w, int iterations, LcpStatus status) {
    LcpSolution s;
    s.residual = complementarity_residual(z, w);
    s.z = std::move(z);
    s.w = w;
    s.iterations = iterations;
    s.status = status;
    return s;
}

}  // namespace

// Tableau columns: w_0..w_{n−1}, z_0..z_{n−1}, z0 (artificial), rhs.
LcpSolution lemke_solve(const LcpProblem& p, int max_pivots) {
    p.validate();
    const int n = static_cast<int>(p.dimension());
    if (max_pivots <= 0) max_pivots = 50 * (n + 1);
    const bool trace = trace_enabled();

    if (n == 0 || p.q.minCoeff() >= 0.0) {
        Vector z = Vector::Zero(n);
        return finish(z, p.q, 0, LcpStatus::Solved);
    }

    const int art = 2 * n;
    const int rhs = 2 * n + 1;
    Matrix t(n, 2 * n + 2);
    t.leftCols(n).setIdentity();
    t.middleCols(n, n) = -p.A;
    t.col(art).setConstant(-1.0);
    t.col(rhs) = p.q;
    std::vector<int> basis(n);
    for (int i = 0; i < n; ++i) basis[i] = i;

    const double scale = std::max(1.0, t.leftCols(2 * n + 1).cwiseAbs().maxCoeff());
    const double piv_tol = 1e-12 * scale;

    auto pivot = [&](int row, int col) {
        const double pv = t(row, col);
        t.row(row) /= pv;
        for (int i = 0; i < n; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        t(row, col) = 1.0;
        for (int i = 0; i < n; ++i)
            if (i != row) t(i, col) = 0.0;
        if (trace) std::cerr << "lemke pivot: var " << basis[row] << " leaves, var " << col << " enters (row " << row << ")\n";
        const int leaving = basis[row];
        basis[row] = col;
        return leaving;
    };

    // Initial pivot: z0 enters at the most negative q. The lexicographic rule
    // breaks ties by the rows of B^{-1} = I, which favours the largest index.
    int row0 = 0;
    for (int i = 1; i < n; ++i)
        if (p.q[i] <= p.q[row0]) row0 = i;
    int leaving = pivot(row0, art);
    int pivots = 1;

    LcpStatus status = LcpStatus::MaxIterations;
    while (pivots < max_pivots) {
        const int entering = leaving < n ? leaving + n : leaving - n;
        std::vector<int> cand;
        for (int i = 0; i < n; ++i)
            if (t(i, entering) > piv_tol) cand.push_back(i);
        if (cand.empty()) {
            status = LcpStatus::RayTermination;
            break;
        }
        // Lexicographic minimum ratio: compare (rhs, B^{-1} columns) / pivot column.
        auto ratio = [&](int i, int c) { return t(i, c) / t(i, entering); };
        std::vector<int> best = cand;
        for (int c = -1; c < n && best.size() > 1; ++c) {
            const int col = c < 0 ? rhs : c;
            double m = std::numeric_limits<double>::infinity();
            for (int i : best) m = std::min(m, ratio(i, col));
            const double tol = 1e-11 * std::max(1.0, std::abs(m));
            std::vector<int> keep;
            for (int i : best)
                if (ratio(i, col) <= m + tol) keep.push_back(i);
            // Prefer letting the artificial variable leave whenever it ties.
            if (c < 0) {
                for (int i : keep)
                    if (basis[i] == art) {
                        keep = {i};
                        break;
                    }
            }
            best = std::move(keep);
        }
        leaving = pivot(best.front(), entering);
        ++pivots;
        if (leaving == art) {
            status = LcpStatus::Solved;
            break;
        }
    }

    Vector z = Vector::Zero(n);
    for (int i = 0; i < n; ++i)
        if (basis[i] >= n && basis[i] < 2 * n) z[basis[i] - n] = std::max(0.0, t(i, rhs));
    if (status != LcpStatus::Solved) {
        const Vector w = p.A * z + p.q;
        return finish(z, w, pivots, status);
    }
    Vector w = p.A * z + p.q;
    return finish(z, w, pivots, LcpStatus::Solved);
}

namespace {

template <class RowSweep>
LcpSolution psor_loop(Eigen::Index n, const Vector& q, const PsorOptions& opts, const Vector* start,
                      RowSweep&& sweep, const std::function<Vector(const Vector&)>& residual_w) {
    if (opts.relaxation <= 0.0 || opts.relaxation >= 2.0)
        throw std::invalid_argument("psor: relaxation must lie in (0, 2)");
    Vector z = start ? Vector(start->cwiseMax(0.0)) : Vector(Vector::Zero(n));
    if (z.size() != n) throw std::invalid_argument("psor: start vector has wrong length");
    const double target = opts.tol * (1.0 + (n > 0 ? q.cwiseAbs().maxCoeff() : 0.0));
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double change = sweep(z);
        if (change <= opts.tol) {
            const Vector w = residual_w(z);
            if (complementarity_residual(z, w) <= target) return finish(z, w, it, LcpStatus::Solved);
        }
    }
    return finish(z, residual_w(z), opts.max_iter, LcpStatus::MaxIterations);
}

}  // namespace

LcpSolution psor_solve(const LcpProblem& p, const PsorOptions& opts, const Vector* start) {
    p.validate();
    const Eigen::Index n = p.dimension();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(p.A(i, i) > 0.0)) throw std::invalid_argument("psor: diagonal must be positive");
    const double om = opts.relaxation;
    auto sweep = [&](Vector& z) {
        double change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = p.A.row(i).dot(z) + p.q[i];
            const double next = std::max(0.0, z[i] - om * r / p.A(i, i));
            change = std::max(change, std::abs(next - z[i]));
            z[i] = next;
        }
        return change;
    };
    return psor_loop(n, p.q, opts, start, sweep, [&](const Vector& z) { return Vector(p.A * z + p.q); });
}

LcpSolution psor_solve(const SparseMatrix& a, const Vector& q, const PsorOptions& opts, const Vector* start) {
    const Eigen::Index n = q.size();
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("psor: dimension mismatch");
    Vector diag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        diag[i] = a.coeff(i, i);
        if (!(diag[i] > 0.0)) throw std::invalid_argument("psor: diagonal must be positive");
    }
    const double om = opts.relaxation;
    auto sweep = [&](Vector& z) {
        double change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = q[i];
            for (SparseMatrix::InnerIterator it(a, i); it; ++it) r += it.value() * z[it.col()];
            const double next = std::max(0.0, z[i] - om * r / diag[i]);
            change = std::max(change, std::abs(next - z[i]));
            z[i] = next;
        }
        return change;
    };
    return psor_loop(n, q, opts, start, sweep, [&](const Vector& z) { return Vector(a * z + q); });
}

namespace {

// Howard iteration. `solve_active(active)` returns z with rows in the active
// set satisfying (Az + q)_i = 0 and the remaining entries fixed at zero.
//
// Near the fixed point, entries with z and w both at rounding level can flip
// between policies forever, so the loop also stops once z, w and zᵀw are all
// zero to within `noise`.
template <class Solve, class Apply>
LcpSolution howard_loop(Eigen::Index n, const Vector& q, int max_iter, const Vector* start, Solve&& solve_active,
                        Apply&& apply) {
    Vector z = start ? *start : Vector::Zero(n);
    if (z.size() != n) throw std::invalid_argument("policy iteration: start vector has wrong length");
    const double noise = 1e-12 * (1.0 + (n > 0 ? q.cwiseAbs().maxCoeff() : 0.0));
    std::vector<char> active(n, 0), prev(n, 2);
    Vector w = apply(z);
    for (int it = 1; it <= max_iter; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) active[i] = w[i] <= z[i] ? 1 : 0;
        if (active == prev) return finish(z, w, it - 1, LcpStatus::Solved);
        if (it > 1 && n > 0 && z.minCoeff() >= -noise && w.minCoeff() >= -noise &&
            complementarity_residual(z, w) <= noise)
            return finish(z.cwiseMax(0.0), w, it - 1, LcpStatus::Solved);
        z = solve_active(active);
        w = apply(z);
        prev = active;
    }
    return finish(z, w, max_iter, LcpStatus::MaxIterations);
}

}  // namespace

LcpSolution policy_iteration_solve(const LcpProblem& p, int max_iter, const Vector* start) {
    p.validate();
    const Eigen::Index n = p.dimension();
    auto solve = [&](const std::vector<char>& active) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (active[i]) idx.push_back(i);
        Vector z = Vector::Zero(n);
        if (idx.empty()) return z;
        const auto m = static_cast<Eigen::Index>(idx.size());
        Matrix sub(m, m);
        Vector rhs(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            rhs[r] = -p.q[idx[r]];
            for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = p.A(idx[r], idx[c]);
        }
        Eigen::PartialPivLU<Matrix> lu(sub);
        const Vector x = lu.solve(rhs);
        if (!x.allFinite()) throw SingularMatrixError("policy iteration: singular active subsystem");
        for (Eigen::Index r = 0; r < m; ++r) z[idx[r]] = x[r];
        return z;
    };
    return howard_loop(n, p.q, max_iter, start, solve, [&](const Vector& z) { return Vector(p.A * z + p.q); });
}

LcpSolution policy_iteration_solve(const SparseMatrix& a, const Vector& q, int max_iter, const Vector* start) {
    const Eigen::Index n = q.size();
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("policy iteration: dimension mismatch");
    auto solve = [&](const std::vector<char>& active) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(a.nonZeros()));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!active[i]) {
                trip.emplace_back(i, i, 1.0);
                continue;
            }
            for (SparseMatrix::InnerIterator it(a, i); it; ++it)
                if (active[it.col()]) trip.emplace_back(i, it.col(), it.value());
        }
        Eigen::SparseMatrix<double> m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        m.makeCompressed();
        Vector rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) rhs[i] = active[i] ? -q[i] : 0.0;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(m);
        if (lu.info() != Eigen::Success) throw SingularMatrixError("policy iteration: sparse factorization failed");
        Vector z = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !z.allFinite())
            throw SingularMatrixError("policy iteration: sparse solve failed");
        return z;
    };
    return howard_loop(n, q, max_iter, start, solve, [&](const Vector& z) { return Vector(a * z + q); });
}

LcpSolution policy_iteration_solve(const TriDiag& a, const Vector& q, int max_iter, const Vector* start) {
    a.validate();
    const auto n = static_cast<Eigen::Index>(a.size());
    if (q.size() != n) throw std::invalid_argument("policy iteration: dimension mismatch");
    auto solve = [&](const std::vector<char>& active) {
        TriDiag m(static_cast<std::size_t>(n));
        Vector rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            if (active[i]) {
                m.main[u] = a.main[u];
                if (i > 0 && active[i - 1]) m.sub[u - 1] = a.sub[u - 1];
                if (i + 1 < n && active[i + 1]) m.super[u] = a.super[u];
                rhs[i] = -q[i];
            } else {
                m.main[u] = 1.0;
                rhs[i] = 0.0;
            }
        }
        return solve_tridiag(m, rhs);
    };
    return howard_loop(n, q, max_iter, start, solve, [&](const Vector& z) { return Vector(a.apply(z) + q); });
}

LcpSolution solve_lcp(const LcpProblem& p, LcpMethod method) {
    switch (method) {
        case LcpMethod::Lemke: return lemke_solve(p);
        case LcpMethod::Psor: return psor_solve(p);
        case LcpMethod::PolicyIteration: return policy_iteration_solve(p);
    }
    throw std::invalid_argument("unknown LCP method");
}

}  // namespace parisian
