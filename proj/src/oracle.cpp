#include "parisian/oracle.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace parisian {

UniformizedChain uniformize(const Matrix& G, double rate) {
    if (G.rows() != G.cols()) throw std::invalid_argument("uniformize: generator must be square");
    UniformizedChain c;
    c.rate = std::max(rate, G.rows() ? G.diagonal().cwiseAbs().maxCoeff() : 0.0);
    const auto n = G.rows();
    c.P = Matrix::Identity(n, n);
    if (c.rate > 0.0) c.P += G / c.rate;
    if (n > 0 && c.P.minCoeff() < -1e-12) throw std::invalid_argument("uniformize: negative transition probability");
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(c.P.row(i).sum() - 1.0) > 1e-12 && std::abs(G.row(i).sum()) > 1e-12 * (1.0 + c.rate))
            throw std::invalid_argument("uniformize: generator rows must sum to zero");
    return c;
}

Vector uniformized_action(const UniformizedChain& c, const Vector& b, double t, double tail) {
    const double a = c.rate * t;
    if (a == 0.0) return b;
    // Poisson weights are built in log space to survive large Λt.
    Vector term = b;
    Vector out = Vector::Zero(b.size());
    for (long k = 0;; ++k) {
        const double w = std::exp(-a + static_cast<double>(k) * std::log(a) - std::lgamma(static_cast<double>(k) + 1.0));
        out += w * term;
        // Once k + 1 > Λt the remaining weights decay at least geometrically
        // with ratio Λt/(k + 2), which bounds the tail without relying on
        // 1 − Σw (that difference stalls at rounding level).
        const double kk = static_cast<double>(k);
        if (kk + 1.0 > a) {
            const double next = w * a / (kk + 1.0);
            if (next / (1.0 - a / (kk + 2.0)) < tail) break;
        }
        if (k > 100'000'000) throw ConvergenceError("uniformized_action: series did not converge");
        term = c.P * term;
    }
    return out;
}

namespace {

// v = max(f, W v + c) with ‖W‖∞ < 1, iterated until the a-posteriori error
// bound ρ/(1−ρ)·‖Δv‖ is below tol.
Vector iterate_stopping(const Matrix& W, const Vector& c, const Vector& f, double tol, long max_iter,
                        const Vector* start = nullptr) {
    const double rho = W.rows() ? W.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
    if (!(rho < 1.0)) throw std::invalid_argument("value iteration: map is not a contraction");
    Vector v = start ? *start : f;
    const double factor = rho / (1.0 - rho);
    for (long it = 0; it < max_iter; ++it) {
        const Vector next = (W * v + c).cwiseMax(f);
        const double change = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (change * factor <= tol) return v;
    }
    throw ConvergenceError("value iteration: iteration budget exhausted");
}

}  // namespace

Vector value_iterate_american(const UniformizedChain& chain, const Vector& f, double r, double tol, long max_iter) {
    if (!(r > 0.0)) throw std::invalid_argument("value iteration: r must be positive");
    const double beta = chain.discount(r);
    const Matrix W = beta * chain.P;
    return iterate_stopping(W, Vector::Zero(f.size()), f, tol, max_iter);
}

Matrix joint_time_generator(const Matrix& G, double dt, int steps) {
    const auto n = G.rows();
    const Eigen::Index N = n * steps;
    Matrix Q = Matrix::Zero(N, N);
    for (int s = 0; s < steps; ++s) {
        Q.block(s * n, s * n, n, n) = G;
        for (Eigen::Index y = 0; y < n; ++y) {
            Q(s * n + y, s * n + y) -= 1.0 / dt;
            if (s + 1 < steps) Q(s * n + y, (s + 1) * n + y) = 1.0 / dt;
        }
    }
    return Q;
}

namespace {

void check_problem(const LatticeProblem& p) {
    if (p.G.rows() != p.G.cols() || p.f.size() != p.G.rows())
        throw std::invalid_argument("lattice oracle: inconsistent sizes");
    if (p.below < 0 || p.below > p.G.rows()) throw std::invalid_argument("lattice oracle: bad below count");
    if (!(p.dt > 0.0) || p.steps < 1 || !(p.D > 0.0)) throw std::invalid_argument("lattice oracle: bad clocks");
    const double size = static_cast<double>(p.G.rows()) * p.steps;
    if (size > 1e5) throw std::invalid_argument("lattice oracle: lattice too large");
}

// One slice of optimal stopping for a chain with sub-generator Q (which
// already contains the −1/δ_t tick), continuation weight on the tick `tick`
// applied to `next`, discount r.
Vector stop_slice(const Matrix& Q, const Vector& f, const Vector& next, double tick, double r, double tol,
                  const Vector* start) {
    const auto n = Q.rows();
    const double lambda = Q.diagonal().cwiseAbs().maxCoeff();
    const double beta = lambda / (lambda + r);
    Matrix W = Matrix::Identity(n, n) + Q / lambda;  // substochastic: rows sum to 1 − (1/δ_t)/Λ
    W *= beta;
    const Vector c = beta * tick / lambda * next;
    return iterate_stopping(W, c, f, tol, 200'000'000, start);
}

}  // namespace

std::vector<Vector> dp_vanilla_slices(const LatticeProblem& p) {
    check_problem(p);
    const auto n = p.G.rows();
    Matrix Q = p.G;
    Q.diagonal().array() -= 1.0 / p.dt;
    // The vanilla recursion runs on ζ-time only when discount_vanilla is set.
    const double tick = (1.0 / p.dt) * (p.discount_vanilla ? std::exp(-p.r * p.dt) : 1.0);
    std::vector<Vector> c(static_cast<std::size_t>(p.steps) + 1, Vector::Zero(n));
    for (int s = p.steps - 1; s >= 0; --s) {
        const auto u = static_cast<std::size_t>(s);
        c[u] = stop_slice(Q, p.f, c[u + 1], tick, 0.0, p.tol, &c[u + 1]);
    }
    return c;
}

Vector dp_downout_lattice(const LatticeProblem& p) {
    check_problem(p);
    if (!(p.dd > 0.0)) throw std::invalid_argument("lattice oracle: duration step must be positive");
    const int n = static_cast<int>(p.G.rows());
    const int nb = p.below;
    const int m = static_cast<int>(std::floor(p.D / p.dd + 1e-9)) + 1;  // D⁺ level
    // Joint index: level 0 → y, level i ≥ 1 → n + (i−1)·nb + y.
    auto idx = [&](int level, int y) { return level == 0 ? y : n + (level - 1) * nb + y; };
    const int N = n + nb * m;
    Matrix Q = Matrix::Zero(N, N);
    Vector f = Vector::Zero(N);
    for (int level = 0; level <= m; ++level) {
        const int count = level == 0 ? n : nb;
        for (int x = 0; x < count; ++x) {
            const int row = idx(level, x);
            if (level == m) {  // knocked out: frozen at zero value
                Q(row, row) = -1.0 / p.dt;
                continue;
            }
            f[row] = p.f[x];
            for (int y = 0; y < n; ++y) {
                if (y == x) continue;
                const double rate = p.G(x, y);
                if (rate == 0.0) continue;
                // Moves below L keep the clock when already below; any move
                // to a state ≥ L resets it.
                const int col = (x < nb && y < nb) ? idx(level, y) : (y < nb ? idx(0, y) : y);
                Q(row, col) += rate;
            }
            if (x < nb) Q(row, idx(level + 1, x)) += 1.0 / p.dd;
            Q(row, row) = -(Q.row(row).sum()) - 1.0 / p.dt;
        }
    }
    Vector next = Vector::Zero(N);
    for (int s = p.steps - 1; s >= 0; --s) next = stop_slice(Q, f, next, 1.0 / p.dt, p.r, p.tol, &next);
    return next.head(n);
}

Vector dp_downin_lattice(const LatticeProblem& p) {
    const std::vector<Vector> c = dp_vanilla_slices(p);
    const int n = static_cast<int>(p.G.rows());
    const int S = p.steps;
    const Matrix Q = joint_time_generator(p.G, p.dt, S);

    // Split the joint states into B (below L) and A (at or above L).
    std::vector<int> B, A;
    for (int s = 0; s < S; ++s)
        for (int y = 0; y < n; ++y) (y < p.below ? B : A).push_back(s * n + y);
    const auto nbj = static_cast<Eigen::Index>(B.size()), naj = static_cast<Eigen::Index>(A.size());
    auto block = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
        Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = Q(rows[i], cols[j]);
        return out;
    };
    // Activation payoff W(s, y) = e^{−r sδ_t} c_f(s, y) on B.
    Vector W(nbj);
    for (Eigen::Index k = 0; k < nbj; ++k) {
        const int s = B[static_cast<std::size_t>(k)] / n, y = B[static_cast<std::size_t>(k)] % n;
        W[k] = std::exp(-p.r * s * p.dt) * c[static_cast<std::size_t>(s)][y];
    }
    const Matrix Qbb = block(B, B), Qba = block(B, A), Qaa = block(A, A), Qab = block(A, B);
    Vector psi_b;
    if (nbj == 0) {
        psi_b = Vector();
    } else {
        // Van Loan: exp(D·[[Q_BB, Q_BA], [0, 0]]) carries e^{DQ_BB} and
        // ∫₀^D e^{uQ_BB} du·Q_BA in its first block row.
        Matrix big = Matrix::Zero(nbj + naj, nbj + naj);
        big.topLeftCorner(nbj, nbj) = Qbb;
        big.topRightCorner(nbj, naj) = Qba;
        const Matrix e = (p.D * big).exp();
        const Matrix E = e.topLeftCorner(nbj, nbj);
        const Matrix X = e.topRightCorner(nbj, naj);
        const Matrix Y = naj ? Matrix(Eigen::PartialPivLU<Matrix>(-Qaa).solve(Qab)) : Matrix(0, nbj);
        const Matrix I = Matrix::Identity(nbj, nbj);
        psi_b = Eigen::PartialPivLU<Matrix>(I - X * Y).solve(E * W);
    }
    const Vector psi_a = naj ? Vector(Eigen::PartialPivLU<Matrix>(-Qaa).solve(Qab * psi_b)) : Vector();
    Vector out(n);
    std::size_t ib = 0, ia = 0;
    for (int y = 0; y < n; ++y) out[y] = y < p.below ? psi_b[static_cast<Eigen::Index>(ib++)] : psi_a[static_cast<Eigen::Index>(ia++)];
    return out;
}

Vector dp_parisian_lattice(const LatticeProblem& p, LatticeFlavor flavor) {
    return flavor == LatticeFlavor::DownIn ? dp_downin_lattice(p) : dp_downout_lattice(p);
}

Vector first_entrance_enumeration(const Matrix& Q, int start, const std::vector<char>& target, double cutoff) {
    const auto n = Q.rows();
    if (static_cast<Eigen::Index>(target.size()) != n) throw std::invalid_argument("enumeration: target size mismatch");
    Vector hit = Vector::Zero(n);
    if (target[static_cast<std::size_t>(start)]) {
        hit[start] = 1.0;
        return hit;
    }
    // Embedded jump chain: from x jump to y with probability Q(x,y)/(−Q(x,x)),
    // and leave the space with the defect probability.
    Matrix J = Matrix::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        const double out = -Q(x, x);
        if (out <= 0.0) continue;
        for (Eigen::Index y = 0; y < n; ++y)
            if (y != x) J(x, y) = Q(x, y) / out;
    }
    Vector mass = Vector::Zero(n);
    mass[start] = 1.0;
    for (long step = 0; step < 100'000'000; ++step) {
        Vector next = Vector::Zero(n);
        for (Eigen::Index x = 0; x < n; ++x) {
            if (mass[x] == 0.0) continue;
            if (-Q(x, x) <= 0.0) continue;  // absorbing outside the target
            next += mass[x] * J.row(x).transpose();
        }
        for (Eigen::Index y = 0; y < n; ++y)
            if (target[static_cast<std::size_t>(y)]) {
                hit[y] += next[y];
                next[y] = 0.0;
            }
        mass = next;
        if (mass.sum() < cutoff) return hit;
    }
    throw ConvergenceError("enumeration: mass did not drain");
}

LcpSolution brute_force_lcp(const LcpProblem& p, double tol) {
    p.validate();
    const int n = static_cast<int>(p.dimension());
    if (n > 20) throw std::invalid_argument("brute_force_lcp: dimension too large");
    const double scale = 1.0 + p.q.lpNorm<Eigen::Infinity>();
    LcpSolution out;
    for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
        ++out.iterations;
        std::vector<int> basic;
        for (int i = 0; i < n; ++i)
            if (mask & (1ul << i)) basic.push_back(i);
        Vector z = Vector::Zero(n);
        if (!basic.empty()) {
            const int k = static_cast<int>(basic.size());
            Matrix a(k, k);
            Vector rhs(k);
            for (int i = 0; i < k; ++i) {
                rhs[i] = -p.q[basic[i]];
                for (int j = 0; j < k; ++j) a(i, j) = p.A(basic[i], basic[j]);
            }
            Eigen::FullPivLU<Matrix> lu(a);
            if (!lu.isInvertible()) continue;
            const Vector zb = lu.solve(rhs);
            for (int i = 0; i < k; ++i) z[basic[i]] = zb[i];
        }
        Vector w = p.A * z + p.q;
        bool feasible = true;
        for (int i = 0; i < n && feasible; ++i) {
            if (mask & (1ul << i)) {
                feasible = z[i] >= -tol * scale;
                w[i] = 0.0;
            } else {
                feasible = w[i] >= -tol * scale;
            }
        }
        if (!feasible) continue;
        out.z = z.cwiseMax(0.0);
        out.w = w.cwiseMax(0.0);
        out.residual = complementarity_residual(out.z, p.A * out.z + p.q);
        out.status = LcpStatus::Solved;
        return out;
    }
    out.status = LcpStatus::RayTermination;
    return out;
}

}  // namespace parisian
