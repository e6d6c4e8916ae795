#include "parisian/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace parisian {

RatePolicy parse_rate_policy(const std::string& name) {
    if (name == "strict") return RatePolicy::Strict;
    if (name == "clamp") return RatePolicy::Clamp;
    if (name == "upwind") return RatePolicy::Upwind;
    throw std::invalid_argument("unknown rate policy '" + name + "'");
}

std::string to_string(RatePolicy p) {
    switch (p) {
        case RatePolicy::Strict: return "strict";
        case RatePolicy::Clamp: return "clamp";
        case RatePolicy::Upwind: return "upwind";
    }
    return "unknown";
}

GeneratorMatrix::GeneratorMatrix(TriDiag core, std::optional<Matrix> far, double t)
    : core_(std::move(core)), far_(std::move(far)), time_(t) {
    core_.validate();
    if (far_ && (far_->rows() != size() || far_->cols() != size()))
        throw std::invalid_argument("generator: jump block has wrong shape");
}

GeneratorMatrix GeneratorMatrix::from_dense(const Matrix& g, double t, bool keep_jump_block) {
    if (g.rows() != g.cols()) throw std::invalid_argument("generator: matrix must be square");
    const auto n = g.rows();
    TriDiag core(static_cast<std::size_t>(n));
    Matrix far = Matrix::Zero(n, n);
    bool banded = true;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto u = static_cast<std::size_t>(i);
            if (j == i) core.main[u] = g(i, j);
            else if (j == i + 1) core.super[u] = g(i, j);
            else if (j == i - 1) core.sub[u - 1] = g(i, j);
            else if (g(i, j) != 0.0) {
                far(i, j) = g(i, j);
                banded = false;
            }
        }
    if (banded && !keep_jump_block) return GeneratorMatrix(std::move(core), std::nullopt, t);
    return GeneratorMatrix(std::move(core), std::move(far), t);
}

double GeneratorMatrix::rate(int i, int j) const {
    const auto u = static_cast<std::size_t>(i);
    double v = 0.0;
    if (j == i) v = core_.main[u];
    else if (j == i + 1) v = core_.super[u];
    else if (j == i - 1) v = core_.sub[u - 1];
    if (far_) v += (*far_)(i, j);
    return v;
}

Matrix GeneratorMatrix::to_dense() const {
    Matrix m = core_.to_dense();
    if (far_) m += *far_;
    return m;
}

Vector GeneratorMatrix::apply(const Vector& x) const {
    Vector y = core_.apply(x);
    if (far_) y.noalias() += *far_ * x;
    return y;
}

double GeneratorMatrix::norm_inf() const {
    if (!far_) return core_.norm_inf();
    return to_dense().cwiseAbs().rowwise().sum().maxCoeff();
}

void GeneratorMatrix::check_valid(double tol) const {
    const Matrix g = to_dense();
    const int n = size();
    for (int i = 0; i < n; ++i) {
        double sum = 0.0, scale = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = g(i, j);
            if (!std::isfinite(v)) throw std::logic_error("generator: non-finite rate in row " + std::to_string(i));
            if (j != i && v < 0.0)
                throw std::logic_error("generator: negative rate at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            sum += v;
            scale += std::abs(v);
        }
        if (std::abs(sum) > tol * std::max(1.0, scale))
            throw std::logic_error("generator: row " + std::to_string(i) + " does not sum to zero");
    }
    for (int i : {0, n - 1})
        if (g.row(i).cwiseAbs().maxCoeff() != 0.0)
            throw std::logic_error("generator: boundary row " + std::to_string(i) + " is not absorbing");
}

void GeneratorMatrix::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "i,j,rate\n";
    const int n = size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double v = rate(i, j);
            if (v != 0.0) out << i << ',' << j << ',' << v << '\n';
        }
}

namespace {

Interval shifted(const Interval& c, double x) { return {c.lo - x, c.hi - x}; }

Interval clip_unit(const Interval& c) { return {std::max(c.lo, -1.0), std::min(c.hi, 1.0)}; }

}  // namespace

GeneratorMatrix build_generator(const ModelSpec& model, const SpatialGrid& grid, double t,
                                const GeneratorOptions& opts) {
    if (!model.drift || !model.diffusion_sq) throw std::invalid_argument("generator: model coefficients missing");
    const int n = grid.size();
    TriDiag core(static_cast<std::size_t>(n));
    std::optional<Matrix> far;
    if (model.has_jumps()) far = Matrix::Zero(n, n);

    int repaired = 0;
    for (int i = 1; i + 1 < n; ++i) {
        const double x = grid[i];
        const double dp = grid.delta_plus(i);
        const double dm = grid.delta_minus(i);
        const double dx = 0.5 * (dp + dm);
        const double mu = model.drift(t, x);
        const double s2 = model.diffusion_sq(t, x);
        if (!std::isfinite(mu) || !std::isfinite(s2) || s2 < 0.0)
            throw std::invalid_argument("generator: invalid coefficients at state " + std::to_string(i));

        double mu_bar = 0.0, s2_bar = 0.0, nu_up = 0.0, nu_down = 0.0;
        if (far) {
            const JumpMeasure& nu = *model.jumps;
            s2_bar = nu.small_jump_second_moment(t, x, {-0.5 * dm, 0.5 * dp});
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const Interval c = shifted(grid.cell(j), x);
                const double mass = nu.interval_mass(t, x, c);
                const Interval u = clip_unit(c);
                if (u.lo < u.hi) mu_bar += (grid[j] - x) * nu.interval_mass(t, x, u);
                if (j == i + 1) nu_up = mass;
                else if (j == i - 1) nu_down = mass;
                else (*far)(i, j) = mass;
            }
        }

        const double b = mu - mu_bar;
        const double diff = s2 + s2_bar;
        double up = b * dm / (2.0 * dp * dx) + diff / (2.0 * dp * dx) + nu_up;
        double down = -b * dp / (2.0 * dm * dx) + diff / (2.0 * dm * dx) + nu_down;
        if (up < 0.0 || down < 0.0) {
            switch (opts.policy) {
                case RatePolicy::Strict: {
                    const bool at_up = up < 0.0;
                    std::ostringstream msg;
                    msg << "generator: negative " << (at_up ? "up" : "down") << " rate " << (at_up ? up : down)
                        << " at state " << i << " (x=" << x << ", t=" << t
                        << "); refine the grid or choose another rate policy";
                    throw NegativeRateError(msg.str(), i, at_up ? i + 1 : i - 1, at_up ? up : down);
                }
                case RatePolicy::Clamp:
                    up = std::max(up, 0.0);
                    down = std::max(down, 0.0);
                    break;
                case RatePolicy::Upwind:
                    up = std::max(b, 0.0) / dp + diff / (2.0 * dp * dx) + nu_up;
                    down = std::max(-b, 0.0) / dm + diff / (2.0 * dm * dx) + nu_down;
                    break;
            }
            ++repaired;
        }
        const auto u = static_cast<std::size_t>(i);
        core.super[u] = up;
        core.sub[u - 1] = down;
        double out = up + down;
        if (far) out += far->row(i).sum();
        core.main[u] = -out;
    }
    GeneratorMatrix g(std::move(core), std::move(far), t);
    g.set_repaired_rows(repaired);
    return g;
}

}  // namespace parisian
