#include "subchain.hpp"

#include <stdexcept>

namespace parisian::detail {

SubChain::SubChain(const GeneratorMatrix& g, int begin, int end) : g_(&g), begin_(begin), end_(end) {
    if (begin < 0 || end > g.size() || begin > end) throw std::out_of_range("subchain: bad index range");
    const int m = end - begin;
    if (g.is_birth_death()) {
        TriDiag t(static_cast<std::size_t>(m));
        const TriDiag& c = g.core();
        for (int i = 0; i < m; ++i) {
            const auto gi = static_cast<std::size_t>(begin + i);
            t.main[static_cast<std::size_t>(i)] = c.main[gi];
            if (i + 1 < m) {
                t.super[static_cast<std::size_t>(i)] = c.super[gi];
                t.sub[static_cast<std::size_t>(i)] = c.sub[gi];
            }
        }
        tri_ = std::move(t);
    } else {
        dense_ = g.to_dense().block(begin, begin, m, m);
    }
}

Matrix SubChain::to_dense() const { return tri_ ? tri_->to_dense() : dense_; }

Matrix SubChain::coupling(int cbegin, int cend) const {
    const int m = size();
    Matrix c = Matrix::Zero(m, cend - cbegin);
    for (int i = 0; i < m; ++i) {
        const int gi = begin_ + i;
        if (g_->is_birth_death()) {
            for (int gj : {gi - 1, gi + 1})
                if (gj >= cbegin && gj < cend) c(i, gj - cbegin) = g_->rate(gi, gj);
        } else {
            for (int gj = cbegin; gj < cend; ++gj) c(i, gj - cbegin) = g_->rate(gi, gj);
        }
    }
    return c;
}

Resolvent::Resolvent(const SubChain& block, double shift) {
    if (block.size() == 0) return;
    if (block.tridiagonal()) {
        TriDiag a = block.tri();
        for (auto& v : a.sub) v = -v;
        for (auto& v : a.super) v = -v;
        for (auto& v : a.main) v = shift - v;
        tri_.emplace(a);
    } else {
        Matrix a = -block.dense();
        a.diagonal().array() += shift;
        lu_.emplace(a);
    }
}

Vector Resolvent::solve(const Vector& b) const {
    if (!tri_ && !lu_) return b;
    if (tri_) return tri_->solve(b);
    Vector x = lu_->solve(b);
    if (!x.allFinite()) throw SingularMatrixError("resolvent: singular block");
    return x;
}

Matrix Resolvent::solve(const Matrix& b) const {
    if (!tri_ && !lu_) return b;
    if (tri_) {
        Matrix x(b.rows(), b.cols());
        for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = tri_->solve(b.col(j));
        return x;
    }
    Matrix x = lu_->solve(b);
    if (!x.allFinite()) throw SingularMatrixError("resolvent: singular block");
    return x;
}

BackwardEulerExp block_exp(const SubChain& block, double t, int k) {
    if (block.tridiagonal()) return BackwardEulerExp(block.tri(), t, k);
    return BackwardEulerExp(block.dense(), t, k);
}

std::vector<int> coupled_columns(const SubChain& block, int cbegin, int cend) {
    const Matrix c = block.coupling(cbegin, cend);
    std::vector<int> cols;
    for (int j = 0; j < c.cols(); ++j)
        if (c.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(cbegin + j);
    return cols;
}

Matrix select_columns(const Matrix& m, const std::vector<int>& cols, int offset) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j] - offset);
    return out;
}

Vector select_entries(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[idx[j]];
    return out;
}

}  // namespace parisian::detail
