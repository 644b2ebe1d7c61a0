#include "delaystab/linalg.hpp"

#include "delaystab/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace delaystab {

Matrix::Matrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    data_.reserve(n_ * n_);
    for (const auto& r : rows) {
        if (r.size() != n_) {
            throw InputError("matrix must be square: row of length " + std::to_string(r.size()) +
                             " in a " + std::to_string(n_) + "-row matrix");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix::Matrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major)) {
    if (data_.size() != n_ * n_) {
        throw InputError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                         std::to_string(n_ * n_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::leading(std::size_t k) const {
    assert(k <= n_);
    Matrix out(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) out(i, j) = (*this)(i, j);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

Matrix Matrix::permuted(std::span<const std::size_t> perm) const {
    if (perm.size() != n_) throw InputError("permutation length does not match matrix size");
    Matrix out(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) out(i, j) = (*this)(perm[i], perm[j]);
    return out;
}

Vector Matrix::operator*(std::span<const double> v) const {
    if (v.size() != n_) throw InputError("vector length does not match matrix size");
    Vector out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

void require_finite(const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (!std::isfinite(m(i, j)))
                throw InputError("non-finite matrix entry at (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ")");
}

LuDecomposition::LuDecomposition(const Matrix& m)
    : n_(m.size()), lu_(m.data().begin(), m.data().end()), perm_(m.size()) {
    require_finite(m);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (double v : lu_) scale_ = std::max(scale_, std::abs(v));

    min_pivot_ = n_ == 0 ? 0.0 : INFINITY;
    auto at = [this](std::size_t i, std::size_t j) -> double& { return lu_[i * n_ + j]; };
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n_; ++i)
            if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n_; ++j) std::swap(at(k, j), at(p, j));
            std::swap(perm_[k], perm_[p]);
            det_ = -det_;
        }
        const double pivot = at(k, k);
        det_ *= pivot;
        if (std::abs(pivot) < min_pivot_) {
            min_pivot_ = std::abs(pivot);
            min_pivot_index_ = k;
        }
        if (pivot == 0.0) continue;
        for (std::size_t i = k + 1; i < n_; ++i) {
            const double f = at(i, k) / pivot;
            at(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n_; ++j) at(i, j) -= f * at(k, j);
        }
    }
}

Vector LuDecomposition::solve(std::span<const double> rhs, double pivot_tol) const {
    if (rhs.size() != n_) throw InputError("right-hand side length does not match matrix size");
    if (n_ > 0 && min_pivot_ <= pivot_tol * scale_) throw SingularMatrixError(min_pivot_index_, min_pivot_);
    auto at = [this](std::size_t i, std::size_t j) { return lu_[i * n_ + j]; };
    Vector x(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = rhs[perm_[i]];
        for (std::size_t j = 0; j < i; ++j) s -= at(i, j) * x[j];
        x[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n_; ++j) s -= at(i, j) * x[j];
        x[i] = s / at(i, i);
    }
    return x;
}

double determinant(const Matrix& m) { return LuDecomposition(m).determinant(); }

Vector leading_principal_minors(const Matrix& m) {
    require_finite(m);
    Vector minors(m.size());
    for (std::size_t k = 1; k <= m.size(); ++k) minors[k - 1] = determinant(m.leading(k));
    return minors;
}

Matrix inverse(const Matrix& m) {
    const LuDecomposition lu(m);
    const std::size_t n = m.size();
    Matrix inv(n);
    Vector e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        const Vector col = lu.solve(e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double inf_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

double inf_norm(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

LinearSolution solve_linear(const Matrix& m, std::span<const double> rhs) {
    const LuDecomposition lu(m);
    LinearSolution out;
    out.x = lu.solve(rhs);
    out.condition_estimate = inf_norm(m) * inf_norm(inverse(m));
    return out;
}

std::string_view to_string(ScreenTag tag) {
    switch (tag) {
        case ScreenTag::row_dominance: return "row-dominance";
        case ScreenTag::column_dominance: return "column-dominance";
        case ScreenTag::weighted_row: return "weighted-row";
        case ScreenTag::weighted_column: return "weighted-column";
        case ScreenTag::none: return "none";
    }
    return "none";
}

namespace {

bool off_diagonal_nonpositive(const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j && m(i, j) > 0.0) return false;
    return true;
}

void check_weights(std::span<const double> w, std::size_t n) {
    if (w.empty()) return;
    if (w.size() != n) throw PreconditionError("weight vector length does not match matrix size");
    for (double x : w)
        if (!(x > 0.0) || !std::isfinite(x)) throw PreconditionError("weights must be positive and finite");
}

// ξ = m⁻¹·1 when m⁻¹ exists and is entrywise nonnegative; empty otherwise.
std::optional<Vector> inverse_witness(const Matrix& m) {
    try {
        const Matrix inv = inverse(m);
        const double floor = -1e-12 * std::max(1.0, inf_norm(inv));
        for (double v : inv.data())
            if (v < floor) return std::nullopt;
        const Vector xi = inv * Vector(m.size(), 1.0);
        for (double v : xi)
            if (!(v > 0.0)) return std::nullopt;
        return xi;
    } catch (const SingularMatrixError&) {
        return std::nullopt;
    }
}

}  // namespace

bool rows_dominant(const Matrix& m, std::span<const double> weights, double tol) {
    check_weights(weights, m.size());
    auto w = [&](std::size_t k) { return weights.empty() ? 1.0 : weights[k]; };
    for (std::size_t i = 0; i < m.size(); ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != i) off += w(j) * std::abs(m(i, j));
        if (!(w(i) * m(i, i) - off > tol)) return false;
    }
    return true;
}

bool columns_dominant(const Matrix& m, std::span<const double> weights, double tol) {
    check_weights(weights, m.size());
    auto w = [&](std::size_t k) { return weights.empty() ? 1.0 : weights[k]; };
    for (std::size_t j = 0; j < m.size(); ++j) {
        double off = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (i != j) off += w(i) * std::abs(m(i, j));
        if (!(w(j) * m(j, j) - off > tol)) return false;
    }
    return true;
}

ScreenTag lemma0_screen(const Matrix& m, std::optional<Vector> weights) {
    require_finite(m);
    if (!off_diagonal_nonpositive(m))
        throw PreconditionError("lemma0_screen requires nonpositive off-diagonal entries");
    if (rows_dominant(m, {}, kDefaultTol)) return ScreenTag::row_dominance;
    if (columns_dominant(m, {}, kDefaultTol)) return ScreenTag::column_dominance;
    if (!weights) weights = inverse_witness(m);
    if (weights) {
        if (rows_dominant(m, *weights, kDefaultTol)) return ScreenTag::weighted_row;
        if (columns_dominant(m, *weights, kDefaultTol)) return ScreenTag::weighted_column;
    }
    return ScreenTag::none;
}

MMatrixReport is_m_matrix(const Matrix& m, double tol) {
    require_finite(m);
    MMatrixReport r;
    r.off_diagonal_ok = off_diagonal_nonpositive(m);
    r.minors = leading_principal_minors(m);
    r.margin = r.minors.empty() ? 0.0 : *std::min_element(r.minors.begin(), r.minors.end());
    r.is_m_matrix = r.off_diagonal_ok &&
                    std::all_of(r.minors.begin(), r.minors.end(), [tol](double d) { return d > tol; });
    if (r.off_diagonal_ok) r.screen_passed = lemma0_screen(m);
    if (r.is_m_matrix) {
        try {
            Vector xi = LuDecomposition(m).solve(Vector(m.size(), 1.0));
            const Vector image = m * xi;
            const bool positive = std::all_of(xi.begin(), xi.end(), [](double v) { return v > 0.0; }) &&
                                  std::all_of(image.begin(), image.end(), [](double v) { return v > 0.0; });
            if (positive) r.witness_xi = std::move(xi);
        } catch (const SingularMatrixError&) {
        }
    }
    return r;
}

double spectral_radius(const Matrix& m, double tol, int max_iter) {
    require_finite(m);
    if (!(tol > 0.0)) throw PreconditionError("spectral_radius requires tol > 0");
    for (double v : m.data())
        if (v < 0.0) throw PreconditionError("spectral_radius requires a nonnegative matrix");
    const std::size_t n = m.size();
    if (n == 0) return 0.0;

    // Power method by repeated squaring: B_k = B_{k-1}² / c_k, so that
    // ‖M^(2^k)‖ = Π c_j^(2^(k-j)) and r = lim ‖M^(2^k)‖^(1/2^k). Products of nonnegative
    // entries never cancel, so the squarings lose only O(n·eps) relative accuracy each, and
    // imprimitive or reducible matrices need no special treatment.
    Matrix b = m;
    double scale = inf_norm(b);
    if (scale == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) /= scale;
    double log_r = std::log(scale);
    double estimate = scale;
    Matrix sq(n);
    for (int k = 1; k <= max_iter; ++k) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < n; ++l) acc += b(i, l) * b(l, j);
                sq(i, j) = acc;
            }
        const double c = inf_norm(sq);
        if (c == 0.0) return 0.0;  // nilpotent
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b(i, j) = sq(i, j) / c;
        log_r += std::ldexp(std::log(c), -k);
        const double next = std::exp(log_r);
        const bool settled = std::abs(next - estimate) <= 0.1 * tol;
        estimate = next;
        if (settled || k >= 1100) break;  // 2^-1100 underflows: nothing left to add
        if (k == max_iter) throw ConvergenceError("spectral_radius: power method did not stabilize", estimate);
    }
#ifndef NDEBUG
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, m(i, i));
    assert(estimate >= max_diag - 10 * tol && estimate <= inf_norm(m) * (1 + 1e-12) + 10 * tol);
#endif
    return estimate;
}

}  // namespace delaystab
