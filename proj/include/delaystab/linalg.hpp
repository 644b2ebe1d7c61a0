#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace delaystab {

using Vector = std::vector<double>;

/// Default strictness tolerance for the ">" comparisons of the M-matrix tests.
inline constexpr double kDefaultTol = 1e-12;

/// Square dense real matrix, row-major. Entries are always finite.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);
    Matrix(std::size_t n, std::vector<double> row_major);

    static Matrix identity(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    std::span<const double> data() const noexcept { return data_; }

    /// Top-left k×k block.
    Matrix leading(std::size_t k) const;
    Matrix transposed() const;
    /// Symmetric relabeling: result(i, j) = (*this)(perm[i], perm[j]).
    Matrix permuted(std::span<const std::size_t> perm) const;

    Vector operator*(std::span<const double> v) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Throws InputError when any entry is NaN or infinite.
void require_finite(const Matrix& m);

/// LU factorization with partial pivoting of a square matrix.
class LuDecomposition {
public:
    explicit LuDecomposition(const Matrix& m);

    double determinant() const noexcept { return det_; }
    /// Smallest |u_kk| over the factorization; zero for exactly singular input.
    double min_pivot() const noexcept { return min_pivot_; }
    std::size_t min_pivot_index() const noexcept { return min_pivot_index_; }

    /// Solves m·x = rhs. Throws SingularMatrixError when a pivot is below pivot_tol.
    Vector solve(std::span<const double> rhs, double pivot_tol = 1e-14) const;

private:
    std::size_t n_;
    std::vector<double> lu_;
    std::vector<std::size_t> perm_;
    double det_ = 1.0;
    double min_pivot_ = 0.0;
    std::size_t min_pivot_index_ = 0;
    double scale_ = 0.0;
};

double determinant(const Matrix& m);

/// k-th entry is the determinant of the top-left (k+1)×(k+1) block.
Vector leading_principal_minors(const Matrix& m);

Matrix inverse(const Matrix& m);

struct LinearSolution {
    Vector x;
    /// Infinity-norm condition number estimate ‖m‖∞·‖m⁻¹‖∞.
    double condition_estimate = 0.0;
};

LinearSolution solve_linear(const Matrix& m, std::span<const double> rhs);

enum class ScreenTag { row_dominance, column_dominance, weighted_row, weighted_column, none };

std::string_view to_string(ScreenTag tag);

struct MMatrixReport {
    bool is_m_matrix = false;
    bool off_diagonal_ok = false;
    Vector minors;
    std::optional<Vector> witness_xi;
    std::optional<ScreenTag> screen_passed;
    /// Minimum leading principal minor.
    double margin = 0.0;
};

/// Nonsingular M-matrix classification by leading principal minors.
MMatrixReport is_m_matrix(const Matrix& m, double tol = kDefaultTol);

/// True when ξ_i·m_ii > Σ_{j≠i} ξ_j·|m_ij| for every row i (ξ ≡ 1 when weights is empty).
bool rows_dominant(const Matrix& m, std::span<const double> weights = {}, double tol = 0.0);
/// True when ξ_j·m_jj > Σ_{i≠j} ξ_i·|m_ij| for every column j.
bool columns_dominant(const Matrix& m, std::span<const double> weights = {}, double tol = 0.0);

/// First diagonal-dominance sufficient condition that holds. Without weights the weighted
/// checks use ξ = m⁻¹·1 when m is nonsingular with nonnegative inverse.
ScreenTag lemma0_screen(const Matrix& m, std::optional<Vector> weights = std::nullopt);

/// Perron root of a nonnegative matrix by the power method (normalized repeated squaring).
/// Stops once successive estimates agree to tol/10; max_iter caps the squarings.
double spectral_radius(const Matrix& m, double tol = 1e-12, int max_iter = 100000);

double inf_norm(const Matrix& m);
double inf_norm(std::span<const double> v);

}  // namespace delaystab
