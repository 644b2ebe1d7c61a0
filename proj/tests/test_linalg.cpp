#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delaystab/errors.hpp"
#include "delaystab/linalg.hpp"
#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace delaystab;
using doctest::Approx;

namespace {

bool all_nonnegative(const Matrix& m, double floor) {
    return std::all_of(m.data().begin(), m.data().end(), [&](double x) { return x >= floor; });
}

// Inverse by Gauss-Jordan with full pivoting, independent of the library's LU.
std::optional<Matrix> gauss_jordan_inverse(Matrix a) {
    const std::size_t n = a.size();
    Matrix inv = Matrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
        if (std::abs(a(p, c)) < 1e-300) return std::nullopt;
        for (std::size_t k = 0; k < n; ++k) {
            std::swap(a(c, k), a(p, k));
            std::swap(inv(c, k), inv(p, k));
        }
        const double d = a(c, c);
        for (std::size_t k = 0; k < n; ++k) {
            a(c, k) /= d;
            inv(c, k) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a(r, c);
            for (std::size_t k = 0; k < n; ++k) {
                a(r, k) -= f * a(c, k);
                inv(r, k) -= f * inv(c, k);
            }
        }
    }
    return inv;
}

}  // namespace

TEST_CASE("leading principal minors") {
    CHECK(leading_principal_minors(Matrix::identity(3)) == Vector{1, 1, 1});

    const Vector m2 = leading_principal_minors(Matrix{{2, -1}, {-1, 2}});
    CHECK(m2[0] == Approx(2));
    CHECK(m2[1] == Approx(3));

    const Vector ex = leading_principal_minors(Matrix{{0.6, -0.875}, {-0.48, 0.8}});
    CHECK(ex[0] == Approx(0.6).epsilon(1e-15));
    CHECK(ex[1] == Approx(0.06).epsilon(1e-13));

    CHECK_THROWS_AS(leading_principal_minors(Matrix{{1, NAN}, {0, 1}}), InputError);
    CHECK_THROWS_AS(leading_principal_minors(Matrix{{1, 0}, {INFINITY, 1}}), InputError);
}

TEST_CASE("minors of triangular matrices are cumulative diagonal products") {
    testing::Gen gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(1, 7));
        Matrix m(n);
        const bool upper = gen.coin();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i == j) m(i, j) = gen.uniform(-3, 3);
                else if ((j > i) == upper) m(i, j) = gen.uniform(-5, 5);
        const Vector minors = leading_principal_minors(m);
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            prod *= m(k, k);
            CHECK(minors[k] == Approx(prod).epsilon(1e-12).scale(1e-12));
        }
    }
}

TEST_CASE("determinant and inverse") {
    CHECK(determinant(Matrix{{1, 2}, {3, 4}}) == Approx(-2));
    CHECK(determinant(Matrix{{0, 1}, {1, 0}}) == Approx(-1));
    CHECK(determinant(Matrix(3)) == 0.0);
    const Matrix inv = inverse(Matrix{{2, 0}, {0, 4}});
    CHECK(inv(0, 0) == Approx(0.5));
    CHECK(inv(1, 1) == Approx(0.25));
    CHECK(inv(0, 1) == 0.0);
    CHECK_THROWS_AS(inverse(Matrix{{1, 2}, {2, 4}}), SingularMatrixError);
}

TEST_CASE("solve_linear") {
    const auto id = solve_linear(Matrix::identity(2), Vector{3, 4});
    CHECK(id.x == Vector{3, 4});

    const auto diag = solve_linear(Matrix{{2, 0}, {0, 4}}, Vector{2, 8});
    CHECK(diag.x[0] == Approx(1));
    CHECK(diag.x[1] == Approx(2));

    // Cramer: x = (0.8 + 0.875, 0.6 + 0.48) / 0.06
    const Matrix c{{0.6, -0.875}, {-0.48, 0.8}};
    const auto ex = solve_linear(c, Vector{1, 1});
    CHECK(ex.x[0] == Approx(1.675 / 0.06).epsilon(1e-12));
    CHECK(ex.x[1] == Approx(1.08 / 0.06).epsilon(1e-12));
    CHECK(ex.x[0] > 27.9);
    CHECK(ex.x[1] > 17.99);
    const Vector r = c * ex.x;
    CHECK(std::abs(r[0] - 1) <= 1e-10);
    CHECK(std::abs(r[1] - 1) <= 1e-10);
    CHECK(ex.condition_estimate > 1.0);

    try {
        solve_linear(Matrix{{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}, Vector{1, 1, 1});
        FAIL("expected a singular-matrix error");
    } catch (const SingularMatrixError& e) {
        CHECK(e.pivot_index == 1);
        CHECK(e.pivot_magnitude < 1e-14);
    }
}

TEST_CASE("solve_linear residual on random well-conditioned systems") {
    testing::Gen gen(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(1, 8));
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = gen.uniform(-1, 1) + (i == j ? 2.0 * n : 0.0);
        Vector b(n);
        for (double& x : b) x = gen.uniform(-10, 10);
        const auto sol = solve_linear(m, b);
        const Vector r = m * sol.x;
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r[i] - b[i]) <= 1e-10 * inf_norm(b));
    }
}

TEST_CASE("is_m_matrix examples") {
    const auto id = is_m_matrix(Matrix::identity(3));
    CHECK(id.is_m_matrix);
    CHECK(id.off_diagonal_ok);
    REQUIRE(id.witness_xi);
    CHECK(*id.witness_xi == Vector{1, 1, 1});
    CHECK(id.margin == 1.0);

    const auto neg = is_m_matrix(Matrix{{1, -2}, {-2, 1}});
    CHECK_FALSE(neg.is_m_matrix);
    CHECK(neg.off_diagonal_ok);
    CHECK(neg.minors[0] == Approx(1));
    CHECK(neg.minors[1] == Approx(-3));
    CHECK(neg.margin == Approx(-3));
    CHECK_FALSE(neg.witness_xi);

    const auto sign = is_m_matrix(Matrix{{1, 0.5}, {0, 1}});
    CHECK_FALSE(sign.is_m_matrix);
    CHECK_FALSE(sign.off_diagonal_ok);

    const auto ex = is_m_matrix(Matrix{{0.6, -0.875}, {-0.48, 0.8}});
    CHECK(ex.is_m_matrix);
    REQUIRE(ex.witness_xi);
    CHECK((*ex.witness_xi)[0] == Approx(1.675 / 0.06));
    CHECK((*ex.witness_xi)[1] == Approx(1.08 / 0.06));
}

TEST_CASE("boundary M-matrices are classified as not M") {
    const auto r = is_m_matrix(Matrix{{1, -1}, {-1, 1}});
    CHECK_FALSE(r.is_m_matrix);
    CHECK(std::abs(r.margin) <= 1e-15);

    // margin just above/below a custom tolerance
    CHECK(is_m_matrix(Matrix{{1, -1}, {-1, 1.0 + 2e-6}}, 1e-6).is_m_matrix);
    CHECK_FALSE(is_m_matrix(Matrix{{1, -1}, {-1, 1.0 + 5e-7}}, 1e-6).is_m_matrix);
}

TEST_CASE("witness invariant: present implies positive and m*xi positive") {
    testing::Gen gen(17);
    int witnessed = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(1, 6));
        const Matrix m = gen.mixed_z_matrix(n);
        const auto r = is_m_matrix(m);
        if (!r.witness_xi) continue;
        ++witnessed;
        CHECK(r.is_m_matrix);
        const Vector& xi = *r.witness_xi;
        CHECK(std::all_of(xi.begin(), xi.end(), [](double x) { return x > 0; }));
        const Vector mx = m * xi;
        CHECK(std::all_of(mx.begin(), mx.end(), [](double x) { return x > 0; }));
    }
    CHECK(witnessed > 100);
}

TEST_CASE("is_m_matrix agrees with inverse positivity on random Z-matrices") {
    testing::Gen gen(23);
    int positive = 0, checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(2, 6));
        const Matrix m = gen.mixed_z_matrix(n);
        const auto r = is_m_matrix(m);
        const Vector minors = leading_principal_minors(m);
        if (std::any_of(minors.begin(), minors.end(), [](double d) { return std::abs(d) <= 1e-8; })) continue;
        const auto inv = gauss_jordan_inverse(m);
        if (!inv) continue;
        ++checked;
        const bool by_definition = all_nonnegative(*inv, -1e-9);
        CHECK(r.is_m_matrix == by_definition);
        positive += r.is_m_matrix;
    }
    CHECK(checked > 900);
    CHECK(positive > 100);
    CHECK(checked - positive > 100);
}

TEST_CASE("is_m_matrix is invariant under symmetric permutation") {
    testing::Gen gen(29);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(2, 6));
        const Matrix m = gen.mixed_z_matrix(n);
        const Vector minors = leading_principal_minors(m);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), gen.engine());
        const Matrix p = m.permuted(perm);
        const Vector pminors = leading_principal_minors(p);
        auto borderline = [](const Vector& v) {
            return std::any_of(v.begin(), v.end(), [](double d) { return std::abs(d) <= 1e-8; });
        };
        if (borderline(minors) || borderline(pminors)) continue;
        CHECK(is_m_matrix(m).is_m_matrix == is_m_matrix(p).is_m_matrix);
    }
}

TEST_CASE("lemma0_screen examples") {
    CHECK(lemma0_screen(Matrix{{2, -1}, {-1, 2}}) == ScreenTag::row_dominance);
    CHECK(lemma0_screen(Matrix{{1, -2}, {-2, 1}}) == ScreenTag::none);
    CHECK_THROWS_AS(lemma0_screen(Matrix{{1, 0.5}, {0, 1}}), PreconditionError);

    // Unit diagonal: 1 > 0.875 and 1 > 0.48, so plain row dominance already holds.
    CHECK(lemma0_screen(Matrix{{1, -0.875}, {-0.48, 1}}) == ScreenTag::row_dominance);

    // Example 1 test matrix: row 1 fails (0.6 < 0.875), column 2 fails (0.8 < 0.875),
    // and the weights ξ = m⁻¹·1 = (1.675, 1.08)/0.06 make the rows dominant.
    const Matrix ex{{0.6, -0.875}, {-0.48, 0.8}};
    CHECK_FALSE(rows_dominant(ex));
    CHECK_FALSE(columns_dominant(ex));
    const Vector xi{1.675 / 0.06, 1.08 / 0.06};
    CHECK(rows_dominant(ex, xi));
    CHECK(lemma0_screen(ex) == ScreenTag::weighted_row);

    // Explicit weights are honoured: row dominance needs 1.458… < ξ1/ξ2 < 1.666…
    CHECK(lemma0_screen(ex, Vector{1.55, 1.0}) == ScreenTag::weighted_row);
    CHECK(lemma0_screen(ex, Vector{2.0, 1.0}) == ScreenTag::none);
    CHECK(lemma0_screen(ex, Vector{1.0, 1e-6}) == ScreenTag::none);
}

TEST_CASE("lemma0_screen pass implies M-matrix") {
    testing::Gen gen(31);
    int passes = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(2, 6));
        const Matrix m = trial % 2 ? gen.z_matrix(n) : gen.mixed_z_matrix(n);
        if (lemma0_screen(m) == ScreenTag::none) continue;
        ++passes;
        CHECK(is_m_matrix(m).is_m_matrix);
    }
    CHECK(passes > 200);
}

TEST_CASE("spectral radius examples") {
    CHECK(spectral_radius(Matrix::identity(3)) == Approx(1).epsilon(1e-11));
    CHECK(spectral_radius(Matrix{{0, 0.5}, {0.5, 0}}) == Approx(0.5).epsilon(1e-11));
    CHECK(spectral_radius(Matrix(2)) == Approx(0).scale(1).epsilon(1e-11));
    CHECK(spectral_radius(Matrix{{0, 1.0 / 720}, {1.0 / 200, 0}}) ==
          Approx(std::sqrt(1.0 / 144000)).epsilon(1e-10));
    // reducible: a nilpotent part on top of a dominant block
    CHECK(spectral_radius(Matrix{{0.3, 5.0}, {0, 0.7}}) == Approx(0.7).epsilon(1e-10));
}

TEST_CASE("spectral radius satisfies the Perron bounds and matches 2x2 closed forms") {
    testing::Gen gen(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(gen.integer(1, 6));
        const Matrix m = gen.nonnegative(n, 2.0);
        const double r = spectral_radius(m);
        double max_diag = 0.0, max_row = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            max_diag = std::max(max_diag, m(i, i));
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += m(i, j);
            max_row = std::max(max_row, row);
        }
        CHECK(r >= max_diag - 1e-9);
        CHECK(r <= max_row + 1e-9);
        if (n == 2) {
            const double tr = m(0, 0) + m(1, 1), det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
            const double exact = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4 * det)));
            CHECK(r == Approx(exact).epsilon(1e-9).scale(1));
        }
    }
}

TEST_CASE("spectral radius reports non-convergence") {
    // ‖M^N‖ grows like N here, so the estimate settles slowly and three squarings are too few
    const Matrix m{{1.0, 1.0}, {0.0, 0.5}};
    CHECK_THROWS_AS(spectral_radius(m, 1e-12, 3), ConvergenceError);
    CHECK(spectral_radius(m, 1e-12) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("matrix helpers") {
    const Matrix m{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    CHECK(m.leading(2) == Matrix{{1, 2}, {4, 5}});
    CHECK(m.transposed() == Matrix{{1, 4, 7}, {2, 5, 8}, {3, 6, 9}});
    const std::vector<std::size_t> perm{2, 0, 1};
    CHECK(m.permuted(perm) == Matrix{{9, 7, 8}, {3, 1, 2}, {6, 4, 5}});
    CHECK(inf_norm(m) == 24);
    CHECK(inf_norm(Vector{-3, 2}) == 3);
    CHECK_THROWS_AS(require_finite(Matrix{{NAN}}), InputError);
}
