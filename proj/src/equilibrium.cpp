#include "delaystab/equilibrium.hpp"

#include "delaystab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace delaystab {

ExistenceMatrices build_existence_matrices(const BamSpec& s) {
    require_valid(s);
    const std::size_t n = s.n;
    ExistenceMatrices out{Matrix(2 * n), Matrix(2 * n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double fa = std::abs(s.a_conn(i, j)) * s.Lf[j];
            const double gb = std::abs(s.b_conn(i, j)) * s.Lg[j];
            out.scaled_by_own_gain(i, j + n) = fa / s.a[i];
            out.scaled_by_own_gain(i + n, j) = gb / s.b[i];
            out.scaled_by_source_gain(i, j + n) = fa / s.b[j];
            out.scaled_by_source_gain(i + n, j) = gb / s.a[j];
        }
    return out;
}

namespace {

double max_row_sum(const Matrix& m) { return inf_norm(m); }

double max_col_sum(const Matrix& m) { return inf_norm(m.transposed()); }

double frobenius_sq(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return s;
}

void add_conditions(ExistenceReport& r, const Matrix& m, int first, const char* name) {
    const std::string label(name);
    const double values[4] = {spectral_radius(m), max_row_sum(m), max_col_sum(m), frobenius_sq(m)};
    const char* what[4] = {"spectral radius of ", "max row sum of ", "max column sum of ",
                           "sum of squared entries of "};
    for (int k = 0; k < 4; ++k)
        r.conditions.push_back({first + k, what[k] + label, values[k], values[k] < 1.0});
}

}  // namespace

ExistenceReport equilibrium_exists(const BamSpec& bam) {
    const ExistenceMatrices m = build_existence_matrices(bam);
    ExistenceReport r;
    add_conditions(r, m.scaled_by_own_gain, 1, "A");
    add_conditions(r, m.scaled_by_source_gain, 5, "B");
    r.exists_unique = std::any_of(r.conditions.begin(), r.conditions.end(), [](const auto& c) { return c.holds; });
    return r;
}

double equilibrium_residual(const BamSpec& s, const std::vector<Activation>& f, const std::vector<Activation>& g,
                            const Vector& x, const Vector& y) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
        double rx = s.a[i] * x[i] - s.I[i], ry = s.b[i] * y[i] - s.J[i];
        for (std::size_t j = 0; j < s.n; ++j) {
            rx -= s.a_conn(i, j) * f[j](y[j]);
            ry -= s.b_conn(i, j) * g[j](x[j]);
        }
        worst = std::max({worst, std::abs(rx), std::abs(ry)});
    }
    return worst;
}

Equilibrium solve_equilibrium(const BamSpec& s, const std::vector<Activation>& f, const std::vector<Activation>& g,
                              const EquilibriumOptions& opts) {
    require_valid(s);
    const std::size_t n = s.n;
    if (f.size() != n || g.size() != n) throw InputError("one activation per unit is required for f and g");

    Equilibrium eq;
    eq.existence_guaranteed = equilibrium_exists(s).exists_unique;

    // u = a∘x, v = b∘y
    Vector u = s.I, v = s.J, nu(n), nv(n);
    double prev_step = INFINITY;
    int growing = 0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double su = s.I[i], sv = s.J[i];
            for (std::size_t j = 0; j < n; ++j) {
                su += s.a_conn(i, j) * f[j](v[j] / s.b[j]);
                sv += s.b_conn(i, j) * g[j](u[j] / s.a[j]);
            }
            nu[i] = su;
            nv[i] = sv;
        }
        double step = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            step = std::max({step, std::abs(nu[i] - u[i]), std::abs(nv[i] - v[i])});
            scale = std::max({scale, std::abs(nu[i]), std::abs(nv[i])});
        }
        std::swap(u, nu);
        std::swap(v, nv);
        eq.iterations = it;
        eq.step_norms.push_back(step);
        if (!std::isfinite(step)) {
            Vector last = u;
            last.insert(last.end(), v.begin(), v.end());
            throw DivergenceError("equilibrium iteration produced non-finite values", std::move(last),
                                  eq.contraction_ratio);
        }
        if (std::isfinite(prev_step) && prev_step > 0.0) eq.contraction_ratio = std::max(eq.contraction_ratio, step / prev_step);
        if (step <= opts.tol * scale) break;
        growing = step > prev_step ? growing + 1 : 0;
        prev_step = step;
        if (growing >= opts.divergence_window || it == opts.max_iter) {
            Vector last = u;
            last.insert(last.end(), v.begin(), v.end());
            throw DivergenceError(growing >= opts.divergence_window
                                      ? "equilibrium iteration diverged (step grew for " +
                                            std::to_string(growing) + " consecutive iterations)"
                                      : "equilibrium iteration did not converge in " +
                                            std::to_string(opts.max_iter) + " iterations",
                                  std::move(last), eq.contraction_ratio);
        }
    }
    eq.x_star.resize(n);
    eq.y_star.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        eq.x_star[i] = u[i] / s.a[i];
        eq.y_star[i] = v[i] / s.b[i];
    }
    eq.residual = equilibrium_residual(s, f, g, eq.x_star, eq.y_star);
    return eq;
}

}  // namespace delaystab
