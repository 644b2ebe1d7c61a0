#include "delaystab/stability.hpp"

#include "delaystab/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace delaystab {

std::string_view to_string(Status s) {
    return s == Status::stable_certified ? "stable_certified" : "inconclusive";
}

namespace {

void require_general_family(const GeneralSystemSpec& s, bool diagonal_delay_free, const char* what) {
    require_valid(s);
    if (s.diagonal_delay_free != diagonal_delay_free)
        throw PreconditionError(std::string(what) + (diagonal_delay_free
                                                         ? " applies to systems with undelayed decay terms"
                                                         : " applies to systems with delayed decay terms"));
}

void require_linear_family(const LinearSystemSpec& s, bool diagonal_delay_free, const char* what) {
    require_valid(s);
    if (s.diagonal_delay_free != diagonal_delay_free)
        throw PreconditionError(std::string(what) + (diagonal_delay_free
                                                         ? " applies to linear systems with undelayed diagonal terms"
                                                         : " applies to linear systems with delayed diagonal terms"));
}

double min_of(const Vector& v) { return *std::min_element(v.begin(), v.end()); }

Margin greater(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs - rhs}; }
Margin less(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, rhs - lhs}; }

StabilityVerdict from_margins(std::string criterion, std::vector<Margin> margins, double tol) {
    StabilityVerdict v;
    v.criterion = std::move(criterion);
    v.margins = std::move(margins);
    const bool ok = std::all_of(v.margins.begin(), v.margins.end(), [tol](const Margin& m) { return m.slack > tol; });
    v.status = ok ? Status::stable_certified : Status::inconclusive;
    return v;
}

std::string indexed(const std::string& base, const char* layer, std::size_t i) {
    return base + "." + layer + "[" + std::to_string(i + 1) + "]";
}

}  // namespace

Matrix build_C(const GeneralSystemSpec& s) {
    require_general_family(s, false, "matrix C");
    Matrix c(s.m);
    for (std::size_t i = 0; i < s.m; ++i) {
        const double A = s.A[i], alpha = s.alpha[i], tau = s.tau[i];
        for (std::size_t j = 0; j < s.m; ++j) {
            const double L = s.L(i, j);
            c(i, j) = i == j ? 1.0 - (A * (A + L) * tau + L) / alpha : -(A * L * tau + L) / alpha;
        }
    }
    return c;
}

Matrix build_C_offdiag(const GeneralSystemSpec& s) {
    require_general_family(s, false, "matrix C (off-diagonal nonlinearities)");
    Matrix c(s.m);
    for (std::size_t i = 0; i < s.m; ++i) {
        const double A = s.A[i], alpha = s.alpha[i], tau = s.tau[i];
        for (std::size_t j = 0; j < s.m; ++j) {
            const double L = s.L(i, j);
            c(i, j) = i == j ? 1.0 - A * A * tau / alpha : -(A * L * tau + L) / alpha;
        }
    }
    return c;
}

Matrix build_B_nodelay(const GeneralSystemSpec& s) {
    require_general_family(s, true, "matrix B");
    Matrix b(s.m);
    for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t j = 0; j < s.m; ++j)
            b(i, j) = i == j ? 1.0 - s.L(i, i) / s.alpha[i] : -s.L(i, j) / s.alpha[i];
    return b;
}

Matrix build_D_linear(const LinearSystemSpec& s) {
    require_linear_family(s, false, "matrix D");
    Matrix d(s.m);
    for (std::size_t i = 0; i < s.m; ++i) {
        const double A = s.A[i], alpha = s.alpha[i], sii = s.sigma(i, i);
        for (std::size_t j = 0; j < s.m; ++j)
            d(i, j) = i == j ? 1.0 - A * A * sii / alpha : -(A * s.A_off(i, j) * sii + s.A_off(i, j)) / alpha;
    }
    return d;
}

Matrix build_F_linear(const LinearSystemSpec& s) {
    require_linear_family(s, true, "matrix F");
    Matrix f(s.m);
    for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t j = 0; j < s.m; ++j) f(i, j) = i == j ? 1.0 : -s.A_off(i, j) / s.alpha[i];
    return f;
}

Matrix build_C_lambda(const GeneralSystemSpec& s, double lambda) {
    require_valid(s);
    const double limit = min_of(s.alpha);
    if (!(lambda >= 0.0 && lambda < limit))
        throw PreconditionError("build_C_lambda requires 0 ≤ λ < min α_i = " + std::to_string(limit));
    Matrix c(s.m);
    for (std::size_t i = 0; i < s.m; ++i) {
        const double A = s.A[i], alpha = s.alpha[i];
        const double tau = s.diagonal_delay_free ? 0.0 : s.tau[i];
        const double e_tau = std::exp(lambda * tau);
        for (std::size_t j = 0; j < s.m; ++j) {
            const double L = s.L(i, j);
            const double e_sig = std::exp(lambda * s.sigma(i, j));
            if (i == j)
                c(i, i) = 1.0 - (A * e_tau * (lambda + A * e_tau + e_sig * L) * tau + e_sig * L) / (alpha - lambda);
            else
                c(i, j) = -(A * e_tau * e_sig * L * tau + e_sig * L) / (alpha - lambda);
        }
    }
    return c;
}

DecayCertificate certify_decay_rate(const GeneralSystemSpec& spec, double tol, int iterations) {
    const MMatrixReport base = is_m_matrix(build_C_lambda(spec, 0.0), tol);
    if (!base.is_m_matrix)
        throw NotCertifiedError("not certified stable: the test matrix is not an M-matrix (margin " +
                                std::to_string(base.margin) + ")");

    auto passes = [&](double lambda, double* margin) {
        const MMatrixReport r = is_m_matrix(build_C_lambda(spec, lambda), tol);
        if (margin) *margin = r.margin;
        return r.is_m_matrix;
    };

    DecayCertificate cert;
    cert.upper_limit = min_of(spec.alpha) - tol;
    if (!(cert.upper_limit > 0.0))
        throw NotCertifiedError("not certified stable: min α_i does not exceed the tolerance");
    double margin = base.margin;
    if (passes(cert.upper_limit, &margin)) {
        cert.lambda0 = cert.lambda_fail = cert.upper_limit;
        cert.boundary_margin = margin;
        return cert;
    }
    double lo = 0.0, hi = cert.upper_limit, lo_margin = base.margin;
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++cert.iterations;
        if (passes(mid, &margin)) {
            lo = mid;
            lo_margin = margin;
        } else {
            hi = mid;
        }
    }
    cert.lambda0 = lo;
    cert.lambda_fail = hi;
    cert.bracket_width = hi - lo;
    cert.boundary_margin = lo_margin;
    return cert;
}

StabilityVerdict classify(Matrix test_matrix, std::string criterion, double tol) {
    StabilityVerdict v;
    v.criterion = std::move(criterion);
    v.report = is_m_matrix(test_matrix, tol);
    v.status = v.report->is_m_matrix ? Status::stable_certified : Status::inconclusive;
    for (std::size_t k = 0; k < v.report->minors.size(); ++k)
        v.margins.push_back(greater("minor[" + std::to_string(k + 1) + "]", v.report->minors[k], tol));
    v.test_matrix = std::move(test_matrix);
    return v;
}

StabilityVerdict theorem1_verdict(const GeneralSystemSpec& spec, double tol) {
    if (spec.diagonal_delay_free) return classify(build_B_nodelay(spec), "cor1", tol);
    return classify(build_C(spec), "theorem1", tol);
}

StabilityVerdict theorem1_verdict(const LinearSystemSpec& spec, double tol) {
    if (spec.diagonal_delay_free) return classify(build_F_linear(spec), "cor3", tol);
    return classify(build_D_linear(spec), "cor2", tol);
}

StabilityVerdict corollary0_verdict(const GeneralSystemSpec& spec, double tol) {
    return classify(build_C_offdiag(spec), "cor0", tol);
}

StabilityVerdict corollary_m2(const GeneralSystemSpec& s, int which, double tol) {
    require_valid(s);
    if (s.m != 2) throw PreconditionError("two-dimensional corollaries require m = 2");
    const double a1 = s.alpha[0], a2 = s.alpha[1], A1 = s.A[0], A2 = s.A[1];
    const double L11 = s.L(0, 0), L12 = s.L(0, 1), L21 = s.L(1, 0), L22 = s.L(1, 1);
    if (which == 4) {
        if (s.diagonal_delay_free) throw PreconditionError("corollary 4 applies to delayed decay terms");
        const double t1 = s.tau[0], t2 = s.tau[1];
        const double x1 = A1 * (A1 + L11) * t1 + L11;
        const double x2 = A2 * (A2 + L22) * t2 + L22;
        return from_margins("cor4",
                            {greater("cor4.diag1", a1, x1),
                             greater("cor4.product", (a1 - x1) * (a2 - x2), L12 * L21 * (1 + A1 * t1) * (1 + A2 * t2))},
                            tol);
    }
    if (which == 5) {
        if (!s.diagonal_delay_free) throw PreconditionError("corollary 5 applies to undelayed decay terms");
        return from_margins("cor5",
                            {greater("cor5.diag1", a1, L11),
                             greater("cor5.product", (a1 - L11) * (a2 - L22), L12 * L21)},
                            tol);
    }
    throw PreconditionError("general systems support corollary 4 or 5, got " + std::to_string(which));
}

StabilityVerdict corollary_m2(const LinearSystemSpec& s, int which, double tol) {
    require_valid(s);
    if (s.m != 2) throw PreconditionError("two-dimensional corollaries require m = 2");
    const double a1 = s.alpha[0], a2 = s.alpha[1], A1 = s.A[0], A2 = s.A[1];
    const double A12 = s.A_off(0, 1), A21 = s.A_off(1, 0);
    if (which == 6) {
        if (s.diagonal_delay_free) throw PreconditionError("corollary 6 applies to delayed diagonal terms");
        const double s11 = s.sigma(0, 0), s22 = s.sigma(1, 1);
        return from_margins(
            "cor6",
            {greater("cor6.sigma11", a1 / (A1 * A1), s11),
             greater("cor6.product", (a1 - A1 * A1 * s11) * (a2 - A2 * A2 * s22),
                     A12 * A21 * (1 + A1 * s11) * (1 + A2 * s22))},
            tol);
    }
    if (which == 7) {
        if (!s.diagonal_delay_free) throw PreconditionError("corollary 7 applies to undelayed diagonal terms");
        return from_margins("cor7", {greater("cor7.product", a1 * a2, A12 * A21)}, tol);
    }
    throw PreconditionError("linear systems support corollary 6 or 7, got " + std::to_string(which));
}

GopalsamyComparison gopalsamy_vs_18(const TwoNeuronParams& p, double tol) {
    GopalsamyComparison out;
    const double x1 = p.a1 * p.tau1, x2 = p.a2 * p.tau2;
    out.applicable = x1 < 1.0 && x2 < 1.0;
    const Margin pre1 = less("a1*tau1<1", x1, 1.0), pre2 = less("a2*tau2<1", x2, 1.0);

    const double l1 = (1 - x1) / (1 + x1), l2 = (1 - x2) / (1 + x2);
    const double r1 = std::abs(p.a12) * p.L1 / p.a1, r2 = std::abs(p.a21) * p.L2 / p.a2;
    out.criterion17 = from_margins("gopalsamy17", {greater("eq17.first", l1, r1), greater("eq17.second", l2, r2)}, tol);
    const double lhs18 = (1 - x1) * (1 - x2) / ((1 + x1) * (1 + x2));
    const double rhs18 = std::abs(p.a12) * std::abs(p.a21) * p.L1 * p.L2 / (p.a1 * p.a2);
    out.criterion18 = from_margins("criterion18", {greater("eq18", lhs18, rhs18)}, tol);
    out.criterion17.margins.insert(out.criterion17.margins.begin(), {pre1, pre2});
    out.criterion18.margins.insert(out.criterion18.margins.begin(), {pre1, pre2});
    if (!out.applicable) {
        out.criterion17.status = Status::inconclusive;
        out.criterion18.status = Status::inconclusive;
    }
    // The classical condition implies the product condition whenever both are formed from nonnegative factors.
    assert(!(out.applicable && l1 > r1 && l2 > r2) || lhs18 > rhs18);
    return out;
}

Matrix build_C_bam(const BamSpec& s) {
    require_valid(s);
    const std::size_t n = s.n;
    Matrix c(2 * n);
    // Expanded over the gain products A = R·a, α·a and the coupling bound |a_ij|·R·L^f, so
    // that the entries coincide bit for bit with the reduced general system's matrix.
    for (std::size_t i = 0; i < n; ++i) {
        const double Ax = s.r_hi[i] * s.a[i], ax = s.r_lo[i] * s.a[i], t1 = s.tau1[i];
        const double Ay = s.p_hi[i] * s.b[i], ay = s.p_lo[i] * s.b[i], t2 = s.tau2[i];
        c(i, i) = 1.0 - Ax * Ax * t1 / ax;
        c(i + n, i + n) = 1.0 - Ay * Ay * t2 / ay;
        for (std::size_t j = 0; j < n; ++j) {
            const double kx = std::abs(s.a_conn(i, j)) * s.r_hi[i] * s.Lf[j];
            const double ky = std::abs(s.b_conn(i, j)) * s.p_hi[i] * s.Lg[j];
            c(i, j + n) = -(Ax * kx * t1 + kx) / ax;
            c(i + n, j) = -(Ay * ky * t2 + ky) / ay;
        }
    }
    return c;
}

StabilityVerdict theorem3_verdict(const BamSpec& bam, double tol) {
    Matrix c = build_C_bam(bam);
#ifndef NDEBUG
    // C_BAM is the off-diagonal-nonlinearity matrix of the reduced system.
    assert(c == build_C_offdiag(bam_to_general(bam)));
#endif
    return classify(std::move(c), "thm3", tol);
}

namespace {

// Entries of the BAM criterion: kx(i,j) couples y_j into x_i, ky(i,j) couples x_j into y_i;
// dx, dy are the diagonal terms.
struct BamTerms {
    std::size_t n;
    Matrix kx, ky;
    Vector dx, dy;
};

BamTerms bam_terms(const BamSpec& s, bool leakage_free) {
    require_valid(s);
    const std::size_t n = s.n;
    BamTerms t{n, Matrix(n), Matrix(n), Vector(n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = s.a[i], R = s.r_hi[i], alpha = s.r_lo[i], t1 = s.tau1[i];
        const double b = s.b[i], P = s.p_hi[i], beta = s.p_lo[i], t2 = s.tau2[i];
        t.dx[i] = leakage_free ? 1.0 : 1 - a * R * R * t1 / alpha;
        t.dy[i] = leakage_free ? 1.0 : 1 - b * P * P * t2 / beta;
        for (std::size_t j = 0; j < n; ++j) {
            if (leakage_free) {
                t.kx(i, j) = std::abs(s.a_conn(i, j)) * R * s.Lf[j] / (alpha * a);
                t.ky(i, j) = std::abs(s.b_conn(i, j)) * P * s.Lg[j] / (beta * b);
            } else {
                t.kx(i, j) = std::abs(s.a_conn(i, j)) * R * s.Lf[j] * (a * R * t1 + 1) / (alpha * a);
                t.ky(i, j) = std::abs(s.b_conn(i, j)) * P * s.Lg[j] * (b * P * t2 + 1) / (beta * b);
            }
        }
    }
    return t;
}

std::optional<Vector> resolve_weights(const BamSpec& bam, int which, std::optional<Vector> weights) {
    if (which != 3 && which != 4) return std::nullopt;
    if (weights) {
        if (weights->size() != 2 * bam.n) throw PreconditionError("weights must have length 2n");
        for (double w : *weights)
            if (!(w > 0.0)) throw PreconditionError("weights must be positive");
        return weights;
    }
    const Matrix c = build_C_bam(bam);
    const MMatrixReport r = is_m_matrix(which == 3 ? c : c.transposed());
    if (!r.witness_xi) return std::nullopt;
    Vector mu = *r.witness_xi;
    if (which == 4) {
        // Column witness η is relabeled to the μ_{i+n} ↔ μ_i convention of the column form.
        for (std::size_t i = 0; i < bam.n; ++i) std::swap(mu[i], mu[i + bam.n]);
    }
    return mu;
}

StabilityVerdict bam_dominance(const BamTerms& t, const std::string& tag, int which,
                               const std::optional<Vector>& mu, double tol) {
    const std::size_t n = t.n;
    std::vector<Margin> margins;
    if ((which == 3 || which == 4) && !mu) {
        StabilityVerdict v = from_margins(tag, {{"weights", 0.0, 0.0, 0.0}}, tol);
        v.status = Status::inconclusive;
        return v;
    }
    auto w = [&](std::size_t k) { return mu ? (*mu)[k] : 1.0; };
    for (std::size_t i = 0; i < n; ++i) {
        double sx = 0.0, sy = 0.0;
        switch (which) {
            case 1:
                for (std::size_t j = 0; j < n; ++j) sx += t.kx(i, j), sy += t.ky(i, j);
                margins.push_back(less(indexed(tag, "x", i), sx, t.dx[i]));
                margins.push_back(less(indexed(tag, "y", i), sy, t.dy[i]));
                break;
            case 2:
                // column i of each coupling block
                for (std::size_t k = 0; k < n; ++k) sx += t.kx(k, i), sy += t.ky(k, i);
                margins.push_back(less(indexed(tag, "y", i), sx, t.dy[i]));
                margins.push_back(less(indexed(tag, "x", i), sy, t.dx[i]));
                break;
            case 3:
                for (std::size_t j = 0; j < n; ++j) sx += w(j + n) * t.kx(i, j), sy += w(j) * t.ky(i, j);
                margins.push_back(less(indexed(tag, "x", i), sx, w(i) * t.dx[i]));
                margins.push_back(less(indexed(tag, "y", i), sy, w(i + n) * t.dy[i]));
                break;
            case 4:
                for (std::size_t k = 0; k < n; ++k) sx += w(k + n) * t.kx(k, i), sy += w(k) * t.ky(k, i);
                margins.push_back(less(indexed(tag, "y", i), sx, w(i) * t.dy[i]));
                margins.push_back(less(indexed(tag, "x", i), sy, w(i + n) * t.dx[i]));
                break;
            default: throw PreconditionError("condition index must be 1..4, got " + std::to_string(which));
        }
    }
    return from_margins(tag, std::move(margins), tol);
}

}  // namespace

StabilityVerdict corollary9(const BamSpec& bam, int which, std::optional<Vector> weights, double tol) {
    if (which < 1 || which > 4) throw PreconditionError("corollary 9 has conditions 1..4");
    const auto mu = resolve_weights(bam, which, std::move(weights));
    return bam_dominance(bam_terms(bam, false), "cor9-" + std::to_string(which), which, mu, tol);
}

StabilityVerdict corollary10(const BamSpec& bam, int which, std::optional<Vector> weights, double tol) {
    if (which < 1 || which > 4) throw PreconditionError("corollary 10 has conditions 1..4");
    require_valid(bam);
    for (std::size_t i = 0; i < bam.n; ++i)
        if (bam.tau1[i] != 0.0 || bam.tau2[i] != 0.0)
            throw PreconditionError("corollary 10 requires undelayed leakage terms (all τ bounds zero)");
    const auto mu = resolve_weights(bam, which, std::move(weights));
    return bam_dominance(bam_terms(bam, true), "cor10-" + std::to_string(which), which, mu, tol);
}

StabilityVerdict corollary11(const BamSpec& s, double tol) {
    require_valid(s);
    if (s.n != 1) throw PreconditionError("corollary 11 requires n = 1");
    const double a = s.a[0], b = s.b[0], R = s.r_hi[0], alpha = s.r_lo[0], P = s.p_hi[0], beta = s.p_lo[0];
    const double t1 = s.tau1[0], t2 = s.tau2[0];
    const double Aw = std::abs(s.a_conn(0, 0)), Bw = std::abs(s.b_conn(0, 0));
    const double x = a * R * R * t1 / alpha, y = b * P * P * t2 / beta;
    const double lhs = Aw * Bw * R * P * s.Lf[0] * s.Lg[0] * (a * R * t1 + 1) * (b * P * t2 + 1) / (alpha * beta * a * b);
    return from_margins("cor11", {less("cor11.leakage", x, 1.0), less("cor11.product", lhs, (1 - x) * (1 - y))}, tol);
}

}  // namespace delaystab
