#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delaystab/errors.hpp"
#include "delaystab/stability.hpp"
#include "generators.hpp"

#include <cmath>

using namespace delaystab;
using doctest::Approx;

namespace {

GeneralSystemSpec example1_spec() {
    GeneralSystemSpec s;
    s.m = 2;
    s.alpha = s.A = {0.8, 0.5};
    s.tau = {0.5, 0.4};
    s.sigma = Matrix{{0.0, 0.2}, {0.2, 0.0}};
    s.L = Matrix{{0.0, 0.5}, {0.2, 0.0}};
    return s;
}

TwoNeuronParams example1_params() {
    TwoNeuronParams p;
    p.a1 = 0.8;
    p.a2 = 0.5;
    p.a12 = p.a21 = 1.0;
    p.tau1 = 0.5;
    p.tau2 = 0.4;
    p.sigma1 = p.sigma2 = 0.2;
    p.L1 = 0.5;
    p.L2 = 0.2;
    return p;
}

GeneralSystemSpec scalar_spec(double alpha, double tau, double L11) {
    GeneralSystemSpec s;
    s.m = 1;
    s.alpha = s.A = {alpha};
    s.tau = {tau};
    s.sigma = Matrix(1);
    s.L = Matrix{{L11}};
    return s;
}

GeneralSystemSpec decoupled(std::size_t m) {
    GeneralSystemSpec s;
    s.m = m;
    s.alpha = s.A = Vector(m, 1.0);
    s.tau = Vector(m, 0.0);
    s.sigma = Matrix(m);
    s.L = Matrix(m);
    return s;
}

// Linear system x1' = −a11 x1 + s x2, x2' = s x1 − a22 x2 with undelayed diagonals.
LinearSystemSpec ode_pair(double a11, double a22, double a12, double a21) {
    LinearSystemSpec s;
    s.m = 2;
    s.diagonal_delay_free = true;
    s.alpha = s.A = {a11, a22};
    s.A_off = Matrix{{0.0, a12}, {a21, 0.0}};
    s.sigma = Matrix(2);
    return s;
}

BamSpec partial_example(double mu) {
    BamSpec b;
    b.n = 1;
    b.a = b.b = {1.0};
    b.a_conn = Matrix{{1.0 / 720}};
    b.b_conn = Matrix{{1.0 / 200}};
    b.Lf = b.Lg = {1.0};
    b.r_lo = {20 - mu};
    b.r_hi = {20 + mu};
    b.p_lo = {40 - mu};
    b.p_hi = {40 + mu};
    b.tau1 = b.tau2 = {0.001};
    b.sig1 = {2.0};
    b.sig2 = {3.0};
    b.I = {10000.0};
    b.J = {20000.0};
    return b;
}

const Margin& margin(const StabilityVerdict& v, const std::string& name) {
    for (const auto& m : v.margins)
        if (m.name == name) return m;
    FAIL("missing margin " << name);
    throw 0;
}

}  // namespace

TEST_CASE("test matrix of the two-neuron example") {
    const Matrix c = build_C(example1_spec());
    CHECK(c(0, 0) == Approx(0.6).epsilon(1e-15));
    CHECK(c(0, 1) == Approx(-0.875).epsilon(1e-15));
    CHECK(c(1, 0) == Approx(-0.48).epsilon(1e-15));
    CHECK(c(1, 1) == Approx(0.8).epsilon(1e-15));
    CHECK(build_C_offdiag(example1_spec()) == c);
}

TEST_CASE("test matrix trivial cases") {
    auto s = decoupled(3);
    CHECK(build_C(s) == Matrix::identity(3));
    CHECK(build_C_offdiag(s) == Matrix::identity(3));
    CHECK(build_C(scalar_spec(1.0, 0.5, 0.0)) == Matrix{{0.5}});
    s.diagonal_delay_free = true;
    CHECK(build_B_nodelay(s) == Matrix::identity(3));
    CHECK(build_F_linear(ode_pair(1, 1, 0, 0)) == Matrix::identity(2));
}

TEST_CASE("diagonal entries keep the self-coupling only in the full matrix") {
    auto s = scalar_spec(2.0, 0.1, 0.5);
    // 1 − (A(A+L)τ + L)/α and 1 − A²τ/α
    CHECK(build_C(s)(0, 0) == Approx(1 - (2 * 2.5 * 0.1 + 0.5) / 2).epsilon(1e-15));
    CHECK(build_C_offdiag(s)(0, 0) == Approx(1 - 4 * 0.1 / 2).epsilon(1e-15));
    s.diagonal_delay_free = true;
    CHECK(build_B_nodelay(s)(0, 0) == Approx(0.75).epsilon(1e-15));
}

TEST_CASE("delayed linear matrix") {
    LinearSystemSpec s;
    s.m = 2;
    s.alpha = s.A = {1.0, 1.0};
    s.A_off = Matrix{{0.0, 0.1}, {0.1, 0.0}};
    s.sigma = Matrix{{0.25, 0.0}, {0.0, 0.25}};
    const Matrix d = build_D_linear(s);
    CHECK(d(0, 0) == Approx(0.75).epsilon(1e-15));
    CHECK(d(1, 1) == Approx(0.75).epsilon(1e-15));
    CHECK(d(0, 1) == Approx(-0.125).epsilon(1e-15));
    CHECK(d(1, 0) == Approx(-0.125).epsilon(1e-15));
}

TEST_CASE("matrix builders reject the wrong family") {
    auto s = decoupled(2);
    CHECK_THROWS(build_B_nodelay(s));
    s.diagonal_delay_free = true;
    CHECK_THROWS(build_C(s));
    CHECK_THROWS(build_D_linear(ode_pair(1, 1, 0.1, 0.1)));
}

TEST_CASE("bam matrix of the time-varying example") {
    const Matrix c = build_C_bam(partial_example(0.0));
    // BAM comparison matrix with α = A = (20, 40), τ = 1/1000, L12 = 20/720, L21 = 40/200
    CHECK(c(0, 0) == Approx(0.98).epsilon(1e-14));
    CHECK(c(1, 1) == Approx(0.96).epsilon(1e-14));
    CHECK(c(0, 1) == Approx(-(20 * (20.0 / 720) * 0.001 + 20.0 / 720) / 20).epsilon(1e-14));
    CHECK(c(1, 0) == Approx(-(40 * (40.0 / 200) * 0.001 + 40.0 / 200) / 40).epsilon(1e-14));
    CHECK(c(0, 1) == Approx(-0.00141667).epsilon(1e-5));
    CHECK(c(1, 0) == Approx(-0.0052).epsilon(1e-12));
}

TEST_CASE("bam matrix equals the reduced general matrix exactly") {
    testing::Gen gen(21);
    for (int k = 0; k < 1000; ++k) {
        const auto bam = gen.bam(static_cast<std::size_t>(gen.integer(1, 4)));
        CHECK(build_C_bam(bam) == build_C_offdiag(bam_to_general(bam)));
    }
}

TEST_CASE("C(lambda) at zero is the test matrix") {
    testing::Gen gen(22);
    for (int k = 0; k < 100; ++k) {
        const auto s = gen.general(static_cast<std::size_t>(gen.integer(1, 5)));
        CHECK(build_C_lambda(s, 0.0) == build_C(s));
        auto b = gen.general(static_cast<std::size_t>(gen.integer(1, 5)), true);
        CHECK(build_C_lambda(b, 0.0) == build_B_nodelay(b));
    }
}

TEST_CASE("C(lambda) entries decrease with lambda") {
    const auto s = example1_spec();
    const Matrix c0 = build_C_lambda(s, 0.0), c1 = build_C_lambda(s, 0.01);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(c1(i, j) < c0(i, j));

    CHECK(build_C_lambda(scalar_spec(1.0, 0.0, 0.0), 0.5) == Matrix{{1.0}});
    CHECK_THROWS(build_C_lambda(s, 0.5));
    CHECK_THROWS(build_C_lambda(s, -0.1));

    testing::Gen gen(23);
    for (int k = 0; k < 300; ++k) {
        const auto r = gen.general(static_cast<std::size_t>(gen.integer(1, 4)), gen.coin());
        double amin = r.alpha[0];
        for (double a : r.alpha) amin = std::min(amin, a);
        const double l1 = gen.uniform(0.0, amin * 0.95), l2 = gen.uniform(l1, amin * 0.99);
        const Matrix a = build_C_lambda(r, l1), b = build_C_lambda(r, l2);
        for (std::size_t i = 0; i < r.m; ++i)
            for (std::size_t j = 0; j < r.m; ++j) CHECK(b(i, j) <= a(i, j));
    }
}

TEST_CASE("decay rate of the two-neuron example") {
    const auto s = example1_spec();
    const auto cert = certify_decay_rate(s);
    CHECK(cert.lambda0 > 0.0);
    CHECK(cert.lambda0 < 0.5);
    CHECK(cert.bracket_width > 0.0);
    CHECK(cert.bracket_width < 1e-15);
    CHECK(is_m_matrix(build_C_lambda(s, cert.lambda0)).is_m_matrix);
    CHECK_FALSE(is_m_matrix(build_C_lambda(s, cert.lambda0 + 2 * cert.bracket_width)).is_m_matrix);
    CHECK(cert.boundary_margin > 0.0);
}

TEST_CASE("decay rate of a decoupled system reaches the upper bracket") {
    const auto cert = certify_decay_rate(decoupled(2));
    CHECK(cert.lambda0 == cert.upper_limit);
    CHECK(cert.lambda0 == Approx(1.0 - kDefaultTol));
}

TEST_CASE("decay rate of a borderline system is tiny") {
    // det C = 1 − L11 sits just above the tolerance
    const auto cert = certify_decay_rate(scalar_spec(1.0, 0.0, 1.0 - 3e-12));
    CHECK(cert.lambda0 >= 0.0);
    CHECK(cert.lambda0 < 1e-10);
    CHECK_THROWS_AS(certify_decay_rate(scalar_spec(1.0, 0.0, 1.0)), NotCertifiedError);
}

TEST_CASE("certified brackets survive re-testing") {
    testing::Gen gen(24);
    int certified = 0;
    for (int k = 0; k < 200; ++k) {
        const auto s = gen.general(static_cast<std::size_t>(gen.integer(1, 4)), gen.coin());
        if (!theorem1_verdict(s).stable()) {
            CHECK_THROWS_AS(certify_decay_rate(s), NotCertifiedError);
            continue;
        }
        ++certified;
        const auto cert = certify_decay_rate(s);
        CHECK(cert.lambda0 > 0.0);
        CHECK(is_m_matrix(build_C_lambda(s, cert.lambda0)).is_m_matrix);
        if (cert.lambda0 < cert.upper_limit)
            CHECK_FALSE(is_m_matrix(build_C_lambda(s, cert.lambda_fail)).is_m_matrix);
    }
    CHECK(certified > 20);
}

TEST_CASE("theorem 1 verdicts") {
    const auto v = theorem1_verdict(example1_spec());
    CHECK(v.stable());
    CHECK(v.criterion == "theorem1");
    REQUIRE(v.report);
    CHECK(v.report->minors[1] == Approx(0.06).epsilon(1e-12));

    auto s = example1_spec();
    s.L(0, 1) = 5.0;
    const auto w = theorem1_verdict(s);
    CHECK_FALSE(w.stable());
    CHECK(w.report->minors[1] < 0.0);

    CHECK(theorem1_verdict(decoupled(3)).stable());
}

TEST_CASE("two-dimensional corollary of the example") {
    const auto v = corollary_m2(example1_spec(), 4);
    CHECK(v.stable());
    CHECK(margin(v, "cor4.product").lhs == Approx(0.192).epsilon(1e-14));
    CHECK(margin(v, "cor4.product").rhs == Approx(0.168).epsilon(1e-14));
    CHECK_THROWS_AS(corollary_m2(example1_spec(), 5), PreconditionError);
    CHECK_THROWS_AS(corollary_m2(decoupled(3), 4), PreconditionError);
}

TEST_CASE("closed-form corollaries agree with the matrix test") {
    testing::Gen gen(25);
    for (int k = 0; k < 1000; ++k) {
        const bool ddf = gen.coin();
        const auto s = gen.general(2, ddf);
        CHECK(corollary_m2(s, ddf ? 5 : 4).stable() == theorem1_verdict(s).stable());
        const auto l = gen.linear(2, ddf);
        CHECK(corollary_m2(l, ddf ? 7 : 6).stable() == theorem1_verdict(l).stable());
    }
}

TEST_CASE("undelayed linear pair: the product inequality is exact") {
    CHECK(corollary_m2(ode_pair(1, 1, 0.5, 0.5), 7).stable());
    CHECK(margin(corollary_m2(ode_pair(1, 1, 0.5, 0.5), 7), "cor7.product").rhs == 0.25);
    CHECK_FALSE(corollary_m2(ode_pair(1, 1, 1.0, 1.0), 7).stable());
    for (double s : {0.9, 0.99, 1.01, 1.1})
        CHECK(corollary_m2(ode_pair(1, 1, s, s), 7).stable() == (s < 1.0));
    testing::Gen gen(26);
    for (int k = 0; k < 500; ++k) {
        const double a11 = gen.uniform(0.1, 3), a22 = gen.uniform(0.1, 3);
        const double a12 = gen.uniform(0, 3), a21 = gen.uniform(0, 3);
        CHECK(corollary_m2(ode_pair(a11, a22, a12, a21), 7).stable() == (a11 * a22 > a12 * a21 + kDefaultTol));
    }
}

TEST_CASE("raising a coupling never turns a verdict stable") {
    testing::Gen gen(27);
    for (int k = 0; k < 1000; ++k) {
        auto s = gen.general(static_cast<std::size_t>(gen.integer(1, 4)), gen.coin());
        const bool before = theorem1_verdict(s).stable();
        const auto i = static_cast<std::size_t>(gen.integer(0, static_cast<int>(s.m) - 1));
        const auto j = static_cast<std::size_t>(gen.integer(0, static_cast<int>(s.m) - 1));
        s.L(i, j) += gen.uniform(0.0, 1.0);
        if (!before) CHECK_FALSE(theorem1_verdict(s).stable());
    }
}

TEST_CASE("comparison with the earlier two-neuron criterion") {
    const auto cmp = gopalsamy_vs_18(example1_params());
    CHECK(cmp.applicable);
    CHECK_FALSE(cmp.criterion17.stable());
    CHECK(cmp.criterion18.stable());
    CHECK(margin(cmp.criterion17, "eq17.first").lhs == Approx(3.0 / 7).epsilon(1e-14));
    CHECK(margin(cmp.criterion17, "eq17.first").rhs == Approx(5.0 / 8).epsilon(1e-14));
    CHECK(margin(cmp.criterion18, "eq18").lhs == Approx(2.0 / 7).epsilon(1e-14));
    CHECK(margin(cmp.criterion18, "eq18").rhs == Approx(1.0 / 4).epsilon(1e-14));

    auto p = example1_params();
    p.tau1 = p.tau2 = 0.0;
    const auto undelayed = gopalsamy_vs_18(p);
    CHECK(undelayed.criterion17.stable());
    CHECK(undelayed.criterion18.stable());

    p = example1_params();
    p.tau1 = 1.5 / p.a1;
    const auto late = gopalsamy_vs_18(p);
    CHECK_FALSE(late.applicable);
    CHECK_FALSE(late.criterion17.stable());
    CHECK_FALSE(late.criterion18.stable());
}

TEST_CASE("the earlier criterion implies the new one") {
    testing::Gen gen(28);
    int held = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto cmp = gopalsamy_vs_18(gen.two_neuron());
        if (cmp.criterion17.stable()) {
            ++held;
            CHECK(cmp.criterion18.stable());
        }
    }
    CHECK(held > 20);
}

TEST_CASE("bam network verdicts over the mu range") {
    for (double mu : {0.0, 5.0, 10.0, 15.0, 18.0}) {
        const auto b = partial_example(mu);
        CHECK(theorem3_verdict(b).stable());
        CHECK(corollary11(b).stable());
    }
    const auto c0 = corollary11(partial_example(0.0));
    CHECK(margin(c0, "cor11.product").lhs == Approx(1.02 * 1.04 / 144000).epsilon(1e-13));
    CHECK(margin(c0, "cor11.product").rhs == Approx(0.98 * 0.96).epsilon(1e-14));
    const auto c18 = corollary11(partial_example(18.0));
    const double x = 38.0 * 38.0 / 1000 / 2, y = 58.0 * 58.0 / 1000 / 22;
    CHECK(margin(c18, "cor11.product").lhs ==
          Approx(38.0 * 58.0 * 1.038 * 1.058 / (144000.0 * 2 * 22)).epsilon(1e-13));
    CHECK(margin(c18, "cor11.product").rhs == Approx((1 - x) * (1 - y)).epsilon(1e-14));
    CHECK(margin(c18, "cor11.product").rhs == Approx(0.2355).epsilon(1e-3));

    // independent evaluation of both inequalities near the switch point
    auto holds = [](double mu) {
        const double R = 20 + mu, al = 20 - mu, P = 40 + mu, be = 40 - mu;
        const double x = R * R * 0.001 / al, y = P * P * 0.001 / be;
        const double lhs = R * P * (R * 0.001 + 1) * (P * 0.001 + 1) / (720.0 * 200 * al * be);
        return x < 1 && lhs < (1 - x) * (1 - y);
    };
    for (double mu = 18.4; mu < 18.6; mu += 0.0005) {
        if (std::abs(mu - 18.5156) < 0.001) continue;
        CHECK(corollary11(partial_example(mu)).stable() == holds(mu));
        CHECK(theorem3_verdict(partial_example(mu)).stable() == holds(mu));
    }
    // the leakage condition (20+μ)² < 1000(20−μ) bounds the range from above
    const double root = (-1040 + std::sqrt(1040.0 * 1040 + 4 * 19600)) / 2;
    CHECK_FALSE(corollary11(partial_example(root)).stable());
    CHECK(holds(18.5));
    CHECK_FALSE(holds(root - 1e-6));
}

TEST_CASE("bam networks without couplings") {
    auto b = partial_example(0.0);
    b.a_conn = b.b_conn = Matrix(1);
    b.tau1 = b.tau2 = {0.0};
    CHECK(build_C_bam(b) == Matrix::identity(2));
    CHECK(theorem3_verdict(b).stable());
    for (int which = 1; which <= 4; ++which) CHECK(corollary10(b, which).stable());
    CHECK_THROWS_AS(corollary10(partial_example(0.0), 1), PreconditionError);
    CHECK_THROWS_AS(corollary9(b, 5), PreconditionError);
}

TEST_CASE("dominance corollaries imply the bam matrix test") {
    testing::Gen gen(29);
    for (int k = 0; k < 1000; ++k) {
        auto b = gen.bam(static_cast<std::size_t>(gen.integer(1, 3)));
        const bool thm3 = theorem3_verdict(b).stable();
        for (int which = 1; which <= 4; ++which)
            if (corollary9(b, which).stable()) CHECK(thm3);
        if (thm3) CHECK(corollary9(b, 3).stable() == true);
    }
}

TEST_CASE("status strings") {
    CHECK(to_string(Status::stable_certified) == "stable_certified");
    CHECK(to_string(Status::inconclusive) == "inconclusive");
}
