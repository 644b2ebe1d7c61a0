#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delaystab/errors.hpp"
#include "delaystab/simulator.hpp"
#include "delaystab/stability.hpp"
#include "generators.hpp"

#include <cmath>
#include <complex>
#include <sstream>

using namespace delaystab;
using doctest::Approx;

namespace {

// x' = −x(t − lag) as a one-dimensional general system.
ConcreteSystem lagged_decay(double lag) {
    GeneralSystemSpec s;
    s.m = 1;
    s.alpha = s.A = {1.0};
    s.tau = {lag};
    s.sigma = Matrix(1);
    s.L = Matrix(1);
    return make_concrete(s, default_dynamics(s));
}

SimConfig config(double t_end, double h, std::vector<double> history) {
    SimConfig c;
    c.t_end = t_end;
    c.h = h;
    c.history = SimConfig::constant_history(history);
    return c;
}

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// Method-of-steps solution of x' = −x(t−1), x ≡ 1 on [−1, 0]:
// x(t) = Σ_{k=0}^{n} (−1)^k (t − k + 1)^k / k! on [n−1, n].
double unit_lag_exact(double t) {
    if (t <= 0.0) return 1.0;
    const int n = std::max(1, static_cast<int>(std::ceil(t)));
    double x = 0.0;
    for (int k = 0; k <= n; ++k) x += std::pow(-1.0, k) * std::pow(t - k + 1, k) / factorial(k);
    return x;
}

double max_error(const Trajectory& tr, double t_max) {
    double e = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        if (tr.times[k] <= t_max + 1e-12) e = std::max(e, std::abs(tr.states[k][0] - unit_lag_exact(tr.times[k])));
    return e;
}

// Rightmost characteristic root of z + e^{−zτ} = 0 by Newton's method.
std::complex<double> characteristic_root(double tau) {
    std::complex<double> z(0.1, 1.2);
    for (int it = 0; it < 100; ++it) {
        const auto e = std::exp(-z * tau);
        z -= (z + e) / (1.0 - tau * e);
    }
    return z;
}

Trajectory synthetic(double amplitude, double rate, double t_end, std::size_t points) {
    Trajectory tr;
    for (std::size_t k = 0; k < points; ++k) {
        const double t = t_end * static_cast<double>(k) / static_cast<double>(points - 1);
        tr.times.push_back(t);
        tr.states.push_back({amplitude * std::exp(-rate * t)});
    }
    return tr;
}

}  // namespace

TEST_CASE("method-of-steps oracle solves the equation") {
    for (double t = 0.05; t < 6; t += 0.37) {
        const double d = 1e-6;
        const double slope = (unit_lag_exact(t + d) - unit_lag_exact(t - d)) / (2 * d);
        if (std::abs(t - std::round(t)) > 1e-3) CHECK(slope == Approx(-unit_lag_exact(t - 1)).epsilon(1e-6));
    }
    CHECK(unit_lag_exact(1.0) == Approx(0.0).epsilon(1e-15));
}

TEST_CASE("undelayed decay matches the exponential") {
    const auto tr = simulate(lagged_decay(0.0), config(5.0, 0.01, {1.0}));
    CHECK(tr.times.back() == Approx(5.0));
    CHECK(std::abs(tr.states.back()[0] - std::exp(-5.0)) < 1e-6);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-5.0)) < 1e-10);
}

TEST_CASE("unit delay follows the polynomial solution") {
    const auto fine = simulate(lagged_decay(1.0), config(8.0, 0.01, {1.0}));
    const auto coarse = simulate(lagged_decay(1.0), config(8.0, 0.02, {1.0}));
    CHECK(max_error(fine, 1.0) < 1e-13);
    CHECK(max_error(coarse, 1.0) < 1e-13);
    const double ef = max_error(fine, 8.0), ec = max_error(coarse, 8.0);
    CHECK(ef < 1e-9);
    CHECK(ec / ef >= 12.0);
}

TEST_CASE("delay beyond pi/2 destabilizes the scalar equation") {
    const auto root = characteristic_root(1.6);
    CHECK(std::abs(root + std::exp(-root * 1.6)) < 1e-12);
    CHECK(root.real() > 0.0);
    CHECK(characteristic_root(1.5).real() < 0.0);

    const auto tr = simulate(lagged_decay(1.6), config(60.0, 0.01, {1.0}));
    auto amplitude = [&](double a, double b) {
        double m = 0.0;
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            if (tr.times[k] >= a && tr.times[k] <= b) m = std::max(m, std::abs(tr.states[k][0]));
        return m;
    };
    const double early = amplitude(10, 20), late = amplitude(50, 60);
    CHECK(late > early);
    const double growth = std::log(late / early) / 40.0;
    CHECK(growth == Approx(root.real()).epsilon(0.1));
    CHECK_THROWS_AS(fit_decay(tr, Vector{0.0}), FitInapplicableError);
}

TEST_CASE("runs are deterministic") {
    GeneralSystemSpec s;
    s.m = 2;
    s.alpha = s.A = {0.8, 0.5};
    s.tau = {0.5, 0.4};
    s.sigma = Matrix{{0.0, 0.2}, {0.2, 0.0}};
    s.L = Matrix{{0.0, 0.5}, {0.2, 0.0}};
    auto d = default_dynamics(s);
    d.F[0][1] = Activation::tanh_scaled(0.5);
    d.F[1][0] = Activation::tanh_scaled(0.2);
    d.g[0][1] = DelayFunction::abs_sin(0.1, 0.1);
    const auto sys = make_concrete(s, d);
    const auto a = simulate(sys, config(10.0, 0.01, {1.0, -1.0}));
    const auto b = simulate(sys, config(10.0, 0.01, {1.0, -1.0}));
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
    CHECK(a.spec_hash == b.spec_hash);
    CHECK(a.spec_hash == hash_system(sys));
    CHECK(hash_system(sys) != hash_system(make_concrete(s, default_dynamics(s))));
}

TEST_CASE("recorded grid and retained history") {
    auto cfg = config(3.0, 0.01, {1.0});
    cfg.record_every = 10;
    const auto tr = simulate(lagged_decay(0.5), cfg);
    REQUIRE(tr.times.size() == 31);
    for (std::size_t k = 1; k < tr.times.size(); ++k) CHECK(tr.times[k] - tr.times[k - 1] == Approx(0.1));
    CHECK(tr.steps == 300);
    CHECK(tr.buffer.time(tr.buffer.oldest()) <= 3.0 - 0.5 + 1e-12);
    CHECK(tr.buffer.time(tr.buffer.newest()) == Approx(3.0));
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(simulate(lagged_decay(0.05), config(1.0, 0.01, {1.0})), SimulationError);
    CHECK_THROWS_AS(simulate(lagged_decay(0.0), config(1.0, -0.01, {1.0})), SimulationError);
    CHECK_THROWS_AS(simulate(lagged_decay(0.0), config(0.0, 0.01, {1.0})), SimulationError);
    CHECK_THROWS_AS(simulate(lagged_decay(0.0), config(1.0, 0.01, {1.0, 2.0})), SimulationError);
}

TEST_CASE("delay functions that exceed their bound stop the run") {
    auto sys = lagged_decay(1.0);
    sys.leakage[0] = DelayFunction::abs_sin(0.5, 1.0);
    try {
        simulate(sys, config(5.0, 0.01, {1.0}));
        FAIL("expected a delay-bound violation");
    } catch (const SimulationError& e) {
        CHECK(e.time >= 0.0);
        CHECK(e.time < 5.0);
    }
}

TEST_CASE("blow-up is reported with its time") {
    auto sys = lagged_decay(0.0);
    sys.decay[0] = TimeFunction::constant(-400.0);
    try {
        simulate(sys, config(5.0, 0.001, {1.0}));
        FAIL("expected overflow");
    } catch (const SimulationError& e) {
        CHECK(e.time > 1.0);
        CHECK(e.time < 2.5);
    }
}

TEST_CASE("decay fit of an exact exponential") {
    const auto tr = synthetic(3.0, 0.7, 20.0, 2001);
    const auto fit = fit_decay(tr, Vector{0.0});
    CHECK(fit.lambda_hat == Approx(0.7).epsilon(1e-6));
    CHECK(fit.amplitude == Approx(3.0).epsilon(1e-6));
    CHECK(fit.t_a >= 4.0);
    CHECK(fit.t_b <= 20.0);
    CHECK(fit.r_squared == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("decay fit rejects flat and growing envelopes") {
    auto flat = synthetic(0.0, 0.0, 10.0, 100);
    CHECK_THROWS_AS(fit_decay(flat, Vector{0.0}), FitInapplicableError);
    auto at_reference = synthetic(1.0, 0.0, 10.0, 100);
    CHECK_THROWS_AS(fit_decay(at_reference, Vector{1.0}), FitInapplicableError);
    CHECK_THROWS_AS(fit_decay(synthetic(1.0, 0.0, 10.0, 100), Vector{0.0}), FitInapplicableError);
    CHECK_THROWS_AS(fit_decay(synthetic(1.0, -0.2, 10.0, 100), Vector{0.0}), FitInapplicableError);
    CHECK_THROWS_AS(fit_decay(synthetic(1.0, 0.2, 10.0, 100), Vector{0.0, 0.0}), InputError);
}

TEST_CASE("csv export") {
    auto cfg = config(0.05, 0.01, {1.0, 1.0 / 3});
    GeneralSystemSpec s;
    s.m = 2;
    s.alpha = s.A = {1.0, 2.0};
    s.tau = {0.0, 0.0};
    s.sigma = Matrix(2);
    s.L = Matrix(2);
    const auto tr = simulate(make_concrete(s, default_dynamics(s)), cfg);
    std::ostringstream out;
    write_csv(tr, out);
    const std::string text = out.str();
    CHECK(text.rfind("t,x_1,x_2\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(cells, cell, ',')) values.push_back(std::stod(cell));
        REQUIRE(values.size() == 3);
        CHECK(values[0] == tr.times[row]);
        CHECK(values[1] == tr.states[row][0]);
        CHECK(values[2] == tr.states[row][1]);
        ++row;
    }
    CHECK(row == tr.times.size());
}

TEST_CASE("history buffer interpolation") {
    HistoryBuffer buf(1, 8, 0.0, 0.5);
    auto p = [](double t) { return t * t * t - 2 * t + 1; };
    auto dp = [](double t) { return 3 * t * t - 2; };
    for (std::size_t k = 0; k < 12; ++k) {
        const double t = 0.5 * static_cast<double>(k);
        const double x = p(t), dx = dp(t);
        buf.push(std::span<const double>(&x, 1));
        buf.set_derivative(k, std::span<const double>(&dx, 1));
    }
    CHECK(buf.oldest() == 4);
    CHECK(buf.newest() == 11);
    // cubic Hermite reproduces cubics exactly
    for (double s = 2.0; s <= 5.5; s += 0.13) CHECK(buf.interpolate(0, s) == Approx(p(s)).epsilon(1e-13));
    CHECK_THROWS_AS(buf.interpolate(0, 1.9), SimulationError);

    HistoryBuffer lin(1, 4, 0.0, 1.0);
    const double a = 1.0, b = 3.0, da = 0.0;
    lin.push(std::span<const double>(&a, 1));
    lin.set_derivative(0, std::span<const double>(&da, 1));
    lin.push(std::span<const double>(&b, 1));
    // right derivative unknown: linear on the newest segment
    CHECK(lin.interpolate(0, 0.25) == Approx(1.5));
    CHECK_FALSE(lin.has_derivative(1));
}

TEST_CASE("certified systems decay in simulation") {
    testing::Gen gen(41);
    int runs = 0;
    for (int k = 0; k < 200 && runs < 25; ++k) {
        auto s = gen.general(static_cast<std::size_t>(gen.integer(1, 3)));
        for (auto& t : s.tau) t = std::max(t, 0.05);
        for (std::size_t i = 0; i < s.m; ++i)
            for (std::size_t j = 0; j < s.m; ++j) s.sigma(i, j) = std::max(s.sigma(i, j), 0.05);
        if (!theorem1_verdict(s).stable()) continue;
        ++runs;
        auto d = default_dynamics(s);
        for (std::size_t i = 0; i < s.m; ++i) {
            d.a[i] = TimeFunction::sinusoid(0.5 * (s.alpha[i] + s.A[i]), 0.5 * (s.A[i] - s.alpha[i]), gen.uniform(0.5, 3));
            for (std::size_t j = 0; j < s.m; ++j) {
                const double L = s.L(i, j);
                d.F[i][j] = gen.coin() ? Activation::tanh_scaled(L) : Activation::sin_scaled(-L);
                d.g[i][j] = DelayFunction::sin_squared(s.sigma(i, j), gen.uniform(0.5, 3));
            }
        }
        REQUIRE(validate(s, d).empty());
        std::vector<double> x0;
        for (std::size_t i = 0; i < s.m; ++i) x0.push_back(gen.uniform(-2, 2));
        const auto tr = simulate(make_concrete(s, d), config(20.0, 0.005, x0));
        const auto fit = fit_decay(tr, Vector(s.m, 0.0));
        CHECK(fit.lambda_hat > 0.0);
    }
    CHECK(runs >= 10);
}
