#include "delaystab/system_model.hpp"

#include "delaystab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delaystab {

namespace {

// Relative slack for comparing catalog bounds against declared bounds.
constexpr double kBoundSlack = 1e-12;

bool within(double value, double bound) { return value <= bound + kBoundSlack * std::max(1.0, std::abs(bound)); }

std::string idx(const std::string& name, std::size_t i) { return name + "[" + std::to_string(i + 1) + "]"; }

std::string idx(const std::string& name, std::size_t i, std::size_t j) {
    return name + "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
}

class Checker {
public:
    explicit Checker(std::vector<Violation>& out) : out_(out) {}

    bool size(const std::string& name, std::size_t actual, std::size_t expected) {
        if (actual == expected) return true;
        out_.push_back({name, name + " must have length " + std::to_string(expected) + ", got " +
                                  std::to_string(actual),
                        static_cast<double>(actual)});
        return false;
    }

    void finite(const std::string& path, double v) {
        if (!std::isfinite(v)) out_.push_back({path, path + " must be finite", v});
    }

    void positive(const std::string& path, double v) {
        finite(path, v);
        if (std::isfinite(v) && !(v > 0.0)) out_.push_back({path, path + " must be > 0", v});
    }

    void nonnegative(const std::string& path, double v) {
        finite(path, v);
        if (std::isfinite(v) && !(v >= 0.0)) out_.push_back({path, path + " must be ≥ 0", v});
    }

    void at_most(const std::string& path, double v, const std::string& bound_path, double bound) {
        if (std::isfinite(v) && std::isfinite(bound) && !(v <= bound))
            out_.push_back({path, path + " must be ≤ " + bound_path, v});
    }

    void vec_positive(const std::string& name, const Vector& v, std::size_t n) {
        if (size(name, v.size(), n))
            for (std::size_t i = 0; i < n; ++i) positive(idx(name, i), v[i]);
    }

    void vec_nonnegative(const std::string& name, const Vector& v, std::size_t n) {
        if (size(name, v.size(), n))
            for (std::size_t i = 0; i < n; ++i) nonnegative(idx(name, i), v[i]);
    }

    void vec_finite(const std::string& name, const Vector& v, std::size_t n) {
        if (size(name, v.size(), n))
            for (std::size_t i = 0; i < n; ++i) finite(idx(name, i), v[i]);
    }

    void mat_nonnegative(const std::string& name, const Matrix& m, std::size_t n) {
        if (size(name, m.size(), n))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) nonnegative(idx(name, i, j), m(i, j));
    }

    void mat_finite(const std::string& name, const Matrix& m, std::size_t n) {
        if (size(name, m.size(), n))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) finite(idx(name, i, j), m(i, j));
    }

    // lo_i ≤ hi_i for two vectors already checked for size.
    void ordered(const std::string& lo_name, const Vector& lo, const std::string& hi_name, const Vector& hi) {
        if (lo.size() != hi.size()) return;
        for (std::size_t i = 0; i < lo.size(); ++i) at_most(idx(lo_name, i), lo[i], idx(hi_name, i), hi[i]);
    }

    void time_function(const std::string& path, const TimeFunction& f, double lo, double hi) {
        if (!std::isfinite(f.offset) || !std::isfinite(f.amplitude) || !std::isfinite(f.omega) ||
            !std::isfinite(f.phase)) {
            out_.push_back({path, path + " has non-finite parameters", f.offset});
            return;
        }
        if (!within(lo, f.lower_bound()))
            out_.push_back({path, path + " drops below its lower bound " + num(lo), f.lower_bound()});
        if (!within(f.upper_bound(), hi))
            out_.push_back({path, path + " exceeds its upper bound " + num(hi), f.upper_bound()});
    }

    void delay(const std::string& path, const DelayFunction& d, double bound) {
        if (!std::isfinite(d.offset) || !std::isfinite(d.amplitude) || !std::isfinite(d.omega) ||
            !std::isfinite(d.phase)) {
            out_.push_back({path, path + " has non-finite parameters", d.offset});
            return;
        }
        if (d.min_lag() < 0.0) out_.push_back({path, path + " lag must be ≥ 0", d.min_lag()});
        if (!within(d.max_lag(), bound))
            out_.push_back({path, path + " lag exceeds its bound " + num(bound), d.max_lag()});
    }

    void activation(const std::string& path, const Activation& a, double lipschitz) {
        if (a.kind == Activation::Kind::custom && !a.fn) {
            out_.push_back({path, path + " custom activation has no function", 0.0});
            return;
        }
        if (!std::isfinite(a.lipschitz()))
            out_.push_back({path, path + " has non-finite Lipschitz constant", a.lipschitz()});
        else if (!within(a.lipschitz(), lipschitz))
            out_.push_back({path, path + " Lipschitz constant exceeds " + num(lipschitz), a.lipschitz()});
    }

private:
    static std::string num(double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    }

    std::vector<Violation>& out_;
};

double max_entry(const Matrix& m) {
    double best = 0.0;
    for (double v : m.data()) best = std::max(best, v);
    return best;
}

double max_entry(const Vector& v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, x);
    return best;
}

void throw_if(const std::vector<Violation>& v, const char* what) {
    if (v.empty()) return;
    std::string msg = std::string("invalid ") + what + ":";
    for (const auto& x : v) msg += "\n  " + x.message;
    throw InputError(msg);
}

}  // namespace

double GeneralSystemSpec::max_delay() const { return std::max(max_entry(tau), max_entry(sigma)); }
double LinearSystemSpec::max_delay() const { return max_entry(sigma); }
double BamSpec::max_delay() const {
    return std::max({max_entry(tau1), max_entry(tau2), max_entry(sig1), max_entry(sig2)});
}

std::vector<Violation> validate(const GeneralSystemSpec& s) {
    std::vector<Violation> out;
    Checker c(out);
    if (s.m == 0) {
        out.push_back({"m", "m must be ≥ 1", 0.0});
        return out;
    }
    c.vec_positive("alpha", s.alpha, s.m);
    c.vec_positive("A", s.A, s.m);
    c.ordered("alpha", s.alpha, "A", s.A);
    c.vec_nonnegative("tau", s.tau, s.m);
    c.mat_nonnegative("sigma", s.sigma, s.m);
    c.mat_nonnegative("L", s.L, s.m);
    return out;
}

std::vector<Violation> validate(const LinearSystemSpec& s) {
    std::vector<Violation> out;
    Checker c(out);
    if (s.m == 0) {
        out.push_back({"m", "m must be ≥ 1", 0.0});
        return out;
    }
    c.vec_positive("alpha", s.alpha, s.m);
    c.vec_positive("A", s.A, s.m);
    c.ordered("alpha", s.alpha, "A", s.A);
    c.mat_nonnegative("A_off", s.A_off, s.m);
    c.mat_nonnegative("sigma", s.sigma, s.m);
    return out;
}

std::vector<Violation> validate(const BamSpec& s) {
    std::vector<Violation> out;
    Checker c(out);
    if (s.n == 0) {
        out.push_back({"n", "n must be ≥ 1", 0.0});
        return out;
    }
    c.vec_positive("a", s.a, s.n);
    c.vec_positive("b", s.b, s.n);
    c.mat_finite("a_conn", s.a_conn, s.n);
    c.mat_finite("b_conn", s.b_conn, s.n);
    c.vec_nonnegative("Lf", s.Lf, s.n);
    c.vec_nonnegative("Lg", s.Lg, s.n);
    c.vec_positive("r_lo", s.r_lo, s.n);
    c.vec_positive("r_hi", s.r_hi, s.n);
    c.ordered("r_lo", s.r_lo, "r_hi", s.r_hi);
    c.vec_positive("p_lo", s.p_lo, s.n);
    c.vec_positive("p_hi", s.p_hi, s.n);
    c.ordered("p_lo", s.p_lo, "p_hi", s.p_hi);
    c.vec_nonnegative("tau1", s.tau1, s.n);
    c.vec_nonnegative("tau2", s.tau2, s.n);
    c.vec_nonnegative("sig1", s.sig1, s.n);
    c.vec_nonnegative("sig2", s.sig2, s.n);
    c.vec_finite("I", s.I, s.n);
    c.vec_finite("J", s.J, s.n);
    return out;
}

std::vector<Violation> validate(const TwoNeuronParams& p) {
    std::vector<Violation> out;
    Checker c(out);
    c.positive("a1", p.a1);
    c.positive("a2", p.a2);
    c.finite("a12", p.a12);
    c.finite("a21", p.a21);
    c.nonnegative("tau1", p.tau1);
    c.nonnegative("tau2", p.tau2);
    c.nonnegative("sigma1", p.sigma1);
    c.nonnegative("sigma2", p.sigma2);
    c.nonnegative("L1", p.L1);
    c.nonnegative("L2", p.L2);
    return out;
}

void require_valid(const GeneralSystemSpec& spec) { throw_if(validate(spec), "general system spec"); }
void require_valid(const LinearSystemSpec& spec) { throw_if(validate(spec), "linear system spec"); }
void require_valid(const BamSpec& spec) { throw_if(validate(spec), "BAM spec"); }
void require_valid(const TwoNeuronParams& p) { throw_if(validate(p), "two-neuron parameters"); }

GeneralSystemSpec bam_to_general(const BamSpec& bam) {
    require_valid(bam);
    const std::size_t n = bam.n;
    GeneralSystemSpec g;
    g.m = 2 * n;
    g.alpha.resize(g.m);
    g.A.resize(g.m);
    g.tau.resize(g.m);
    g.sigma = Matrix(g.m);
    g.L = Matrix(g.m);
    for (std::size_t i = 0; i < n; ++i) {
        g.alpha[i] = bam.r_lo[i] * bam.a[i];
        g.A[i] = bam.r_hi[i] * bam.a[i];
        g.alpha[i + n] = bam.p_lo[i] * bam.b[i];
        g.A[i + n] = bam.p_hi[i] * bam.b[i];
        g.tau[i] = bam.tau1[i];
        g.tau[i + n] = bam.tau2[i];
        for (std::size_t j = 0; j < n; ++j) {
            g.L(i, j + n) = std::abs(bam.a_conn(i, j)) * bam.r_hi[i] * bam.Lf[j];
            g.L(i + n, j) = std::abs(bam.b_conn(i, j)) * bam.p_hi[i] * bam.Lg[j];
            g.sigma(i, j + n) = bam.sig2[j];
            g.sigma(i + n, j) = bam.sig1[j];
        }
    }
    return g;
}

GeneralSystemSpec linear_to_general(const LinearSystemSpec& lin) {
    require_valid(lin);
    GeneralSystemSpec g;
    g.m = lin.m;
    g.alpha = lin.alpha;
    g.A = lin.A;
    g.tau.resize(lin.m);
    g.sigma = lin.sigma;
    g.L = lin.A_off;
    g.diagonal_delay_free = lin.diagonal_delay_free;
    for (std::size_t i = 0; i < lin.m; ++i) {
        g.tau[i] = lin.diagonal_delay_free ? 0.0 : lin.sigma(i, i);
        g.L(i, i) = 0.0;
    }
    return g;
}

BamSpec two_neuron_spec(const TwoNeuronParams& p) {
    BamSpec b;
    b.n = 1;
    b.a = {p.a1};
    b.b = {p.a2};
    b.a_conn = Matrix{{p.a12}};
    b.b_conn = Matrix{{p.a21}};
    b.Lf = {p.L1};
    b.Lg = {p.L2};
    b.r_lo = b.r_hi = b.p_lo = b.p_hi = {1.0};
    b.tau1 = {p.tau1};
    b.tau2 = {p.tau2};
    b.sig1 = {p.sigma2};
    b.sig2 = {p.sigma1};
    b.I = b.J = {0.0};
    require_valid(p);
    require_valid(b);
    return b;
}

GeneralSystemSpec two_neuron_general(const TwoNeuronParams& p) {
    GeneralSystemSpec g;
    g.m = 2;
    g.alpha = g.A = {p.a1, p.a2};
    g.tau = {p.tau1, p.tau2};
    g.sigma = Matrix{{0.0, p.sigma1}, {p.sigma2, 0.0}};
    g.L = Matrix{{0.0, std::abs(p.a12) * p.L1}, {std::abs(p.a21) * p.L2, 0.0}};
    require_valid(g);
    return g;
}

GeneralDynamics default_dynamics(const GeneralSystemSpec& s) {
    GeneralDynamics d;
    for (std::size_t i = 0; i < s.m; ++i) {
        d.a.push_back(TimeFunction::constant(s.A[i]));
        d.h.push_back(s.diagonal_delay_free ? DelayFunction::none() : DelayFunction::constant(s.tau[i]));
        d.g.emplace_back();
        d.F.emplace_back();
        for (std::size_t j = 0; j < s.m; ++j) {
            d.g[i].push_back(DelayFunction::constant(s.sigma(i, j)));
            d.F[i].push_back(Activation::linear(s.L(i, j)));
        }
    }
    return d;
}

LinearDynamics default_dynamics(const LinearSystemSpec& s) {
    LinearDynamics d;
    for (std::size_t i = 0; i < s.m; ++i) {
        d.diag.push_back(TimeFunction::constant(s.A[i]));
        d.off.emplace_back();
        d.g.emplace_back();
        for (std::size_t j = 0; j < s.m; ++j) {
            d.off[i].push_back(TimeFunction::constant(i == j ? 0.0 : s.A_off(i, j)));
            const bool undelayed = i == j && s.diagonal_delay_free;
            d.g[i].push_back(undelayed ? DelayFunction::none() : DelayFunction::constant(s.sigma(i, j)));
        }
    }
    return d;
}

BamDynamics default_dynamics(const BamSpec& s) {
    BamDynamics d;
    for (std::size_t i = 0; i < s.n; ++i) {
        d.r.push_back(TimeFunction::constant(s.r_hi[i]));
        d.p.push_back(TimeFunction::constant(s.p_hi[i]));
        d.h1.push_back(DelayFunction::constant(s.tau1[i]));
        d.h2.push_back(DelayFunction::constant(s.tau2[i]));
        d.l1.push_back(DelayFunction::constant(s.sig1[i]));
        d.l2.push_back(DelayFunction::constant(s.sig2[i]));
        d.f.push_back(Activation::linear(s.Lf[i]));
        d.g.push_back(Activation::linear(s.Lg[i]));
    }
    return d;
}

BamDynamics two_neuron_dynamics(const TwoNeuronParams& p, const Activation& f1, const Activation& f2) {
    auto lag = [](double v) { return v == 0.0 ? DelayFunction::none() : DelayFunction::constant(v); };
    BamDynamics d;
    d.r = d.p = {TimeFunction::constant(1.0)};
    d.h1 = {lag(p.tau1)};
    d.h2 = {lag(p.tau2)};
    d.l1 = {lag(p.sigma2)};
    d.l2 = {lag(p.sigma1)};
    d.f = {f1};
    d.g = {f2};
    return d;
}

std::vector<Violation> validate(const GeneralSystemSpec& s, const GeneralDynamics& d) {
    std::vector<Violation> out = validate(s);
    if (!out.empty()) return out;
    Checker c(out);
    const std::size_t m = s.m;
    if (c.size("dynamics.a", d.a.size(), m))
        for (std::size_t i = 0; i < m; ++i) c.time_function(idx("dynamics.a", i), d.a[i], s.alpha[i], s.A[i]);
    if (c.size("dynamics.h", d.h.size(), m))
        for (std::size_t i = 0; i < m; ++i) {
            if (s.diagonal_delay_free && !d.h[i].is_zero())
                out.push_back({idx("dynamics.h", i), idx("dynamics.h", i) + " must be undelayed", d.h[i].max_lag()});
            c.delay(idx("dynamics.h", i), d.h[i], s.tau[i]);
        }
    if (c.size("dynamics.g", d.g.size(), m))
        for (std::size_t i = 0; i < m; ++i)
            if (c.size(idx("dynamics.g", i), d.g[i].size(), m))
                for (std::size_t j = 0; j < m; ++j) c.delay(idx("dynamics.g", i, j), d.g[i][j], s.sigma(i, j));
    if (c.size("dynamics.F", d.F.size(), m))
        for (std::size_t i = 0; i < m; ++i)
            if (c.size(idx("dynamics.F", i), d.F[i].size(), m))
                for (std::size_t j = 0; j < m; ++j) c.activation(idx("dynamics.F", i, j), d.F[i][j], s.L(i, j));
    return out;
}

std::vector<Violation> validate(const LinearSystemSpec& s, const LinearDynamics& d) {
    std::vector<Violation> out = validate(s);
    if (!out.empty()) return out;
    Checker c(out);
    const std::size_t m = s.m;
    if (c.size("dynamics.diag", d.diag.size(), m))
        for (std::size_t i = 0; i < m; ++i)
            c.time_function(idx("dynamics.diag", i), d.diag[i], s.alpha[i], s.A[i]);
    if (c.size("dynamics.off", d.off.size(), m))
        for (std::size_t i = 0; i < m; ++i)
            if (c.size(idx("dynamics.off", i), d.off[i].size(), m))
                for (std::size_t j = 0; j < m; ++j)
                    if (i != j)
                        c.time_function(idx("dynamics.off", i, j), d.off[i][j], -s.A_off(i, j), s.A_off(i, j));
    if (c.size("dynamics.g", d.g.size(), m))
        for (std::size_t i = 0; i < m; ++i)
            if (c.size(idx("dynamics.g", i), d.g[i].size(), m))
                for (std::size_t j = 0; j < m; ++j) {
                    if (i == j && s.diagonal_delay_free && !d.g[i][i].is_zero())
                        out.push_back({idx("dynamics.g", i, i), idx("dynamics.g", i, i) + " must be undelayed",
                                       d.g[i][i].max_lag()});
                    c.delay(idx("dynamics.g", i, j), d.g[i][j], s.sigma(i, j));
                }
    return out;
}

std::vector<Violation> validate(const BamSpec& s, const BamDynamics& d) {
    std::vector<Violation> out = validate(s);
    if (!out.empty()) return out;
    Checker c(out);
    const std::size_t n = s.n;
    auto each = [&](const char* name, std::size_t size, auto&& fn) {
        if (c.size(std::string("dynamics.") + name, size, n))
            for (std::size_t i = 0; i < n; ++i) fn(idx(std::string("dynamics.") + name, i), i);
    };
    each("r", d.r.size(), [&](const std::string& p, std::size_t i) { c.time_function(p, d.r[i], s.r_lo[i], s.r_hi[i]); });
    each("p", d.p.size(), [&](const std::string& p, std::size_t i) { c.time_function(p, d.p[i], s.p_lo[i], s.p_hi[i]); });
    each("h1", d.h1.size(), [&](const std::string& p, std::size_t i) { c.delay(p, d.h1[i], s.tau1[i]); });
    each("h2", d.h2.size(), [&](const std::string& p, std::size_t i) { c.delay(p, d.h2[i], s.tau2[i]); });
    each("l1", d.l1.size(), [&](const std::string& p, std::size_t i) { c.delay(p, d.l1[i], s.sig1[i]); });
    each("l2", d.l2.size(), [&](const std::string& p, std::size_t i) { c.delay(p, d.l2[i], s.sig2[i]); });
    each("f", d.f.size(), [&](const std::string& p, std::size_t i) { c.activation(p, d.f[i], s.Lf[i]); });
    each("g", d.g.size(), [&](const std::string& p, std::size_t i) { c.activation(p, d.g[i], s.Lg[i]); });
    return out;
}

double ConcreteSystem::max_delay() const {
    double best = 0.0;
    for (const auto& d : leakage) best = std::max(best, d.max_lag());
    for (const auto& c : couplings) best = std::max(best, c.delay.max_lag());
    return best;
}

double ConcreteSystem::min_positive_delay_bound() const {
    double best = INFINITY;
    for (std::size_t i = 0; i < m; ++i)
        if (!leakage[i].is_zero() && leakage_bound[i] > 0.0) best = std::min(best, leakage_bound[i]);
    for (const auto& c : couplings)
        if (!c.delay.is_zero() && c.delay_bound > 0.0) best = std::min(best, c.delay_bound);
    return best;
}

ConcreteSystem make_concrete(const GeneralSystemSpec& s, const GeneralDynamics& d) {
    throw_if(validate(s, d), "general system dynamics");
    ConcreteSystem c;
    c.m = s.m;
    c.decay = d.a;
    c.leakage = d.h;
    c.leakage_bound = s.diagonal_delay_free ? Vector(s.m, 0.0) : s.tau;
    c.forcing.assign(s.m, TimeFunction::constant(0.0));
    for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t j = 0; j < s.m; ++j) {
            const Activation& f = d.F[i][j];
            if (f.kind != Activation::Kind::custom && f.k == 0.0) continue;
            c.couplings.push_back({i, j, TimeFunction::constant(1.0), f, d.g[i][j], s.sigma(i, j)});
        }
    return c;
}

ConcreteSystem make_concrete(const LinearSystemSpec& s, const LinearDynamics& d) {
    throw_if(validate(s, d), "linear system dynamics");
    ConcreteSystem c;
    c.m = s.m;
    c.decay = d.diag;
    c.forcing.assign(s.m, TimeFunction::constant(0.0));
    for (std::size_t i = 0; i < s.m; ++i) {
        c.leakage.push_back(d.g[i][i]);
        c.leakage_bound.push_back(s.diagonal_delay_free ? 0.0 : s.sigma(i, i));
        for (std::size_t j = 0; j < s.m; ++j) {
            if (i == j || (d.off[i][j] == TimeFunction::constant(0.0))) continue;
            c.couplings.push_back({i, j, d.off[i][j], Activation::linear(1.0), d.g[i][j], s.sigma(i, j)});
        }
    }
    return c;
}

ConcreteSystem make_concrete(const BamSpec& s, const BamDynamics& d) {
    throw_if(validate(s, d), "BAM dynamics");
    const std::size_t n = s.n;
    ConcreteSystem c;
    c.m = 2 * n;
    c.decay.resize(c.m);
    c.leakage.resize(c.m);
    c.leakage_bound.resize(c.m);
    c.forcing.resize(c.m);
    for (std::size_t i = 0; i < n; ++i) {
        c.decay[i] = d.r[i].scaled(s.a[i]);
        c.decay[i + n] = d.p[i].scaled(s.b[i]);
        c.leakage[i] = d.h1[i];
        c.leakage[i + n] = d.h2[i];
        c.leakage_bound[i] = s.tau1[i];
        c.leakage_bound[i + n] = s.tau2[i];
        c.forcing[i] = d.r[i].scaled(s.I[i]);
        c.forcing[i + n] = d.p[i].scaled(s.J[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (s.a_conn(i, j) != 0.0)
                c.couplings.push_back({i, j + n, d.r[i].scaled(s.a_conn(i, j)), d.f[j], d.l2[j], s.sig2[j]});
            if (s.b_conn(i, j) != 0.0)
                c.couplings.push_back({i + n, j, d.p[i].scaled(s.b_conn(i, j)), d.g[j], d.l1[j], s.sig1[j]});
        }
    return c;
}

}  // namespace delaystab
