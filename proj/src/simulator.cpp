#include "delaystab/simulator.hpp"

#include "delaystab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <ostream>
#include <string>

namespace delaystab {

namespace {

constexpr std::size_t kNoDerivative = std::numeric_limits<std::size_t>::max();

std::string fmt_time(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

}  // namespace

std::vector<TimeFunction> SimConfig::constant_history(std::span<const double> values) {
    std::vector<TimeFunction> out;
    for (double v : values) out.push_back(TimeFunction::constant(v));
    return out;
}

HistoryBuffer::HistoryBuffer(std::size_t dim, std::size_t capacity, double t0, double h)
    : dim_(dim),
      capacity_(std::max<std::size_t>(capacity, 2)),
      t0_(t0),
      h_(h),
      x_(capacity_ * dim),
      dx_(capacity_ * dim),
      dx_index_(capacity_, kNoDerivative) {}

void HistoryBuffer::push(std::span<const double> x) {
    const std::size_t s = slot(count_);
    std::copy(x.begin(), x.end(), x_.begin() + static_cast<std::ptrdiff_t>(s * dim_));
    dx_index_[s] = kNoDerivative;
    ++count_;
}

void HistoryBuffer::set_derivative(std::size_t k, std::span<const double> dx) {
    const std::size_t s = slot(k);
    std::copy(dx.begin(), dx.end(), dx_.begin() + static_cast<std::ptrdiff_t>(s * dim_));
    dx_index_[s] = k;
}

std::span<const double> HistoryBuffer::state(std::size_t k) const { return {x_.data() + slot(k) * dim_, dim_}; }

bool HistoryBuffer::has_derivative(std::size_t k) const { return dx_index_[slot(k)] == k; }

std::span<const double> HistoryBuffer::derivative(std::size_t k) const { return {dx_.data() + slot(k) * dim_, dim_}; }

double HistoryBuffer::interpolate(std::size_t j, double s) const {
    const std::size_t lo = oldest(), hi = newest();
    const double u = (s - t0_) / h_;
    if (u < static_cast<double>(lo) - 1e-9 || u > static_cast<double>(hi) + 1e-9)
        throw SimulationError("delayed lookup at t = " + fmt_time(s) + " falls outside the retained history", s);
    std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(u)));
    k = std::clamp(k, lo, hi);
    if (k == hi) return state(hi)[j];
    const double th = std::clamp(u - static_cast<double>(k), 0.0, 1.0);
    const double x0 = state(k)[j], x1 = state(k + 1)[j];
    if (!has_derivative(k) || !has_derivative(k + 1)) return x0 + th * (x1 - x0);
    const double d0 = derivative(k)[j] * h_, d1 = derivative(k + 1)[j] * h_;
    const double t2 = th * th, t3 = t2 * th;
    return (2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + th) * d0 + (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * d1;
}

namespace {

class Integrator {
public:
    Integrator(const ConcreteSystem& sys, const SimConfig& cfg) : sys_(sys), cfg_(cfg) {}

    Trajectory run() {
        const std::size_t m = sys_.m;
        check_config();

        const double span = cfg_.t_end - cfg_.t0;
        const auto steps = static_cast<std::size_t>(std::ceil(span / cfg_.h - 1e-9));
        double horizon = sys_.max_delay();
        for (double b : sys_.leakage_bound) horizon = std::max(horizon, b);
        for (const auto& c : sys_.couplings) horizon = std::max(horizon, c.delay_bound);
        const auto capacity = static_cast<std::size_t>(std::ceil(horizon / cfg_.h)) + 3;
        buf_ = HistoryBuffer(m, capacity, cfg_.t0, cfg_.h);

        Trajectory traj;
        traj.config = cfg_;
        traj.spec_hash = hash_system(sys_);

        Vector x(m), k1(m), k2(m), k3(m), k4(m), w(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = cfg_.history[i](cfg_.t0);
        buf_.push(x);
        record(traj, 0, x);

        const double h = cfg_.h;
        for (std::size_t n = 0; n < steps; ++n) {
            const double t = time(n);
            rhs(t, x, k1);
            buf_.set_derivative(n, k1);
            for (std::size_t i = 0; i < m; ++i) w[i] = x[i] + 0.5 * h * k1[i];
            rhs(t + 0.5 * h, w, k2);
            for (std::size_t i = 0; i < m; ++i) w[i] = x[i] + 0.5 * h * k2[i];
            rhs(t + 0.5 * h, w, k3);
            for (std::size_t i = 0; i < m; ++i) w[i] = x[i] + h * k3[i];
            rhs(t + h, w, k4);
            for (std::size_t i = 0; i < m; ++i) {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if (!std::isfinite(x[i]))
                    throw SimulationError("state x_" + std::to_string(i + 1) + " became non-finite at t = " +
                                              fmt_time(time(n + 1)),
                                          time(n + 1));
            }
            buf_.push(x);
            record(traj, n + 1, x);
        }
        if (steps > 0) {
            rhs(time(steps), x, k1);
            buf_.set_derivative(steps, k1);
        }
        traj.steps = steps;
        traj.buffer = std::move(buf_);
        return traj;
    }

private:
    double time(std::size_t n) const { return cfg_.t0 + static_cast<double>(n) * cfg_.h; }

    void check_config() const {
        if (!(cfg_.h > 0.0) || !std::isfinite(cfg_.h)) throw SimulationError("step size must be positive", cfg_.t0);
        if (!(cfg_.t_end > cfg_.t0)) throw SimulationError("t_end must exceed t0", cfg_.t0);
        if (cfg_.record_every < 1) throw SimulationError("record_every must be ≥ 1", cfg_.t0);
        if (cfg_.history.size() != sys_.m)
            throw SimulationError("history needs one function per component", cfg_.t0);
        if (sys_.decay.size() != sys_.m || sys_.leakage.size() != sys_.m || sys_.leakage_bound.size() != sys_.m ||
            sys_.forcing.size() != sys_.m)
            throw SimulationError("concrete system has inconsistent dimensions", cfg_.t0);
        const double min_delay = sys_.min_positive_delay_bound();
        if (std::isfinite(min_delay) && cfg_.h > min_delay / 10.0 * (1.0 + 1e-9))
            throw SimulationError("step " + fmt_time(cfg_.h) + " exceeds a tenth of the smallest delay bound " +
                                      fmt_time(min_delay),
                                  cfg_.t0);
    }

    void record(Trajectory& traj, std::size_t n, const Vector& x) const {
        if (n % static_cast<std::size_t>(cfg_.record_every) != 0) return;
        traj.times.push_back(time(n));
        traj.states.push_back(x);
    }

    double checked_lag(const DelayFunction& d, double bound, double t) const {
        const double lag = d.lag(t);
        if (!(lag >= 0.0) || lag > bound * (1.0 + 1e-12) + 1e-15)
            throw SimulationError("delay lag " + fmt_time(lag) + " violates its bound " + fmt_time(bound) +
                                      " at t = " + fmt_time(t),
                                  t);
        return lag;
    }

    double lookup(std::size_t j, double s) const {
        if (s <= cfg_.t0) return cfg_.history[j](s);
        const std::size_t newest = buf_.newest();
        // Lookups inside the step being computed use the last completed grid point.
        if (s >= buf_.time(newest)) return buf_.state(newest)[j];
        return buf_.interpolate(j, s);
    }

    void rhs(double t, const Vector& xs, Vector& out) const {
        for (std::size_t i = 0; i < sys_.m; ++i) {
            const DelayFunction& d = sys_.leakage[i];
            double xi = xs[i];
            if (!d.is_zero()) xi = lookup(i, t - checked_lag(d, sys_.leakage_bound[i], t));
            out[i] = -sys_.decay[i](t) * xi + sys_.forcing[i](t);
        }
        for (const auto& c : sys_.couplings) {
            double xj = xs[c.j];
            if (!c.delay.is_zero()) xj = lookup(c.j, t - checked_lag(c.delay, c.delay_bound, t));
            out[c.i] += c.coefficient(t) * c.activation(xj);
        }
    }

    const ConcreteSystem& sys_;
    const SimConfig& cfg_;
    HistoryBuffer buf_;
};

class Fnv1a {
public:
    void add(double v) {
        unsigned char bytes[sizeof v];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) byte(b);
    }
    void add(std::size_t v) { add(static_cast<double>(v)); }
    void add(const TimeFunction& f) {
        add(static_cast<std::size_t>(f.kind));
        add(f.offset), add(f.amplitude), add(f.omega), add(f.phase);
    }
    void add(const DelayFunction& f) {
        add(static_cast<std::size_t>(f.kind));
        add(f.offset), add(f.amplitude), add(f.omega), add(f.phase);
    }
    void add(const Activation& a) {
        add(static_cast<std::size_t>(a.kind));
        add(a.k), add(a.lipschitz());
    }
    std::uint64_t value() const { return h_; }

private:
    void byte(unsigned char b) {
        h_ ^= b;
        h_ *= 1099511628211ULL;
    }
    std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace

Trajectory simulate(const ConcreteSystem& system, const SimConfig& cfg) { return Integrator(system, cfg).run(); }

std::uint64_t hash_system(const ConcreteSystem& s) {
    Fnv1a h;
    h.add(s.m);
    for (std::size_t i = 0; i < s.m; ++i) {
        h.add(s.decay[i]);
        h.add(s.leakage[i]);
        h.add(s.leakage_bound[i]);
        h.add(s.forcing[i]);
    }
    for (const auto& c : s.couplings) {
        h.add(c.i), h.add(c.j);
        h.add(c.coefficient);
        h.add(c.activation);
        h.add(c.delay);
        h.add(c.delay_bound);
    }
    return h.value();
}

DecayFit fit_decay(const Trajectory& traj, std::span<const double> reference) {
    const std::size_t n = traj.times.size();
    if (n < 3) throw FitInapplicableError("trajectory too short for a decay fit");
    Vector dev(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (traj.states[k].size() != reference.size())
            throw InputError("reference dimension does not match the trajectory");
        double d = 0.0;
        for (std::size_t i = 0; i < reference.size(); ++i) d = std::max(d, std::abs(traj.states[k][i] - reference[i]));
        dev[k] = d;
    }
    Vector env(n);
    double run = 0.0;
    for (std::size_t k = n; k-- > 0;) env[k] = run = std::max(run, dev[k]);

    const double t0 = traj.times.front(), t_end = traj.times.back();
    const double t_start = t0 + 0.2 * (t_end - t0);
    std::size_t first = 0;
    while (first < n && traj.times[first] < t_start) ++first;
    if (first >= n) throw FitInapplicableError("empty fit window");
    if (!(dev[0] > 0.0)) throw FitInapplicableError("trajectory starts at the reference; envelope is zero");
    if (!(env[first] < dev[0]))
        throw FitInapplicableError("envelope does not decay: deviation in the fit window reaches " +
                                   std::to_string(env[first]) + " against initial " + std::to_string(dev[0]));

    // Samples at the roundoff floor carry no decay information.
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, inf_norm(reference));
    std::size_t last = first;
    while (last + 1 < n && env[last + 1] > floor) ++last;
    if (last <= first || !(env[last] < env[first]))
        throw FitInapplicableError("envelope is flat or below the roundoff floor in the fit window");

    double st = 0, sy = 0, stt = 0, sty = 0;
    const double cnt = static_cast<double>(last - first + 1);
    for (std::size_t k = first; k <= last; ++k) {
        const double t = traj.times[k] - t0, y = std::log(env[k]);
        st += t, sy += y, stt += t * t, sty += t * y;
    }
    const double slope = (cnt * sty - st * sy) / (cnt * stt - st * st);
    const double intercept = (sy - slope * st) / cnt;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / cnt;
    for (std::size_t k = first; k <= last; ++k) {
        const double t = traj.times[k] - t0, y = std::log(env[k]);
        ss_res += (y - intercept - slope * t) * (y - intercept - slope * t);
        ss_tot += (y - mean) * (y - mean);
    }
    DecayFit fit;
    fit.lambda_hat = -slope;
    fit.amplitude = std::exp(intercept);
    fit.t_a = traj.times[first];
    fit.t_b = traj.times[last];
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.points = last - first + 1;
    return fit;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
    const std::size_t m = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t";
    for (std::size_t i = 1; i <= m; ++i) out << ",x_" << i;
    out << '\n';
    char buf[40];
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
        out << buf;
        for (double v : traj.states[k]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace delaystab
