#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace delaystab {

/// Bounded time-dependent coefficient, e.g. a_i(t), r_i(t), p_i(t).
struct TimeFunction {
    enum class Kind { constant, sinusoid };

    Kind kind = Kind::constant;
    double offset = 0.0;  ///< constant value, or the mean of the sinusoid
    double amplitude = 0.0;
    double omega = 1.0;
    double phase = 0.0;

    static TimeFunction constant(double value) { return {Kind::constant, value, 0.0, 1.0, 0.0}; }
    /// offset + amplitude·sin(omega·t + phase)
    static TimeFunction sinusoid(double offset, double amplitude, double omega = 1.0, double phase = 0.0) {
        return {Kind::sinusoid, offset, amplitude, omega, phase};
    }

    TimeFunction scaled(double factor) const {
        return {kind, offset * factor, amplitude * factor, omega, phase};
    }

    double operator()(double t) const;
    double lower_bound() const;
    double upper_bound() const;

    bool operator==(const TimeFunction&) const = default;
};

/// Time-varying lag t − h(t) ≥ 0 of a delayed argument.
struct DelayFunction {
    enum class Kind { none, constant, abs_sin, sin_squared };

    Kind kind = Kind::none;
    double offset = 0.0;     ///< constant lag, or the base lag of abs_sin
    double amplitude = 0.0;
    double omega = 1.0;
    double phase = 0.0;

    /// Undelayed argument, h(t) ≡ t.
    static DelayFunction none() { return {}; }
    static DelayFunction constant(double lag) { return {Kind::constant, lag, 0.0, 1.0, 0.0}; }
    /// offset + amplitude·|sin(omega·t + phase)|
    static DelayFunction abs_sin(double offset, double amplitude, double omega = 1.0, double phase = 0.0) {
        return {Kind::abs_sin, offset, amplitude, omega, phase};
    }
    /// amplitude·sin²(omega·t + phase)
    static DelayFunction sin_squared(double amplitude, double omega = 1.0, double phase = 0.0) {
        return {Kind::sin_squared, 0.0, amplitude, omega, phase};
    }

    /// Lag at time t.
    double lag(double t) const;
    double max_lag() const;
    double min_lag() const;
    bool is_zero() const { return kind == Kind::none || (kind == Kind::constant && offset == 0.0); }

    bool operator==(const DelayFunction&) const = default;
};

/// Catalog nonlinearity. Every catalog member vanishes at zero and is Lipschitz with constant |k|.
struct Activation {
    enum class Kind { linear, tanh_scaled, sin_scaled, logistic_centered, custom };

    Kind kind = Kind::linear;
    double k = 1.0;
    /// Used only when kind == custom.
    std::function<double(double)> fn;
    double custom_lipschitz = 0.0;

    static Activation linear(double k) { return {Kind::linear, k, {}, 0.0}; }
    static Activation tanh_scaled(double k) { return {Kind::tanh_scaled, k, {}, 0.0}; }
    static Activation sin_scaled(double k) { return {Kind::sin_scaled, k, {}, 0.0}; }
    /// k·(1/(1+e^{−4u}) − 1/2)
    static Activation logistic_centered(double k) { return {Kind::logistic_centered, k, {}, 0.0}; }
    static Activation custom(std::function<double(double)> f, double lipschitz) {
        return {Kind::custom, 1.0, std::move(f), lipschitz};
    }

    double operator()(double u) const;
    double lipschitz() const;

    bool operator==(const Activation& o) const {
        return kind == o.kind && k == o.k && kind != Kind::custom;
    }
};

std::string_view to_string(TimeFunction::Kind k);
std::string_view to_string(DelayFunction::Kind k);
std::string_view to_string(Activation::Kind k);

}  // namespace delaystab
