#include "delaystab/catalog.hpp"

#include <cmath>

namespace delaystab {

double TimeFunction::operator()(double t) const {
    switch (kind) {
        case Kind::constant: return offset;
        case Kind::sinusoid: return offset + amplitude * std::sin(omega * t + phase);
    }
    return offset;
}

double TimeFunction::lower_bound() const {
    return kind == Kind::constant ? offset : offset - std::abs(amplitude);
}

double TimeFunction::upper_bound() const {
    return kind == Kind::constant ? offset : offset + std::abs(amplitude);
}

double DelayFunction::lag(double t) const {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::constant: return offset;
        case Kind::abs_sin: return offset + amplitude * std::abs(std::sin(omega * t + phase));
        case Kind::sin_squared: {
            const double s = std::sin(omega * t + phase);
            return amplitude * s * s;
        }
    }
    return 0.0;
}

double DelayFunction::max_lag() const {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::constant: return offset;
        case Kind::abs_sin: return offset + std::max(amplitude, 0.0);
        case Kind::sin_squared: return std::max(amplitude, 0.0);
    }
    return 0.0;
}

double DelayFunction::min_lag() const {
    switch (kind) {
        case Kind::none: return 0.0;
        case Kind::constant: return offset;
        case Kind::abs_sin: return offset + std::min(amplitude, 0.0);
        case Kind::sin_squared: return std::min(amplitude, 0.0);
    }
    return 0.0;
}

double Activation::operator()(double u) const {
    switch (kind) {
        case Kind::linear: return k * u;
        case Kind::tanh_scaled: return k * std::tanh(u);
        case Kind::sin_scaled: return k * std::sin(u);
        case Kind::logistic_centered: return k * (1.0 / (1.0 + std::exp(-4.0 * u)) - 0.5);
        case Kind::custom: return fn(u);
    }
    return 0.0;
}

double Activation::lipschitz() const {
    return kind == Kind::custom ? custom_lipschitz : std::abs(k);
}

std::string_view to_string(TimeFunction::Kind k) {
    switch (k) {
        case TimeFunction::Kind::constant: return "constant";
        case TimeFunction::Kind::sinusoid: return "sinusoid";
    }
    return "constant";
}

std::string_view to_string(DelayFunction::Kind k) {
    switch (k) {
        case DelayFunction::Kind::none: return "none";
        case DelayFunction::Kind::constant: return "constant";
        case DelayFunction::Kind::abs_sin: return "abs_sin";
        case DelayFunction::Kind::sin_squared: return "sin_squared";
    }
    return "none";
}

std::string_view to_string(Activation::Kind k) {
    switch (k) {
        case Activation::Kind::linear: return "linear";
        case Activation::Kind::tanh_scaled: return "tanh_scaled";
        case Activation::Kind::sin_scaled: return "sin_scaled";
        case Activation::Kind::logistic_centered: return "logistic_centered";
        case Activation::Kind::custom: return "custom";
    }
    return "linear";
}

}  // namespace delaystab
