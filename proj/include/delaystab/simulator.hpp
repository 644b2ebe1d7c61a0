#pragma once

#include "delaystab/catalog.hpp"
#include "delaystab/linalg.hpp"
#include "delaystab/system_model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace delaystab {

struct SimConfig {
    double t0 = 0.0;
    double t_end = 1.0;
    double h = 0.01;
    int record_every = 1;
    /// φ_i(t) for t ≤ t0. A constant TimeFunction is a constant history.
    std::vector<TimeFunction> history;

    static std::vector<TimeFunction> constant_history(std::span<const double> values);
};

/// Ring buffer of the most recent fine-grid points (state and derivative).
class HistoryBuffer {
public:
    HistoryBuffer() = default;
    HistoryBuffer(std::size_t dim, std::size_t capacity, double t0, double h);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t capacity() const noexcept { return capacity_; }
    /// Index of the newest grid point; valid when !empty().
    std::size_t newest() const noexcept { return count_ - 1; }
    std::size_t oldest() const noexcept { return count_ > capacity_ ? count_ - capacity_ : 0; }
    bool empty() const noexcept { return count_ == 0; }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * h_; }

    void push(std::span<const double> x);
    void set_derivative(std::size_t k, std::span<const double> dx);

    std::span<const double> state(std::size_t k) const;
    bool has_derivative(std::size_t k) const;
    std::span<const double> derivative(std::size_t k) const;

    /// Value of component j at time s with t_oldest ≤ s ≤ t_newest: cubic Hermite between
    /// grid points, linear on the newest segment until its right derivative is known.
    double interpolate(std::size_t j, double s) const;

private:
    std::size_t slot(std::size_t k) const { return k % capacity_; }

    std::size_t dim_ = 0;
    std::size_t capacity_ = 0;
    std::size_t count_ = 0;
    double t0_ = 0.0;
    double h_ = 0.0;
    std::vector<double> x_;
    std::vector<double> dx_;
    std::vector<std::size_t> dx_index_;
};

struct Trajectory {
    Vector times;
    std::vector<Vector> states;
    /// Fine-grid window covering [t_end − max delay, t_end].
    HistoryBuffer buffer;
    std::uint64_t spec_hash = 0;
    SimConfig config;
    std::size_t steps = 0;
};

/// Fixed-step classical RK4 with delayed arguments taken from the history buffer.
/// Throws SimulationError on delay-bound violations, non-finite states or an invalid step.
Trajectory simulate(const ConcreteSystem& system, const SimConfig& cfg);

/// Deterministic hash of the numeric content of a concrete system.
std::uint64_t hash_system(const ConcreteSystem& system);

struct DecayFit {
    double lambda_hat = 0.0;
    double amplitude = 0.0;
    double t_a = 0.0;
    double t_b = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through the log of the suffix-maximum envelope of ‖X(t) − reference‖∞
/// over the last 80% of the run. Throws FitInapplicableError when the envelope does not decay.
DecayFit fit_decay(const Trajectory& traj, std::span<const double> reference);

/// CSV with header t,x_1,...,x_m, 17 significant digits, LF line endings.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace delaystab
