#pragma once

#include "delaystab/simulator.hpp"
#include "delaystab/stability.hpp"
#include "delaystab/system_model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace delaystab {

/// One fully specified BAM network produced by a sweep template.
struct BamInstance {
    BamSpec spec;
    BamDynamics dynamics;
};

using BamTemplate = std::function<BamInstance(double)>;

struct SweepOptions {
    bool simulate = true;
    double t_end = 1.0;
    double h = 1e-4;
    /// Initial deviation from the equilibrium, applied to every component.
    double history_offset = 1.0;
    /// Rows evaluated concurrently; 0 picks the hardware concurrency.
    unsigned threads = 0;
    double tol = kDefaultTol;
};

struct SweepRow {
    double value = 0.0;
    std::optional<Status> status;
    std::string criterion;
    std::optional<double> lambda0;
    std::optional<double> lambda_hat;
    std::optional<Vector> equilibrium;
    std::string error;
};

/// Analyze (and optionally simulate) one instance per value. Rows are independent,
/// returned in input order; a failing row records its error and the sweep continues.
std::vector<SweepRow> sweep(const BamTemplate& tmpl, std::span<const double> values, const SweepOptions& opts = {});

/// Evaluates row(k) for k in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Results keep index order; an exception becomes that row's error.
std::vector<SweepRow> parallel_rows(std::size_t count, unsigned threads, const std::function<SweepRow(std::size_t)>& row);

SweepRow analyze_instance(const BamInstance& inst, double value, const SweepOptions& opts);

/// Bisection for the switch point of a predicate that holds at `pass` and fails at `fail`.
/// Returns the final bracket {last passing value, first failing value}.
struct Threshold {
    double last_pass = 0.0;
    double first_fail = 0.0;
    int iterations = 0;
};

Threshold bisect_threshold(const std::function<bool(double)>& holds, double pass, double fail, int iterations = 60);

}  // namespace delaystab
