#include "delaystab/sweep.hpp"

#include "delaystab/equilibrium.hpp"
#include "delaystab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace delaystab {

SweepRow analyze_instance(const BamInstance& inst, double value, const SweepOptions& opts) {
    SweepRow row;
    row.value = value;
    try {
        const StabilityVerdict v = theorem3_verdict(inst.spec, opts.tol);
        row.status = v.status;
        row.criterion = v.criterion;
        if (v.stable()) row.lambda0 = certify_decay_rate(bam_to_general(inst.spec), opts.tol).lambda0;

        const Equilibrium eq = solve_equilibrium(inst.spec, inst.dynamics.f, inst.dynamics.g);
        Vector ref = eq.x_star;
        ref.insert(ref.end(), eq.y_star.begin(), eq.y_star.end());
        row.equilibrium = ref;

        if (opts.simulate) {
            SimConfig cfg;
            cfg.t_end = opts.t_end;
            cfg.h = opts.h;
            Vector start = ref;
            for (double& x : start) x += opts.history_offset;
            cfg.history = SimConfig::constant_history(start);
            cfg.record_every = std::max(1, static_cast<int>(std::lround(opts.t_end / opts.h / 2000.0)));
            const Trajectory traj = simulate(make_concrete(inst.spec, inst.dynamics), cfg);
            row.lambda_hat = fit_decay(traj, ref).lambda_hat;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

std::vector<SweepRow> parallel_rows(std::size_t count, unsigned threads, const std::function<SweepRow(std::size_t)>& row) {
    std::vector<SweepRow> rows(count);
    auto one = [&](std::size_t k) {
        try {
            rows[k] = row(k);
        } catch (const std::exception& e) {
            rows[k].error = e.what();
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) one(k);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < count; k = next++) one(k);
            });
    }
    return rows;
}

std::vector<SweepRow> sweep(const BamTemplate& tmpl, std::span<const double> values, const SweepOptions& opts) {
    std::vector<SweepRow> rows = parallel_rows(values.size(), opts.threads, [&](std::size_t k) {
        return analyze_instance(tmpl(values[k]), values[k], opts);
    });
    for (std::size_t k = 0; k < values.size(); ++k) rows[k].value = values[k];
    return rows;
}

Threshold bisect_threshold(const std::function<bool(double)>& holds, double pass, double fail, int iterations) {
    if (!holds(pass)) throw PreconditionError("bisect_threshold: predicate fails at the passing end");
    if (holds(fail)) throw PreconditionError("bisect_threshold: predicate holds at the failing end");
    Threshold t{pass, fail, 0};
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (t.last_pass + t.first_fail);
        if (mid == t.last_pass || mid == t.first_fail) break;
        ++t.iterations;
        (holds(mid) ? t.last_pass : t.first_fail) = mid;
    }
    return t;
}

}  // namespace delaystab
