#include "delaystab/report.hpp"

#include "delaystab/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>

namespace delaystab {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto r = m.row(i);
        rows.push_back(Vector(r.begin(), r.end()));
    }
    return rows;
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

// Runs a criterion whose preconditions may not hold for this system.
template <class Fn>
void try_add(std::vector<StabilityVerdict>& out, Fn&& fn) {
    try {
        out.push_back(fn());
    } catch (const PreconditionError&) {
    }
}

bool all_zero(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

json to_json(const Margin& m) { return {{"name", m.name}, {"lhs", m.lhs}, {"rhs", m.rhs}, {"slack", m.slack}}; }

json to_json(const MMatrixReport& r) {
    return {{"is_m_matrix", r.is_m_matrix},
            {"off_diagonal_ok", r.off_diagonal_ok},
            {"leading_minors", r.minors},
            {"witness", optional_json(r.witness_xi)},
            {"screen", r.screen_passed ? json(std::string(to_string(*r.screen_passed))) : json(nullptr)},
            {"margin", r.margin}};
}

json to_json(const StabilityVerdict& v) {
    json margins = json::array();
    for (const auto& m : v.margins) margins.push_back(to_json(m));
    return {{"criterion", v.criterion},
            {"status", std::string(to_string(v.status))},
            {"margins", margins},
            {"test_matrix", v.test_matrix ? matrix_json(*v.test_matrix) : json(nullptr)},
            {"m_matrix", v.report ? to_json(*v.report) : json(nullptr)}};
}

json to_json(const DecayCertificate& c) {
    return {{"lambda0", c.lambda0},
            {"lambda_fail", c.lambda_fail},
            {"bracket_width", c.bracket_width},
            {"boundary_margin", c.boundary_margin},
            {"iterations", c.iterations},
            {"upper_limit", c.upper_limit}};
}

json to_json(const ExistenceReport& r) {
    json rows = json::array();
    for (const auto& c : r.conditions)
        rows.push_back({{"index", c.index}, {"description", c.description}, {"value", c.value}, {"holds", c.holds}});
    return {{"conditions", rows}, {"exists_unique", r.exists_unique}};
}

json to_json(const Equilibrium& e) {
    return {{"x_star", e.x_star},
            {"y_star", e.y_star},
            {"residual", e.residual},
            {"iterations", e.iterations},
            {"contraction_ratio", e.contraction_ratio},
            {"existence_guaranteed", e.existence_guaranteed}};
}

json to_json(const DecayFit& f) {
    return {{"lambda_hat", f.lambda_hat}, {"amplitude", f.amplitude}, {"t_a", f.t_a},
            {"t_b", f.t_b},               {"r_squared", f.r_squared}, {"points", f.points}};
}

json to_json(const SweepRow& row) {
    json j = {{"value", row.value},
              {"status", row.status ? json(std::string(to_string(*row.status))) : json(nullptr)},
              {"criterion", row.criterion},
              {"lambda0", optional_json(row.lambda0)},
              {"lambda_hat", optional_json(row.lambda_hat)},
              {"equilibrium", optional_json(row.equilibrium)}};
    if (!row.error.empty()) j["error"] = row.error;
    return j;
}

std::string input_hash(const SystemDocument& doc) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : to_json(doc).dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<StabilityVerdict> applicable_verdicts(const SystemDocument& doc, double tol) {
    std::vector<StabilityVerdict> out;
    switch (doc.kind) {
        case SystemKind::general: {
            const auto& s = std::get<GeneralSystemSpec>(doc.spec);
            out.push_back(theorem1_verdict(s, tol));
            try_add(out, [&] { return corollary0_verdict(s, tol); });
            if (s.m == 2) try_add(out, [&] { return corollary_m2(s, s.diagonal_delay_free ? 5 : 4, tol); });
            break;
        }
        case SystemKind::linear: {
            const auto& s = std::get<LinearSystemSpec>(doc.spec);
            out.push_back(theorem1_verdict(s, tol));
            if (s.m == 2) try_add(out, [&] { return corollary_m2(s, s.diagonal_delay_free ? 7 : 6, tol); });
            break;
        }
        case SystemKind::bam: {
            const auto& b = std::get<BamSpec>(doc.spec);
            out.push_back(theorem3_verdict(b, tol));
            for (int which = 1; which <= 4; ++which) try_add(out, [&] { return corollary9(b, which, std::nullopt, tol); });
            if (all_zero(b.tau1) && all_zero(b.tau2))
                for (int which = 1; which <= 4; ++which)
                    try_add(out, [&] { return corollary10(b, which, std::nullopt, tol); });
            if (b.n == 1) try_add(out, [&] { return corollary11(b, tol); });
            break;
        }
        case SystemKind::two_neuron: {
            const auto& p = std::get<TwoNeuronParams>(doc.spec);
            const GeneralSystemSpec g = two_neuron_general(p);
            out.push_back(theorem1_verdict(g, tol));
            try_add(out, [&] { return corollary_m2(g, 4, tol); });
            const GopalsamyComparison cmp = gopalsamy_vs_18(p, tol);
            out.push_back(cmp.criterion18);
            out.push_back(cmp.criterion17);
            const BamSpec b = two_neuron_spec(p);
            out.push_back(theorem3_verdict(b, tol));
            try_add(out, [&] { return corollary11(b, tol); });
            break;
        }
    }
    return out;
}

const StabilityVerdict& select_verdict(const std::vector<StabilityVerdict>& verdicts,
                                       const std::optional<std::string>& criterion) {
    if (verdicts.empty()) throw PreconditionError("no applicable criterion");
    if (criterion) {
        for (const auto& v : verdicts)
            if (v.criterion == *criterion) return v;
        std::string names;
        for (const auto& v : verdicts) names += (names.empty() ? "" : ", ") + v.criterion;
        throw InputError("criterion '" + *criterion + "' does not apply to this system (available: " + names + ")");
    }
    for (const auto& v : verdicts)
        if (v.stable()) return v;
    return verdicts.front();
}

GeneralSystemSpec certification_spec(const SystemDocument& doc) {
    switch (doc.kind) {
        case SystemKind::general: return std::get<GeneralSystemSpec>(doc.spec);
        case SystemKind::linear: return linear_to_general(std::get<LinearSystemSpec>(doc.spec));
        case SystemKind::bam: return bam_to_general(std::get<BamSpec>(doc.spec));
        case SystemKind::two_neuron: return two_neuron_general(std::get<TwoNeuronParams>(doc.spec));
    }
    throw InputError("unknown system kind");
}

int exit_code_of(const json& report) {
    return report.at("selected").at("status") == std::string(to_string(Status::stable_certified)) ? 0 : 2;
}

}  // namespace delaystab
