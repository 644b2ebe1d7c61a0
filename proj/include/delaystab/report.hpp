#pragma once

#include "delaystab/equilibrium.hpp"
#include "delaystab/simulator.hpp"
#include "delaystab/spec_io.hpp"
#include "delaystab/stability.hpp"
#include "delaystab/sweep.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace delaystab {

inline constexpr const char* kToolName = "delaystab";
inline constexpr const char* kToolVersion = "1.0.0";

nlohmann::json to_json(const Margin& m);
nlohmann::json to_json(const MMatrixReport& r);
nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const DecayCertificate& c);
nlohmann::json to_json(const ExistenceReport& r);
nlohmann::json to_json(const Equilibrium& e);
nlohmann::json to_json(const DecayFit& f);
nlohmann::json to_json(const SweepRow& row);

/// Hex FNV-1a of the canonical input echo.
std::string input_hash(const SystemDocument& doc);

/// Every criterion that applies to the document, sharpest first. Criteria whose
/// preconditions fail are omitted.
std::vector<StabilityVerdict> applicable_verdicts(const SystemDocument& doc, double tol);

/// Verdict that decides the exit status: the requested criterion, or else the first
/// stable verdict, or else the first verdict.
const StabilityVerdict& select_verdict(const std::vector<StabilityVerdict>& verdicts,
                                       const std::optional<std::string>& criterion);

/// The document's system in general form, for decay-rate certification.
GeneralSystemSpec certification_spec(const SystemDocument& doc);

/// Exit status implied by a report: 0 when report["selected"]["status"] is stable, else 2.
int exit_code_of(const nlohmann::json& report);

}  // namespace delaystab
