#pragma once

#include "delaystab/simulator.hpp"
#include "delaystab/system_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace delaystab {

enum class SystemKind { general, linear, bam, two_neuron };

std::string_view to_string(SystemKind k);

struct TwoNeuronDynamics {
    Activation f1;
    Activation f2;

    bool operator==(const TwoNeuronDynamics&) const = default;
};

/// Optional `simulation` block of a system file.
struct SimulationSettings {
    /// One history function per state component; constant 1 when absent.
    std::vector<TimeFunction> history;
    std::optional<double> t_end;
    std::optional<double> step;
    std::optional<int> record_every;

    bool operator==(const SimulationSettings&) const = default;
};

using AnySpec = std::variant<GeneralSystemSpec, LinearSystemSpec, BamSpec, TwoNeuronParams>;
using AnyDynamics = std::variant<GeneralDynamics, LinearDynamics, BamDynamics, TwoNeuronDynamics>;

/// A parsed, validated system file. Expressions are already evaluated; `parameters` keeps
/// the named values they were evaluated with.
struct SystemDocument {
    SystemKind kind = SystemKind::general;
    std::map<std::string, double> parameters;
    AnySpec spec;
    /// Always populated: defaults fill in whatever the file leaves out.
    AnyDynamics dynamics;
    SimulationSettings simulation;

    /// Number of state components (m, or 2n for the network kinds).
    std::size_t dimension() const;

    bool operator==(const SystemDocument&) const = default;
};

/// Parses and validates a system file. Every problem is reported as
/// "<origin>:<line>: <field path>: <message>" inside an InputError.
SystemDocument parse_document(std::string_view text, std::string_view origin = "<input>");
SystemDocument load_document(const std::filesystem::path& file);

/// Canonical form: every number written out, every function as an explicit object.
nlohmann::json to_json(const SystemDocument& doc);
std::string serialize(const SystemDocument& doc);

/// Sets the number at `path` (JSON pointer "/parameters/mu" or dotted "parameters.mu")
/// in a raw system file and returns the new text.
std::string patch_number(std::string_view text, std::string_view path, double value);

/// Simulation-ready system for any kind.
ConcreteSystem concrete_system(const SystemDocument& doc);

/// The network kinds as a BAM network with its dynamics.
BamSpec as_bam(const SystemDocument& doc);
BamDynamics as_bam_dynamics(const SystemDocument& doc);

/// The state every trajectory is measured against: the solved equilibrium for network
/// kinds, the origin otherwise.
Vector reference_state(const SystemDocument& doc);

/// Simulation options of the document with command-line overrides applied.
SimConfig simulation_config(const SystemDocument& doc, std::optional<double> t_end, std::optional<double> step);

}  // namespace delaystab
