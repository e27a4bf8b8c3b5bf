#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chemostokes/expression.hpp"
#include "chemostokes/stepper.hpp"

namespace chemostokes {

struct OutputConfig {
    long record_every = 50;
    long snapshot_every = 0;
    std::vector<double> snapshot_times;
    std::string dir = "out";
};

/// Source of a sampled input field: an analytic expression or a
/// CHEMOSTOKES-FIELD file.
struct FieldInput {
    std::string expression;             // empty when file-backed
    std::string file;                   // empty when expression-backed
    bool from_file() const { return !file.empty(); }
};

struct RunConfig {
    GridSpec grid;
    double kappa = 0.5;
    double mu = 1.0;
    FieldInput phi{"-y", ""};
    FieldInput c_star{"1 + 0.5*x*(1-x)", ""};
    FieldInput n0{"max(0.1, 1 + 0.5*cos(pi*x)*cos(pi*y))", ""};
    std::optional<FieldInput> c0;       // defaults to c_star
    FieldInput u0x{"0", ""};
    FieldInput u0y{"0", ""};
    std::string u0_file;                // velocity snapshot alternative to u0x/u0y
    std::vector<double> epsilons = {0.1};
    SchemeConfig scheme;
    OutputConfig output;
    std::string base_dir = ".";         // anchor for file-backed inputs
    bool validated = true;              // false once an override bypassed validation

    double epsilon() const { return epsilons.front(); }
};

/// The documented desk-scale scenario.
RunConfig default_config();

/// Parses and validates a JSON config. Unknown keys are rejected; validation
/// errors cite the violated assumption.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);

/// Applies a "dotted.key=value" override to an already-loaded config. By
/// design this skips the assumption validation (fault-injection hook).
void apply_override(RunConfig& cfg, const std::string& key_eq_value);

/// Canonical echo of the materialized config (sorted keys, stable float
/// formatting); byte-stable across runs.
std::string dump_config(const RunConfig& cfg);

/// Materialized simulation inputs built from a config.
struct MaterializedInputs {
    PhysicalParams physics;
    InitialData initial;
};

/// Samples every field input on the grid. When validate is set, runs
/// validate_inputs (projects u0, checks every paper assumption).
MaterializedInputs materialize(const RunConfig& cfg, const GridSpec& g, bool validate = true);

}  // namespace chemostokes
