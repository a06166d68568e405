#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sensorpriv/model.hpp"
#include "sensorpriv/privacy.hpp"
#include "sensorpriv/sim.hpp"

namespace sensorpriv {

/// Malformed JSON (CLI exit code 2).
class SpecParseError : public std::runtime_error {
public:
    explicit SpecParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Well-formed JSON violating the spec schema or a model invariant
/// (CLI exit code 3).
class SpecValidationError : public std::runtime_error {
public:
    explicit SpecValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class EntropyUnit { nats, bits };

/// One sweep: a system template, the sensor counts to evaluate, and the
/// Monte Carlo budget. For homogeneous noise the per-M sigma list is
/// materialized from the single template sigma.
struct ExperimentSpec {
    DiscreteDist common;
    DiscreteDist local;
    std::optional<double> sensor_sigma;  // homogeneous template
    std::vector<double> sensor_sigmas;   // explicit per-sensor list (single-M sweeps)
    double cloud_sigma = 1.0;
    std::vector<long> m_values;
    long mc_samples = 0;
    uint64_t seed = 0;
    bool scheme_local = true;
    bool scheme_global = true;
    EntropyUnit unit = EntropyUnit::nats;
    std::string output_path;
    int workers = 1;  // CLI-level knob, not part of the file schema

    void validate() const;
    SystemConfig materialize(long M) const;
};

ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec(const nlohmann::json& doc);

struct SweepRow {
    PrivacyReport report;  // exact quantities, always in nats
    bool has_local = false;
    bool has_global = false;
    bool has_lemma3 = false;  // false when the estimate channel is degenerate
    double crossover_p = 0.0;
    double crossover_q = 0.0;
    McEstimate local_mc;
    McEstimate global_mc;
    McEstimate error_local_mc;
    McEstimate error_global_mc;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv;
};

/// Evaluates every M in spec order and writes the CSV to spec.output_path.
/// The CSV is byte-identical across runs and worker counts for a fixed spec.
SweepResult run_sweep(const ExperimentSpec& spec);

/// Renders the CSV without touching the filesystem.
std::string render_csv(const ExperimentSpec& spec, const std::vector<SweepRow>& rows);

/// Machine-readable pass/fail verdicts for the sweep's invariants.
nlohmann::ordered_json emit_summary(const ExperimentSpec& spec, const SweepResult& result);

/// %.12g-style rendering via std::to_chars: locale-free and reproducible.
std::string format_double(double v);

}  // namespace sensorpriv
