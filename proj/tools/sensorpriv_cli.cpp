#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sensorpriv/sweep.hpp"

namespace {

struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<long> samples;
    std::optional<std::string> unit;
    std::optional<int> workers;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "override the spec's RNG seed");
    cmd->add_option("--samples", ov.samples, "override the spec's Monte Carlo sample count");
    cmd->add_option("--unit", ov.unit, "override the reporting unit (nats|bits)");
    cmd->add_option("--workers", ov.workers, "Monte Carlo worker threads (result-invariant)");
}

sensorpriv::ExperimentSpec load_with_overrides(const std::string& path, const Overrides& ov) {
    sensorpriv::ExperimentSpec spec = sensorpriv::load_spec(path);
    if (ov.seed) spec.seed = *ov.seed;
    if (ov.samples) spec.mc_samples = *ov.samples;
    if (ov.unit) {
        if (*ov.unit == "nats")
            spec.unit = sensorpriv::EntropyUnit::nats;
        else if (*ov.unit == "bits")
            spec.unit = sensorpriv::EntropyUnit::bits;
        else
            throw sensorpriv::SpecValidationError("--unit must be nats or bits");
    }
    if (ov.workers) spec.workers = *ov.workers;
    spec.validate();
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy analysis of cloud-based multi-sensor estimation"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string summary_path;
    Overrides ov;

    CLI::App* run = app.add_subcommand("run", "run the sweep and write the CSV");
    run->add_option("spec", spec_path, "experiment spec (JSON)")->required();
    add_override_flags(run, ov);

    CLI::App* validate = app.add_subcommand("validate", "check a spec without running it");
    validate->add_option("spec", spec_path, "experiment spec (JSON)")->required();

    CLI::App* report = app.add_subcommand("report", "run the sweep and write a verdict summary");
    report->add_option("spec", spec_path, "experiment spec (JSON)")->required();
    report->add_option("--summary", summary_path, "where to write the summary JSON")->required();
    add_override_flags(report, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (validate->parsed()) {
            const sensorpriv::ExperimentSpec spec = load_with_overrides(spec_path, {});
            std::cout << "spec OK: " << spec.m_values.size() << " M value(s), "
                      << spec.mc_samples << " MC samples, seed " << spec.seed << "\n";
            return 0;
        }
        const sensorpriv::ExperimentSpec spec = load_with_overrides(spec_path, ov);
        const sensorpriv::SweepResult result = sensorpriv::run_sweep(spec);
        std::cout << "wrote " << spec.output_path << " (" << result.rows.size() << " rows)\n";
        if (report->parsed()) {
            const auto summary = sensorpriv::emit_summary(spec, result);
            std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw sensorpriv::SpecValidationError("cannot open summary path '" + summary_path +
                                                      "'");
            out << summary.dump(2) << "\n";
            std::cout << "wrote " << summary_path << "\n";
        }
        return 0;
    } catch (const sensorpriv::SpecParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const sensorpriv::SpecValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return 4;
    }
}
