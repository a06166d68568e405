#include "sensorpriv/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "sensorpriv/errors.hpp"

namespace sensorpriv {

namespace {

using nlohmann::json;

const json& require_key(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key))
        throw SpecValidationError("missing key '" + (path.empty() ? key : path + "." + key) + "'");
    return obj.at(key);
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw SpecValidationError("'" + path + "' must be a number");
    return j.get<double>();
}

long as_long(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SpecValidationError("'" + path + "' must be an integer");
    return j.get<long>();
}

std::vector<double> as_double_array(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw SpecValidationError("'" + path + "' must be a non-empty array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(as_double(v, path + "[]"));
    return out;
}

DiscreteDist parse_dist(const json& j, const std::string& path) {
    const auto values = as_double_array(require_key(j, "values", path), path + ".values");
    const auto probs = as_double_array(require_key(j, "probs", path), path + ".probs");
    try {
        return DiscreteDist(values, probs);
    } catch (const InvalidParameterError& e) {
        throw SpecValidationError("'" + path + "': " + e.what());
    }
}

double nats_to_unit(double v, EntropyUnit unit) {
    return unit == EntropyUnit::bits ? v / std::numbers::ln2 : v;
}

void append_cell(std::string& out, const std::optional<double>& v) {
    out.push_back(',');
    if (v) out += format_double(*v);
}

struct RowCells {
    long M = 0;
    double h_x = 0.0;
    std::optional<double> cells[16];
};

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

void ExperimentSpec::validate() const {
    common.validate();
    local.validate();
    if (sensor_sigma.has_value() == !sensor_sigmas.empty())
        throw SpecValidationError("noise: exactly one of 'sensor_sigma' and 'sensor_sigmas' required");
    if (sensor_sigma && !(*sensor_sigma > 0.0))
        throw SpecValidationError("noise.sensor_sigma: must be positive");
    for (double s : sensor_sigmas)
        if (!(s > 0.0)) throw SpecValidationError("noise.sensor_sigmas: entries must be positive");
    if (!(cloud_sigma > 0.0)) throw SpecValidationError("noise.cloud_sigma: must be positive");
    if (m_values.empty()) throw SpecValidationError("m_values: must be non-empty");
    for (size_t i = 0; i < m_values.size(); ++i) {
        if (m_values[i] < 1) throw SpecValidationError("m_values: entries must be >= 1");
        if (i > 0 && m_values[i] <= m_values[i - 1])
            throw SpecValidationError("m_values: entries must be strictly increasing");
    }
    if (!sensor_sigmas.empty())
        for (long m : m_values)
            if (m != static_cast<long>(sensor_sigmas.size()))
                throw SpecValidationError(
                    "noise.sensor_sigmas: explicit list of length " +
                    std::to_string(sensor_sigmas.size()) + " cannot serve a sweep over M=" +
                    std::to_string(m));
    if ((scheme_local || scheme_global) && mc_samples < 1000)
        throw SpecValidationError("mc_samples: must be >= 1000 when any scheme is requested");
    if (output_path.empty()) throw SpecValidationError("output_path: must be non-empty");
    if (workers < 1) throw SpecValidationError("workers: must be >= 1");
}

SystemConfig ExperimentSpec::materialize(long M) const {
    SystemConfig cfg;
    cfg.num_sensors = static_cast<int>(M);
    cfg.common = common;
    cfg.local = local;
    if (sensor_sigma) {
        cfg.noise.sensor_sigmas.assign(M, *sensor_sigma);
        cfg.homogeneous_noise = true;
    } else {
        cfg.noise.sensor_sigmas = sensor_sigmas;
        cfg.homogeneous_noise = false;
    }
    cfg.noise.cloud_sigma = cloud_sigma;
    cfg.validate();
    return cfg;
}

ExperimentSpec parse_spec(const json& doc) {
    if (!doc.is_object()) throw SpecValidationError("top-level JSON object expected");
    ExperimentSpec spec;
    spec.common = parse_dist(require_key(doc, "common", ""), "common");
    spec.local = parse_dist(require_key(doc, "local", ""), "local");

    const json& noise = require_key(doc, "noise", "");
    if (noise.contains("sensor_sigma"))
        spec.sensor_sigma = as_double(noise.at("sensor_sigma"), "noise.sensor_sigma");
    if (noise.contains("sensor_sigmas"))
        spec.sensor_sigmas = as_double_array(noise.at("sensor_sigmas"), "noise.sensor_sigmas");
    spec.cloud_sigma = as_double(require_key(noise, "cloud_sigma", "noise"), "noise.cloud_sigma");

    const json& mv = require_key(doc, "m_values", "");
    if (!mv.is_array() || mv.empty())
        throw SpecValidationError("'m_values' must be a non-empty array");
    for (const auto& v : mv) spec.m_values.push_back(as_long(v, "m_values[]"));

    spec.mc_samples = as_long(require_key(doc, "mc_samples", ""), "mc_samples");
    const json& seed = require_key(doc, "seed", "");
    if (!seed.is_number_integer())
        throw SpecValidationError("'seed' must be a non-negative integer");
    if (!seed.is_number_unsigned() && seed.get<long long>() < 0)
        throw SpecValidationError("'seed' must be a non-negative integer");
    spec.seed = seed.get<uint64_t>();

    if (doc.contains("schemes")) {
        const json& schemes = doc.at("schemes");
        if (!schemes.is_array()) throw SpecValidationError("'schemes' must be an array");
        spec.scheme_local = spec.scheme_global = false;
        for (const auto& s : schemes) {
            if (!s.is_string()) throw SpecValidationError("'schemes' entries must be strings");
            const std::string name = s.get<std::string>();
            if (name == "local")
                spec.scheme_local = true;
            else if (name == "global")
                spec.scheme_global = true;
            else
                throw SpecValidationError("'schemes': unknown scheme '" + name + "'");
        }
    }
    if (doc.contains("unit")) {
        const std::string unit = doc.at("unit").is_string() ? doc.at("unit").get<std::string>() : "";
        if (unit == "nats")
            spec.unit = EntropyUnit::nats;
        else if (unit == "bits")
            spec.unit = EntropyUnit::bits;
        else
            throw SpecValidationError("'unit' must be \"nats\" or \"bits\"");
    }
    const json& out = require_key(doc, "output_path", "");
    if (!out.is_string()) throw SpecValidationError("'output_path' must be a string");
    spec.output_path = out.get<std::string>();

    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecParseError("cannot open spec file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecParseError("spec '" + path + "': " + e.what());
    }
    return parse_spec(doc);
}

namespace {

RowCells row_cells(const ExperimentSpec& spec, const SweepRow& row) {
    const EntropyUnit u = spec.unit;
    RowCells c;
    c.M = row.report.M;
    c.h_x = nats_to_unit(row.report.h_x, u);
    if (row.has_local) {
        c.cells[0] = nats_to_unit(row.report.local_exact, u);
        c.cells[1] = nats_to_unit(row.local_mc.mean, u);
        c.cells[2] = nats_to_unit(row.local_mc.std_error, u);
        c.cells[3] = nats_to_unit(row.report.lemma1_bound, u);
        c.cells[4] = nats_to_unit(row.report.theorem1_gap, u);
        if (row.has_lemma3) c.cells[11] = row.report.lemma3_error_bound_clamped;
        c.cells[12] = row.error_local_mc.mean;
        c.cells[14] = row.report.fano_bound_local;
    }
    if (row.has_global) {
        c.cells[5] = nats_to_unit(row.report.global_privacy, u);
        c.cells[6] = nats_to_unit(row.global_mc.mean, u);
        c.cells[7] = nats_to_unit(row.global_mc.std_error, u);
        c.cells[8] = nats_to_unit(row.report.lemma4_bound, u);
        c.cells[9] = nats_to_unit(row.report.lemma4_tight_bound, u);
        c.cells[10] = nats_to_unit(row.report.theorem2_scaled_gap, u);
        c.cells[13] = row.error_global_mc.mean;
        c.cells[15] = row.report.fano_bound_global;
    }
    return c;
}

}  // namespace

std::string render_csv(const ExperimentSpec& spec, const std::vector<SweepRow>& rows) {
    std::string out =
        "M,h_x,local_exact,local_mc_mean,local_mc_stderr,lemma1_bound,theorem1_gap,"
        "global_privacy,global_mc_mean,global_mc_stderr,lemma4_bound,lemma4_tight_bound,"
        "theorem2_scaled_gap,lemma3_error_bound_clamped,error_prob_local_mc,"
        "error_prob_global_mc,fano_bound_local,fano_bound_global\n";
    for (const SweepRow& row : rows) {
        const RowCells c = row_cells(spec, row);
        out += std::to_string(c.M);
        out.push_back(',');
        out += format_double(c.h_x);
        for (const auto& cell : c.cells) append_cell(out, cell);
        out.push_back('\n');
    }
    return out;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    SweepResult result;
    result.rows.reserve(spec.m_values.size());

    for (long M : spec.m_values) {
        try {
            const SystemConfig config = spec.materialize(M);
            SweepRow row;
            row.report.M = M;
            row.report.h_x = entropy(config.local).nats;
            const int m_alphabet = static_cast<int>(config.local.size());

            if (spec.scheme_local) {
                row.has_local = true;
                const ChannelTable table = channel_table(config, 0);
                row.crossover_p = table.crossover_p;
                row.crossover_q = table.crossover_q;
                row.report.mi_aux = mutual_info_x_y_yhat(config, table);
                row.report.lemma1_bound = row.report.h_x - row.report.mi_aux;
                row.report.local_exact = local_privacy_exact(config, table, M);
                row.report.theorem1_gap = row.report.local_exact - row.report.lemma1_bound;
                if (row.report.theorem1_gap < -1e-9)
                    throw NumericalAccuracyError("theorem1_gap: negative gap " +
                                                 std::to_string(row.report.theorem1_gap));
                try {
                    const Lemma3Bound b = lemma3_error_bound(M, table, config.common);
                    row.report.lemma3_error_bound = b.raw;
                    row.report.lemma3_error_bound_clamped = b.clamped;
                    row.has_lemma3 = true;
                } catch (const DegenerateChannelError&) {
                    row.has_lemma3 = false;
                } catch (const InvalidParameterError&) {
                    row.has_lemma3 = false;  // p or q at the boundary
                }
                if (m_alphabet >= 2)
                    row.report.fano_bound_local = fano_lower_bound(
                        row.report.local_exact / std::numbers::ln2, m_alphabet);
                row.local_mc = mc_conditional_entropy_local(config, table, M, spec.mc_samples,
                                                            spec.seed, spec.workers);
                row.error_local_mc = mc_error_prob(config, table, M, Scheme::local,
                                                   spec.mc_samples, spec.seed, spec.workers);
            }

            if (spec.scheme_global) {
                row.has_global = true;
                row.report.global_mi = global_mi(config, M, 0);
                const double h = row.report.h_x;
                row.report.global_privacy = std::clamp(h - row.report.global_mi, 0.0, h);
                const Lemma4Bound lb = lemma4_lower_bound(config, M);
                row.report.lemma4_bound = lb.final_nats;
                row.report.lemma4_tight_bound = lb.tight_nats;
                row.report.theorem2_scaled_gap = M * row.report.global_mi;
                if (m_alphabet >= 2)
                    row.report.fano_bound_global = fano_lower_bound(
                        row.report.global_privacy / std::numbers::ln2, m_alphabet);
                row.global_mc = mc_conditional_entropy_global(config, M, 0, spec.mc_samples,
                                                              spec.seed, spec.workers);
                row.error_global_mc = mc_error_prob(config, ChannelTable{}, M, Scheme::global,
                                                    spec.mc_samples, spec.seed, spec.workers);
            }

            result.rows.push_back(std::move(row));
        } catch (const UnsupportedConfigError& e) {
            throw UnsupportedConfigError("M=" + std::to_string(M) + ": " + e.what());
        } catch (const NumericalAccuracyError& e) {
            throw NumericalAccuracyError("M=" + std::to_string(M) + ": " + e.what());
        }
    }

    result.csv = render_csv(spec, result.rows);
    std::ofstream out(spec.output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw SpecValidationError("cannot open output_path '" + spec.output_path + "'");
    out << result.csv;
    return result;
}

namespace {

nlohmann::ordered_json verdict(const std::string& name, const std::string& status,
                               const std::string& detail, std::optional<double> slack = {}) {
    nlohmann::ordered_json v;
    v["name"] = name;
    v["status"] = status;
    v["detail"] = detail;
    if (slack) v["slack"] = *slack;
    return v;
}

}  // namespace

nlohmann::ordered_json emit_summary(const ExperimentSpec& spec, const SweepResult& result) {
    nlohmann::ordered_json doc;
    doc["unit"] = "nats";
    doc["rows"] = result.rows.size();
    nlohmann::ordered_json criteria = nlohmann::ordered_json::array();
    const auto& rows = result.rows;

    const bool any_local = std::any_of(rows.begin(), rows.end(),
                                       [](const SweepRow& r) { return r.has_local; });
    const bool any_global = std::any_of(rows.begin(), rows.end(),
                                        [](const SweepRow& r) { return r.has_global; });

    if (any_local) {
        double slack = std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            if (r.has_local)
                slack = std::min({slack, r.report.local_exact - r.report.lemma1_bound,
                                  r.report.h_x - r.report.local_exact});
        criteria.push_back(verdict("local_sandwich", slack >= -1e-9 ? "pass" : "fail",
                                   "lemma1_bound <= local_exact <= h_x", slack));

        double min_drop = std::numeric_limits<double>::infinity();
        const SweepRow* prev = nullptr;
        for (const auto& r : rows) {
            if (!r.has_local) continue;
            if (prev) min_drop = std::min(min_drop, prev->report.local_exact - r.report.local_exact);
            prev = &r;
        }
        if (std::isinf(min_drop))
            criteria.push_back(verdict("local_monotone", "skipped", "single M value"));
        else
            criteria.push_back(verdict("local_monotone", min_drop >= -1e-9 ? "pass" : "fail",
                                       "local_exact non-increasing in M", min_drop));

        const SweepRow* first = nullptr;
        const SweepRow* last = nullptr;
        for (const auto& r : rows)
            if (r.has_local) {
                if (!first) first = &r;
                last = &r;
            }
        const bool degenerate = std::abs(first->crossover_p + first->crossover_q - 1.0) < 1e-9;
        if (degenerate) {
            criteria.push_back(verdict("theorem1_gap_monotone", "skipped", "p = 1-q"));
            criteria.push_back(verdict("theorem1_gap_convergence", "skipped", "p = 1-q"));
        } else {
            double min_drop2 = std::numeric_limits<double>::infinity();
            const SweepRow* prev2 = nullptr;
            for (const auto& r : rows) {
                if (!r.has_local) continue;
                if (prev2)
                    min_drop2 =
                        std::min(min_drop2, prev2->report.theorem1_gap - r.report.theorem1_gap);
                prev2 = &r;
            }
            if (std::isinf(min_drop2))
                criteria.push_back(verdict("theorem1_gap_monotone", "skipped", "single M value"));
            else
                criteria.push_back(verdict("theorem1_gap_monotone",
                                           min_drop2 >= -1e-9 ? "pass" : "fail",
                                           "theorem1_gap non-increasing in M", min_drop2));
            if (first == last) {
                criteria.push_back(verdict("theorem1_gap_convergence", "skipped", "single M value"));
            } else if (last->report.M < 20) {
                criteria.push_back(verdict("theorem1_gap_convergence", "skipped",
                                           "M range too short to measure convergence"));
            } else {
                const double ratio = first->report.theorem1_gap > 0.0
                                         ? last->report.theorem1_gap / first->report.theorem1_gap
                                         : 0.0;
                criteria.push_back(verdict("theorem1_gap_convergence",
                                           ratio <= 0.05 ? "pass" : "fail",
                                           "gap(M_max) / gap(M_min) <= 0.05", ratio));
            }
        }

        double mc_slack = std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            if (r.has_local)
                mc_slack = std::min(mc_slack, 4.0 * r.local_mc.std_error -
                                                  std::abs(r.local_mc.mean - r.report.local_exact));
        criteria.push_back(verdict("mc_local_agreement", mc_slack >= 0.0 ? "pass" : "fail",
                                   "|mc - exact| <= 4 stderr", mc_slack));
    }

    if (any_global) {
        double slack = std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            if (r.has_global)
                slack = std::min({slack,
                                  r.report.lemma4_tight_bound - r.report.lemma4_bound,
                                  r.report.global_privacy - r.report.lemma4_tight_bound + 1e-6,
                                  r.report.h_x - r.report.global_privacy});
        criteria.push_back(verdict("global_sandwich", slack >= -1e-9 ? "pass" : "fail",
                                   "lemma4 <= lemma4_tight <= global_privacy <= h_x", slack));

        double min_rise = std::numeric_limits<double>::infinity();
        const SweepRow* prev = nullptr;
        for (const auto& r : rows) {
            if (!r.has_global) continue;
            if (prev)
                min_rise = std::min(min_rise, r.report.global_privacy - prev->report.global_privacy);
            prev = &r;
        }
        if (std::isinf(min_rise))
            criteria.push_back(verdict("global_monotone", "skipped", "single M value"));
        else
            criteria.push_back(verdict("global_monotone", min_rise >= -1e-9 ? "pass" : "fail",
                                       "global_privacy non-decreasing in M", min_rise));

        double cap_slack = std::numeric_limits<double>::infinity();
        const SystemConfig cfg0 = spec.materialize(spec.m_values.front());
        const double w = support_width(cfg0.local);
        const double cap = w * w / (2.0 * cfg0.noise.sigma_min_sq());
        for (const auto& r : rows)
            if (r.has_global) cap_slack = std::min(cap_slack, cap - r.report.theorem2_scaled_gap);
        criteria.push_back(verdict("theorem2_cap", cap_slack >= -1e-6 ? "pass" : "fail",
                                   "M * (h_x - global_privacy) <= width^2 / (2 sigma_min^2) = " +
                                       format_double(cap),
                                   cap_slack));

        double mc_slack = std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            if (r.has_global)
                mc_slack =
                    std::min(mc_slack, 4.0 * r.global_mc.std_error -
                                           std::abs(r.global_mc.mean - r.report.global_privacy));
        criteria.push_back(verdict("mc_global_agreement", mc_slack >= 0.0 ? "pass" : "fail",
                                   "|mc - exact| <= 4 stderr", mc_slack));
    }

    if (any_local && any_global) {
        double margin = std::numeric_limits<double>::infinity();
        bool found = false;
        for (const auto& r : rows)
            if (r.has_local && r.has_global && r.report.M >= 2) {
                margin = std::min(margin, r.report.global_privacy - r.report.local_exact);
                found = true;
            }
        if (found)
            criteria.push_back(verdict("scheme_comparison", margin > 0.0 ? "pass" : "fail",
                                       "global_privacy > local_exact for M >= 2", margin));
        else
            criteria.push_back(verdict("scheme_comparison", "skipped", "no rows with M >= 2"));
    }

    doc["criteria"] = std::move(criteria);
    return doc;
}

}  // namespace sensorpriv
