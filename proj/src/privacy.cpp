#include "sensorpriv/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>

#include "sensorpriv/errors.hpp"
#include "sensorpriv/numerics.hpp"

namespace sensorpriv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : -kInf; }

void require_local_assumptions(const SystemConfig& config) {
    if (config.common.size() != 2)
        throw UnsupportedConfigError("local scheme: binary common process required");
    for (double s : config.noise.sensor_sigmas)
        if (s != config.noise.sensor_sigmas.front())
            throw UnsupportedConfigError("local scheme: identically distributed sensor noise required");
}

void require_matching_m(const SystemConfig& config, long M, const char* where) {
    if (M != config.num_sensors)
        throw InvalidParameterError(std::string(where) + ": M=" + std::to_string(M) +
                                    " does not match config with " +
                                    std::to_string(config.num_sensors) + " sensors");
}

}  // namespace

double mutual_info_x_y_yhat(const SystemConfig& config, const ChannelTable& table) {
    config.validate();
    const size_t n = config.common.size();
    const size_t m = config.local.size();

    // joint[x][y][yhat] and the (y, yhat) marginal
    std::vector<double> pair(n * n, 0.0);
    double mi = 0.0;
    for (size_t yi = 0; yi < n; ++yi)
        for (size_t hi = 0; hi < n; ++hi)
            for (size_t xi = 0; xi < m; ++xi)
                pair[yi * n + hi] +=
                    config.local.probs[xi] * config.common.probs[yi] * table.cond[hi][xi][yi];
    for (size_t xi = 0; xi < m; ++xi)
        for (size_t yi = 0; yi < n; ++yi)
            for (size_t hi = 0; hi < n; ++hi) {
                const double pj =
                    config.local.probs[xi] * config.common.probs[yi] * table.cond[hi][xi][yi];
                if (pj > 0.0)
                    mi += pj * std::log(pj / (config.local.probs[xi] * pair[yi * n + hi]));
            }
    return std::max(mi, 0.0);
}

double lemma1_lower_bound(const SystemConfig& config, const ChannelTable& table) {
    return entropy(config.local).nats - mutual_info_x_y_yhat(config, table);
}

int LocalReducedJoint::map_x(size_t hi, long k) const {
    size_t best = 0;
    for (size_t xi = 1; xi < x_size; ++xi)
        if (log_joint_at(xi, hi, k) > log_joint_at(best, hi, k)) best = xi;
    return static_cast<int>(best);
}

LocalReducedJoint local_reduced_joint(const SystemConfig& config, const ChannelTable& table,
                                      long M) {
    config.validate();
    require_matching_m(config, M, "local_reduced_joint");
    require_local_assumptions(config);
    const size_t n = config.common.size();
    const size_t m = config.local.size();

    LocalReducedJoint joint;
    joint.num_sensors = M;
    joint.x_size = m;
    joint.y_size = n;
    joint.log_joint.assign(m * n * M, -kInf);
    joint.log_pair.assign(n * M, -kInf);

    std::vector<double> terms(n);
    for (size_t xi = 0; xi < m; ++xi)
        for (size_t hi = 0; hi < n; ++hi)
            for (long k = 0; k < M; ++k) {
                for (size_t yi = 0; yi < n; ++yi)
                    terms[yi] = safe_log(config.common.probs[yi]) +
                                safe_log(config.local.probs[xi]) +
                                safe_log(table.cond[hi][xi][yi]) +
                                binomial_log_pmf(k, M - 1, table.marg[0][yi]);
                joint.log_joint[(xi * n + hi) * M + k] = log_sum_exp(terms);
            }
    std::vector<double> over_x(m);
    for (size_t hi = 0; hi < n; ++hi)
        for (long k = 0; k < M; ++k) {
            for (size_t xi = 0; xi < m; ++xi)
                over_x[xi] = joint.log_joint[(xi * n + hi) * M + k];
            joint.log_pair[hi * M + k] = log_sum_exp(over_x);
        }
    return joint;
}

double local_privacy_exact(const SystemConfig& config, const ChannelTable& table, long M) {
    const LocalReducedJoint joint = local_reduced_joint(config, table, M);
    double h = 0.0, c = 0.0;  // Kahan
    for (size_t xi = 0; xi < joint.x_size; ++xi)
        for (size_t hi = 0; hi < joint.y_size; ++hi)
            for (long k = 0; k < M; ++k) {
                const double lj = joint.log_joint_at(xi, hi, k);
                if (std::isinf(lj)) continue;
                const double term = -std::exp(lj) * (lj - joint.log_pair_at(hi, k)) - c;
                const double t = h + term;
                c = (t - h) - term;
                h = t;
            }
    return h;
}

Lemma3Bound lemma3_error_bound(long M, const ChannelTable& table, const DiscreteDist& y_prior) {
    if (M < 1) throw InvalidParameterError("lemma3_error_bound: M must be >= 1");
    y_prior.validate();
    if (y_prior.size() != 2)
        throw UnsupportedConfigError("lemma3_error_bound: binary common process required");
    const double p = table.crossover_p;
    const double q = table.crossover_q;
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
        throw InvalidParameterError("lemma3_error_bound: p and q must lie strictly in (0, 1)");
    if (std::abs(p + q - 1.0) < 1e-12)
        throw DegenerateChannelError("lemma3_error_bound: p = 1-q, bound is uninformative");
    const double den = std::abs(std::log(q / (1.0 - p)) - std::log((1.0 - q) / p));
    const double d1 = binary_kl(p, 1.0 - q);
    const double d2 = binary_kl(1.0 - q, p);
    const double raw =
        2.0 * y_prior.probs[0] * std::exp(-2.0 * M * d1 * d1 / (den * den)) +
        2.0 * y_prior.probs[1] * std::exp(-2.0 * M * d2 * d2 / (den * den));
    return Lemma3Bound{raw, std::min(raw, 1.0)};
}

double global_mi(const SystemConfig& config, long M, int sensor) {
    config.validate();
    require_matching_m(config, M, "global_mi");
    const GlobalChannel channel = make_global_channel(config, sensor);
    const size_t m = config.local.size();

    double lo = kInf, hi = -kInf;
    for (const auto& mix : channel.given_x) {
        lo = std::min(lo, mix.min_mean());
        hi = std::max(hi, mix.max_mean());
    }
    lo -= 8.0 * channel.sigma_tot;
    hi += 8.0 * channel.sigma_tot;
    const int panels =
        std::max(128, static_cast<int>(std::ceil(3.0 * (hi - lo) / channel.sigma_tot)));
    const QuadratureGrid grid = make_grid(QuadratureSpec{lo, hi, panels, 8});

    std::vector<double> log_fx(m), log_wx(m);
    double mi = 0.0, comp = 0.0;  // Kahan
    for (size_t g = 0; g < grid.nodes.size(); ++g) {
        const double z = grid.nodes[g];
        for (size_t xi = 0; xi < m; ++xi) {
            log_fx[xi] = channel.given_x[xi].logpdf(z);
            log_wx[xi] = safe_log(config.local.probs[xi]) + log_fx[xi];
        }
        const double log_f = log_sum_exp(log_wx);
        double val = 0.0;
        for (size_t xi = 0; xi < m; ++xi) {
            if (std::isinf(log_wx[xi])) continue;
            val += std::exp(log_wx[xi]) * (log_fx[xi] - log_f);
        }
        const double term = grid.weights[g] * val - comp;
        const double t = mi + term;
        comp = (t - mi) - term;
        mi = t;
    }

    if (mi < -1e-9)
        throw NumericalAccuracyError("global_mi: mutual information " + std::to_string(mi) +
                                     " below -1e-9; decision/density integration is off");
    if (mi < 0.0) {
        std::cerr << "global_mi: clamping " << mi << " to 0\n";
        mi = 0.0;
    }
    return mi;
}

Lemma4Bound lemma4_lower_bound(const SystemConfig& config, long M) {
    config.validate();
    require_matching_m(config, M, "lemma4_lower_bound");
    const double h = entropy(config.local).nats;
    const double w = support_width(config.local);
    Lemma4Bound b;
    b.final_nats = h - w * w / (2.0 * (M + 1) * config.noise.sigma_min_sq());
    b.tight_nats = h - w * w / (2.0 * config.noise.total_variance());
    return b;
}

double global_privacy(const SystemConfig& config, long M, int sensor) {
    const double h = entropy(config.local).nats;
    const double priv = h - global_mi(config, M, sensor);
    if (priv < 0.0 || priv > h) {
        std::cerr << "global_privacy: clamping " << priv << " into [0, " << h << "]\n";
        return std::clamp(priv, 0.0, h);
    }
    return priv;
}

double fano_lower_bound(double h_cond_bits, int alphabet_size) {
    if (alphabet_size < 2)
        throw InvalidParameterError("fano_lower_bound: alphabet size must be >= 2");
    if (!(h_cond_bits >= 0.0))
        throw InvalidParameterError("fano_lower_bound: conditional entropy must be >= 0");
    return std::max(0.0, (h_cond_bits - 1.0) / std::log2(static_cast<double>(alphabet_size)));
}

double theorem1_gap(const SystemConfig& config, const ChannelTable& table, long M) {
    const double gap = local_privacy_exact(config, table, M) - lemma1_lower_bound(config, table);
    if (gap < -1e-9)
        throw NumericalAccuracyError("theorem1_gap: negative gap " + std::to_string(gap));
    return gap;
}

double theorem2_scaled_gap(const SystemConfig& config, long M, int sensor) {
    return static_cast<double>(M) * global_mi(config, M, sensor);
}

}  // namespace sensorpriv
