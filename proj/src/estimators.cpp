#include "sensorpriv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "sensorpriv/errors.hpp"

namespace sensorpriv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// The channel integrand carries a MAP-decision indicator, so the rule cannot
// ride on smoothness: fine panels keep the boundary-panel error below 1e-4
// of a density peak, well inside the Monte Carlo validation tolerance.
constexpr int kChannelPanels = 8192;
constexpr int kChannelNodes = 8;

double safe_log(double p) { return p > 0.0 ? std::log(p) : -kInf; }

// c * ln(p) with the 0 * ln(0) = 0 convention.
double count_log(long c, double p) { return c == 0 ? 0.0 : c * safe_log(p); }

void check_sensor_index(const SystemConfig& config, int sensor) {
    if (sensor < 0 || sensor >= config.num_sensors)
        throw InvalidParameterError("sensor index " + std::to_string(sensor) + " out of range for M=" +
                                    std::to_string(config.num_sensors));
}

int argmax_tie_low(std::span<const double> scores) {
    size_t best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return static_cast<int>(best);
}

std::vector<double> normalize_log(std::span<const double> log_scores) {
    const double lz = log_sum_exp(log_scores);
    std::vector<double> out(log_scores.size());
    for (size_t i = 0; i < log_scores.size(); ++i) out[i] = std::exp(log_scores[i] - lz);
    return out;
}

}  // namespace

SensorScorer::SensorScorer(const SystemConfig& config, int sensor) {
    config.validate();
    check_sensor_index(config, sensor);
    sigma_ = config.noise.sensor_sigmas[sensor];
    n_ = config.common.size();
    m_ = config.local.size();
    means_.resize(n_ * m_);
    log_px_.resize(m_);
    log_py_.resize(n_);
    for (size_t xi = 0; xi < m_; ++xi) log_px_[xi] = safe_log(config.local.probs[xi]);
    for (size_t yi = 0; yi < n_; ++yi) {
        log_py_[yi] = safe_log(config.common.probs[yi]);
        for (size_t xi = 0; xi < m_; ++xi)
            means_[yi * m_ + xi] = config.common.values[yi] + config.local.values[xi];
    }
}

void SensorScorer::log_scores(double z, std::vector<double>& out) const {
    out.resize(n_);
    for (size_t yi = 0; yi < n_; ++yi) {
        // streaming log-sum-exp over the local support
        double mx = -kInf, s = 0.0;
        for (size_t xi = 0; xi < m_; ++xi) {
            const double v = log_px_[xi] + gaussian_logpdf(z, means_[yi * m_ + xi], sigma_);
            if (v <= mx) {
                s += std::exp(v - mx);
            } else {
                s = s * std::exp(mx - v) + 1.0;
                mx = v;
            }
        }
        out[yi] = std::isinf(mx) ? -kInf : log_py_[yi] + mx + std::log(s);
    }
}

int SensorScorer::map(double z) const {
    size_t best = 0;
    double best_score = -kInf;
    for (size_t yi = 0; yi < n_; ++yi) {
        double mx = -kInf, s = 0.0;
        for (size_t xi = 0; xi < m_; ++xi) {
            const double v = log_px_[xi] + gaussian_logpdf(z, means_[yi * m_ + xi], sigma_);
            if (v <= mx) {
                s += std::exp(v - mx);
            } else {
                s = s * std::exp(mx - v) + 1.0;
                mx = v;
            }
        }
        const double score = std::isinf(mx) ? -kInf : log_py_[yi] + mx + std::log(s);
        if (score > best_score) {
            best_score = score;
            best = yi;
        }
    }
    return static_cast<int>(best);
}

std::vector<double> sensor_posterior(double z, const SystemConfig& config, int sensor) {
    const SensorScorer scorer(config, sensor);
    std::vector<double> scores;
    scorer.log_scores(z, scores);
    return normalize_log(scores);
}

int sensor_map(double z, const SystemConfig& config, int sensor) {
    return SensorScorer(config, sensor).map(z);
}

ChannelTable channel_table(const SystemConfig& config, int sensor) {
    config.validate();
    check_sensor_index(config, sensor);
    const double sigma = config.noise.sensor_sigmas[sensor];
    const size_t n = config.common.size();
    const size_t m = config.local.size();

    ChannelTable table;
    table.cond.assign(n, std::vector<std::vector<double>>(m, std::vector<double>(n, 0.0)));

    // Each (x, y) component is integrated over its own [mu - 8s, mu + 8s]
    // window, so the panel width tracks sigma and arbitrarily small noise
    // scales stay resolved. The MAP decision at each node comes from the same
    // scorer the sampler uses, so quadrature and Monte Carlo integrate the
    // identical indicator.
    const SensorScorer scorer(config, sensor);
    std::vector<std::vector<std::pair<double, double>>> terms(n);  // per yhat: (|z - mu|, mass)
    for (size_t yi = 0; yi < n; ++yi)
        for (size_t xi = 0; xi < m; ++xi) {
            const double mu = config.common.values[yi] + config.local.values[xi];
            const QuadratureSpec spec{mu - 8.0 * sigma, mu + 8.0 * sigma, kChannelPanels,
                                      kChannelNodes};
            const QuadratureGrid grid = make_grid(spec);
            for (auto& bucket : terms) bucket.clear();
            for (size_t g = 0; g < grid.nodes.size(); ++g) {
                const double z = grid.nodes[g];
                terms[scorer.map(z)].emplace_back(
                    std::abs(z - mu), grid.weights[g] * std::exp(gaussian_logpdf(z, mu, sigma)));
            }
            // Summing from the mean outward gives mirrored components bitwise
            // identical entries, so symmetric configs get exactly equal
            // crossover probabilities.
            for (size_t hi = 0; hi < n; ++hi) {
                std::sort(terms[hi].begin(), terms[hi].end());
                double sum = 0.0;
                for (const auto& [dist, mass] : terms[hi]) sum += mass;
                table.cond[hi][xi][yi] = sum;
            }
        }

    for (size_t xi = 0; xi < m; ++xi)
        for (size_t yi = 0; yi < n; ++yi) {
            double col = 0.0;
            for (size_t hi = 0; hi < n; ++hi) col += table.cond[hi][xi][yi];
            const double drift = std::abs(col - 1.0);
            if (drift > 1e-6)
                throw NumericalAccuracyError("channel_table: column sum off by " +
                                             std::to_string(drift));
            if (drift > 1e-9) {
                std::cerr << "channel_table: renormalizing column (x=" << xi << ", y=" << yi
                          << "), drift " << drift << "\n";
                for (size_t hi = 0; hi < n; ++hi) table.cond[hi][xi][yi] /= col;
            }
        }

    table.marg.assign(n, std::vector<double>(n, 0.0));
    for (size_t hi = 0; hi < n; ++hi)
        for (size_t yi = 0; yi < n; ++yi)
            for (size_t xi = 0; xi < m; ++xi)
                table.marg[hi][yi] += config.local.probs[xi] * table.cond[hi][xi][yi];

    table.crossover_p = table.marg[0][0];
    table.crossover_q =
        n == 2 ? table.marg[1][1] : std::numeric_limits<double>::quiet_NaN();
    return table;
}

bool fuse_decision_y1(long count_y1, long num_sensors, double log_prior1, double log_prior2,
                      double p, double q) {
    // Margin form of the likelihood-ratio test: equal log terms cancel
    // exactly, so a symmetric channel ties to y1 at every even split.
    const auto diff_term = [](long c, double pa, double pb) {
        if (c == 0) return 0.0;
        const double la = safe_log(pa), lb = safe_log(pb);
        if (la == lb) return 0.0;  // includes the doubly impossible -inf case
        return c * (la - lb);
    };
    const long rest = num_sensors - count_y1;
    const double margin = (log_prior1 - log_prior2) + diff_term(count_y1, p, 1.0 - q) +
                          diff_term(rest, 1.0 - p, q);
    if (std::isnan(margin)) return true;  // opposing infinities: keep the tie convention
    return margin >= 0.0;
}

int fuse_local(long count_y1, const SystemConfig& config, const ChannelTable& table) {
    config.validate();
    if (config.common.size() != 2)
        throw UnsupportedConfigError("fuse_local: binary common process required");
    if (count_y1 < 0 || count_y1 > config.num_sensors)
        throw InvalidParameterError("fuse_local: count_y1 out of range");
    return fuse_decision_y1(count_y1, config.num_sensors, safe_log(config.common.probs[0]),
                            safe_log(config.common.probs[1]), table.crossover_p,
                            table.crossover_q)
               ? 0
               : 1;
}

double GaussianMixture::logpdf(double z) const {
    // streaming log-sum-exp over components
    double m = -kInf, s = 0.0;
    for (size_t i = 0; i < log_w.size(); ++i) {
        const double v = log_w[i] + gaussian_logpdf(z, mean[i], sigma);
        if (v <= m) {
            s += std::exp(v - m);
        } else {
            s = s * std::exp(m - v) + 1.0;
            m = v;
        }
    }
    return std::isinf(m) ? -kInf : m + std::log(s);
}

double GaussianMixture::min_mean() const { return *std::min_element(mean.begin(), mean.end()); }
double GaussianMixture::max_mean() const { return *std::max_element(mean.begin(), mean.end()); }

std::vector<std::pair<double, double>> sum_mixture(const DiscreteDist& d, long count) {
    if (count < 0) throw InvalidParameterError("sum_mixture: negative count");
    const size_t m = d.size();
    std::vector<std::pair<double, double>> comps;
    if (count == 0) {
        comps.emplace_back(0.0, 0.0);
        return comps;
    }
    if (m == 1) {
        comps.emplace_back(0.0, count * d.values.front());
        return comps;
    }
    if (m == 2) {
        comps.reserve(count + 1);
        for (long k = 0; k <= count; ++k)
            comps.emplace_back(binomial_log_pmf(k, count, d.probs[0]),
                               k * d.values[0] + (count - k) * d.values[1]);
        return comps;
    }
    if (m == 3) {
        if (count > 20)
            throw UnsupportedConfigError(
                "sum_mixture: 3-point local support only enumerable up to 20 draws, got " +
                std::to_string(count));
        const double lg_n = std::lgamma(static_cast<double>(count) + 1.0);
        for (long k1 = 0; k1 <= count; ++k1)
            for (long k2 = 0; k2 <= count - k1; ++k2) {
                const long k3 = count - k1 - k2;
                double lw = lg_n - std::lgamma(k1 + 1.0) - std::lgamma(k2 + 1.0) -
                            std::lgamma(k3 + 1.0);
                lw += count_log(k1, d.probs[0]) + count_log(k2, d.probs[1]) +
                      count_log(k3, d.probs[2]);
                comps.emplace_back(lw, k1 * d.values[0] + k2 * d.values[1] + k3 * d.values[2]);
            }
        return comps;
    }
    throw UnsupportedConfigError("sum_mixture: local support size " + std::to_string(m) +
                                 " beyond exact enumeration");
}

GlobalChannel make_global_channel(const SystemConfig& config, int sensor) {
    config.validate();
    check_sensor_index(config, sensor);
    GlobalChannel ch;
    ch.sigma_tot = std::sqrt(config.noise.total_variance());
    const long M = config.num_sensors;
    const size_t n = config.common.size();
    const size_t m = config.local.size();

    const auto others = sum_mixture(config.local, M - 1);
    ch.given_x.resize(m);
    for (size_t xi = 0; xi < m; ++xi) {
        GaussianMixture& mix = ch.given_x[xi];
        mix.sigma = ch.sigma_tot;
        mix.log_w.reserve(n * others.size());
        mix.mean.reserve(n * others.size());
        for (size_t yi = 0; yi < n; ++yi)
            for (const auto& [lw, s] : others) {
                mix.log_w.push_back(safe_log(config.common.probs[yi]) + lw);
                mix.mean.push_back(M * config.common.values[yi] + config.local.values[xi] + s);
            }
    }

    const auto all = sum_mixture(config.local, M);
    ch.given_y.resize(n);
    for (size_t yi = 0; yi < n; ++yi) {
        GaussianMixture& mix = ch.given_y[yi];
        mix.sigma = ch.sigma_tot;
        mix.log_w.reserve(all.size());
        mix.mean.reserve(all.size());
        for (const auto& [lw, s] : all) {
            mix.log_w.push_back(lw);
            mix.mean.push_back(M * config.common.values[yi] + s);
        }
    }
    return ch;
}

std::vector<double> global_posterior_x(double z_c, const SystemConfig& config,
                                       const GlobalChannel& channel) {
    const size_t m = config.local.size();
    std::vector<double> scores(m);
    for (size_t xi = 0; xi < m; ++xi)
        scores[xi] = safe_log(config.local.probs[xi]) + channel.given_x[xi].logpdf(z_c);
    return normalize_log(scores);
}

std::vector<double> global_posterior_x(double z_c, const SystemConfig& config, int sensor) {
    return global_posterior_x(z_c, config, make_global_channel(config, sensor));
}

int global_map_y(double z_c, const SystemConfig& config, const GlobalChannel& channel) {
    const size_t n = config.common.size();
    std::vector<double> scores(n);
    for (size_t yi = 0; yi < n; ++yi)
        scores[yi] = safe_log(config.common.probs[yi]) + channel.given_y[yi].logpdf(z_c);
    return argmax_tie_low(scores);
}

int global_map_y(double z_c, const SystemConfig& config) {
    return global_map_y(z_c, config, make_global_channel(config, 0));
}

}  // namespace sensorpriv
