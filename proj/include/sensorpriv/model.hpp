#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sensorpriv {

/// Finite real-valued support with a probability vector. Values are kept in
/// strictly increasing order so tables and CSV output are reproducible.
struct DiscreteDist {
    std::vector<double> values;
    std::vector<double> probs;

    DiscreteDist() = default;
    DiscreteDist(std::vector<double> values_, std::vector<double> probs_);

    size_t size() const { return values.size(); }
    void validate() const;
};

/// Per-sensor measurement noise scales plus the cloud link noise scale.
struct NoiseSpec {
    std::vector<double> sensor_sigmas;
    double cloud_sigma = 1.0;

    void validate() const;
    double sigma_min_sq() const;
    /// sigma_c^2 + sum_i sigma_i^2 (variance of the summed-channel noise).
    double total_variance() const;
};

/// Full system description: M sensors observing a shared common process plus
/// per-sensor private local processes through additive Gaussian noise.
struct SystemConfig {
    int num_sensors = 1;
    DiscreteDist common;  // law of Y
    DiscreteDist local;   // shared law of every X^i (homogeneous by construction)
    NoiseSpec noise;
    bool homogeneous_noise = true;

    void validate() const;
};

struct EntropyValue {
    double nats = 0.0;
    double bits() const;
};

/// -sum p ln p with 0 ln 0 = 0; result in [0, ln(support size)].
EntropyValue entropy(const DiscreteDist& d);

/// sum_j p_j ln(p_j / q_j). Throws std::domain_error if some p_j > 0 has
/// q_j = 0 (absolute-continuity violation).
double kl_discrete(std::span<const double> p, std::span<const double> q);

/// D(a || b) between Bernoulli(a) and Bernoulli(b). A boundary b with
/// mismatched a yields +infinity rather than an exception.
double binary_kl(double a, double b);

/// max value - min value of the support.
double support_width(const DiscreteDist& d);

}  // namespace sensorpriv
