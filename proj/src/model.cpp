#include "sensorpriv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sensorpriv/errors.hpp"

namespace sensorpriv {

namespace {
constexpr double kProbSumTol = 1e-12;
}

DiscreteDist::DiscreteDist(std::vector<double> values_, std::vector<double> probs_)
    : values(std::move(values_)), probs(std::move(probs_)) {
    validate();
}

void DiscreteDist::validate() const {
    if (values.empty() || values.size() != probs.size())
        throw InvalidParameterError("DiscreteDist: values and probs must be equal-length, non-empty");
    for (size_t i = 1; i < values.size(); ++i)
        if (!(values[i - 1] < values[i]))
            throw InvalidParameterError("DiscreteDist: values must be strictly increasing");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0))
            throw InvalidParameterError("DiscreteDist: probabilities must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbSumTol)
        throw InvalidParameterError("DiscreteDist: probabilities must sum to 1 within 1e-12, got " +
                                    std::to_string(sum));
}

void NoiseSpec::validate() const {
    if (sensor_sigmas.empty())
        throw InvalidParameterError("NoiseSpec: at least one sensor sigma required");
    for (double s : sensor_sigmas)
        if (!(s > 0.0))
            throw InvalidParameterError("NoiseSpec: sensor sigmas must be positive");
    if (!(cloud_sigma > 0.0))
        throw InvalidParameterError("NoiseSpec: cloud sigma must be positive");
}

double NoiseSpec::sigma_min_sq() const {
    double m = cloud_sigma * cloud_sigma;
    for (double s : sensor_sigmas) m = std::min(m, s * s);
    return m;
}

double NoiseSpec::total_variance() const {
    double v = cloud_sigma * cloud_sigma;
    for (double s : sensor_sigmas) v += s * s;
    return v;
}

void SystemConfig::validate() const {
    if (num_sensors < 1)
        throw InvalidParameterError("SystemConfig: num_sensors must be >= 1");
    common.validate();
    local.validate();
    noise.validate();
    if (noise.sensor_sigmas.size() != static_cast<size_t>(num_sensors))
        throw InvalidParameterError("SystemConfig: expected " + std::to_string(num_sensors) +
                                    " sensor sigmas, got " + std::to_string(noise.sensor_sigmas.size()));
    if (homogeneous_noise) {
        for (double s : noise.sensor_sigmas)
            if (s != noise.sensor_sigmas.front())
                throw InvalidParameterError("SystemConfig: homogeneous_noise set but sigmas differ");
    }
}

double EntropyValue::bits() const { return nats / std::numbers::ln2; }

EntropyValue entropy(const DiscreteDist& d) {
    d.validate();
    double h = 0.0;
    for (double p : d.probs)
        if (p > 0.0) h -= p * std::log(p);
    return EntropyValue{h};
}

double kl_discrete(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty())
        throw InvalidParameterError("kl_discrete: vectors must be equal-length, non-empty");
    double d = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0)
            throw std::domain_error("kl_discrete: p is not absolutely continuous w.r.t. q");
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

double binary_kl(double a, double b) {
    if (!(a >= 0.0 && a <= 1.0))
        throw InvalidParameterError("binary_kl: a must be a probability");
    if (!(b >= 0.0 && b <= 1.0))
        throw InvalidParameterError("binary_kl: b must be a probability");
    const double inf = std::numeric_limits<double>::infinity();
    double d = 0.0;
    if (a > 0.0) d += (b == 0.0) ? inf : a * std::log(a / b);
    if (a < 1.0) d += (b == 1.0) ? inf : (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    return d;
}

double support_width(const DiscreteDist& d) {
    d.validate();
    return d.values.back() - d.values.front();
}

}  // namespace sensorpriv
