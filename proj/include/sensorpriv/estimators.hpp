#pragma once

#include <cstdint>
#include <vector>

#include "sensorpriv/model.hpp"
#include "sensorpriv/numerics.hpp"

namespace sensorpriv {

/// Conditional law of the sensor-level MAP output.
///   cond[yhat][x][y] = P(Yhat = yhat | X = x, Y = y)
///   marg[yhat][y]    = P(Yhat = yhat | Y = y) = sum_x p^x(x) cond[yhat][x][y]
/// crossover_p = marg[0][0]; crossover_q = marg[1][1] (binary common process;
/// NaN otherwise).
struct ChannelTable {
    std::vector<std::vector<std::vector<double>>> cond;
    std::vector<std::vector<double>> marg;
    double crossover_p = 0.0;
    double crossover_q = 0.0;
};

/// Allocation-free evaluator of the per-measurement log posterior scores
/// over the common support. Validates the config once at construction; the
/// sampling loops call it millions of times.
class SensorScorer {
public:
    SensorScorer(const SystemConfig& config, int sensor);

    /// unnormalized ln P(y) f(z | y); out is resized to the common support
    void log_scores(double z, std::vector<double>& out) const;
    /// MAP index with ties to the smaller y-index
    int map(double z) const;

private:
    std::vector<double> means_;   // [y * m + x]
    std::vector<double> log_px_;
    std::vector<double> log_py_;
    double sigma_;
    size_t n_, m_;
};

/// P(Y = y | Z = z) for one sensor, normalized over the common support.
std::vector<double> sensor_posterior(double z, const SystemConfig& config, int sensor);

/// MAP estimate of Y from one measurement; ties break toward the smaller
/// y-index.
int sensor_map(double z, const SystemConfig& config, int sensor);

/// Integrates the MAP-decision indicator against each (x, y) measurement
/// density. Columns off 1 by more than 1e-6 raise NumericalAccuracyError;
/// smaller drift beyond 1e-9 is renormalized and logged.
ChannelTable channel_table(const SystemConfig& config, int sensor);

/// Decision core of the fused estimator: y1 wins iff
///   log_prior1 + c ln p + (M-c) ln(1-p) >= log_prior2 + c ln(1-q) + (M-c) ln q.
bool fuse_decision_y1(long count_y1, long num_sensors, double log_prior1, double log_prior2,
                      double p, double q);

/// Cloud estimate of Y from the count of y1 votes (binary common process).
int fuse_local(long count_y1, const SystemConfig& config, const ChannelTable& table);

/// One Gaussian mixture in log domain; components share a common sigma.
struct GaussianMixture {
    std::vector<double> log_w;
    std::vector<double> mean;
    double sigma = 1.0;

    double logpdf(double z) const;
    double min_mean() const;
    double max_mean() const;
};

/// Conditional densities of the summed cloud channel Z^c:
///   given_x[j] = density of Z^c given X^sensor = x_j (mixture over Y and the
///                other sensors' local values)
///   given_y[j] = density of Z^c given Y = y_j (mixture over all local values)
struct GlobalChannel {
    std::vector<GaussianMixture> given_x;
    std::vector<GaussianMixture> given_y;
    double sigma_tot = 1.0;
};

/// Components (log weight, summed value) of the sum of `count` i.i.d. draws
/// from d. Closed-form binomial for binary supports; composition enumeration
/// for 3-point supports up to count 20; larger alphabets are unsupported.
std::vector<std::pair<double, double>> sum_mixture(const DiscreteDist& d, long count);

GlobalChannel make_global_channel(const SystemConfig& config, int sensor);

/// P(X^sensor = x | Z^c = z_c), exact for supported alphabets.
std::vector<double> global_posterior_x(double z_c, const SystemConfig& config, int sensor);
std::vector<double> global_posterior_x(double z_c, const SystemConfig& config,
                                       const GlobalChannel& channel);

/// Cloud MAP estimate of Y from the summed channel; ties to the smaller index.
int global_map_y(double z_c, const SystemConfig& config);
int global_map_y(double z_c, const SystemConfig& config, const GlobalChannel& channel);

}  // namespace sensorpriv
