#pragma once

#include <cstdint>
#include <vector>

#include "sensorpriv/estimators.hpp"
#include "sensorpriv/model.hpp"
#include "sensorpriv/privacy.hpp"

namespace sensorpriv {

/// One joint realization of a round: processes, measurements, and every
/// estimate the cloud forms from them.
struct SampleRound {
    int y = 0;                    // y-index
    std::vector<int> x;           // x-indices, one per sensor
    std::vector<double> z;        // measurements
    std::vector<int> yhat_local;  // per-sensor MAP estimates
    long count_y1 = 0;            // votes for index 0
    double z_c = 0.0;             // summed cloud channel
    int yhat_fused_local = 0;
    int yhat_global = 0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n = 0;
    uint64_t seed = 0;
};

enum class Scheme { local, global };

/// Everything sample_round needs, built once per configuration.
struct SimContext {
    SystemConfig config;
    ChannelTable table;
    GlobalChannel channel;
    SensorScorer scorer;

    explicit SimContext(const SystemConfig& cfg, int sensor = 0);
};

/// Draws one exact joint realization. A fixed (seed, round_index) pair yields
/// the same round on every platform and in any execution order.
SampleRound sample_round(const SimContext& ctx, uint64_t seed, uint64_t round_index);

/// Unbiased MC estimate of H(X^1 | Yhat^1..Yhat^M) using the exact reduced
/// posterior as the plug-in surprisal.
McEstimate mc_conditional_entropy_local(const SystemConfig& config, const ChannelTable& table,
                                        long M, long n, uint64_t seed, int workers = 1);

/// Unbiased MC estimate of H(X^sensor | Z^c).
McEstimate mc_conditional_entropy_global(const SystemConfig& config, long M, int sensor, long n,
                                         uint64_t seed, int workers = 1);

/// Empirical frequency of the cloud misestimating Y under either scheme.
McEstimate mc_error_prob(const SystemConfig& config, const ChannelTable& table, long M,
                         Scheme scheme, long n, uint64_t seed, int workers = 1);

/// Empirical frequency of the cloud misestimating X^1 from the local-scheme
/// data, using the MAP estimate of X from (Yhat^1, K).
McEstimate mc_x_misestimation_local(const SystemConfig& config, const ChannelTable& table, long M,
                                    long n, uint64_t seed, int workers = 1);

/// Empirical channel law from n forced draws per (x, y) cell; rows over yhat
/// sum to 1 by construction. Oracle counterpart of channel_table.
ChannelTable mc_crossover(const SystemConfig& config, int sensor, long n, uint64_t seed);

}  // namespace sensorpriv
