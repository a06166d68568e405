#pragma once

#include <vector>

#include "sensorpriv/estimators.hpp"
#include "sensorpriv/model.hpp"

namespace sensorpriv {

/// Per-M record of exact/MC privacy levels, bounds and diagnostics, all in
/// nats. MC columns are filled by the sweep runner.
struct PrivacyReport {
    long M = 0;
    double h_x = 0.0;
    double local_exact = 0.0;
    double lemma1_bound = 0.0;
    double mi_aux = 0.0;
    double global_mi = 0.0;
    double global_privacy = 0.0;
    double lemma4_bound = 0.0;
    double lemma4_tight_bound = 0.0;
    double lemma3_error_bound = 0.0;          // unclamped, may exceed 1
    double lemma3_error_bound_clamped = 0.0;
    double fano_bound_local = 0.0;
    double fano_bound_global = 0.0;
    double theorem1_gap = 0.0;
    double theorem2_scaled_gap = 0.0;
};

/// I(X; Y, Yhat) of the per-sensor estimate channel, from the finite joint
/// p^x(x) p^y(y) cond[yhat][x][y].
double mutual_info_x_y_yhat(const SystemConfig& config, const ChannelTable& table);

/// H(X) - I(X; Y, Yhat): the floor under the local-scheme privacy level.
double lemma1_lower_bound(const SystemConfig& config, const ChannelTable& table);

/// Reduced joint law of (X^1, Yhat^1, K) where K counts y1 votes among the
/// other M-1 sensors. The conditional law of X^1 given the full estimate
/// vector depends on the vector only through (Yhat^1, K), so this joint
/// carries the exact local-scheme privacy level at O(M) cost.
struct LocalReducedJoint {
    long num_sensors = 1;
    size_t x_size = 0;
    size_t y_size = 0;
    std::vector<double> log_joint;  // [x][yhat][k], k in 0..M-1
    std::vector<double> log_pair;   // [yhat][k]

    double log_joint_at(size_t xi, size_t hi, long k) const {
        return log_joint[(xi * y_size + hi) * num_sensors + k];
    }
    double log_pair_at(size_t hi, long k) const { return log_pair[hi * num_sensors + k]; }
    /// ln P(X = x | Yhat^1 = yhat, K = k)
    double log_posterior_x(size_t xi, size_t hi, long k) const {
        return log_joint_at(xi, hi, k) - log_pair_at(hi, k);
    }
    /// MAP estimate of X from (Yhat^1, K); ties to the smaller x-index.
    int map_x(size_t hi, long k) const;
};

LocalReducedJoint local_reduced_joint(const SystemConfig& config, const ChannelTable& table,
                                      long M);

/// H(X^1 | Yhat^1, ..., Yhat^M), exact (binary common process, homogeneous
/// local processes and noise).
double local_privacy_exact(const SystemConfig& config, const ChannelTable& table, long M);

struct Lemma3Bound {
    double raw = 0.0;      // as stated; exceeds 1 for small M
    double clamped = 0.0;  // min(raw, 1)
};

/// Hoeffding-style upper bound on the fused-estimate error probability.
Lemma3Bound lemma3_error_bound(long M, const ChannelTable& table, const DiscreteDist& y_prior);

/// I(X^sensor; Z^c) by quadrature against the exact mixture densities.
double global_mi(const SystemConfig& config, long M, int sensor);

struct Lemma4Bound {
    double final_nats = 0.0;  // H(X) - width^2 / (2 (M+1) sigma_min^2)
    double tight_nats = 0.0;  // H(X) - width^2 / (2 (sigma_c^2 + sum_i sigma_i^2))
};

Lemma4Bound lemma4_lower_bound(const SystemConfig& config, long M);

/// H(X^sensor | Z^c) = H(X) - global_mi, clamped into [0, H(X)].
double global_privacy(const SystemConfig& config, long M, int sensor);

/// max(0, (h_cond_bits - 1) / log2(alphabet_size)): lower bound on the
/// probability of misestimating X from the conditioning data.
double fano_lower_bound(double h_cond_bits, int alphabet_size);

/// local_privacy_exact - lemma1_lower_bound; tends to 0 as M grows when
/// p != 1-q.
double theorem1_gap(const SystemConfig& config, const ChannelTable& table, long M);

/// M * global_mi; stays below width^2 / (2 sigma_min^2) for every M.
double theorem2_scaled_gap(const SystemConfig& config, long M, int sensor);

}  // namespace sensorpriv
