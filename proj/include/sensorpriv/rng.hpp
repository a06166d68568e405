#pragma once

#include <cstdint>

namespace sensorpriv {

/// Stream purposes: every (seed, round, purpose) triple names an independent
/// substream, so parallel sweeps reproduce bit-for-bit in any schedule.
enum class StreamPurpose : uint32_t {
    common_draw = 0,
    local_draw = 1,
    sensor_noise = 2,
    cloud_noise = 3,
    forced_noise_base = 16,  // + cell index, for forced-(x, y) channel sampling
};

/// Double-precision inverse of the standard normal CDF (Wichura's AS241,
/// PPND16 coefficients). Pure rational arithmetic plus sqrt/log, so draws
/// reproduce across platforms. Requires u in (0, 1).
double inverse_normal_cdf(double u);

/// Counter-based splittable generator: a splitmix64 walk whose starting state
/// is a hash of (seed, round, purpose). Draw i is a pure function of the
/// triple and i.
class Substream {
public:
    Substream(uint64_t seed, uint64_t round, uint32_t purpose);
    Substream(uint64_t seed, uint64_t round, StreamPurpose purpose)
        : Substream(seed, round, static_cast<uint32_t>(purpose)) {}

    uint64_t next_u64();
    /// uniform in the open interval (0, 1)
    double next_uniform();
    /// standard normal via inverse-CDF transform of next_uniform()
    double next_gaussian();

private:
    uint64_t state_;
};

}  // namespace sensorpriv
