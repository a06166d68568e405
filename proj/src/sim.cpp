#include "sensorpriv/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "sensorpriv/errors.hpp"
#include "sensorpriv/numerics.hpp"
#include "sensorpriv/rng.hpp"

namespace sensorpriv {

namespace {

constexpr long kChunkRounds = 8192;

double safe_log(double p) {
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

int sample_index(const DiscreteDist& d, double u) {
    double cum = 0.0;
    for (size_t i = 0; i + 1 < d.size(); ++i) {
        cum += d.probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(d.size() - 1);
}

struct RoundDraw {
    int y;
    std::vector<int> x;
    std::vector<double> z;
    double z_c;
};

// Draw order is part of the reproducibility contract: one uniform for y,
// then M uniforms for the local values, M gaussians for the sensor noises,
// and one gaussian for the cloud noise, each from its own substream.
void draw_round(const SystemConfig& config, uint64_t seed, uint64_t round, RoundDraw& out) {
    const long M = config.num_sensors;
    Substream y_stream(seed, round, StreamPurpose::common_draw);
    Substream x_stream(seed, round, StreamPurpose::local_draw);
    Substream noise_stream(seed, round, StreamPurpose::sensor_noise);
    Substream cloud_stream(seed, round, StreamPurpose::cloud_noise);

    out.y = sample_index(config.common, y_stream.next_uniform());
    out.x.resize(M);
    out.z.resize(M);
    const double y_val = config.common.values[out.y];
    double sum_z = 0.0;
    for (long i = 0; i < M; ++i) out.x[i] = sample_index(config.local, x_stream.next_uniform());
    for (long i = 0; i < M; ++i) {
        const double noise = config.noise.sensor_sigmas[i] * noise_stream.next_gaussian();
        out.z[i] = y_val + config.local.values[out.x[i]] + noise;
        sum_z += out.z[i];
    }
    out.z_c = sum_z + config.noise.cloud_sigma * cloud_stream.next_gaussian();
}

// Chunked, compensated accumulation: chunk partials depend only on the round
// indices they cover, and the final reduce walks chunks in index order, so
// the estimate is identical for any worker count.
McEstimate accumulate(long n, uint64_t seed, int workers,
                      const std::function<double(uint64_t)>& value_of_round) {
    if (n < 2) throw InvalidParameterError("monte carlo estimate needs n >= 2");
    if (workers < 1) throw InvalidParameterError("workers must be >= 1");

    const long num_chunks = (n + kChunkRounds - 1) / kChunkRounds;
    std::vector<double> sums(num_chunks, 0.0), sq_sums(num_chunks, 0.0);

    auto run_chunk = [&](long chunk) {
        const long begin = chunk * kChunkRounds;
        const long end = std::min(n, begin + kChunkRounds);
        double s = 0.0, cs = 0.0, s2 = 0.0, cs2 = 0.0;
        for (long r = begin; r < end; ++r) {
            const double v = value_of_round(static_cast<uint64_t>(r));
            double t = v - cs;
            double u = s + t;
            cs = (u - s) - t;
            s = u;
            t = v * v - cs2;
            u = s2 + t;
            cs2 = (u - s2) - t;
            s2 = u;
        }
        sums[chunk] = s;
        sq_sums[chunk] = s2;
    };

    if (workers == 1) {
        for (long chunk = 0; chunk < num_chunks; ++chunk) run_chunk(chunk);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (long chunk = w; chunk < num_chunks; chunk += workers) run_chunk(chunk);
            });
        for (auto& t : pool) t.join();
    }

    double sum = 0.0, c1 = 0.0, sq = 0.0, c2 = 0.0;
    for (long chunk = 0; chunk < num_chunks; ++chunk) {
        double t = sums[chunk] - c1;
        double u = sum + t;
        c1 = (u - sum) - t;
        sum = u;
        t = sq_sums[chunk] - c2;
        u = sq + t;
        c2 = (u - sq) - t;
        sq = u;
    }

    McEstimate est;
    est.n = n;
    est.seed = seed;
    est.mean = sum / n;
    const double var = std::max(0.0, (sq - n * est.mean * est.mean) / (n - 1));
    est.std_error = std::sqrt(var / n);
    return est;
}

}  // namespace

SimContext::SimContext(const SystemConfig& cfg, int sensor)
    : config(cfg),
      table(channel_table(cfg, sensor)),
      channel(make_global_channel(cfg, sensor)),
      scorer(cfg, sensor) {}

SampleRound sample_round(const SimContext& ctx, uint64_t seed, uint64_t round_index) {
    const long M = ctx.config.num_sensors;
    RoundDraw draw;
    draw_round(ctx.config, seed, round_index, draw);

    SampleRound round;
    round.y = draw.y;
    round.x = std::move(draw.x);
    round.z = std::move(draw.z);
    round.z_c = draw.z_c;
    round.yhat_local.resize(M);
    for (long i = 0; i < M; ++i) {
        round.yhat_local[i] = ctx.scorer.map(round.z[i]);
        if (round.yhat_local[i] == 0) ++round.count_y1;
    }
    round.yhat_fused_local = fuse_local(round.count_y1, ctx.config, ctx.table);
    round.yhat_global = global_map_y(round.z_c, ctx.config, ctx.channel);
    return round;
}

McEstimate mc_conditional_entropy_local(const SystemConfig& config, const ChannelTable& table,
                                        long M, long n, uint64_t seed, int workers) {
    const LocalReducedJoint joint = local_reduced_joint(config, table, M);
    const SensorScorer scorer(config, 0);
    auto value = [&](uint64_t r) {
        thread_local RoundDraw draw;
        draw_round(config, seed, r, draw);
        const int yhat1 = scorer.map(draw.z[0]);
        long k = 0;
        for (long i = 1; i < M; ++i)
            if (scorer.map(draw.z[i]) == 0) ++k;
        return -joint.log_posterior_x(draw.x[0], yhat1, k);
    };
    return accumulate(n, seed, workers, value);
}

McEstimate mc_conditional_entropy_global(const SystemConfig& config, long M, int sensor, long n,
                                         uint64_t seed, int workers) {
    if (M != config.num_sensors)
        throw InvalidParameterError("mc_conditional_entropy_global: M does not match config");
    const GlobalChannel channel = make_global_channel(config, sensor);
    const size_t m = config.local.size();
    std::vector<double> log_px(m);
    for (size_t xi = 0; xi < m; ++xi) log_px[xi] = safe_log(config.local.probs[xi]);
    auto value = [&](uint64_t r) {
        thread_local RoundDraw draw;
        thread_local std::vector<double> scores;
        draw_round(config, seed, r, draw);
        scores.resize(m);
        for (size_t xi = 0; xi < m; ++xi)
            scores[xi] = log_px[xi] + channel.given_x[xi].logpdf(draw.z_c);
        const double lz = log_sum_exp(scores);
        return -(scores[draw.x[sensor]] - lz);
    };
    return accumulate(n, seed, workers, value);
}

McEstimate mc_error_prob(const SystemConfig& config, const ChannelTable& table, long M,
                         Scheme scheme, long n, uint64_t seed, int workers) {
    if (M != config.num_sensors)
        throw InvalidParameterError("mc_error_prob: M does not match config");
    if (scheme == Scheme::local) {
        const SensorScorer scorer(config, 0);
        if (config.common.size() != 2)
            throw UnsupportedConfigError("mc_error_prob: binary common process required");
        const double lp1 = safe_log(config.common.probs[0]);
        const double lp2 = safe_log(config.common.probs[1]);
        auto value = [&, lp1, lp2](uint64_t r) {
            thread_local RoundDraw draw;
            draw_round(config, seed, r, draw);
            long count = 0;
            for (long i = 0; i < M; ++i)
                if (scorer.map(draw.z[i]) == 0) ++count;
            const int fused =
                fuse_decision_y1(count, M, lp1, lp2, table.crossover_p, table.crossover_q) ? 0 : 1;
            return fused == draw.y ? 0.0 : 1.0;
        };
        return accumulate(n, seed, workers, value);
    }
    const GlobalChannel channel = make_global_channel(config, 0);
    auto value = [&](uint64_t r) {
        thread_local RoundDraw draw;
        draw_round(config, seed, r, draw);
        return global_map_y(draw.z_c, config, channel) == draw.y ? 0.0 : 1.0;
    };
    return accumulate(n, seed, workers, value);
}

McEstimate mc_x_misestimation_local(const SystemConfig& config, const ChannelTable& table, long M,
                                    long n, uint64_t seed, int workers) {
    const LocalReducedJoint joint = local_reduced_joint(config, table, M);
    const SensorScorer scorer(config, 0);
    auto value = [&](uint64_t r) {
        thread_local RoundDraw draw;
        draw_round(config, seed, r, draw);
        const int yhat1 = scorer.map(draw.z[0]);
        long k = 0;
        for (long i = 1; i < M; ++i)
            if (scorer.map(draw.z[i]) == 0) ++k;
        return joint.map_x(yhat1, k) == draw.x[0] ? 0.0 : 1.0;
    };
    return accumulate(n, seed, workers, value);
}

ChannelTable mc_crossover(const SystemConfig& config, int sensor, long n, uint64_t seed) {
    config.validate();
    if (n < 1) throw InvalidParameterError("mc_crossover: n must be >= 1");
    const SensorScorer scorer(config, sensor);
    const double sigma = config.noise.sensor_sigmas[sensor];
    const size_t ny = config.common.size();
    const size_t m = config.local.size();

    ChannelTable table;
    table.cond.assign(ny, std::vector<std::vector<double>>(m, std::vector<double>(ny, 0.0)));
    for (size_t yi = 0; yi < ny; ++yi)
        for (size_t xi = 0; xi < m; ++xi) {
            const uint32_t purpose =
                static_cast<uint32_t>(StreamPurpose::forced_noise_base) +
                static_cast<uint32_t>(yi * m + xi);
            const double mean = config.common.values[yi] + config.local.values[xi];
            std::vector<long> counts(ny, 0);
            for (long r = 0; r < n; ++r) {
                Substream stream(seed, static_cast<uint64_t>(r), purpose);
                const double z = mean + sigma * stream.next_gaussian();
                ++counts[scorer.map(z)];
            }
            double rest = 0.0;
            for (size_t hi = 0; hi + 1 < ny; ++hi) {
                table.cond[hi][xi][yi] = static_cast<double>(counts[hi]) / n;
                rest += table.cond[hi][xi][yi];
            }
            table.cond[ny - 1][xi][yi] = 1.0 - rest;  // rows sum to 1 exactly
        }

    table.marg.assign(ny, std::vector<double>(ny, 0.0));
    for (size_t hi = 0; hi < ny; ++hi)
        for (size_t yi = 0; yi < ny; ++yi)
            for (size_t xi = 0; xi < m; ++xi)
                table.marg[hi][yi] += config.local.probs[xi] * table.cond[hi][xi][yi];
    table.crossover_p = table.marg[0][0];
    table.crossover_q = ny == 2 ? table.marg[1][1] : std::numeric_limits<double>::quiet_NaN();
    return table;
}

}  // namespace sensorpriv
