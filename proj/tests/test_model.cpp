#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "sensorpriv/errors.hpp"
#include "sensorpriv/model.hpp"
#include "sensorpriv/rng.hpp"
#include "test_support.hpp"

using namespace sensorpriv;

TEST_CASE("entropy examples") {
    CHECK(entropy(DiscreteDist({0.0, 0.5}, {0.5, 0.5})).nats ==
          doctest::Approx(std::numbers::ln2).epsilon(1e-14));
    CHECK(entropy(DiscreteDist({1.0}, {1.0})).nats == doctest::Approx(0.0));
    CHECK(entropy(DiscreteDist({0.0, 1.0}, {0.25, 0.75})).nats ==
          doctest::Approx(0.5623351446188083).epsilon(1e-13));
    CHECK(EntropyValue{std::numbers::ln2}.bits() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("entropy of random distributions stays within [0, ln m]") {
    Substream stream(11, 0, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const size_t m = 1 + stream.next_u64() % 6;
        std::vector<double> values(m), probs(m);
        double sum = 0.0;
        for (size_t i = 0; i < m; ++i) {
            values[i] = static_cast<double>(i);
            probs[i] = stream.next_uniform();
            sum += probs[i];
        }
        for (double& p : probs) p /= sum;
        const double h = entropy(DiscreteDist(values, probs)).nats;
        CHECK(h >= -1e-12);
        CHECK(h <= std::log(static_cast<double>(m)) + 1e-12);
    }
}

TEST_CASE("kl_discrete examples and errors") {
    std::vector<double> p{0.4, 0.6};
    CHECK(kl_discrete(p, p) == doctest::Approx(0.0));
    std::vector<double> point{1.0, 0.0};
    std::vector<double> uniform{0.5, 0.5};
    CHECK(kl_discrete(point, uniform) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
    std::vector<double> skew{0.9, 0.1};
    CHECK(kl_discrete(skew, uniform) == doctest::Approx(0.3680642071684971).epsilon(1e-13));

    std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(kl_discrete(shorter, uniform), InvalidParameterError);
    std::vector<double> no_support{0.0, 1.0};
    CHECK_THROWS_AS((void)kl_discrete(uniform, no_support), std::domain_error);
    CHECK(kl_discrete(no_support, uniform) == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("kl_discrete is non-negative, zero iff equal") {
    Substream stream(13, 0, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const size_t m = 2 + stream.next_u64() % 4;
        std::vector<double> p(m), q(m);
        double sp = 0.0, sq = 0.0;
        for (size_t i = 0; i < m; ++i) {
            p[i] = 0.01 + stream.next_uniform();
            q[i] = 0.01 + stream.next_uniform();
            sp += p[i];
            sq += q[i];
        }
        for (size_t i = 0; i < m; ++i) {
            p[i] /= sp;
            q[i] /= sq;
        }
        const double d = kl_discrete(p, q);
        CHECK(d >= -1e-12);
        CHECK(kl_discrete(p, p) == doctest::Approx(0.0));
    }
}

TEST_CASE("binary_kl examples, boundaries, and agreement with kl_discrete") {
    CHECK(binary_kl(0.3, 0.3) == doctest::Approx(0.0));
    CHECK(binary_kl(1.0, 0.5) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
    CHECK(binary_kl(0.9, 0.1) == doctest::Approx(1.7577796618689758).epsilon(1e-13));

    // boundary b with mismatched a: infinite divergence, not an exception
    CHECK(binary_kl(0.5, 0.0) == std::numeric_limits<double>::infinity());
    CHECK(binary_kl(0.5, 1.0) == std::numeric_limits<double>::infinity());
    CHECK(binary_kl(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(binary_kl(1.0, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(binary_kl(-0.1, 0.5), InvalidParameterError);
    CHECK_THROWS_AS(binary_kl(0.5, 1.5), InvalidParameterError);

    Substream stream(17, 0, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = stream.next_uniform();
        const double b = 0.01 + 0.98 * stream.next_uniform();
        std::vector<double> p{a, 1.0 - a};
        std::vector<double> q{b, 1.0 - b};
        CHECK(binary_kl(a, b) == kl_discrete(p, q));  // identical arithmetic path
    }
}

TEST_CASE("support_width") {
    CHECK(support_width(DiscreteDist({3.0}, {1.0})) == doctest::Approx(0.0));
    CHECK(support_width(DiscreteDist({0.0, 0.5}, {0.5, 0.5})) == doctest::Approx(0.5));
    CHECK(support_width(DiscreteDist({-1.0, 0.0, 2.0}, {0.2, 0.3, 0.5})) == doctest::Approx(3.0));
}

TEST_CASE("DiscreteDist validation") {
    CHECK_THROWS_AS(DiscreteDist({0.0, 1.0}, {0.5}), InvalidParameterError);
    CHECK_THROWS_AS(DiscreteDist({1.0, 0.0}, {0.5, 0.5}), InvalidParameterError);   // unsorted
    CHECK_THROWS_AS(DiscreteDist({0.0, 0.0}, {0.5, 0.5}), InvalidParameterError);   // duplicate
    CHECK_THROWS_AS(DiscreteDist({0.0, 1.0}, {0.5, 0.4}), InvalidParameterError);   // sum != 1
    CHECK_THROWS_AS(DiscreteDist({0.0, 1.0}, {-0.1, 1.1}), InvalidParameterError);  // negative
    CHECK_THROWS_AS(DiscreteDist({}, {}), InvalidParameterError);
}

TEST_CASE("SystemConfig validation") {
    SystemConfig good = testing::reference_config(3);
    CHECK_NOTHROW(good.validate());

    SystemConfig bad = good;
    bad.noise.sensor_sigmas.pop_back();  // sigma count != M
    CHECK_THROWS_AS(bad.validate(), InvalidParameterError);

    bad = good;
    bad.noise.sensor_sigmas[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameterError);

    bad = good;
    bad.noise.cloud_sigma = -0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidParameterError);

    bad = good;
    bad.noise.sensor_sigmas[2] = 0.2;  // contradicts the homogeneity flag
    CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
    bad.homogeneous_noise = false;
    CHECK_NOTHROW(bad.validate());

    bad = good;
    bad.num_sensors = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameterError);

    bad = good;
    bad.local.probs = {0.6, 0.6};
    CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
}

TEST_CASE("NoiseSpec derived quantities") {
    NoiseSpec noise;
    noise.sensor_sigmas = {0.1, 0.3};
    noise.cloud_sigma = 0.2;
    CHECK(noise.sigma_min_sq() == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(noise.total_variance() == doctest::Approx(0.01 + 0.09 + 0.04).epsilon(1e-14));
}
