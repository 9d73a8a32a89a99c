#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "hirise/analog_sensor.hpp"

using namespace hirise;

namespace {

// Independent circuit oracle: bisect the KCL current balance at the common
// node instead of rearranging it into a closed form. factors holds one entry
// per input branch plus the pull-down.
double kcl_node_oracle(std::span<const double> inputs, std::span<const double> factors,
                       double r, double vdd) {
    const auto n = inputs.size();
    const auto balance = [&](double v) {
        double current = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            current += (inputs[j] - v) / (static_cast<double>(n) * r * factors[j]);
        }
        current += (-vdd - v) / (r * factors[n]);
        return current;
    };
    double lo = -10.0 * vdd - 10.0;
    double hi = 10.0 * vdd + 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (balance(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_CASE("matched averaging network sits at half the shifted mean") {
    CircuitParams params;
    const std::vector<double> inputs{0.25, 0.5, 0.75};

    // Binary-exact inputs, so the node lands on -0.25 exactly.
    CHECK(resistor_network_node_voltage(inputs, params, 1.0) == -0.25);
    CHECK(analog_average(inputs, params, 1.0) == 0.5);

    const std::vector<double> factors(inputs.size() + 1, 1.0);
    CHECK(resistor_network_node_voltage(inputs, params, 1.0) ==
          doctest::Approx(kcl_node_oracle(inputs, factors, params.base_resistance, 1.0))
              .epsilon(1e-12));
}

TEST_CASE("rail inputs land exactly on the window endpoints") {
    CircuitParams params;
    // 0.8 V is not binary-exact; naive summation would round past the rails.
    for (const double vdd : {0.8, 1.0}) {
        for (const std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{64},
                                    std::size_t{192}}) {
            const std::vector<double> high(n, vdd), low(n, 0.0);
            CHECK(resistor_network_node_voltage(high, params, vdd) == 0.0);
            CHECK(resistor_network_node_voltage(low, params, vdd) == -vdd / 2.0);
            CHECK(analog_average(high, params, vdd) == vdd);
            CHECK(analog_average(low, params, vdd) == 0.0);
            CHECK(check_operating_region(high, params, vdd));
            CHECK(check_operating_region(low, params, vdd));
        }
    }
}

TEST_CASE("node voltage equals the KCL solution for random mismatched branches") {
    std::mt19937_64 rng(0xC1C0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng() % 192;
        const double vdd = 0.6 + unit(rng);
        std::vector<double> inputs(n);
        for (auto& v : inputs) v = unit(rng) * vdd;

        CircuitParams params;
        params.mismatch_sigma = 0.02 + 0.18 * unit(rng);
        params.rng_seed = rng();

        std::mt19937_64 factor_rng(params.rng_seed);
        const auto factors = mismatch_factors(params.mismatch_sigma, n + 1, factor_rng);
        const double expected =
            kcl_node_oracle(inputs, factors, params.base_resistance, vdd);

        CHECK(resistor_network_node_voltage(inputs, params, vdd) ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("node voltage stays inside the transistor operating window") {
    std::mt19937_64 rng(7);
    CircuitParams params;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 64;
        std::vector<double> inputs(n);
        for (auto& v : inputs) v = unit(rng);
        const double node = resistor_network_node_voltage(inputs, params, 1.0);
        CHECK(node <= 0.0);
        CHECK(node >= -0.5);
        CHECK(check_operating_region(inputs, params, 1.0));
    }

    // An out-of-rail input pushes the node above ground.
    const std::vector<double> hot{3.0};
    CHECK(resistor_network_node_voltage(hot, params, 1.0) == 1.0);
    CHECK_FALSE(check_operating_region(hot, params, 1.0));
}

TEST_CASE("empty branch set is rejected") {
    CircuitParams params;
    const std::vector<double> none;
    CHECK_THROWS_AS(resistor_network_node_voltage(none, params, 1.0), EmptyBranchSet);
    CHECK_THROWS_AS(analog_average(none, params, 1.0), EmptyBranchSet);
}

TEST_CASE("mismatch factors are reproducible and unity when disabled") {
    CircuitParams params;
    params.mismatch_sigma = 0.0;
    for (double f : mismatch_factors(params, 16)) CHECK(f == 1.0);

    params.mismatch_sigma = 0.1;
    params.rng_seed = 99;
    const auto a = mismatch_factors(params, 16);
    const auto b = mismatch_factors(params, 16);
    CHECK(a == b);
    for (double f : a) CHECK(f > 0.0);

    // Log of a lognormal(0, sigma) factor averages to ~0.
    std::mt19937_64 rng(1);
    const auto many = mismatch_factors(0.1, 20000, rng);
    double log_sum = 0.0;
    for (double f : many) log_sum += std::log(f);
    CHECK(std::abs(log_sum / 20000.0) < 0.01);
}

TEST_CASE("mismatched average is a convex combination of the inputs") {
    std::mt19937_64 rng(0xA7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 63;
        std::vector<double> inputs(n);
        for (auto& v : inputs) v = unit(rng);

        CircuitParams params;
        params.mismatch_sigma = 0.15;
        params.rng_seed = rng();
        const double avg = analog_average(inputs, params, 1.0);

        double lo = 1.0, hi = 0.0;
        for (double v : inputs) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(avg >= lo);
        CHECK(avg <= hi);
    }
}

TEST_CASE("quantizer endpoints, midpoint and clamping") {
    CHECK(quantize_code(0.0, 1.0, 8) == 0);
    CHECK(quantize_code(1.0, 1.0, 8) == 255);
    CHECK(quantize_code(0.5, 1.0, 8) == 128);   // 127.5 rounds away from zero
    CHECK(quantize_code(0.25, 1.0, 8) == 64);
    CHECK(quantize_code(1.2, 1.0, 8) == 255);
    CHECK(quantize_code(-0.3, 1.0, 8) == 0);
    CHECK(quantize_code(1.0, 1.0, 16) == 65535);
    CHECK(quantize_code(0.49, 1.0, 1) == 0);
    CHECK(quantize_code(0.51, 1.0, 1) == 1);
    CHECK(quantize_code(0.5, 3.3, 8) == quantize_code(0.5 / 3.3, 1.0, 8));
}

TEST_CASE("quantizer is monotone and stable under re-conversion") {
    std::uint16_t prev = 0;
    for (int i = 0; i <= 4096; ++i) {
        const double v = static_cast<double>(i) / 4096.0;
        const auto code = quantize_code(v, 1.0, 8);
        CHECK(code >= prev);
        prev = code;

        // Reconstruct and convert again: same code.
        const double back = static_cast<double>(code) / 255.0;
        CHECK(quantize_code(back, 1.0, 8) == code);
    }
}

TEST_CASE("rgb pooling averages each channel over its k x k block") {
    SensorConfig cfg;
    cfg.width = 4;
    cfg.height = 2;
    cfg.pool_k = 2;

    PixelArray src(4, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) src.at(x, y, c) = (x + 4 * y + 8 * c) / 100.0;

    const auto pooled = pool_frame(src, cfg);
    REQUIRE(pooled.width == 2);
    REQUIRE(pooled.height == 1);
    REQUIRE(pooled.channels == 3);
    const std::vector<double> expected{0.025, 0.105, 0.185, 0.045, 0.125, 0.205};
    REQUIRE(pooled.values.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(pooled.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("grayscale pooling folds all three channels into one branch set") {
    SensorConfig cfg;
    cfg.width = 4;
    cfg.height = 2;
    cfg.pool_k = 2;
    cfg.color_mode = ColorMode::Gray;

    PixelArray src(4, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) src.at(x, y, c) = (x + 4 * y + 8 * c) / 100.0;

    const auto pooled = pool_frame(src, cfg);
    REQUIRE(pooled.channels == 1);
    REQUIRE(pooled.values.size() == 2);
    CHECK(pooled.values[0] == doctest::Approx(0.105).epsilon(1e-12));
    CHECK(pooled.values[1] == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("k = 1 rgb pooling is the identity") {
    SensorConfig cfg;
    cfg.width = 3;
    cfg.height = 2;

    PixelArray src(3, 2);
    for (std::size_t i = 0; i < src.data.size(); ++i) {
        src.data[i] = static_cast<double>(i) / 64.0;
    }
    const auto pooled = pool_frame(src, cfg);
    CHECK(pooled.values == src.data);
}

TEST_CASE("pooling under mismatch is deterministic per seed and bounded") {
    SensorConfig cfg;
    cfg.width = 8;
    cfg.height = 8;
    cfg.pool_k = 4;
    cfg.circuit.mismatch_sigma = 0.05;
    cfg.circuit.rng_seed = 11;

    PixelArray src(8, 8);
    std::mt19937_64 rng(3);
    for (auto& v : src.data) v = unit(rng);

    const auto a = pool_frame(src, cfg);
    const auto b = pool_frame(src, cfg);
    CHECK(a.values == b.values);
    for (double v : a.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    cfg.circuit.rng_seed = 12;
    const auto c = pool_frame(src, cfg);
    CHECK(a.values != c.values);

    cfg.circuit.mismatch_sigma = 0.0;
    const auto matched = pool_frame(src, cfg);
    for (std::size_t i = 0; i < matched.values.size(); ++i) {
        // Small spread keeps the weighted mean near the plain mean.
        CHECK(a.values[i] == doctest::Approx(matched.values[i]).epsilon(0.15));
    }
}

TEST_CASE("configuration validation rejects broken setups") {
    SensorConfig cfg;
    cfg.width = 65;
    cfg.height = 48;
    cfg.pool_k = 8;
    CHECK_THROWS_AS(cfg.validate(), GeometryError);

    cfg.width = 64;
    cfg.height = 50;
    CHECK_THROWS_AS(cfg.validate(), GeometryError);

    cfg.height = 48;
    cfg.adc_bits = 17;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.adc_bits = 8;
    cfg.word_bits = 12;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.word_bits = 16;
    cfg.circuit.vth = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.circuit.vth = 0.3;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.pooled_width() == 8);
    CHECK(cfg.pooled_height() == 6);
    CHECK(cfg.stage1_channels() == 3);

    PixelArray wrong(32, 48);
    CHECK_THROWS_AS(pool_frame(wrong, cfg), GeometryError);
}

TEST_CASE("adc conversion counts every sample once") {
    SensorConfig cfg;
    cfg.width = 4;
    cfg.height = 2;

    AnalogFrame frame;
    frame.width = 4;
    frame.height = 2;
    frame.channels = 3;
    frame.values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7,
                    0.8, 0.9, 1.0, 0.05, 0.15, 0.25, 0.35, 0.45,
                    0.55, 0.65, 0.75, 0.85, 0.95, 0.12, 0.34, 0.56};
    const auto digital = adc_convert(frame, cfg);
    CHECK(digital.conversion_count == 24);
    REQUIRE(digital.codes.size() == 24);
    for (std::size_t i = 0; i < frame.values.size(); ++i) {
        CHECK(digital.codes[i] == quantize_code(frame.values[i], cfg.vdd, cfg.adc_bits));
    }
}

TEST_CASE("roi extraction copies the window row by row") {
    PixelArray src(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) src.at(x, y, c) = x + 10 * y + 100 * c;

    const auto roi = extract_roi(src, {1, 2, 2, 2});
    REQUIRE(roi.width == 2);
    REQUIRE(roi.height == 2);
    const std::vector<double> expected{21, 121, 221, 22, 122, 222,
                                       31, 131, 231, 32, 132, 232};
    CHECK(roi.values == expected);

    CHECK_THROWS_AS(extract_roi(src, {3, 3, 2, 2}), GeometryError);
    CHECK_THROWS_AS(extract_roi(src, {-1, 0, 2, 2}), GeometryError);
    CHECK_THROWS_AS(extract_roi(src, {0, 0, 0, 1}), GeometryError);
}
