#pragma once

// Behavioral model of the in-sensor front end: the resistor-network averaging
// circuit, analog pooling / grayscale conversion, ADC quantization, and
// full-resolution ROI extraction.
//
// The averaging circuit is N source-follower-driven branches of resistance
// N*R joined at a common node that is pulled to -VDD through R. Followers are
// treated as ideal buffers, switches as ideal, so the node solves by plain
// nodal analysis; with matched resistors the node sits at (mean - VDD) / 2
// and the buffered average equals the mean of the inputs.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hirise/errors.hpp"
#include "hirise/geometry.hpp"

namespace hirise {

enum class ColorMode { Rgb, Gray };

// Equivalent-circuit parameters. Only resistance ratios matter for a matched
// network; base_resistance anchors the mismatch model, which perturbs every
// resistor by a lognormal factor exp(sigma * z) drawn deterministically from
// rng_seed.
struct CircuitParams {
    double base_resistance = 10e3;   // ohms
    double vth = 0.3;                // volts, follower threshold
    double mismatch_sigma = 0.0;     // relative resistor spread; 0 = matched
    std::uint64_t rng_seed = 0;
};

struct SensorConfig {
    int width = 0;
    int height = 0;
    int pool_k = 1;                  // must divide width and height exactly
    ColorMode color_mode = ColorMode::Rgb;
    int adc_bits = 8;                // 1..16
    double vdd = 1.0;                // volts
    int word_bits = 16;              // bits per box-coordinate word (8/16/32)
    CircuitParams circuit;

    // Throws GeometryError (divisibility) or ConfigError (ranges).
    void validate() const;

    [[nodiscard]] int pooled_width() const { return width / pool_k; }
    [[nodiscard]] int pooled_height() const { return height / pool_k; }
    [[nodiscard]] int stage1_channels() const {
        return color_mode == ColorMode::Rgb ? 3 : 1;
    }
};

// Full-resolution analog image: row-major, channel-interleaved R,G,B volts,
// every value in [0, VDD].
struct PixelArray {
    static constexpr int channels = 3;

    int width = 0;
    int height = 0;
    std::vector<double> data;

    PixelArray() = default;
    PixelArray(int w, int h, double fill = 0.0);

    [[nodiscard]] std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    [[nodiscard]] double at(int x, int y, int c) const { return data[index(x, y, c)]; }
    double& at(int x, int y, int c) { return data[index(x, y, c)]; }
    [[nodiscard]] std::int64_t value_count() const {
        return static_cast<std::int64_t>(data.size());
    }
};

// Pooled (or cropped) analog plane stack, channel-interleaved volts.
struct AnalogFrame {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> values;
};

// Quantized frame; conversion_count is the number of ADC operations spent
// producing it (one per stored code).
struct DigitalFrame {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint16_t> codes;
    std::int64_t conversion_count = 0;
};

// Multiplicative resistance factors for branch_count branches (the input
// branches first, the pull-down branch last), drawn from params.rng_seed.
// All ones when mismatch_sigma == 0.
[[nodiscard]] std::vector<double> mismatch_factors(const CircuitParams& params,
                                                   std::size_t branch_count);
[[nodiscard]] std::vector<double> mismatch_factors(double sigma, std::size_t branch_count,
                                                   std::mt19937_64& rng);

// Voltage of the common node. Matched network: (mean(inputs) - vdd) / 2,
// exactly. Mismatched: the weighted nodal solution over all N+1 branches.
// Throws EmptyBranchSet when inputs is empty.
[[nodiscard]] double resistor_network_node_voltage(std::span<const double> inputs,
                                                   const CircuitParams& params, double vdd);
[[nodiscard]] double resistor_network_node_voltage(std::span<const double> inputs,
                                                   const CircuitParams& params, double vdd,
                                                   std::mt19937_64& rng);

// Averaged output as read through the follower: mean(inputs) when matched,
// the conductance-weighted mean under mismatch, clamped to [0, vdd].
[[nodiscard]] double analog_average(std::span<const double> inputs,
                                    const CircuitParams& params, double vdd);
[[nodiscard]] double analog_average(std::span<const double> inputs,
                                    const CircuitParams& params, double vdd,
                                    std::mt19937_64& rng);

// Design condition on the common node: it must stay within [-vdd/2, 0] so
// every follower keeps saturation headroom across the full input range.
[[nodiscard]] bool check_operating_region(std::span<const double> inputs,
                                          const CircuitParams& params, double vdd);

// k x k average pooling. Rgb pools each channel over k*k inputs; Gray pools
// all three channels together over 3*k*k inputs (k = 1 thus averages the
// three channels of each pixel). Rgb with k = 1 is the identity.
[[nodiscard]] AnalogFrame pool_frame(const PixelArray& src, const SensorConfig& cfg);

// code = round(v / vdd * (2^bits - 1)), halves away from zero, clamped to
// [0, 2^bits - 1].
[[nodiscard]] std::uint16_t quantize_code(double v, double vdd, int bits);

// Quantizes every value; conversion_count == width * height * channels.
[[nodiscard]] DigitalFrame adc_convert(const AnalogFrame& frame, const SensorConfig& cfg);

// Full-resolution RGB crop. The box must lie inside the array.
[[nodiscard]] AnalogFrame extract_roi(const PixelArray& src, const RoiBox& box);

}  // namespace hirise
