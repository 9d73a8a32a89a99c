#include "hirise/analog_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hirise {

namespace {

// Uniform draw in (0, 1], then Box-Muller. Hand-rolled so the factor stream
// is identical on every platform for a given seed.
double unit_open(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
    const double u1 = unit_open(rng);
    const double u2 = unit_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void require_nonempty(std::span<const double> inputs) {
    if (inputs.empty()) {
        throw EmptyBranchSet("averaging network needs at least one input branch");
    }
}

double plain_mean(std::span<const double> inputs) {
    // The exact mean of identical values is that value. Summing first can
    // round on rails like 0.8 V and push the node past the 0 V boundary.
    const double first = inputs.front();
    if (std::all_of(inputs.begin(), inputs.end(), [&](double v) { return v == first; })) {
        return first;
    }
    double sum = 0.0;
    for (double v : inputs) sum += v;
    return sum / static_cast<double>(inputs.size());
}

}  // namespace

void SensorConfig::validate() const {
    if (width < 1 || height < 1) {
        throw ConfigError("array size must be at least 1 x 1");
    }
    if (pool_k < 1) {
        throw ConfigError("pool factor must be at least 1");
    }
    if (width % pool_k != 0) {
        throw GeometryError("pool factor " + std::to_string(pool_k) +
                            " does not divide width " + std::to_string(width));
    }
    if (height % pool_k != 0) {
        throw GeometryError("pool factor " + std::to_string(pool_k) +
                            " does not divide height " + std::to_string(height));
    }
    if (adc_bits < 1 || adc_bits > 16) {
        throw ConfigError("adc_bits must be in [1, 16]");
    }
    if (word_bits != 8 && word_bits != 16 && word_bits != 32) {
        throw ConfigError("word_bits must be 8, 16 or 32");
    }
    if (vdd <= 0.0) {
        throw ConfigError("vdd must be positive");
    }
    if (circuit.base_resistance <= 0.0) {
        throw ConfigError("base_resistance must be positive");
    }
    if (circuit.mismatch_sigma < 0.0) {
        throw ConfigError("mismatch_sigma must be non-negative");
    }
    if (circuit.vth <= 0.0 || circuit.vth >= vdd) {
        throw ConfigError("vth must lie strictly between 0 and vdd");
    }
}

PixelArray::PixelArray(int w, int h, double fill)
    : width(w), height(h),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels, fill) {}

std::vector<double> mismatch_factors(double sigma, std::size_t branch_count,
                                     std::mt19937_64& rng) {
    std::vector<double> factors(branch_count, 1.0);
    if (sigma > 0.0) {
        for (auto& f : factors) f = std::exp(sigma * standard_normal(rng));
    }
    return factors;
}

std::vector<double> mismatch_factors(const CircuitParams& params, std::size_t branch_count) {
    std::mt19937_64 rng(params.rng_seed);
    return mismatch_factors(params.mismatch_sigma, branch_count, rng);
}

double resistor_network_node_voltage(std::span<const double> inputs,
                                     const CircuitParams& params, double vdd,
                                     std::mt19937_64& rng) {
    require_nonempty(inputs);
    if (params.mismatch_sigma == 0.0) {
        // Matched branches: sum of (v_i - G)/(N R) plus (-vdd - G)/R is zero,
        // which collapses to G = (mean - vdd) / 2.
        return (plain_mean(inputs) - vdd) / 2.0;
    }
    const std::size_t n = inputs.size();
    const auto factors = mismatch_factors(params.mismatch_sigma, n + 1, rng);
    const double r = params.base_resistance;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = 1.0 / (static_cast<double>(n) * r * factors[i]);
        num += g * inputs[i];
        den += g;
    }
    const double g_pull = 1.0 / (r * factors[n]);
    num += g_pull * (-vdd);
    den += g_pull;
    return num / den;
}

double resistor_network_node_voltage(std::span<const double> inputs,
                                     const CircuitParams& params, double vdd) {
    std::mt19937_64 rng(params.rng_seed);
    return resistor_network_node_voltage(inputs, params, vdd, rng);
}

double analog_average(std::span<const double> inputs, const CircuitParams& params,
                      double vdd, std::mt19937_64& rng) {
    require_nonempty(inputs);
    double avg;
    if (params.mismatch_sigma == 0.0) {
        avg = plain_mean(inputs);
    } else {
        // Same factor stream as the node solve: input branches first, then
        // the pull-down (drawn but irrelevant to the buffered average).
        const std::size_t n = inputs.size();
        const auto factors = mismatch_factors(params.mismatch_sigma, n + 1, rng);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = 1.0 / (static_cast<double>(n) * factors[i]);
            num += g * inputs[i];
            den += g;
        }
        avg = num / den;
    }
    return std::clamp(avg, 0.0, vdd);
}

double analog_average(std::span<const double> inputs, const CircuitParams& params,
                      double vdd) {
    std::mt19937_64 rng(params.rng_seed);
    return analog_average(inputs, params, vdd, rng);
}

bool check_operating_region(std::span<const double> inputs, const CircuitParams& params,
                            double vdd) {
    const double node = resistor_network_node_voltage(inputs, params, vdd);
    return node <= 0.0 && node >= -vdd / 2.0;
}

AnalogFrame pool_frame(const PixelArray& src, const SensorConfig& cfg) {
    cfg.validate();
    if (src.width != cfg.width || src.height != cfg.height) {
        throw GeometryError("pixel array is " + std::to_string(src.width) + " x " +
                            std::to_string(src.height) + ", config expects " +
                            std::to_string(cfg.width) + " x " + std::to_string(cfg.height));
    }
    const int k = cfg.pool_k;
    const int ow = cfg.pooled_width();
    const int oh = cfg.pooled_height();
    const int oc = cfg.stage1_channels();

    AnalogFrame out;
    out.width = ow;
    out.height = oh;
    out.channels = oc;
    out.values.resize(static_cast<std::size_t>(ow) * oh * oc);

    std::mt19937_64 rng(cfg.circuit.rng_seed);
    std::vector<double> block;
    block.reserve(static_cast<std::size_t>(k) * k * PixelArray::channels);

    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            if (cfg.color_mode == ColorMode::Rgb) {
                for (int c = 0; c < 3; ++c) {
                    block.clear();
                    for (int dy = 0; dy < k; ++dy) {
                        for (int dx = 0; dx < k; ++dx) {
                            block.push_back(src.at(ox * k + dx, oy * k + dy, c));
                        }
                    }
                    out.values[(static_cast<std::size_t>(oy) * ow + ox) * 3 + c] =
                        analog_average(block, cfg.circuit, cfg.vdd, rng);
                }
            } else {
                block.clear();
                for (int dy = 0; dy < k; ++dy) {
                    for (int dx = 0; dx < k; ++dx) {
                        for (int c = 0; c < 3; ++c) {
                            block.push_back(src.at(ox * k + dx, oy * k + dy, c));
                        }
                    }
                }
                out.values[static_cast<std::size_t>(oy) * ow + ox] =
                    analog_average(block, cfg.circuit, cfg.vdd, rng);
            }
        }
    }
    return out;
}

std::uint16_t quantize_code(double v, double vdd, int bits) {
    const long long max_code = (1LL << bits) - 1;
    long long code = std::llround(v / vdd * static_cast<double>(max_code));
    code = std::clamp(code, 0LL, max_code);
    return static_cast<std::uint16_t>(code);
}

DigitalFrame adc_convert(const AnalogFrame& frame, const SensorConfig& cfg) {
    DigitalFrame out;
    out.width = frame.width;
    out.height = frame.height;
    out.channels = frame.channels;
    out.codes.reserve(frame.values.size());
    for (double v : frame.values) {
        out.codes.push_back(quantize_code(v, cfg.vdd, cfg.adc_bits));
    }
    out.conversion_count = static_cast<std::int64_t>(out.codes.size());
    return out;
}

AnalogFrame extract_roi(const PixelArray& src, const RoiBox& box) {
    if (!box_within(box, src.width, src.height)) {
        throw GeometryError("roi [" + std::to_string(box.x) + "," + std::to_string(box.y) +
                            "," + std::to_string(box.w) + "," + std::to_string(box.h) +
                            "] leaves the " + std::to_string(src.width) + " x " +
                            std::to_string(src.height) + " array");
    }
    AnalogFrame out;
    out.width = box.w;
    out.height = box.h;
    out.channels = PixelArray::channels;
    out.values.reserve(static_cast<std::size_t>(box.w) * box.h * PixelArray::channels);
    for (int y = box.y; y < box.y + box.h; ++y) {
        const auto row_begin = src.data.begin() +
            static_cast<std::ptrdiff_t>(src.index(box.x, y, 0));
        out.values.insert(out.values.end(), row_begin,
                          row_begin + static_cast<std::ptrdiff_t>(box.w) * PixelArray::channels);
    }
    return out;
}

}  // namespace hirise
