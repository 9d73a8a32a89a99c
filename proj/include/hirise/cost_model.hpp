#pragma once

// Closed-form accounting for the two-stage pipeline against the conventional
// ship-every-pixel baseline: bytes moved in each direction, buffer memory,
// ADC conversions, and the conversion-dominated energy model. All byte and
// count fields are exact integers; displayed kilobytes are decimal.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hirise/analog_sensor.hpp"
#include "hirise/geometry.hpp"

namespace hirise {

// Streamed: ROI crops are buffered one at a time, so stage-2 memory is the
// largest single crop. Batched: all crops are held at once.
enum class MemoryMode { Streamed, Batched };

struct CostInputs {
    int width = 0;
    int height = 0;
    int pool_k = 1;
    int adc_bits = 8;
    int word_bits = 16;
    int stage1_channels = 3;         // 3 = RGB pooling, 1 = grayscale pooling
    std::vector<RoiBox> roi_list;    // positions only matter in union mode
    MemoryMode memory_mode = MemoryMode::Streamed;
    bool dedup_union = false;        // count overlapping ROI pixels once

    void validate() const;

    [[nodiscard]] static CostInputs from_config(const SensorConfig& cfg,
                                                std::vector<RoiBox> delivered);
};

struct CostReport {
    // conventional single-shot system
    std::int64_t d_old = 0;
    std::int64_t mem_old = 0;
    std::int64_t c_old = 0;
    // stage 1: pooled frame up, box words back
    std::int64_t d1_sp = 0;
    std::int64_t d1_ps = 0;
    std::int64_t m1_sp = 0;
    std::int64_t m1_ps = 0;
    std::int64_t c1_sp = 0;
    // stage 2: full-resolution ROI payload
    std::int64_t d2_sp = 0;
    std::int64_t m2_sp = 0;
    std::int64_t c2_sp = 0;
    // combined
    std::int64_t d_new = 0;          // d1_sp + d1_ps + d2_sp
    std::int64_t mem_new = 0;        // max(m1_sp, m2_sp)
    std::int64_t c_new = 0;          // c1_sp + c2_sp
};

[[nodiscard]] CostReport analytical_costs(const CostInputs& in);

// Pixel count of the union of boxes (degenerate boxes ignored), by plane
// sweep over compressed x coordinates.
[[nodiscard]] std::int64_t union_area(std::span<const RoiBox> boxes);

struct ReductionFactors {
    double data = 0.0;          // d_old / d_new
    double memory = 0.0;        // mem_old / mem_new
    double conversions = 0.0;   // c_old / c_new
    bool data_satisfied = false;          // strictly better than baseline
    bool memory_satisfied = false;
    bool conversions_satisfied = false;
};

// Throws ConfigError when a denominator is zero (empty session).
[[nodiscard]] ReductionFactors reduction_factors(const CostReport& report);

struct StageFractions {
    double f1 = 0.0;      // d1_sp / d_new
    double f2 = 0.0;      // d2_sp / d_new
    double f_req = 0.0;   // d1_ps / d_new
};

[[nodiscard]] StageFractions stage_fractions(const CostReport& report);

// Per-conversion energy anchored so a full 2560 x 1920 RGB frame through the
// 8-bit converter costs 1.85 mJ.
inline constexpr double kDefaultAdcEnergy = 1.85e-3 / 14'745'600.0;   // joules

struct EnergyParams {
    double e_adc = kDefaultAdcEnergy;   // J per conversion
    double e_pool_per_frame = 0.0;      // J, averaging network per frame
    double e_transfer_per_bit = 0.0;    // J per transferred bit
};

// e_total = e_stage1 + e_stage2 + e_pooling. The pooling network's own draw
// is kept out of e_stage1 so the three components add without double
// counting.
struct EnergyReport {
    double e_stage1 = 0.0;
    double e_stage2 = 0.0;
    double e_pooling = 0.0;
    double e_total = 0.0;
    double e_baseline = 0.0;
    double reduction_factor = 0.0;   // e_baseline / e_total; 0 when undefined
};

[[nodiscard]] EnergyReport energy(const CostReport& report, const EnergyParams& params);

// Static footprint of one inference model.
struct MemoryProfile {
    std::string model;
    std::int64_t peak_activation_sram = 0;   // bytes
    std::int64_t weight_flash = 0;           // bytes
};

enum class SystemMode { Baseline, TwoStage };

struct SramUsage {
    std::int64_t total_sram = 0;   // worst model peak + image buffer
    std::int64_t flash = 0;        // stage weights summed
};

// Baseline buffers the whole frame next to the model; the two-stage system
// only ever holds the pooled frame or one crop batch (report.mem_new).
[[nodiscard]] SramUsage peak_sram(const MemoryProfile& stage1, const MemoryProfile& stage2,
                                  const CostReport& report, SystemMode mode);

[[nodiscard]] nlohmann::ordered_json cost_to_json(const CostReport& report);
[[nodiscard]] nlohmann::ordered_json energy_to_json(const EnergyReport& report);

// Flat row serialization with fixed column order.
[[nodiscard]] std::string cost_csv_header();
[[nodiscard]] std::string cost_csv_row(const CostReport& report, const EnergyReport& e);

}  // namespace hirise
