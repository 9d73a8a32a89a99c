#include "hirise/cost_model.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

namespace hirise {

void CostInputs::validate() const {
    if (width < 1 || height < 1) {
        throw ConfigError("array size must be at least 1 x 1");
    }
    if (pool_k < 1) {
        throw ConfigError("pool factor must be at least 1");
    }
    if (width % pool_k != 0 || height % pool_k != 0) {
        throw GeometryError("pool factor " + std::to_string(pool_k) + " does not divide " +
                            std::to_string(width) + " x " + std::to_string(height));
    }
    if (adc_bits < 1 || adc_bits > 16) {
        throw ConfigError("adc_bits must be in [1, 16]");
    }
    if (word_bits != 8 && word_bits != 16 && word_bits != 32) {
        throw ConfigError("word_bits must be 8, 16 or 32");
    }
    if (stage1_channels != 1 && stage1_channels != 3) {
        throw ConfigError("stage1_channels must be 1 or 3");
    }
    for (const auto& b : roi_list) {
        if (b.w < 1 || b.h < 1) {
            throw ConfigError("roi extents must be at least 1 x 1");
        }
    }
}

CostInputs CostInputs::from_config(const SensorConfig& cfg, std::vector<RoiBox> delivered) {
    CostInputs in;
    in.width = cfg.width;
    in.height = cfg.height;
    in.pool_k = cfg.pool_k;
    in.adc_bits = cfg.adc_bits;
    in.word_bits = cfg.word_bits;
    in.stage1_channels = cfg.stage1_channels();
    in.roi_list = std::move(delivered);
    return in;
}

std::int64_t union_area(std::span<const RoiBox> boxes) {
    // Compressed-x plane sweep: for every x strip, merge the y intervals of
    // the boxes spanning it.
    std::vector<std::int64_t> xs;
    xs.reserve(boxes.size() * 2);
    for (const auto& b : boxes) {
        if (b.w <= 0 || b.h <= 0) continue;
        xs.push_back(b.x);
        xs.push_back(static_cast<std::int64_t>(b.x) + b.w);
    }
    if (xs.empty()) return 0;
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::int64_t area = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const std::int64_t x0 = xs[i];
        const std::int64_t x1 = xs[i + 1];
        intervals.clear();
        for (const auto& b : boxes) {
            if (b.w <= 0 || b.h <= 0) continue;
            if (b.x <= x0 && static_cast<std::int64_t>(b.x) + b.w >= x1) {
                intervals.emplace_back(b.y, static_cast<std::int64_t>(b.y) + b.h);
            }
        }
        if (intervals.empty()) continue;
        std::sort(intervals.begin(), intervals.end());
        std::int64_t covered = 0;
        std::int64_t lo = intervals.front().first;
        std::int64_t hi = intervals.front().second;
        for (const auto& [a, b] : intervals) {
            if (a > hi) {
                covered += hi - lo;
                lo = a;
                hi = b;
            } else {
                hi = std::max(hi, b);
            }
        }
        covered += hi - lo;
        area += covered * (x1 - x0);
    }
    return area;
}

CostReport analytical_costs(const CostInputs& in) {
    in.validate();
    const auto n = static_cast<std::int64_t>(in.width);
    const auto m = static_cast<std::int64_t>(in.height);
    const auto k = static_cast<std::int64_t>(in.pool_k);
    const auto p = static_cast<std::int64_t>(in.adc_bits);

    CostReport r;
    r.c_old = n * m * 3;
    r.d_old = bits_to_bytes(r.c_old * p);
    r.mem_old = r.d_old;

    r.c1_sp = n * m * in.stage1_channels / (k * k);
    r.d1_sp = bits_to_bytes(r.c1_sp * p);
    r.m1_sp = r.d1_sp;

    const auto j = static_cast<std::int64_t>(in.roi_list.size());
    r.d1_ps = bits_to_bytes(j * 4 * in.word_bits);
    r.m1_ps = r.d1_ps;

    std::int64_t roi_pixels = 0;
    std::int64_t largest_crop = 0;
    if (in.dedup_union) {
        roi_pixels = union_area(in.roi_list);
    } else {
        for (const auto& b : in.roi_list) roi_pixels += b.area();
    }
    for (const auto& b : in.roi_list) {
        largest_crop = std::max(largest_crop, bits_to_bytes(3 * b.area() * p));
    }
    r.c2_sp = 3 * roi_pixels;
    r.d2_sp = bits_to_bytes(r.c2_sp * p);
    r.m2_sp = in.memory_mode == MemoryMode::Streamed ? largest_crop : r.d2_sp;

    r.d_new = r.d1_sp + r.d1_ps + r.d2_sp;
    r.c_new = r.c1_sp + r.c2_sp;
    r.mem_new = std::max(r.m1_sp, r.m2_sp);
    return r;
}

ReductionFactors reduction_factors(const CostReport& report) {
    if (report.d_new == 0 || report.mem_new == 0 || report.c_new == 0) {
        throw ConfigError("reduction undefined for an empty session");
    }
    ReductionFactors f;
    f.data = static_cast<double>(report.d_old) / static_cast<double>(report.d_new);
    f.memory = static_cast<double>(report.mem_old) / static_cast<double>(report.mem_new);
    f.conversions = static_cast<double>(report.c_old) / static_cast<double>(report.c_new);
    f.data_satisfied = report.d_new < report.d_old;
    f.memory_satisfied = report.mem_new < report.mem_old;
    f.conversions_satisfied = report.c_new < report.c_old;
    return f;
}

StageFractions stage_fractions(const CostReport& report) {
    if (report.d_new == 0) {
        throw ConfigError("stage fractions undefined for an empty session");
    }
    StageFractions f;
    const auto total = static_cast<double>(report.d_new);
    f.f1 = static_cast<double>(report.d1_sp) / total;
    f.f2 = static_cast<double>(report.d2_sp) / total;
    f.f_req = static_cast<double>(report.d1_ps) / total;
    return f;
}

EnergyReport energy(const CostReport& report, const EnergyParams& params) {
    EnergyReport e;
    e.e_pooling = params.e_pool_per_frame;
    e.e_stage1 = static_cast<double>(report.c1_sp) * params.e_adc +
                 static_cast<double>(report.d1_sp + report.d1_ps) * 8.0 *
                     params.e_transfer_per_bit;
    e.e_stage2 = static_cast<double>(report.c2_sp) * params.e_adc +
                 static_cast<double>(report.d2_sp) * 8.0 * params.e_transfer_per_bit;
    e.e_baseline = static_cast<double>(report.c_old) * params.e_adc +
                   static_cast<double>(report.d_old) * 8.0 * params.e_transfer_per_bit;
    e.e_total = e.e_stage1 + e.e_stage2 + e.e_pooling;
    e.reduction_factor = e.e_total > 0.0 ? e.e_baseline / e.e_total : 0.0;
    return e;
}

SramUsage peak_sram(const MemoryProfile& stage1, const MemoryProfile& stage2,
                    const CostReport& report, SystemMode mode) {
    const std::int64_t model_peak =
        std::max(stage1.peak_activation_sram, stage2.peak_activation_sram);
    SramUsage usage;
    usage.flash = stage1.weight_flash + stage2.weight_flash;
    usage.total_sram = mode == SystemMode::Baseline ? model_peak + report.mem_old
                                                    : model_peak + report.mem_new;
    return usage;
}

nlohmann::ordered_json cost_to_json(const CostReport& r) {
    return {
        {"d_old", r.d_old},   {"d1_sp", r.d1_sp},     {"d1_ps", r.d1_ps},
        {"d2_sp", r.d2_sp},   {"d_new", r.d_new},     {"mem_old", r.mem_old},
        {"m1_sp", r.m1_sp},   {"m1_ps", r.m1_ps},     {"m2_sp", r.m2_sp},
        {"mem_new", r.mem_new}, {"c_old", r.c_old},   {"c1_sp", r.c1_sp},
        {"c2_sp", r.c2_sp},   {"c_new", r.c_new},
    };
}

nlohmann::ordered_json energy_to_json(const EnergyReport& e) {
    return {
        {"e_stage1", e.e_stage1}, {"e_stage2", e.e_stage2},
        {"e_pooling", e.e_pooling}, {"e_total", e.e_total},
        {"e_baseline", e.e_baseline}, {"reduction_factor", e.reduction_factor},
    };
}

std::string cost_csv_header() {
    return "d_old,d1_sp,d1_ps,d2_sp,d_new,mem_new,c_old,c_new,"
           "e_stage1,e_stage2,e_total,e_baseline";
}

std::string cost_csv_row(const CostReport& r, const EnergyReport& e) {
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%.9e,%.9e,%.9e,%.9e",
                  static_cast<long long>(r.d_old), static_cast<long long>(r.d1_sp),
                  static_cast<long long>(r.d1_ps), static_cast<long long>(r.d2_sp),
                  static_cast<long long>(r.d_new), static_cast<long long>(r.mem_new),
                  static_cast<long long>(r.c_old), static_cast<long long>(r.c_new),
                  e.e_stage1, e.e_stage2, e.e_total, e.e_baseline);
    return buf;
}

}  // namespace hirise
