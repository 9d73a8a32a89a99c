#pragma once

// Scene and dataset handling: JSON-lines annotations, deterministic synthetic
// scenes, and parameter sweeps that evaluate the cost model per frame and
// aggregate per configuration.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hirise/analog_sensor.hpp"
#include "hirise/cost_model.hpp"
#include "hirise/geometry.hpp"

namespace hirise {

struct AnnotatedFrame {
    std::string frame_id;
    int width = 0;
    int height = 0;
    std::vector<RoiBox> boxes;
    std::string image_path;   // optional companion image
};

struct AnnotationLoadResult {
    std::vector<AnnotatedFrame> frames;
    std::vector<std::string> errors;   // one entry per rejected line
    int clamp_warnings = 0;            // boxes adjusted or dropped
};

// One JSON object per line: {"id", "w", "h", "boxes": [[x,y,W,H], ...]}.
// Malformed lines are collected, not fatal; out-of-bounds boxes are clamped
// into the frame with a warning. Throws IoError when the file cannot be read.
[[nodiscard]] AnnotationLoadResult load_annotations(const std::filesystem::path& path);

struct SynthScene {
    PixelArray image;
    AnnotatedFrame annotation;
};

// Textured background plus box_count bright rectangles at seeded positions.
// Bit-identical for identical arguments.
[[nodiscard]] SynthScene synth_scene(int width, int height, int box_count, int box_w,
                                     int box_h, std::uint64_t seed, double vdd = 1.0);

enum class RoiModelKind { FromAnnotations, FixedBox, ScaledLoad };

struct SweepCase {
    int n = 0;
    int m = 0;
    int k = 1;
};

// Per-model static footprint, one peak-activation entry per sweep case.
struct SweepMemoryProfile {
    std::string model;
    std::int64_t weight_flash = 0;
    std::vector<std::int64_t> peak_activation;
};

struct SweepSpec {
    std::string name;
    std::vector<SweepCase> cases;
    std::vector<ColorMode> color_modes{ColorMode::Rgb};
    RoiModelKind roi_model = RoiModelKind::FixedBox;
    // FixedBox: box_count boxes of box_w x box_h; scaled by k when
    // scale_box_with_k is set (ROI side grows with the array).
    int box_w = 0;
    int box_h = 0;
    std::int64_t box_count = 0;
    bool scale_box_with_k = false;
    // ScaledLoad: total ROI area is load_s * n * m, realized as one synthetic
    // region of round(load_s * n * m) pixels.
    double load_s = 0.0;
    std::string annotations_path;   // FromAnnotations
    int adc_bits = 8;
    int word_bits = 16;
    MemoryMode memory_mode = MemoryMode::Streamed;
    bool dedup_union = false;
    std::optional<EnergyParams> energy;   // overrides the caller's defaults
    std::vector<SweepMemoryProfile> memory_profiles;
};

// Accepts either explicit "cases": [{n, m, k}, ...] or the cross product of
// "sizes": [[n, m], ...] with "ks": [...].
[[nodiscard]] SweepSpec parse_sweep_spec(const nlohmann::ordered_json& doc);
[[nodiscard]] SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct Stats {
    double median = 0.0;   // lower median for even-sized sets
    double mean = 0.0;
    double p95 = 0.0;      // nearest-rank
};

[[nodiscard]] Stats stats_of(std::vector<double> values);

struct ProfileSram {
    std::string model;
    std::int64_t baseline_total = 0;
    std::int64_t two_stage_total = 0;
    std::int64_t flash = 0;
};

// Per-configuration aggregate over the frame set. median_report is the frame
// whose d_new is the lower median; ratio and fraction fields are evaluated on
// it.
struct AggregateReport {
    std::vector<std::string> frame_ids;
    std::vector<CostReport> reports;
    std::vector<EnergyReport> energies;
    CostReport median_report;
    EnergyReport median_energy;
    Stats d_new, c_new, mem_new, e_total;
    std::int64_t d_old = 0;
    std::int64_t c_old = 0;
    std::int64_t mem_old = 0;
    double e_baseline = 0.0;
    double data_reduction = 0.0;
    double conv_reduction = 0.0;
    double mem_reduction = 0.0;
    double energy_reduction = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double f_req = 0.0;
};

struct ConfigReport {
    std::string config_id;   // e.g. "2560x1920-k8-rgb"
    SweepCase shape;
    ColorMode mode = ColorMode::Rgb;
    std::string roi_desc;
    AggregateReport agg;
    std::vector<ProfileSram> sram;
    std::string error;       // set when this configuration failed; agg empty
};

// One report per (case, color mode). Geometry failures are recorded on the
// affected configuration and do not abort the sweep. frames is only consulted
// in FromAnnotations mode, matched to each case by exact frame dimensions.
[[nodiscard]] std::vector<ConfigReport> run_sweep(const SweepSpec& spec,
                                                  const std::vector<AnnotatedFrame>& frames,
                                                  const EnergyParams& energy_params);

// Wide CSV, one row per configuration; errored configurations are skipped.
[[nodiscard]] std::string sweep_csv(std::span<const ConfigReport> results);
// Plot-ready long format: config,metric,value.
[[nodiscard]] std::string sweep_long_csv(std::span<const ConfigReport> results);
[[nodiscard]] nlohmann::ordered_json sweep_to_json(std::span<const ConfigReport> results);

}  // namespace hirise
