#include "hirise/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace hirise {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* mode_name(ColorMode m) { return m == ColorMode::Rgb ? "rgb" : "gray"; }

ColorMode mode_from_name(const std::string& s) {
    if (s == "rgb") return ColorMode::Rgb;
    if (s == "gray" || s == "grayscale") return ColorMode::Gray;
    throw ParseError("unknown color mode '" + s + "'");
}

// Cheap deterministic texture; values stay well inside [0, vdd].
double background_level(int x, int y, int channel) {
    const int h = (x * 31 + y * 17 + channel * 7) % 97;
    return 0.10 + 0.12 * static_cast<double>(h) / 96.0;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

}  // namespace

AnnotationLoadResult load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open annotations file " + path.string());
    }
    AnnotationLoadResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json doc;
        try {
            doc = Json::parse(line);
        } catch (const std::exception& e) {
            result.errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
            continue;
        }
        if (!doc.is_object() || !doc.contains("id") || !doc.contains("w") ||
            !doc.contains("h") || !doc["id"].is_string() ||
            !doc["w"].is_number_integer() || !doc["h"].is_number_integer()) {
            result.errors.push_back("line " + std::to_string(line_no) +
                                    ": expected {\"id\", \"w\", \"h\", \"boxes\"}");
            continue;
        }
        AnnotatedFrame frame;
        frame.frame_id = doc["id"].get<std::string>();
        frame.width = doc["w"].get<int>();
        frame.height = doc["h"].get<int>();
        if (frame.width < 1 || frame.height < 1) {
            result.errors.push_back("line " + std::to_string(line_no) +
                                    ": non-positive frame dimensions");
            continue;
        }
        if (doc.contains("image")) frame.image_path = doc["image"].get<std::string>();
        bool bad_boxes = false;
        if (doc.contains("boxes")) {
            if (!doc["boxes"].is_array()) {
                result.errors.push_back("line " + std::to_string(line_no) +
                                        ": \"boxes\" must be an array");
                continue;
            }
            for (const auto& entry : doc["boxes"]) {
                if (!entry.is_array() || entry.size() < 4) {
                    result.errors.push_back("line " + std::to_string(line_no) +
                                            ": box needs [x, y, w, h]");
                    bad_boxes = true;
                    break;
                }
                RoiBox box{entry[0].get<int>(), entry[1].get<int>(), entry[2].get<int>(),
                           entry[3].get<int>(),
                           entry.size() > 4 ? entry[4].get<int>() : 0};
                if (box_within(box, frame.width, frame.height)) {
                    frame.boxes.push_back(box);
                } else if (clamp_box(box, frame.width, frame.height)) {
                    ++result.clamp_warnings;
                    frame.boxes.push_back(box);
                } else {
                    ++result.clamp_warnings;   // nothing left of the box
                }
            }
        }
        if (!bad_boxes) result.frames.push_back(std::move(frame));
    }
    return result;
}

SynthScene synth_scene(int width, int height, int box_count, int box_w, int box_h,
                       std::uint64_t seed, double vdd) {
    if (width < 1 || height < 1) {
        throw GeometryError("scene must be at least 1 x 1");
    }
    if (box_count < 0) {
        throw ConfigError("box count must be non-negative");
    }
    if (box_count > 0 && (box_w < 1 || box_h < 1)) {
        throw ConfigError("box extents must be at least 1 x 1");
    }
    if (box_count > 0 && (box_w > width || box_h > height)) {
        throw GeometryError("box " + std::to_string(box_w) + " x " + std::to_string(box_h) +
                            " does not fit a " + std::to_string(width) + " x " +
                            std::to_string(height) + " scene");
    }

    SynthScene scene;
    scene.image = PixelArray(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                scene.image.at(x, y, c) = background_level(x, y, c) * vdd;
            }
        }
    }

    scene.annotation.frame_id = "synth-" + std::to_string(seed);
    scene.annotation.width = width;
    scene.annotation.height = height;

    std::mt19937_64 rng(seed);
    for (int i = 0; i < box_count; ++i) {
        RoiBox box;
        box.x = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(width - box_w) + 1));
        box.y = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(height - box_h) + 1));
        box.w = box_w;
        box.h = box_h;
        const double level = (0.75 + 0.20 * static_cast<double>(bounded(rng, 1000)) / 999.0) * vdd;
        for (int y = box.y; y < box.y + box.h; ++y) {
            for (int x = box.x; x < box.x + box.w; ++x) {
                for (int c = 0; c < 3; ++c) scene.image.at(x, y, c) = level;
            }
        }
        scene.annotation.boxes.push_back(box);
    }
    return scene;
}

SweepSpec parse_sweep_spec(const Json& doc) {
    SweepSpec spec;
    if (!doc.is_object()) throw ParseError("sweep spec must be a JSON object");
    spec.name = doc.value("name", std::string{});

    if (doc.contains("cases")) {
        for (const auto& c : doc["cases"]) {
            spec.cases.push_back({c.at("n").get<int>(), c.at("m").get<int>(),
                                  c.value("k", 1)});
        }
    } else if (doc.contains("sizes") && doc.contains("ks")) {
        for (const auto& size : doc["sizes"]) {
            if (!size.is_array() || size.size() != 2) {
                throw ParseError("each size must be [n, m]");
            }
            for (const auto& k : doc["ks"]) {
                spec.cases.push_back({size[0].get<int>(), size[1].get<int>(), k.get<int>()});
            }
        }
    } else {
        throw ParseError("sweep spec needs \"cases\" or \"sizes\" + \"ks\"");
    }

    if (doc.contains("color_modes")) {
        spec.color_modes.clear();
        for (const auto& m : doc["color_modes"]) {
            spec.color_modes.push_back(mode_from_name(m.get<std::string>()));
        }
        if (spec.color_modes.empty()) throw ParseError("color_modes must not be empty");
    }

    if (doc.contains("roi")) {
        const auto& roi = doc["roi"];
        const auto mode = roi.at("mode").get<std::string>();
        if (mode == "fixed_box") {
            spec.roi_model = RoiModelKind::FixedBox;
            spec.box_w = roi.at("w").get<int>();
            spec.box_h = roi.at("h").get<int>();
            spec.box_count = roi.at("count").get<std::int64_t>();
            spec.scale_box_with_k = roi.value("scale_with_k", false);
        } else if (mode == "scaled_load") {
            spec.roi_model = RoiModelKind::ScaledLoad;
            spec.load_s = roi.at("s").get<double>();
            if (spec.load_s < 0.0) throw ParseError("scaled load must be non-negative");
        } else if (mode == "from_annotations") {
            spec.roi_model = RoiModelKind::FromAnnotations;
            spec.annotations_path = roi.value("path", std::string{});
        } else {
            throw ParseError("unknown roi mode '" + mode + "'");
        }
    } else {
        spec.roi_model = RoiModelKind::FixedBox;
        spec.box_count = 0;
    }

    spec.adc_bits = doc.value("adc_bits", 8);
    spec.word_bits = doc.value("word_bits", 16);
    if (doc.contains("memory_mode")) {
        const auto m = doc["memory_mode"].get<std::string>();
        if (m == "streamed") spec.memory_mode = MemoryMode::Streamed;
        else if (m == "batched") spec.memory_mode = MemoryMode::Batched;
        else throw ParseError("memory_mode must be streamed or batched");
    }
    spec.dedup_union = doc.value("dedup_union", false);

    if (doc.contains("energy")) {
        EnergyParams e;
        const auto& ej = doc["energy"];
        e.e_adc = ej.value("e_adc", kDefaultAdcEnergy);
        e.e_pool_per_frame = ej.value("e_pool_per_frame", 0.0);
        e.e_transfer_per_bit = ej.value("e_transfer_per_bit", 0.0);
        spec.energy = e;
    }

    if (doc.contains("memory_profiles")) {
        for (const auto& pj : doc["memory_profiles"]) {
            SweepMemoryProfile p;
            p.model = pj.at("model").get<std::string>();
            p.weight_flash = pj.value("weight_flash_bytes", std::int64_t{0});
            for (const auto& v : pj.at("peak_activation_bytes")) {
                p.peak_activation.push_back(v.get<std::int64_t>());
            }
            if (p.peak_activation.size() != spec.cases.size()) {
                throw ParseError("profile '" + p.model + "' needs one peak per case");
            }
            spec.memory_profiles.push_back(std::move(p));
        }
    }
    return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open sweep spec " + path.string());
    }
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError("sweep spec " + path.string() + ": " + e.what());
    }
    return parse_sweep_spec(doc);
}

Stats stats_of(std::vector<double> values) {
    Stats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    s.median = values[(n - 1) / 2];
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(n)));
    s.p95 = values[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
    return s;
}

namespace {

struct FrameLoad {
    std::string frame_id;
    std::vector<RoiBox> boxes;
};

// ROI load per frame for one (case, mode) configuration.
std::vector<FrameLoad> frame_loads(const SweepSpec& spec, const SweepCase& c,
                                   const std::vector<AnnotatedFrame>& frames) {
    std::vector<FrameLoad> loads;
    switch (spec.roi_model) {
        case RoiModelKind::FixedBox: {
            FrameLoad load;
            load.frame_id = "fixed";
            const int w = spec.scale_box_with_k ? spec.box_w * c.k : spec.box_w;
            const int h = spec.scale_box_with_k ? spec.box_h * c.k : spec.box_h;
            for (std::int64_t i = 0; i < spec.box_count; ++i) {
                // Tiled positions; only consulted in union mode.
                load.boxes.push_back({static_cast<int>(i) * w, 0, w, h});
            }
            loads.push_back(std::move(load));
            break;
        }
        case RoiModelKind::ScaledLoad: {
            FrameLoad load;
            load.frame_id = "load";
            const auto pixels = static_cast<std::int64_t>(
                std::llround(spec.load_s * static_cast<double>(c.n) *
                             static_cast<double>(c.m)));
            if (pixels > 0) {
                load.boxes.push_back({0, 0, static_cast<int>(pixels), 1});
            }
            loads.push_back(std::move(load));
            break;
        }
        case RoiModelKind::FromAnnotations: {
            for (const auto& f : frames) {
                if (f.width != c.n || f.height != c.m) continue;
                loads.push_back({f.frame_id, f.boxes});
            }
            break;
        }
    }
    return loads;
}

}  // namespace

std::vector<ConfigReport> run_sweep(const SweepSpec& spec,
                                    const std::vector<AnnotatedFrame>& frames,
                                    const EnergyParams& energy_params) {
    std::vector<ConfigReport> results;
    for (const auto& c : spec.cases) {
        for (const auto mode : spec.color_modes) {
            ConfigReport out;
            out.shape = c;
            out.mode = mode;
            out.config_id = std::to_string(c.n) + "x" + std::to_string(c.m) + "-k" +
                            std::to_string(c.k) + "-" + mode_name(mode);
            switch (spec.roi_model) {
                case RoiModelKind::FixedBox:
                    out.roi_desc = std::to_string(spec.box_count) + "x" +
                                   std::to_string(spec.scale_box_with_k ? spec.box_w * c.k
                                                                        : spec.box_w) +
                                   "x" +
                                   std::to_string(spec.scale_box_with_k ? spec.box_h * c.k
                                                                        : spec.box_h);
                    break;
                case RoiModelKind::ScaledLoad:
                    out.roi_desc = "s=" + format_double(spec.load_s);
                    break;
                case RoiModelKind::FromAnnotations:
                    out.roi_desc = "annotations";
                    break;
            }

            try {
                const auto loads = frame_loads(spec, c, frames);
                AggregateReport agg;
                for (const auto& load : loads) {
                    CostInputs in;
                    in.width = c.n;
                    in.height = c.m;
                    in.pool_k = c.k;
                    in.adc_bits = spec.adc_bits;
                    in.word_bits = spec.word_bits;
                    in.stage1_channels = mode == ColorMode::Rgb ? 3 : 1;
                    in.roi_list = load.boxes;
                    in.memory_mode = spec.memory_mode;
                    in.dedup_union = spec.dedup_union;
                    agg.frame_ids.push_back(load.frame_id);
                    agg.reports.push_back(analytical_costs(in));
                    agg.energies.push_back(energy(agg.reports.back(), energy_params));
                }
                if (agg.reports.empty()) {
                    out.error = "no frames matched " + out.config_id;
                    results.push_back(std::move(out));
                    continue;
                }

                std::vector<double> d_new, c_new, mem_new, e_total;
                for (std::size_t i = 0; i < agg.reports.size(); ++i) {
                    d_new.push_back(static_cast<double>(agg.reports[i].d_new));
                    c_new.push_back(static_cast<double>(agg.reports[i].c_new));
                    mem_new.push_back(static_cast<double>(agg.reports[i].mem_new));
                    e_total.push_back(agg.energies[i].e_total);
                }
                agg.d_new = stats_of(d_new);
                agg.c_new = stats_of(c_new);
                agg.mem_new = stats_of(mem_new);
                agg.e_total = stats_of(e_total);

                // The frame sitting at the lower-median d_new represents the
                // configuration in flat reports.
                std::vector<std::size_t> order(agg.reports.size());
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (agg.reports[a].d_new != agg.reports[b].d_new) {
                        return agg.reports[a].d_new < agg.reports[b].d_new;
                    }
                    return agg.frame_ids[a] < agg.frame_ids[b];
                });
                const std::size_t median_idx = order[(order.size() - 1) / 2];
                agg.median_report = agg.reports[median_idx];
                agg.median_energy = agg.energies[median_idx];

                agg.d_old = agg.median_report.d_old;
                agg.c_old = agg.median_report.c_old;
                agg.mem_old = agg.median_report.mem_old;
                agg.e_baseline = agg.median_energy.e_baseline;

                const auto rf = reduction_factors(agg.median_report);
                agg.data_reduction = rf.data;
                agg.conv_reduction = rf.conversions;
                agg.mem_reduction = rf.memory;
                agg.energy_reduction = agg.median_energy.reduction_factor;
                const auto sf = stage_fractions(agg.median_report);
                agg.f1 = sf.f1;
                agg.f2 = sf.f2;
                agg.f_req = sf.f_req;
                out.agg = std::move(agg);

                const std::size_t case_idx = static_cast<std::size_t>(
                    &c - spec.cases.data());
                for (const auto& profile : spec.memory_profiles) {
                    MemoryProfile stage1{profile.model + "-stage1", 0, 0};
                    MemoryProfile stage2{profile.model,
                                         profile.peak_activation[case_idx],
                                         profile.weight_flash};
                    const auto base = peak_sram(stage1, stage2, out.agg.median_report,
                                                SystemMode::Baseline);
                    const auto two = peak_sram(stage1, stage2, out.agg.median_report,
                                               SystemMode::TwoStage);
                    out.sram.push_back({profile.model, base.total_sram, two.total_sram,
                                        base.flash});
                }
            } catch (const GeometryError& e) {
                out.error = e.what();
            } catch (const ConfigError& e) {
                out.error = e.what();
            }
            results.push_back(std::move(out));
        }
    }
    return results;
}

std::string sweep_csv(std::span<const ConfigReport> results) {
    std::ostringstream out;
    out << "config,n,m,k,mode,roi,frames," << cost_csv_header()
        << ",data_reduction,conv_reduction,mem_reduction,energy_reduction,f1,f2";
    bool profiles_listed = false;
    for (const auto& r : results) {
        if (r.error.empty() && !r.sram.empty() && !profiles_listed) {
            for (const auto& p : r.sram) {
                out << ",sram_baseline_" << p.model << ",sram_two_stage_" << p.model;
            }
            profiles_listed = true;
        }
    }
    out << "\n";
    for (const auto& r : results) {
        if (!r.error.empty()) continue;
        out << r.config_id << "," << r.shape.n << "," << r.shape.m << "," << r.shape.k
            << "," << mode_name(r.mode) << "," << r.roi_desc << ","
            << r.agg.reports.size() << ","
            << cost_csv_row(r.agg.median_report, r.agg.median_energy) << ","
            << format_double(r.agg.data_reduction) << ","
            << format_double(r.agg.conv_reduction) << ","
            << format_double(r.agg.mem_reduction) << ","
            << format_double(r.agg.energy_reduction) << ","
            << format_double(r.agg.f1) << "," << format_double(r.agg.f2);
        for (const auto& p : r.sram) {
            out << "," << p.baseline_total << "," << p.two_stage_total;
        }
        out << "\n";
    }
    return out.str();
}

std::string sweep_long_csv(std::span<const ConfigReport> results) {
    std::ostringstream out;
    out << "config,metric,value\n";
    const auto emit = [&](const std::string& id, const char* metric, double value) {
        out << id << "," << metric << "," << format_double(value) << "\n";
    };
    for (const auto& r : results) {
        if (!r.error.empty()) continue;
        const auto& rep = r.agg.median_report;
        const auto& e = r.agg.median_energy;
        emit(r.config_id, "d_old", static_cast<double>(rep.d_old));
        emit(r.config_id, "d1_sp", static_cast<double>(rep.d1_sp));
        emit(r.config_id, "d1_ps", static_cast<double>(rep.d1_ps));
        emit(r.config_id, "d2_sp", static_cast<double>(rep.d2_sp));
        emit(r.config_id, "d_new", static_cast<double>(rep.d_new));
        emit(r.config_id, "mem_new", static_cast<double>(rep.mem_new));
        emit(r.config_id, "c_old", static_cast<double>(rep.c_old));
        emit(r.config_id, "c_new", static_cast<double>(rep.c_new));
        emit(r.config_id, "e_stage1", e.e_stage1);
        emit(r.config_id, "e_stage2", e.e_stage2);
        emit(r.config_id, "e_total", e.e_total);
        emit(r.config_id, "e_baseline", e.e_baseline);
        emit(r.config_id, "data_reduction", r.agg.data_reduction);
        emit(r.config_id, "energy_reduction", r.agg.energy_reduction);
        emit(r.config_id, "f1", r.agg.f1);
        emit(r.config_id, "f2", r.agg.f2);
        for (const auto& p : r.sram) {
            emit(r.config_id, ("sram_baseline_" + p.model).c_str(),
                 static_cast<double>(p.baseline_total));
            emit(r.config_id, ("sram_two_stage_" + p.model).c_str(),
                 static_cast<double>(p.two_stage_total));
        }
    }
    return out.str();
}

nlohmann::ordered_json sweep_to_json(std::span<const ConfigReport> results) {
    Json arr = Json::array();
    for (const auto& r : results) {
        Json item;
        item["config"] = r.config_id;
        item["n"] = r.shape.n;
        item["m"] = r.shape.m;
        item["k"] = r.shape.k;
        item["mode"] = mode_name(r.mode);
        item["roi"] = r.roi_desc;
        if (!r.error.empty()) {
            item["error"] = r.error;
            arr.push_back(std::move(item));
            continue;
        }
        item["frames"] = r.agg.reports.size();
        item["cost"] = cost_to_json(r.agg.median_report);
        item["energy"] = energy_to_json(r.agg.median_energy);
        item["data_reduction"] = r.agg.data_reduction;
        item["conv_reduction"] = r.agg.conv_reduction;
        item["mem_reduction"] = r.agg.mem_reduction;
        item["energy_reduction"] = r.agg.energy_reduction;
        item["f1"] = r.agg.f1;
        item["f2"] = r.agg.f2;
        item["f_req"] = r.agg.f_req;
        item["stats"] = {
            {"d_new", {{"median", r.agg.d_new.median}, {"mean", r.agg.d_new.mean},
                       {"p95", r.agg.d_new.p95}}},
            {"c_new", {{"median", r.agg.c_new.median}, {"mean", r.agg.c_new.mean},
                       {"p95", r.agg.c_new.p95}}},
            {"mem_new", {{"median", r.agg.mem_new.median}, {"mean", r.agg.mem_new.mean},
                         {"p95", r.agg.mem_new.p95}}},
            {"e_total", {{"median", r.agg.e_total.median}, {"mean", r.agg.e_total.mean},
                         {"p95", r.agg.e_total.p95}}},
        };
        if (!r.sram.empty()) {
            Json sram = Json::array();
            for (const auto& p : r.sram) {
                sram.push_back({{"model", p.model},
                                {"baseline_total", p.baseline_total},
                                {"two_stage_total", p.two_stage_total},
                                {"flash", p.flash}});
            }
            item["sram"] = std::move(sram);
        }
        arr.push_back(std::move(item));
    }
    return arr;
}

}  // namespace hirise
