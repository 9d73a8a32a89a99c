#include "hirise/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hirise/cost_model.hpp"
#include "hirise/ppm.hpp"
#include "hirise/roi_protocol.hpp"
#include "hirise/validate.hpp"
#include "hirise/workload.hpp"

namespace hirise {

namespace {

using Json = nlohmann::ordered_json;

struct BoxSpec {
    std::int64_t count = 0;
    int w = 0;
    int h = 0;
};

// "JxWxH"; a bare "0" means no boxes.
BoxSpec parse_box_spec(const std::string& text) {
    if (text == "0") return {};
    BoxSpec spec;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lld x %d x %d %c",
                    reinterpret_cast<long long*>(&spec.count), &spec.w, &spec.h,
                    &extra) != 3 ||
        spec.count < 0 || spec.w < 1 || spec.h < 1) {
        throw ConfigError("--boxes expects JxWxH (e.g. 16x112x112) or 0, got '" + text + "'");
    }
    return spec;
}

// "x,y,w,h" positioned box.
RoiBox parse_positioned_box(const std::string& text) {
    RoiBox b;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d , %d , %d , %d %c", &b.x, &b.y, &b.w, &b.h,
                    &extra) != 4 ||
        b.w < 1 || b.h < 1) {
        throw ConfigError("--box expects x,y,w,h with positive extent, got '" + text + "'");
    }
    return b;
}

std::uint64_t seed_fallback() {
    if (const char* env = std::getenv("HIRISE_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path);
}

ColorMode parse_color_mode(const std::string& s) {
    if (s == "rgb") return ColorMode::Rgb;
    if (s == "gray" || s == "grayscale") return ColorMode::Gray;
    throw ConfigError("--color-mode must be rgb or gray");
}

MemoryMode parse_memory_mode(const std::string& s) {
    if (s == "streamed") return MemoryMode::Streamed;
    if (s == "batched") return MemoryMode::Batched;
    throw ConfigError("--memory-mode must be streamed or batched");
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// ------------------------------------------------------------- simulate ---

struct SimulateOptions {
    bool synthetic = false;
    std::string input;
    int width = 0;
    int height = 0;
    int pool_k = 1;
    std::string color_mode = "rgb";
    int adc_bits = 8;
    double vdd = 1.0;
    int word_bits = 16;
    double mismatch_sigma = 0.0;
    std::vector<std::string> boxes;
    std::uint64_t seed = 0;
    std::string annotations;
    std::string frame_id;
    std::string output;
};

int run_simulate(const SimulateOptions& opt) {
    PixelArray image;
    std::vector<RoiBox> annotations;
    std::string source_desc;

    if (opt.synthetic == !opt.input.empty()) {
        throw ConfigError("choose exactly one of --synthetic or --input");
    }

    if (opt.synthetic) {
        if (opt.width < 1 || opt.height < 1) {
            throw ConfigError("--synthetic needs --width and --height");
        }
        if (opt.boxes.size() > 1) {
            throw ConfigError("--synthetic takes a single --boxes spec");
        }
        BoxSpec spec;
        if (!opt.boxes.empty()) spec = parse_box_spec(opt.boxes.front());
        auto scene = synth_scene(opt.width, opt.height, static_cast<int>(spec.count),
                                 spec.w, spec.h, opt.seed, opt.vdd);
        image = std::move(scene.image);
        annotations = std::move(scene.annotation.boxes);
        source_desc = "synthetic";
    } else {
        if (!opt.boxes.empty()) {
            throw ConfigError("--boxes has no positions; use --annotations with --input");
        }
        image = load_ppm(opt.input, opt.vdd);
        if ((opt.width > 0 && opt.width != image.width) ||
            (opt.height > 0 && opt.height != image.height)) {
            throw ConfigError("--width/--height disagree with the image dimensions");
        }
        if (!opt.annotations.empty()) {
            const auto loaded = load_annotations(opt.annotations);
            const AnnotatedFrame* chosen = nullptr;
            for (const auto& f : loaded.frames) {
                if (!opt.frame_id.empty() ? f.frame_id == opt.frame_id
                                          : (f.width == image.width &&
                                             f.height == image.height)) {
                    chosen = &f;
                    break;
                }
            }
            if (chosen == nullptr) {
                throw ConfigError("no annotation frame matches the input image");
            }
            annotations = chosen->boxes;
        }
        source_desc = opt.input;
    }

    SensorConfig cfg;
    cfg.width = image.width;
    cfg.height = image.height;
    cfg.pool_k = opt.pool_k;
    cfg.color_mode = parse_color_mode(opt.color_mode);
    cfg.adc_bits = opt.adc_bits;
    cfg.vdd = opt.vdd;
    cfg.word_bits = opt.word_bits;
    cfg.circuit.mismatch_sigma = opt.mismatch_sigma;
    cfg.circuit.rng_seed = opt.seed;
    cfg.validate();

    const auto detector = oracle_detector(annotations, cfg.pool_k);
    const auto two_stage = run_two_stage(image, cfg, detector);
    const auto baseline = run_baseline(image, cfg);

    const auto report =
        analytical_costs(CostInputs::from_config(cfg, two_stage.roi_boxes));
    const auto energy_report = energy(report, EnergyParams{});

    Json doc;
    doc["config"] = {
        {"source", source_desc},
        {"width", cfg.width},
        {"height", cfg.height},
        {"pool_k", cfg.pool_k},
        {"color_mode", opt.color_mode},
        {"adc_bits", cfg.adc_bits},
        {"vdd", cfg.vdd},
        {"word_bits", cfg.word_bits},
        {"mismatch_sigma", cfg.circuit.mismatch_sigma},
        {"seed", opt.seed},
    };
    doc["two_stage"] = session_to_json(two_stage);
    doc["baseline"] = session_to_json(baseline);
    doc["cost"] = cost_to_json(report);
    doc["energy"] = energy_to_json(energy_report);

    const double data_reduction =
        report.d_new > 0 ? static_cast<double>(report.d_old) /
                               static_cast<double>(report.d_new)
                         : 0.0;
    doc["summary"] = {
        {"boxes_requested", two_stage.stage1_boxes.size()},
        {"boxes_delivered", two_stage.roi_boxes.size()},
        {"data_reduction", data_reduction},
        {"energy_reduction", energy_report.reduction_factor},
    };

    const std::string text = doc.dump(2) + "\n";
    if (opt.output.empty()) {
        std::cout << text;
    } else {
        write_text_file(opt.output, text);
        std::cout << "simulate: " << cfg.width << "x" << cfg.height << " k=" << cfg.pool_k
                  << " mode=" << opt.color_mode << " boxes=" << two_stage.roi_boxes.size()
                  << " s2p_bytes=" << two_stage.ledger.bytes_s_to_p
                  << " p2s_bytes=" << two_stage.ledger.bytes_p_to_s
                  << " conversions=" << two_stage.ledger.total_conversions
                  << " baseline_bytes=" << baseline.ledger.bytes_s_to_p
                  << " data_reduction=" << format_fixed(data_reduction, 3) << "\n";
    }
    return kExitOk;
}

// ----------------------------------------------------------------- cost ---

struct CostOptions {
    int width = 0;
    int height = 0;
    int pool_k = 1;
    int stage1_channels = 3;
    int adc_bits = 8;
    int word_bits = 16;
    std::vector<std::string> boxes;
    std::vector<std::string> positioned;
    double load_s = 0.0;
    std::string memory_mode = "streamed";
    bool dedup_union = false;
    double e_adc = kDefaultAdcEnergy;
    double e_pool = 0.0;
    double e_transfer = 0.0;
    std::string format = "json";
    std::string output;
};

int run_cost(const CostOptions& opt) {
    CostInputs in;
    in.width = opt.width;
    in.height = opt.height;
    in.pool_k = opt.pool_k;
    in.adc_bits = opt.adc_bits;
    in.word_bits = opt.word_bits;
    in.stage1_channels = opt.stage1_channels;
    in.memory_mode = parse_memory_mode(opt.memory_mode);
    in.dedup_union = opt.dedup_union;

    int lane = 0;   // tile unpositioned boxes so union mode sees them disjoint
    for (const auto& text : opt.boxes) {
        const auto spec = parse_box_spec(text);
        for (std::int64_t i = 0; i < spec.count; ++i) {
            in.roi_list.push_back({static_cast<int>(i) * spec.w, lane, spec.w, spec.h});
        }
        lane += spec.h;
    }
    for (const auto& text : opt.positioned) {
        in.roi_list.push_back(parse_positioned_box(text));
    }
    if (opt.load_s < 0.0) throw ConfigError("--load-s must be non-negative");
    if (opt.load_s > 0.0) {
        const auto pixels = static_cast<std::int64_t>(std::llround(
            opt.load_s * static_cast<double>(opt.width) * static_cast<double>(opt.height)));
        if (pixels > 0) in.roi_list.push_back({0, lane, static_cast<int>(pixels), 1});
    }

    const auto report = analytical_costs(in);
    EnergyParams params;
    params.e_adc = opt.e_adc;
    params.e_pool_per_frame = opt.e_pool;
    params.e_transfer_per_bit = opt.e_transfer;
    const auto energy_report = energy(report, params);

    std::string text;
    if (opt.format == "csv") {
        text = cost_csv_header() + "\n" + cost_csv_row(report, energy_report) + "\n";
    } else if (opt.format == "json") {
        Json doc;
        doc["inputs"] = {
            {"width", in.width},         {"height", in.height},
            {"pool_k", in.pool_k},       {"stage1_channels", in.stage1_channels},
            {"adc_bits", in.adc_bits},   {"word_bits", in.word_bits},
            {"boxes", in.roi_list.size()},
            {"memory_mode", opt.memory_mode},
            {"dedup_union", in.dedup_union},
        };
        doc["cost"] = cost_to_json(report);
        doc["energy"] = energy_to_json(energy_report);
        const auto rf = reduction_factors(report);
        const auto sf = stage_fractions(report);
        doc["reductions"] = {
            {"data", rf.data},
            {"memory", rf.memory},
            {"conversions", rf.conversions},
            {"energy", energy_report.reduction_factor},
            {"data_satisfied", rf.data_satisfied},
            {"memory_satisfied", rf.memory_satisfied},
            {"conversions_satisfied", rf.conversions_satisfied},
        };
        doc["fractions"] = {{"f1", sf.f1}, {"f2", sf.f2}, {"f_req", sf.f_req}};
        text = doc.dump(2) + "\n";
    } else {
        throw ConfigError("--format must be json or csv");
    }

    if (opt.output.empty()) {
        std::cout << text;
    } else {
        write_text_file(opt.output, text);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- sweep ---

struct SweepOptions {
    std::string spec_path;
    std::string output;
    std::string json_output;
    std::string long_csv_output;
    std::optional<double> e_adc;
    std::optional<double> e_pool;
    std::optional<double> e_transfer;
};

int run_sweep_cmd(const SweepOptions& opt) {
    const auto spec = load_sweep_spec(opt.spec_path);

    std::vector<AnnotatedFrame> frames;
    if (spec.roi_model == RoiModelKind::FromAnnotations) {
        if (spec.annotations_path.empty()) {
            throw ConfigError("sweep spec uses annotations but names no file");
        }
        std::filesystem::path ann = spec.annotations_path;
        if (ann.is_relative()) {
            ann = std::filesystem::path(opt.spec_path).parent_path() / ann;
        }
        auto loaded = load_annotations(ann);
        for (const auto& err : loaded.errors) {
            std::cerr << "warning: " << ann.string() << ": " << err << "\n";
        }
        frames = std::move(loaded.frames);
    }

    EnergyParams params = spec.energy.value_or(EnergyParams{});
    if (opt.e_adc) params.e_adc = *opt.e_adc;
    if (opt.e_pool) params.e_pool_per_frame = *opt.e_pool;
    if (opt.e_transfer) params.e_transfer_per_bit = *opt.e_transfer;

    const auto results = run_sweep(spec, frames, params);
    for (const auto& r : results) {
        if (!r.error.empty()) {
            std::cerr << "warning: " << r.config_id << ": " << r.error << "\n";
        }
    }

    const auto csv = sweep_csv(results);
    if (opt.output.empty()) {
        std::cout << csv;
    } else {
        write_text_file(opt.output, csv);
        std::cout << "sweep: " << results.size() << " configurations -> " << opt.output
                  << "\n";
    }
    if (!opt.json_output.empty()) {
        write_text_file(opt.json_output, sweep_to_json(results).dump(2) + "\n");
    }
    if (!opt.long_csv_output.empty()) {
        write_text_file(opt.long_csv_output, sweep_long_csv(results));
    }
    return kExitOk;
}

// ------------------------------------------------------------- validate ---

int run_validate(int trials, std::uint64_t seed, bool inject_fault) {
    if (trials < 0) throw ConfigError("--trials must be non-negative");
    const auto report = run_equivalence_trials(trials, seed, inject_fault);
    if (trials == 0) {
        std::cout << "validate: 0 trials (nothing checked)\n";
        return kExitOk;
    }
    if (report.ok()) {
        std::cout << "validate: " << report.trials_run
                  << " trials, ledger totals equal closed-form reports\n";
        return kExitOk;
    }
    for (const auto& d : report.diffs) {
        std::cerr << "trial " << d.trial << ": " << d.field << " formula=" << d.formula
                  << " ledger=" << d.ledger << "\n";
    }
    std::cerr << "error[" << kExitDivergence
              << "]: simulation diverged from the closed-form model after "
              << report.trials_run << " trials\n";
    return kExitDivergence;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"two-stage in-sensor compression simulator and cost model"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand(
        "simulate", "run one frame through both pipelines and dump the session trace");
    simulate->add_flag("--synthetic", sim.synthetic, "generate the scene instead of reading one");
    simulate->add_option("--input", sim.input, "binary PPM (P6) input image");
    simulate->add_option("--width", sim.width, "scene width (synthetic)");
    simulate->add_option("--height", sim.height, "scene height (synthetic)");
    simulate->add_option("--pool-k", sim.pool_k, "pooling factor");
    simulate->add_option("--color-mode", sim.color_mode, "stage-1 mode: rgb or gray");
    simulate->add_option("--adc-bits", sim.adc_bits, "converter resolution (1-16)");
    simulate->add_option("--vdd", sim.vdd, "supply voltage");
    simulate->add_option("--word-bits", sim.word_bits, "bits per box coordinate word");
    simulate->add_option("--mismatch-sigma", sim.mismatch_sigma,
                         "relative resistor spread in the averaging network");
    simulate->add_option("--boxes", sim.boxes, "synthetic objects as JxWxH (or 0)");
    auto* sim_seed = simulate->add_option("--seed", sim.seed, "scene and mismatch seed");
    simulate->add_option("--annotations", sim.annotations, "JSON-lines boxes for --input");
    simulate->add_option("--frame-id", sim.frame_id, "annotation frame to use");
    simulate->add_option("-o,--output", sim.output, "write the session JSON here");

    CostOptions cost;
    auto* cost_cmd = app.add_subcommand("cost", "closed-form report for one configuration");
    cost_cmd->add_option("--width", cost.width, "array width")->required();
    cost_cmd->add_option("--height", cost.height, "array height")->required();
    cost_cmd->add_option("--pool-k", cost.pool_k, "pooling factor");
    cost_cmd->add_option("--stage1-channels", cost.stage1_channels,
                         "channels shipped by stage 1 (3 = rgb, 1 = gray)");
    cost_cmd->add_option("--adc-bits", cost.adc_bits, "converter resolution (1-16)");
    cost_cmd->add_option("--word-bits", cost.word_bits, "bits per box coordinate word");
    cost_cmd->add_option("--boxes", cost.boxes, "ROI load as JxWxH, repeatable");
    cost_cmd->add_option("--box", cost.positioned, "positioned ROI as x,y,w,h, repeatable");
    cost_cmd->add_option("--load-s", cost.load_s,
                         "extra ROI load as a fraction of the array area");
    cost_cmd->add_option("--memory-mode", cost.memory_mode, "streamed or batched");
    cost_cmd->add_flag("--dedup-union", cost.dedup_union,
                       "count overlapping ROI pixels once");
    cost_cmd->add_option("--e-adc", cost.e_adc, "energy per conversion (J)");
    cost_cmd->add_option("--e-pool", cost.e_pool, "pooling energy per frame (J)");
    cost_cmd->add_option("--e-transfer", cost.e_transfer, "energy per transferred bit (J)");
    cost_cmd->add_option("--format", cost.format, "json or csv");
    cost_cmd->add_option("-o,--output", cost.output, "write the report here");

    SweepOptions sweep;
    double sweep_e_adc = 0.0, sweep_e_pool = 0.0, sweep_e_transfer = 0.0;
    auto* sweep_cmd = app.add_subcommand("sweep", "evaluate every configuration in a spec");
    sweep_cmd->add_option("--spec", sweep.spec_path, "sweep spec JSON")->required();
    sweep_cmd->add_option("-o,--output", sweep.output, "write the CSV here");
    sweep_cmd->add_option("--json", sweep.json_output, "also write a JSON report");
    sweep_cmd->add_option("--long-csv", sweep.long_csv_output,
                          "also write config,metric,value rows");
    auto* opt_e_adc = sweep_cmd->add_option("--e-adc", sweep_e_adc,
                                            "override energy per conversion (J)");
    auto* opt_e_pool = sweep_cmd->add_option("--e-pool", sweep_e_pool,
                                             "override pooling energy per frame (J)");
    auto* opt_e_transfer = sweep_cmd->add_option(
        "--e-transfer", sweep_e_transfer, "override energy per transferred bit (J)");

    int validate_trials = 1000;
    std::uint64_t validate_seed = 0;
    bool inject_fault = false;
    auto* validate_cmd = app.add_subcommand(
        "validate", "cross-check simulated ledgers against the closed-form model");
    validate_cmd->add_option("--trials", validate_trials, "random configurations to run");
    auto* val_seed = validate_cmd->add_option("--seed", validate_seed, "trial generator seed");
    validate_cmd->add_flag("--inject-fault", inject_fault,
                           "self-test: perturb one field and expect a divergence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[" << kExitConfig << "]: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (app.got_subcommand(simulate)) {
            if (sim_seed->count() == 0) sim.seed = seed_fallback();
            return run_simulate(sim);
        }
        if (app.got_subcommand(cost_cmd)) {
            return run_cost(cost);
        }
        if (app.got_subcommand(sweep_cmd)) {
            if (opt_e_adc->count() > 0) sweep.e_adc = sweep_e_adc;
            if (opt_e_pool->count() > 0) sweep.e_pool = sweep_e_pool;
            if (opt_e_transfer->count() > 0) sweep.e_transfer = sweep_e_transfer;
            return run_sweep_cmd(sweep);
        }
        if (app.got_subcommand(validate_cmd)) {
            if (val_seed->count() == 0) validate_seed = seed_fallback();
            return run_validate(validate_trials, validate_seed, inject_fault);
        }
    } catch (const GeometryError& e) {
        std::cerr << "error[" << kExitConfig << "]: GeometryError: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error[" << kExitConfig << "]: ConfigError: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error[" << kExitConfig << "]: ParseError: " << e.what() << "\n";
        return kExitConfig;
    } catch (const EmptyBranchSet& e) {
        std::cerr << "error[" << kExitConfig << "]: EmptyBranchSet: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "error[" << kExitIo << "]: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error[" << kExitIo << "]: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("hirise");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace hirise
