#include "hirise/validate.hpp"

#include <random>
#include <vector>

#include "hirise/cost_model.hpp"
#include "hirise/roi_protocol.hpp"
#include "hirise/workload.hpp"

namespace hirise {

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

std::vector<int> divisors_of(int a, int b) {
    std::vector<int> out;
    for (int d = 1; d <= a && d <= b; ++d) {
        if (a % d == 0 && b % d == 0) out.push_back(d);
    }
    return out;
}

}  // namespace

EquivalenceReport run_equivalence_trials(int trials, std::uint64_t seed, bool inject_fault) {
    EquivalenceReport report;
    std::mt19937_64 rng(seed);

    for (int trial = 0; trial < trials; ++trial) {
        const int n = 1 + static_cast<int>(bounded(rng, 64));
        const int m = 1 + static_cast<int>(bounded(rng, 64));
        const auto ks = divisors_of(n, m);
        SensorConfig cfg;
        cfg.width = n;
        cfg.height = m;
        cfg.pool_k = ks[bounded(rng, ks.size())];
        cfg.color_mode = bounded(rng, 2) == 0 ? ColorMode::Rgb : ColorMode::Gray;
        cfg.adc_bits = 1 + static_cast<int>(bounded(rng, 16));
        cfg.word_bits = std::vector<int>{8, 16, 32}[bounded(rng, 3)];
        cfg.circuit.rng_seed = rng();

        std::vector<RoiBox> annotations;
        const auto box_count = bounded(rng, 9);
        for (std::uint64_t i = 0; i < box_count; ++i) {
            RoiBox b;
            b.x = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n)));
            b.y = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m)));
            b.w = 1 + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(n - b.x)));
            b.h = 1 + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(m - b.y)));
            annotations.push_back(b);
        }

        const auto scene = synth_scene(n, m, 0, 0, 0, rng(), cfg.vdd);
        const auto detector = oracle_detector(annotations, cfg.pool_k);
        const auto trace = run_two_stage(scene.image, cfg, detector);
        const auto baseline = run_baseline(scene.image, cfg);

        auto formula = analytical_costs(CostInputs::from_config(cfg, trace.roi_boxes));
        if (inject_fault && trial == 0) {
            formula.d2_sp += 1;   // deliberately wrong; the comparison must catch it
        }

        const auto check = [&](const char* field, std::int64_t expect, std::int64_t got) {
            if (expect != got) report.diffs.push_back({trial, field, expect, got});
        };
        check("d1_sp", formula.d1_sp, trace.ledger.stage1_bytes_s_to_p);
        check("d1_ps", formula.d1_ps, trace.ledger.bytes_p_to_s);
        check("d2_sp", formula.d2_sp, trace.ledger.stage2_bytes_s_to_p);
        check("d_new", formula.d_new,
              trace.ledger.bytes_s_to_p + trace.ledger.bytes_p_to_s);
        check("c1_sp", formula.c1_sp, trace.ledger.stage1_conversions);
        check("c2_sp", formula.c2_sp, trace.ledger.stage2_conversions);
        check("c_new", formula.c_new, trace.ledger.total_conversions);
        check("d_old", formula.d_old, baseline.ledger.bytes_s_to_p);
        check("c_old", formula.c_old, baseline.ledger.total_conversions);

        report.trials_run = trial + 1;
        if (!report.diffs.empty()) break;
    }
    return report;
}

}  // namespace hirise
