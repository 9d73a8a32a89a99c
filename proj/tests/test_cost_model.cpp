#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>
#include <vector>

#include "hirise/cost_model.hpp"

using namespace hirise;

namespace {

CostInputs five_mp_inputs() {
    CostInputs in;
    in.width = 2560;
    in.height = 1920;
    in.pool_k = 8;
    for (int i = 0; i < 16; ++i) in.roi_list.push_back({i * 112, 0, 112, 112});
    return in;
}

// Brute-force union: paint every covered cell.
std::int64_t painted_area(const std::vector<RoiBox>& boxes, int width, int height) {
    std::vector<char> grid(static_cast<std::size_t>(width) * height, 0);
    for (const auto& b : boxes) {
        for (int y = b.y; y < b.y + b.h; ++y) {
            for (int x = b.x; x < b.x + b.w; ++x) {
                grid[static_cast<std::size_t>(y) * width + x] = 1;
            }
        }
    }
    std::int64_t count = 0;
    for (char c : grid) count += c;
    return count;
}

}  // namespace

TEST_CASE("five megapixel reference configuration, every field") {
    const auto r = analytical_costs(five_mp_inputs());

    CHECK(r.d_old == 14745600);
    CHECK(r.mem_old == 14745600);
    CHECK(r.c_old == 14745600);

    CHECK(r.c1_sp == 230400);    // 320 x 240 x 3
    CHECK(r.d1_sp == 230400);
    CHECK(r.m1_sp == 230400);
    CHECK(r.d1_ps == 128);       // 16 boxes x 4 words x 16 bits
    CHECK(r.m1_ps == 128);

    CHECK(r.c2_sp == 602112);    // 16 x 3 x 112 x 112
    CHECK(r.d2_sp == 602112);
    CHECK(r.m2_sp == 37632);     // one 112 x 112 crop at a time

    CHECK(r.d_new == 832640);
    CHECK(r.c_new == 832512);
    CHECK(r.mem_new == 230400);
}

TEST_CASE("non-byte-aligned adc widths round transfers up per message") {
    CostInputs in;
    in.width = 16;
    in.height = 12;
    in.pool_k = 4;
    in.adc_bits = 12;
    in.word_bits = 32;
    in.roi_list = {{0, 0, 3, 2}, {8, 4, 5, 4}};

    const auto r = analytical_costs(in);
    CHECK(r.c1_sp == 36);        // 4 x 3 x 3
    CHECK(r.d1_sp == 54);        // 432 bits
    CHECK(r.d1_ps == 32);        // 2 x 4 x 32 bits
    CHECK(r.c2_sp == 78);        // 3 x (6 + 20)
    CHECK(r.d2_sp == 117);       // 936 bits
    CHECK(r.d_new == 203);
    CHECK(r.c_new == 114);
    CHECK(r.c_old == 576);
    CHECK(r.d_old == 864);       // 6912 bits

    // Streamed: largest single crop. Batched: the whole payload at once.
    CHECK(r.m2_sp == 90);        // 60 conversions x 12 bits
    CHECK(r.mem_new == 90);

    in.memory_mode = MemoryMode::Batched;
    const auto batched = analytical_costs(in);
    CHECK(batched.m2_sp == 117);
    CHECK(batched.mem_new == 117);
    CHECK(batched.d_new == r.d_new);   // transfer totals do not change
}

TEST_CASE("grayscale stage 1 sends one channel") {
    CostInputs in;
    in.width = 2560;
    in.height = 1920;
    in.pool_k = 8;
    in.stage1_channels = 1;

    const auto r = analytical_costs(in);
    CHECK(r.c1_sp == 76800);
    CHECK(r.d1_sp == 76800);
    CHECK(r.d1_ps == 0);
    CHECK(r.d2_sp == 0);
    CHECK(r.d_new == 76800);
}

TEST_CASE("union mode counts overlapping pixels once") {
    CostInputs in;
    in.width = 16;
    in.height = 16;
    in.pool_k = 4;
    in.roi_list = {{0, 0, 4, 4}, {2, 2, 4, 4}};

    const auto plain = analytical_costs(in);
    CHECK(plain.c2_sp == 96);    // 3 x 32

    in.dedup_union = true;
    const auto dedup = analytical_costs(in);
    CHECK(dedup.c2_sp == 84);    // 3 x 28
    CHECK(dedup.d2_sp == 84);
    CHECK(dedup.c2_sp <= plain.c2_sp);
}

TEST_CASE("union area equals the painted count on random box sets") {
    std::mt19937_64 rng(404);
    const auto bounded = [&](int n) { return static_cast<int>(rng() % n); };
    for (int trial = 0; trial < 60; ++trial) {
        const int width = 8 + bounded(56);
        const int height = 8 + bounded(56);
        std::vector<RoiBox> boxes;
        const int count = bounded(7);
        for (int i = 0; i < count; ++i) {
            RoiBox b;
            b.w = 1 + bounded(width);
            b.h = 1 + bounded(height);
            b.x = bounded(width - b.w + 1);
            b.y = bounded(height - b.h + 1);
            boxes.push_back(b);
        }
        const auto expected = painted_area(boxes, width, height);
        CHECK(union_area(boxes) == expected);

        std::int64_t sum = 0, largest = 0;
        for (const auto& b : boxes) {
            sum += b.area();
            largest = std::max(largest, b.area());
        }
        CHECK(union_area(boxes) <= sum);
        CHECK(union_area(boxes) >= largest);
    }
    CHECK(union_area(std::vector<RoiBox>{}) == 0);
}

TEST_CASE("reduction factors against the single-shot baseline") {
    const auto r = analytical_costs(five_mp_inputs());
    const auto f = reduction_factors(r);
    CHECK(f.data == doctest::Approx(17.7094543).epsilon(1e-7));
    CHECK(f.conversions == doctest::Approx(17.7121771).epsilon(1e-7));
    CHECK(f.memory == 64.0);   // 14745600 / 230400
    CHECK(f.data_satisfied);
    CHECK(f.memory_satisfied);
    CHECK(f.conversions_satisfied);

    CHECK_THROWS_AS(reduction_factors(CostReport{}), ConfigError);

    // k = 1 with a huge ROI: worse than baseline, factors below one.
    CostInputs bloat;
    bloat.width = 8;
    bloat.height = 8;
    bloat.roi_list = {{0, 0, 8, 8}};
    const auto worse = reduction_factors(analytical_costs(bloat));
    CHECK(worse.data < 1.0);
    CHECK_FALSE(worse.data_satisfied);
}

TEST_CASE("stage fractions partition the transfer total") {
    const auto r = analytical_costs(five_mp_inputs());
    const auto f = stage_fractions(r);
    CHECK(f.f1 == doctest::Approx(230400.0 / 832640.0));
    CHECK(f.f2 == doctest::Approx(602112.0 / 832640.0));
    CHECK(f.f_req == doctest::Approx(128.0 / 832640.0));
    CHECK(f.f1 + f.f2 + f.f_req == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conversion energy for the reference configuration") {
    const auto r = analytical_costs(five_mp_inputs());
    const auto e = energy(r, EnergyParams{});

    CHECK(e.e_baseline == doctest::Approx(1.85e-3).epsilon(1e-12));
    CHECK(e.e_stage1 == doctest::Approx(1.85e-3 / 64.0).epsilon(1e-12));
    CHECK(e.e_total == doctest::Approx(e.e_stage1 + e.e_stage2 + e.e_pooling).epsilon(1e-12));
    CHECK(e.e_pooling == 0.0);
    CHECK(e.reduction_factor == doctest::Approx(17.7121771).epsilon(1e-7));
}

TEST_CASE("transfer and pooling energies enter the total exactly once") {
    const auto r = analytical_costs(five_mp_inputs());

    EnergyParams params;
    params.e_adc = 1e-10;
    params.e_transfer_per_bit = 2e-12;
    params.e_pool_per_frame = 5e-6;
    const auto e = energy(r, params);

    const double expected_stage1 =
        230400.0 * 1e-10 + (230400.0 + 128.0) * 8.0 * 2e-12;
    const double expected_stage2 = 602112.0 * 1e-10 + 602112.0 * 8.0 * 2e-12;
    CHECK(e.e_stage1 == doctest::Approx(expected_stage1).epsilon(1e-12));
    CHECK(e.e_stage2 == doctest::Approx(expected_stage2).epsilon(1e-12));
    CHECK(e.e_pooling == 5e-6);
    CHECK(e.e_total ==
          doctest::Approx(expected_stage1 + expected_stage2 + 5e-6).epsilon(1e-12));
    CHECK(e.e_baseline ==
          doctest::Approx(14745600.0 * (1e-10 + 8.0 * 2e-12)).epsilon(1e-12));
}

TEST_CASE("sram peaks combine the model footprint with the image buffer") {
    const auto r = analytical_costs(five_mp_inputs());
    const MemoryProfile stage1{"detector", 0, 0};
    const MemoryProfile stage2{"classifier", 167500, 976000};

    const auto base = peak_sram(stage1, stage2, r, SystemMode::Baseline);
    CHECK(base.total_sram == 14913100);
    CHECK(base.flash == 976000);

    const auto two = peak_sram(stage1, stage2, r, SystemMode::TwoStage);
    CHECK(two.total_sram == 397900);

    // The larger of the two stage models bounds the activation term.
    const MemoryProfile heavy{"detector", 500000, 100000};
    const auto dominated = peak_sram(heavy, stage2, r, SystemMode::TwoStage);
    CHECK(dominated.total_sram == 500000 + 230400);
    CHECK(dominated.flash == 1076000);
}

TEST_CASE("input validation rejects impossible configurations") {
    CostInputs in;
    in.width = 100;
    in.height = 60;
    in.pool_k = 8;
    CHECK_THROWS_AS(analytical_costs(in), GeometryError);

    in = five_mp_inputs();
    in.adc_bits = 0;
    CHECK_THROWS_AS(analytical_costs(in), ConfigError);

    in = five_mp_inputs();
    in.stage1_channels = 2;
    CHECK_THROWS_AS(analytical_costs(in), ConfigError);

    in = five_mp_inputs();
    in.roi_list.push_back({0, 0, 0, 112});   // degenerate extent
    CHECK_THROWS_AS(analytical_costs(in), ConfigError);

    in = five_mp_inputs();
    in.word_bits = 12;
    CHECK_THROWS_AS(analytical_costs(in), ConfigError);
}

TEST_CASE("inputs derived from a sensor config match hand-built ones") {
    SensorConfig cfg;
    cfg.width = 2560;
    cfg.height = 1920;
    cfg.pool_k = 8;

    std::vector<RoiBox> delivered;
    for (int i = 0; i < 16; ++i) delivered.push_back({i * 112, 0, 112, 112});

    const auto from_cfg = analytical_costs(CostInputs::from_config(cfg, delivered));
    const auto direct = analytical_costs(five_mp_inputs());
    CHECK(from_cfg.d_new == direct.d_new);
    CHECK(from_cfg.c_new == direct.c_new);
    CHECK(from_cfg.mem_new == direct.mem_new);

    cfg.color_mode = ColorMode::Gray;
    const auto gray = CostInputs::from_config(cfg, delivered);
    CHECK(gray.stage1_channels == 1);
}

TEST_CASE("csv row serialization is stable") {
    CHECK(cost_csv_header() ==
          "d_old,d1_sp,d1_ps,d2_sp,d_new,mem_new,c_old,c_new,"
          "e_stage1,e_stage2,e_total,e_baseline");

    const auto r = analytical_costs(five_mp_inputs());
    const auto row = cost_csv_row(r, energy(r, EnergyParams{}));
    CHECK(row.rfind("14745600,230400,128,602112,832640,230400,14745600,832512,", 0) == 0);

    std::stringstream ss(row);
    std::string field;
    int count = 0;
    while (std::getline(ss, field, ',')) ++count;
    CHECK(count == 12);
}

TEST_CASE("json serialization carries every reported field") {
    const auto r = analytical_costs(five_mp_inputs());
    const auto doc = cost_to_json(r);
    CHECK(doc["d_new"] == 832640);
    CHECK(doc["c_new"] == 832512);
    CHECK(doc["m2_sp"] == 37632);

    const auto e = energy_to_json(energy(r, EnergyParams{}));
    CHECK(e.contains("e_total"));
    CHECK(e.contains("reduction_factor"));
}

TEST_CASE("kilobytes are decimal") {
    CHECK(to_kilobytes(832640) == doctest::Approx(832.64));
    CHECK(to_kilobytes(1000) == 1.0);
}
