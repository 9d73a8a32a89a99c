#pragma once

// Cross-check between the event-level simulation and the closed-form model:
// random configurations are simulated end to end and every ledger total must
// equal the corresponding analytical field exactly.

#include <cstdint>
#include <string>
#include <vector>

namespace hirise {

struct TrialDiff {
    int trial = 0;
    std::string field;
    std::int64_t formula = 0;
    std::int64_t ledger = 0;
};

struct EquivalenceReport {
    int trials_run = 0;
    std::vector<TrialDiff> diffs;   // populated for the first diverging trial
    [[nodiscard]] bool ok() const { return diffs.empty(); }
};

// Runs `trials` random small configurations (arrays up to 64 x 64, every pool
// factor dividing exactly, up to 8 boxes, both color modes, 1..16 ADC bits).
// Stops at the first diverging trial. inject_fault perturbs one analytical
// field on the first trial; the run must then report a divergence, which
// keeps the comparison itself honest.
[[nodiscard]] EquivalenceReport run_equivalence_trials(int trials, std::uint64_t seed,
                                                       bool inject_fault = false);

}  // namespace hirise
