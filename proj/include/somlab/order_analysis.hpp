#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "somlab/som_engine.hpp"

namespace somlab {

enum class Ordering { Increasing, Decreasing, Unordered };

std::string ordering_name(Ordering o);

// Strict comparisons throughout; any tie counts as unordered.
Ordering classify_1d(const NetworkState& state);

// F^{++} membership for a square n x n grid with d=2: first coordinates
// strictly increase along the first index in every column, second
// coordinates strictly increase along the second index in every row.
bool classify_fpp(const NetworkState& state);

enum class OrgPredicate { Ordered1d, Fpp };

struct TrialTime {
    int trial = 0;
    std::uint64_t seed = 0;
    std::int64_t time = -1;  // steps until the event; -1 marks a timeout
};

struct HittingTimeReport {
    std::vector<TrialTime> trials;
    std::uint64_t budget = 0;
    std::size_t finite_count = 0;
    // Statistics over the finite times only; NaN when there are none.
    double mean = 0.0;
    double median = 0.0;
    std::int64_t max = -1;

    static HittingTimeReport summarize(std::vector<TrialTime> trials, std::uint64_t budget);
};

// First time the predicate holds, per trial; t=0 when the initial state
// already satisfies it.
HittingTimeReport hitting_time_experiment(const ProcessScenario& scenario, OrgPredicate predicate,
                                          int trials, std::uint64_t budget,
                                          std::uint64_t master_seed, int workers = 0);

// First time the predicate fails, starting from a state inside the organized
// set. eps = 0 is the frozen process (no motion, no exits).
HittingTimeReport exit_time_experiment(const ProcessScenario& scenario, OrgPredicate predicate,
                                       double eps, int trials, std::uint64_t budget,
                                       std::uint64_t master_seed, int workers = 0);

struct ConcentrationRow {
    double eps = 0.0;
    double mean_distance = 0.0;  // time-averaged ||m(t) - m*|| after burn-in
};

// Constant-eps runs from an ordered start; m* is solved from the mean field.
std::vector<ConcentrationRow> invariant_concentration_experiment(
    const LatticeSpec& lattice, const NeighborhoodFunction& lambda, const StimuliDistribution& mu,
    const std::vector<double>& eps_values, std::uint64_t burn_in, std::uint64_t horizon,
    std::uint64_t master_seed);

}  // namespace somlab
