#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "somlab/order_analysis.hpp"

using namespace somlab;

namespace {

const StimuliDistribution kUniform = StimuliDistribution::uniform_box({{0.0, 1.0}});

NetworkState state1d(Vec w) {
    const int n = static_cast<int>(w.size());
    return NetworkState::from_weights(LatticeSpec::string1d(n), 1, std::move(w));
}

ProcessScenario scenario_1d(int n, GainSchedule sched, InitMode init) {
    return ProcessScenario{LatticeSpec::string1d(n), NeighborhoodFunction::step(1), kUniform,
                           std::move(sched), init, std::nullopt};
}

}  // namespace

TEST_CASE("classify_1d") {
    CHECK(classify_1d(state1d({0.1, 0.2, 0.3})) == Ordering::Increasing);
    CHECK(classify_1d(state1d({0.3, 0.2, 0.9})) == Ordering::Unordered);
    CHECK(classify_1d(state1d({0.7, 0.1})) == Ordering::Decreasing);
    CHECK(classify_1d(state1d({0.1, 0.1, 0.3})) == Ordering::Unordered);  // tie
    CHECK_THROWS_AS(
        classify_1d(NetworkState::from_weights(LatticeSpec::string1d(2), 2, {0, 0, 1, 1})),
        UsageError);
}

TEST_CASE("reversing an increasing state classifies as decreasing") {
    RandomStream rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(8));
        NetworkState s = init_ordered_1d(LatticeSpec::string1d(n), kUniform, rng);
        REQUIRE(classify_1d(s) == Ordering::Increasing);
        std::reverse(s.w.begin(), s.w.end());
        CHECK(classify_1d(s) == Ordering::Decreasing);
    }
}

TEST_CASE("classify_fpp") {
    // 2x2 grid with coordinates aligned to indices
    const auto aligned = NetworkState::from_weights(LatticeSpec::grid2d(2, 2), 2,
                                                    {0, 0, 0, 1, 1, 0, 1, 1});
    CHECK(classify_fpp(aligned));

    auto swapped = aligned;
    std::swap(swapped.w[0], swapped.w[2]);
    std::swap(swapped.w[1], swapped.w[3]);
    CHECK_FALSE(classify_fpp(swapped));

    CHECK_THROWS_AS(classify_fpp(state1d({0.1, 0.2})), UsageError);
    CHECK_THROWS_AS(
        classify_fpp(NetworkState::from_weights(LatticeSpec::grid2d(2, 3), 2, Vec(12, 0.0))),
        UsageError);
}

TEST_CASE("hitting time is zero when the start is already organized") {
    const auto rep = hitting_time_experiment(
        scenario_1d(6, GainSchedule::constant(0.1), InitMode::Ordered1d), OrgPredicate::Ordered1d,
        10, 1000, 7);
    CHECK(rep.finite_count == 10);
    for (const auto& t : rep.trials) CHECK(t.time == 0);
    CHECK(rep.mean == 0.0);
    CHECK(rep.max == 0);
}

TEST_CASE("two units are ordered immediately") {
    const auto rep = hitting_time_experiment(
        scenario_1d(2, GainSchedule::constant(0.1), InitMode::Random), OrgPredicate::Ordered1d, 20,
        1000, 3);
    CHECK(rep.finite_count == 20);
    for (const auto& t : rep.trials) CHECK(t.time == 0);
}

TEST_CASE("constant-gain ordering: every desk-scale trial self-organizes") {
    const auto rep = hitting_time_experiment(
        scenario_1d(5, GainSchedule::constant(0.1), InitMode::Random), OrgPredicate::Ordered1d, 20,
        200000, 11);
    CHECK(rep.finite_count == 20);
    CHECK(rep.max <= 200000);
    // summary fields agree with the per-trial list
    double mean = 0.0;
    std::int64_t mx = -1;
    for (const auto& t : rep.trials) {
        REQUIRE(t.time >= 0);
        mean += static_cast<double>(t.time);
        mx = std::max(mx, t.time);
    }
    CHECK(rep.mean == doctest::Approx(mean / 20.0));
    CHECK(rep.max == mx);
}

TEST_CASE("budget exhaustion records a timeout, not a failure") {
    // 1 step of budget with a random start: some trials cannot order
    const auto rep = hitting_time_experiment(
        scenario_1d(8, GainSchedule::constant(0.05), InitMode::Random), OrgPredicate::Ordered1d,
        30, 1, 13);
    CHECK(rep.trials.size() == 30);
    bool saw_timeout = false;
    for (const auto& t : rep.trials) {
        CHECK(t.time <= 1);
        if (t.time == -1) saw_timeout = true;
    }
    CHECK(saw_timeout);
    CHECK(rep.finite_count < 30);
}

TEST_CASE("deterministic given the master seed") {
    const auto a = hitting_time_experiment(
        scenario_1d(6, GainSchedule::constant(0.1), InitMode::Random), OrgPredicate::Ordered1d, 12,
        100000, 99);
    const auto b = hitting_time_experiment(
        scenario_1d(6, GainSchedule::constant(0.1), InitMode::Random), OrgPredicate::Ordered1d, 12,
        100000, 99);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].time == b.trials[i].time);
        CHECK(a.trials[i].seed == b.trials[i].seed);
    }
}

TEST_CASE("1-d ordered set is absorbing for the two-neighbor process") {
    const auto rep = exit_time_experiment(
        scenario_1d(5, GainSchedule::constant(0.1), InitMode::Ordered1d), OrgPredicate::Ordered1d,
        0.1, 10, 100000, 5);
    CHECK(rep.finite_count == 0);  // zero exits
    for (const auto& t : rep.trials) CHECK(t.time == -1);
}

TEST_CASE("frozen process never exits") {
    const auto rep = exit_time_experiment(
        scenario_1d(5, GainSchedule::constant(0.1), InitMode::Ordered1d), OrgPredicate::Ordered1d,
        0.0, 5, 10000, 21);
    CHECK(rep.finite_count == 0);
}

TEST_CASE("F++ is not absorbing: exits happen on a 3x3 grid") {
    const auto mu2 = StimuliDistribution::uniform_box({{0.0, 1.0}, {0.0, 1.0}});
    ProcessScenario sc{LatticeSpec::grid2d(3, 3), NeighborhoodFunction::indicator8(), mu2,
                       GainSchedule::constant(0.2), InitMode::GridFpp, std::nullopt};
    const auto rep = exit_time_experiment(sc, OrgPredicate::Fpp, 0.2, 500, 1000, 17);
    CHECK(rep.finite_count >= 1);
}

TEST_CASE("invariant measure concentrates as eps shrinks") {
    const auto rows = invariant_concentration_experiment(
        LatticeSpec::string1d(3), NeighborhoodFunction::step(1), kUniform, {0.1, 0.01}, 20000,
        100000, 23);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].mean_distance < rows[0].mean_distance);

    // deterministic rerun
    const auto again = invariant_concentration_experiment(
        LatticeSpec::string1d(3), NeighborhoodFunction::step(1), kUniform, {0.1, 0.01}, 20000,
        100000, 23);
    CHECK(again[0].mean_distance == rows[0].mean_distance);
    CHECK(again[1].mean_distance == rows[1].mean_distance);
}

TEST_CASE("zero horizon evaluates the burn-in state only") {
    const auto rows = invariant_concentration_experiment(
        LatticeSpec::string1d(3), NeighborhoodFunction::step(1), kUniform, {0.05}, 5000, 0, 29);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_distance >= 0.0);
}

TEST_CASE("mismatched predicate and lattice fail up front") {
    CHECK_THROWS_AS(hitting_time_experiment(
                        scenario_1d(4, GainSchedule::constant(0.1), InitMode::Random),
                        OrgPredicate::Fpp, 4, 100, 1),
                    UsageError);
}
