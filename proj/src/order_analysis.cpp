#include "somlab/order_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "somlab/meanfield.hpp"
#include "somlab/parallel.hpp"

namespace somlab {

std::string ordering_name(Ordering o) {
    switch (o) {
        case Ordering::Increasing:
            return "increasing";
        case Ordering::Decreasing:
            return "decreasing";
        case Ordering::Unordered:
            return "unordered";
    }
    return "?";
}

Ordering classify_1d(const NetworkState& state) {
    if (state.dim != 1 || state.lattice.kind != LatticeKind::String1d)
        throw UsageError("classify_1d needs a 1-d string lattice with d=1");
    const int n = state.units();
    if (n == 1) return Ordering::Increasing;
    bool inc = true, dec = true;
    for (int i = 0; i + 1 < n; ++i) {
        const double a = state.w[static_cast<std::size_t>(i)];
        const double b = state.w[static_cast<std::size_t>(i) + 1];
        if (!(a < b)) inc = false;
        if (!(a > b)) dec = false;
    }
    if (inc) return Ordering::Increasing;
    if (dec) return Ordering::Decreasing;
    return Ordering::Unordered;
}

bool classify_fpp(const NetworkState& state) {
    if (state.lattice.kind != LatticeKind::Grid2d || state.dim != 2)
        throw UsageError("classify_fpp needs a 2-d grid with d=2");
    if (state.lattice.rows != state.lattice.cols)
        throw UsageError("F++ is defined for square grids only");
    const int n = state.lattice.rows;
    auto coord = [&](int r, int c, int k) {
        return state.w[2 * static_cast<std::size_t>(r * n + c) + k];
    };
    // First coordinate strictly increasing along the first index.
    for (int c = 0; c < n; ++c)
        for (int r = 0; r + 1 < n; ++r)
            if (!(coord(r, c, 0) < coord(r + 1, c, 0))) return false;
    // Second coordinate strictly increasing along the second index.
    for (int r = 0; r < n; ++r)
        for (int c = 0; c + 1 < n; ++c)
            if (!(coord(r, c, 1) < coord(r, c + 1, 1))) return false;
    return true;
}

namespace {

bool predicate_holds(OrgPredicate p, const NetworkState& s) {
    if (p == OrgPredicate::Ordered1d) return classify_1d(s) != Ordering::Unordered;
    return classify_fpp(s);
}

}  // namespace

HittingTimeReport HittingTimeReport::summarize(std::vector<TrialTime> trials,
                                               std::uint64_t budget) {
    HittingTimeReport rep;
    rep.trials = std::move(trials);
    rep.budget = budget;
    std::vector<double> finite;
    for (const auto& t : rep.trials)
        if (t.time >= 0) finite.push_back(static_cast<double>(t.time));
    rep.finite_count = finite.size();
    if (finite.empty()) {
        rep.mean = rep.median = std::numeric_limits<double>::quiet_NaN();
        rep.max = -1;
        return rep;
    }
    std::sort(finite.begin(), finite.end());
    rep.mean = 0.0;
    for (double v : finite) rep.mean += v;
    rep.mean /= static_cast<double>(finite.size());
    const std::size_t mid = finite.size() / 2;
    rep.median = (finite.size() % 2 == 1) ? finite[mid] : 0.5 * (finite[mid - 1] + finite[mid]);
    rep.max = static_cast<std::int64_t>(finite.back());
    return rep;
}

HittingTimeReport hitting_time_experiment(const ProcessScenario& scenario, OrgPredicate predicate,
                                          int trials, std::uint64_t budget,
                                          std::uint64_t master_seed, int workers) {
    {
        RandomStream probe(0);  // surface config errors before fanning out
        (void)predicate_holds(predicate, scenario.make_initial(probe));
    }
    std::vector<TrialTime> out(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t k) {
        const std::uint64_t seed = trial_seed(master_seed, k);
        RandomStream rng(seed);
        NetworkState s = scenario.make_initial(rng);
        TrialTime t{static_cast<int>(k), seed, -1};
        if (predicate_holds(predicate, s)) {
            t.time = 0;
        } else {
            for (std::uint64_t step_i = 1; step_i <= budget; ++step_i) {
                const Vec x = scenario.mu.sample(rng);
                const double eps = scenario.schedule.gain(s.time);
                apply_update(s, x, eps, scenario.lambda, winner(s, x));
                ++s.time;
                if (predicate_holds(predicate, s)) {
                    t.time = static_cast<std::int64_t>(step_i);
                    break;
                }
            }
        }
        out[k] = t;
    }, workers);
    return HittingTimeReport::summarize(std::move(out), budget);
}

HittingTimeReport exit_time_experiment(const ProcessScenario& scenario, OrgPredicate predicate,
                                       double eps, int trials, std::uint64_t budget,
                                       std::uint64_t master_seed, int workers) {
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("exit experiment needs eps in [0,1[");
    {
        RandomStream probe(0);
        (void)predicate_holds(predicate, scenario.make_initial(probe));
    }
    std::vector<TrialTime> out(static_cast<std::size_t>(trials));
    std::vector<std::uint8_t> bad_start(static_cast<std::size_t>(trials), 0);
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t k) {
        const std::uint64_t seed = trial_seed(master_seed, k);
        RandomStream rng(seed);
        NetworkState s = scenario.make_initial(rng);
        if (!predicate_holds(predicate, s)) {
            bad_start[k] = 1;
            return;
        }
        TrialTime t{static_cast<int>(k), seed, -1};
        for (std::uint64_t step_i = 1; step_i <= budget; ++step_i) {
            const Vec x = scenario.mu.sample(rng);
            apply_update(s, x, eps, scenario.lambda, winner(s, x));
            ++s.time;
            if (!predicate_holds(predicate, s)) {
                t.time = static_cast<std::int64_t>(step_i);
                break;
            }
        }
        out[k] = t;
    }, workers);
    for (std::size_t k = 0; k < bad_start.size(); ++k)
        if (bad_start[k])
            throw UsageError("exit experiment trial " + std::to_string(k) +
                             " does not start inside the organized set");
    return HittingTimeReport::summarize(std::move(out), budget);
}

std::vector<ConcentrationRow> invariant_concentration_experiment(
    const LatticeSpec& lattice, const NeighborhoodFunction& lambda, const StimuliDistribution& mu,
    const std::vector<double>& eps_values, std::uint64_t burn_in, std::uint64_t horizon,
    std::uint64_t master_seed) {
    if (mu.dim() != 1) throw UsageError("concentration experiment is one-dimensional");
    const int n = lattice.units();

    // m* from the mean field, seeded with an evenly spaced ordered state.
    const MeanField mf = MeanField::make(lattice, lambda, mu);
    const auto& b = mu.bounds()[0];
    Vec w0(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        w0[static_cast<std::size_t>(i)] = b.lo + (b.hi - b.lo) * (2.0 * i + 1.0) / (2.0 * n);
    const EquilibriumReport eq =
        solve_equilibrium(mf, NetworkState::from_weights(lattice, 1, w0), 1e-10);
    const Vec& mstar = eq.state.w;

    for (double eps : eps_values)
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("concentration eps must lie in ]0,1[");

    std::vector<ConcentrationRow> rows(eps_values.size());
    parallel_for(eps_values.size(), [&](std::size_t k) {
        const double eps = eps_values[k];
        RandomStream rng(trial_seed(master_seed, k));
        NetworkState s = init_ordered_1d(lattice, mu, rng);
        auto dist_to_star = [&](const NetworkState& st) {
            double acc = 0.0;
            for (std::size_t i = 0; i < st.w.size(); ++i) acc += sq(st.w[i] - mstar[i]);
            return std::sqrt(acc);
        };
        for (std::uint64_t t = 0; t < burn_in; ++t) {
            const Vec x = mu.sample(rng);
            apply_update(s, x, eps, lambda, winner(s, x));
            ++s.time;
        }
        if (horizon == 0) {
            rows[k] = {eps, dist_to_star(s)};
            return;
        }
        double acc = 0.0;
        for (std::uint64_t t = 0; t < horizon; ++t) {
            const Vec x = mu.sample(rng);
            apply_update(s, x, eps, lambda, winner(s, x));
            ++s.time;
            acc += dist_to_star(s);
        }
        rows[k] = {eps, acc / static_cast<double>(horizon)};
    });
    return rows;
}

}  // namespace somlab
