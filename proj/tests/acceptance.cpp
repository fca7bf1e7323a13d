// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "somlab/categorical.hpp"
#include "somlab/meanfield.hpp"
#include "somlab/order_analysis.hpp"
#include "somlab/parallel.hpp"
#include "somlab/quantization.hpp"

using namespace somlab;

namespace {

const StimuliDistribution kUniform = StimuliDistribution::uniform_box({{0.0, 1.0}});
const StimuliDistribution kUniform2 =
    StimuliDistribution::uniform_box({{0.0, 1.0}, {0.0, 1.0}});

StimuliDistribution linear_density() {
    return StimuliDistribution::density1d([](double x) { return 2.0 * x; }, "linear", true);
}

StimuliDistribution truncated_gaussian() {
    const double mu = 0.5, sigma = 0.2;
    const double z = 0.5 * (std::erf((1.0 - mu) / (sigma * M_SQRT2)) -
                            std::erf((0.0 - mu) / (sigma * M_SQRT2)));
    return StimuliDistribution::density1d(
        [mu, sigma, z](double x) {
            return std::exp(-0.5 * sq((x - mu) / sigma)) / (sigma * std::sqrt(2.0 * M_PI) * z);
        },
        "truncated-gaussian", true);
}

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> check;
};

// 1. Constant-gain self-organization: every trial orders within the budget.
bool ordering_hits(std::string& detail) {
    ProcessScenario sc{LatticeSpec::string1d(10), NeighborhoodFunction::step(1), kUniform,
                       GainSchedule::constant(0.1), InitMode::Random, std::nullopt};
    const auto rep = hitting_time_experiment(sc, OrgPredicate::Ordered1d, 200, 1000000, 101);
    detail = std::to_string(rep.finite_count) + "/200 ordered, median tau = " +
             format_real(rep.median);
    return rep.finite_count == 200;
}

// 2. The ordered set is absorbing for the two-neighbor string process.
bool ordering_absorbing(std::string& detail) {
    ProcessScenario sc{LatticeSpec::string1d(10), NeighborhoodFunction::step(1), kUniform,
                       GainSchedule::constant(0.1), InitMode::Ordered1d, std::nullopt};
    const auto rep =
        exit_time_experiment(sc, OrgPredicate::Ordered1d, 0.1, 50, 1000000, 202);
    detail = std::to_string(rep.finite_count) + " exits in 50 trials x 1e6 steps";
    return rep.finite_count == 0;
}

// 3. Decreasing-gain convergence to the solved equilibrium (0.3, 0.5, 0.7).
bool convergence_1d(std::string& detail) {
    const Vec target{0.3, 0.5, 0.7};
    ProcessScenario sc{LatticeSpec::string1d(3), NeighborhoodFunction::step(1), kUniform,
                       GainSchedule::power(1.0, 100.0, 1.0), InitMode::Ordered1d, std::nullopt};
    int pass = 0;
    std::vector<int> ok(100, 0);
    parallel_for(100, [&](std::size_t k) {
        RandomStream rng(trial_seed(303, k));
        NetworkState s = sc.make_initial(rng);
        const auto res = run(std::move(s), kUniform, sc.schedule, sc.lambda, 1000000, rng);
        double dev = 0.0;
        for (int i = 0; i < 3; ++i)
            dev = std::max(dev, std::abs(res.state.w[static_cast<std::size_t>(i)] -
                                         target[static_cast<std::size_t>(i)]));
        ok[k] = dev <= 1e-2 ? 1 : 0;
    });
    for (int v : ok) pass += v;
    detail = std::to_string(pass) + "/100 within 1e-2 of (0.3, 0.5, 0.7)";
    return pass >= 95;
}

// 4. The 0-neighbor optimum sits at the uniform midpoints.
bool quantization_optimum(std::string& detail) {
    ProcessScenario sc{LatticeSpec::string1d(10), NeighborhoodFunction::indicator0(), kUniform,
                       GainSchedule::power(1.0, 100.0, 0.6), InitMode::Ordered1d, std::nullopt};
    const auto rep = train_0neighbor(sc, 10000000, 404);
    double dev = 0.0;
    for (int i = 0; i < 10; ++i)
        dev = std::max(dev, std::abs(rep.state.w[static_cast<std::size_t>(i)] -
                                     (2.0 * i + 1.0) / 20.0));

    const MeanField mf =
        MeanField::make(LatticeSpec::string1d(10), NeighborhoodFunction::indicator0(), kUniform);
    Vec start(10);
    for (int i = 0; i < 10; ++i) start[static_cast<std::size_t>(i)] = 0.02 + 0.09 * i;
    const auto eq = solve_equilibrium(
        mf, NetworkState::from_weights(LatticeSpec::string1d(10), 1, start), 1e-10);
    double eq_dev = 0.0;
    for (int i = 0; i < 10; ++i)
        eq_dev = std::max(eq_dev, std::abs(eq.state.w[static_cast<std::size_t>(i)] -
                                           (2.0 * i + 1.0) / 20.0));
    detail = "sgd max dev " + format_real(dev) + ", solver max dev " + format_real(eq_dev);
    return dev <= 1e-2 && eq_dev <= 1e-8;
}

// 5. Scaled distortion: n^2 V_n = 1/24 for the uniform law; the linear-density
// scaled column moves < 10% between n = 32 and n = 64.
bool zador_scaling(std::string& detail) {
    const auto uni = zador_scan({2, 4, 8, 16}, kUniform);
    double worst = 0.0;
    for (const auto& r : uni) worst = std::max(worst, std::abs(r.scaled - 1.0 / 24.0));
    const auto lin = zador_scan({32, 64}, linear_density());
    const double rel = std::abs(lin[1].scaled - lin[0].scaled) / lin[1].scaled;
    detail = "uniform |n^2 Vn - 1/24| <= " + format_real(worst) + ", linear rel change " +
             format_real(rel);
    return worst <= 1e-12 && rel < 0.10;
}

// 6. grad V_n against central finite differences at random states.
bool gradient_consistency(std::string& detail) {
    RandomStream rng(606);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const StimuliDistribution mu = (trial % 2 == 0) ? kUniform : linear_density();
        const int n = 2 + static_cast<int>(rng.index(6));
        Vec w(static_cast<std::size_t>(n));
        for (auto& v : w) v = rng.uniform01();
        std::sort(w.begin(), w.end());
        const auto s = NetworkState::from_weights(LatticeSpec::string1d(n), 1, w);
        const Vec g = distortion_gradient(s, mu);
        const double h = 1e-6;
        double err = 0.0, scale = 0.0;
        for (int c = 0; c < n; ++c) {
            auto sp = s, sm = s;
            sp.w[static_cast<std::size_t>(c)] += h;
            sm.w[static_cast<std::size_t>(c)] -= h;
            const double fd = (distortion(sp, mu).value - distortion(sm, mu).value) / (2.0 * h);
            err = std::max(err, std::abs(fd - g[static_cast<std::size_t>(c)]));
            scale = std::max(scale, std::abs(g[static_cast<std::size_t>(c)]));
        }
        worst_rel = std::max(worst_rel, err / std::max(scale, 1e-12));
    }
    detail = "worst relative error " + format_real(worst_rel);
    return worst_rel <= 1e-5;
}

// 7. The empirical one-step drift equals -eps h within 3 standard errors.
bool meanfield_consistency(std::string& detail) {
    const LatticeSpec lattice = LatticeSpec::string1d(5);
    const auto lambda = NeighborhoodFunction::step(1);
    const MeanField mf = MeanField::make(lattice, lambda, kUniform);
    const double eps = 0.05;
    const int samples = 100000;
    RandomStream state_rng(707);
    int bad = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const NetworkState s = init_random(lattice, kUniform, state_rng);
        const Vec h = evaluate_h(mf, s);
        RandomStream rng(trial_seed(708, static_cast<std::uint64_t>(trial)));
        Vec sum(s.w.size(), 0.0), sum2(s.w.size(), 0.0);
        for (int k = 0; k < samples; ++k) {
            const Vec x = kUniform.sample(rng);
            NetworkState next = s;
            apply_update(next, x, eps, lambda, winner(next, x));
            for (std::size_t i = 0; i < s.w.size(); ++i) {
                const double d = (s.w[i] - next.w[i]) / eps;
                sum[i] += d;
                sum2[i] += d * d;
            }
        }
        for (std::size_t i = 0; i < s.w.size(); ++i) {
            const double mean = sum[i] / samples;
            const double var = std::max(sum2[i] / samples - mean * mean, 0.0);
            if (std::abs(mean - h[i]) > 3.0 * std::sqrt(var / samples) + 1e-12) ++bad;
        }
    }
    detail = std::to_string(bad) + " component(s) outside 3 SE over 10 states";
    return bad == 0;
}

// 8. Cooperativity: nonpositive off-diagonal jacobian entries.
bool cooperativity(std::string& detail) {
    double worst = -1e9;
    for (const auto& mu : {kUniform, truncated_gaussian()}) {
        const LatticeSpec lattice = LatticeSpec::string1d(5);
        const MeanField mf = MeanField::make(lattice, NeighborhoodFunction::step(1), mu);
        RandomStream rng(808);
        for (int trial = 0; trial < 20; ++trial) {
            const NetworkState s = init_ordered_1d(lattice, mu, rng);
            const auto jac = jacobian_h(mf, s);
            for (int r = 0; r < 5; ++r)
                for (int c = 0; c < 5; ++c)
                    if (r != c) worst = std::max(worst, jac.J(r, c));
        }
    }
    detail = "max off-diagonal entry " + format_real(worst);
    return worst <= 1e-8;
}

// 9. The 3x3 grid state built from the 1-d equilibrium is an equilibrium.
bool grid_equilibrium(std::string& detail) {
    const NetworkState gs = grid_state({0.3, 0.5, 0.7}, {0.3, 0.5, 0.7});
    const MeanField mf = MeanField::make(gs.lattice, NeighborhoodFunction::indicator8(), kUniform2);
    const Vec h = evaluate_h(mf, gs);
    double norm = 0.0;
    for (double v : h) norm = std::max(norm, std::abs(v));
    detail = "|h|_inf = " + format_real(norm);
    return norm < 1e-6;
}

// 10. F++ is left with positive probability.
bool fpp_exit(std::string& detail) {
    ProcessScenario sc{LatticeSpec::grid2d(3, 3), NeighborhoodFunction::indicator8(), kUniform2,
                       GainSchedule::constant(0.2), InitMode::GridFpp, std::nullopt};
    const auto rep = exit_time_experiment(sc, OrgPredicate::Fpp, 0.2, 10000, 1000, 1010);
    detail = std::to_string(rep.finite_count) + " exits in 10000 trials x 1000 steps";
    return rep.finite_count >= 1;
}

// 11. Dimension selection: the augmented equilibrium stays stable under small noise.
bool dimension_selection(std::string& detail) {
    const MeanField base =
        MeanField::make(LatticeSpec::string1d(3), NeighborhoodFunction::step(1), kUniform);
    const auto state =
        NetworkState::from_weights(LatticeSpec::string1d(3), 1, {0.3, 0.5, 0.7});
    const auto rep = dimension_selection_experiment(base, state, 0.01);
    detail = "max real flow eigenvalue " + format_real(rep.max_real_eig_flow) + ", residual " +
             format_real(rep.residual_inf);
    return rep.max_real_eig_flow < 0.0;
}

// 12. The stationary law concentrates around m* as eps shrinks.
bool invariant_concentration(std::string& detail) {
    const auto rows = invariant_concentration_experiment(
        LatticeSpec::string1d(3), NeighborhoodFunction::step(1), kUniform, {0.1, 0.01}, 100000,
        1000000, 1212);
    detail = "mean distance: eps 0.1 -> " + format_real(rows[0].mean_distance) +
             ", eps 0.01 -> " + format_real(rows[1].mean_distance);
    return rows[1].mean_distance < rows[0].mean_distance;
}

// 13. Quantizer cubature: exact value and n^-2 error decay.
bool quantizer_integration(std::string& detail) {
    double errs[3];
    int idx = 0;
    for (int n : {10, 20, 40}) {
        Vec w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = (2.0 * i + 1.0) / (2.0 * n);
        const auto rep = quantizer_report(
            NetworkState::from_weights(LatticeSpec::string1d(n), 1, std::move(w)), kUniform);
        const double est = quantize_integrate1d([](double x) { return x * x; }, rep);
        const double expected = 1.0 / 3.0 - 1.0 / (12.0 * n * n);
        if (std::abs(est - expected) > 1e-10) {
            detail = "n=" + std::to_string(n) + " estimate off by " +
                     format_real(std::abs(est - expected));
            return false;
        }
        errs[idx++] = std::abs(est - 1.0 / 3.0);
    }
    const double r1 = errs[0] / errs[1];
    const double r2 = errs[1] / errs[2];
    detail = "error ratios per doubling " + format_real(r1) + ", " + format_real(r2);
    return r1 >= 3.8 && r1 <= 4.2 && r2 >= 3.8 && r2 <= 4.2;
}

// 14. ||F_n - F||^2 strictly decreasing in n.
bool fdist_decreasing(std::string& detail) {
    for (const auto& mu : {kUniform, linear_density()}) {
        double prev = 1e18;
        for (int n : {2, 4, 8, 16}) {
            const auto q = optimal_quantizer_1d(n, mu);
            if (!q.fdist_sq || !(*q.fdist_sq < prev)) {
                detail = mu.name() + " not strictly decreasing at n=" + std::to_string(n);
                return false;
            }
            prev = *q.fdist_sq;
        }
    }
    detail = "strictly decreasing over n in {2,4,8,16} for both laws";
    return true;
}

// 15. KORRESP structure recovery on the two-block table.
bool korresp_recovery(std::string& detail) {
    std::vector<std::int64_t> counts;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) counts.push_back((i / 3 == j / 3) ? 20 : 1);
    const auto table = ContingencyTable::from_counts(
        counts, {"r0", "r1", "r2", "r3", "r4", "r5"}, {"c0", "c1", "c2", "c3", "c4", "c5"});

    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CategoricalConfig cc;  // 7x7 grid, step(1), power gain from 0.1
        cc.steps = 20000;
        cc.seed = seed;
        const auto map = korresp_run(table, cc);
        bool all_adjacent = true;
        for (int i = 0; i < 6 && all_adjacent; ++i) {
            int jbest = 0;
            for (int j = 1; j < 6; ++j)
                if (table.at(i, j) > table.at(i, jbest)) jbest = j;
            const int u_row = map.entries[static_cast<std::size_t>(i)].unit;
            const int u_col = map.entries[static_cast<std::size_t>(6 + jbest)].unit;
            if (map.lattice.distance(u_row, u_col) > 1) all_adjacent = false;
        }
        good += all_adjacent ? 1 : 0;
    }
    detail = std::to_string(good) + "/20 runs placed every row next to its column partner";
    return good >= 18;
}

// 16. Burt invariants on 1000 random datasets + bitwise pipeline determinism.
bool kacm_integrity(std::string& detail) {
    RandomStream rng(1616);
    for (int trial = 0; trial < 1000; ++trial) {
        ResponseTable rt;
        const int k = 2 + static_cast<int>(rng.index(4));
        for (int q = 0; q < k; ++q) {
            rt.questions.push_back("q" + std::to_string(q));
            std::vector<std::string> labels;
            const int m = 2 + static_cast<int>(rng.index(4));
            for (int a = 0; a < m; ++a) labels.push_back("a" + std::to_string(a));
            rt.modality_labels.push_back(labels);
        }
        const int n = 1 + static_cast<int>(rng.index(50));
        for (int r = 0; r < n; ++r) {
            std::vector<int> row;
            for (int q = 0; q < k; ++q)
                row.push_back(static_cast<int>(
                    rng.index(rt.modality_labels[static_cast<std::size_t>(q)].size())));
            rt.answers.push_back(row);
        }
        if (!build_burt(rt).check_invariants()) {
            detail = "invariant violation at dataset " + std::to_string(trial);
            return false;
        }
    }

    ResponseTable rt;
    rt.questions = {"q0", "q1", "q2"};
    rt.modality_labels = {{"a", "b"}, {"x", "y", "z"}, {"u", "v"}};
    for (int r = 0; r < 80; ++r)
        rt.answers.push_back({static_cast<int>(rng.index(2)), static_cast<int>(rng.index(3)),
                              static_cast<int>(rng.index(2))});
    const auto burt = build_burt(rt);
    CategoricalConfig cc;
    cc.steps = 10000;
    cc.seed = 9;
    const auto a = kacm_run(burt, cc);
    const auto b = kacm_run(burt, cc);
    const bool deterministic = a.final_state.w == b.final_state.w;
    detail = "1000 datasets exact; deterministic rerun: " +
             std::string(deterministic ? "bitwise equal" : "MISMATCH");
    return deterministic;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "constant-gain runs reach F+ u F-", ordering_hits},
        {2, "the ordered set is absorbing", ordering_absorbing},
        {3, "decreasing-gain convergence to m*", convergence_1d},
        {4, "0-neighbor optimum at the uniform midpoints", quantization_optimum},
        {5, "scaled distortion n^{2/d} V_n stabilizes", zador_scaling},
        {6, "distortion gradient vs finite differences", gradient_consistency},
        {7, "one-step drift matches the mean field h", meanfield_consistency},
        {8, "cooperativity of the mean flow", cooperativity},
        {9, "grid states are equilibria", grid_equilibrium},
        {10, "F++ admits exits", fpp_exit},
        {11, "dimension selection stability", dimension_selection},
        {12, "invariant measure concentration", invariant_concentration},
        {13, "quantizer cubature at n^{-2} speed", quantizer_integration},
        {14, "||F_n - F||^2 strictly decreasing", fdist_decreasing},
        {15, "KORRESP block structure recovery", korresp_recovery},
        {16, "KACM Burt integrity and determinism", kacm_integrity},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%2d] %s  %s (%s)\n", c.id, ok ? "PASS" : "FAIL", c.name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        failures += ok ? 0 : 1;
    }
    std::printf("%d/16 criteria passed\n", 16 - failures);
    return failures == 0 ? 0 : 1;
}
