#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "somlab/meanfield.hpp"
#include "somlab/order_analysis.hpp"

using namespace somlab;

namespace {

const StimuliDistribution kUniform = StimuliDistribution::uniform_box({{0.0, 1.0}});

MeanField mf_1d(int n, NeighborhoodFunction lambda, StimuliDistribution mu = kUniform) {
    return MeanField::make(LatticeSpec::string1d(n), std::move(lambda), std::move(mu));
}

NetworkState state1d(Vec w) {
    const int n = static_cast<int>(w.size());
    return NetworkState::from_weights(LatticeSpec::string1d(n), 1, std::move(w));
}

double inf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("h for a single unit is m - 1/2 under the uniform law") {
    const auto mf = mf_1d(1, NeighborhoodFunction::indicator0());
    CHECK(evaluate_h(mf, state1d({0.5}))[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(evaluate_h(mf, state1d({0.3}))[0] == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("the 3-unit step(1) equilibrium is (0.3, 0.5, 0.7)") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    const Vec h = evaluate_h(mf, state1d({0.3, 0.5, 0.7}));
    CHECK(inf_norm(h) < 1e-14);
}

TEST_CASE("degenerate states on the exact path name the coinciding units") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    try {
        evaluate_h(mf, state1d({0.4, 0.4, 0.7}));
        FAIL("expected DegeneracyError");
    } catch (const DegeneracyError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0") != std::string::npos);
        CHECK(msg.find("1") != std::string::npos);
    }
}

TEST_CASE("jacobian of h: single unit slope 1") {
    const auto mf = mf_1d(1, NeighborhoodFunction::indicator0());
    const auto jac = jacobian_h(mf, state1d({0.37}));
    CHECK(jac.J(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(jac.flagged[0] == 0);
}

TEST_CASE("at the 3-unit equilibrium: cooperative and attracting") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    const auto rep = analyze_state(mf, state1d({0.3, 0.5, 0.7}));
    CHECK(rep.cooperative);
    CHECK(rep.max_real_eig_flow < 0.0);
    CHECK(rep.verdict == StabilityVerdict::Stable);
    // flow eigenvalues are -0.45, -0.75, -1 for this scenario
    REQUIRE(rep.flow_eigs_real.size() == 3);
    CHECK(rep.flow_eigs_real[0] == doctest::Approx(-0.45).epsilon(1e-6));
    CHECK(rep.flow_eigs_real[2] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("off-diagonal jacobian entries stay nonpositive at random ordered states") {
    const auto mf = mf_1d(5, NeighborhoodFunction::step(1));
    RandomStream rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        const NetworkState s = init_ordered_1d(LatticeSpec::string1d(5), kUniform, rng);
        const auto jac = jacobian_h(mf, s);
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c)
                if (r != c) CHECK(jac.J(r, c) <= 1e-8);
    }
}

TEST_CASE("jacobian columns crossing a reordering are flagged") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    // units 0 and 1 are 2e-7 apart; the 1e-5 perturbation swaps their order
    const auto jac = jacobian_h(mf, state1d({0.4999999, 0.5000001, 0.9}));
    CHECK(jac.flagged[0] == 1);
    CHECK(jac.flagged[1] == 1);
    CHECK(jac.flagged[2] == 0);
}

TEST_CASE("ode flow: an equilibrium stays put") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    const auto res = ode_flow(mf, state1d({0.3, 0.5, 0.7}), 10.0);
    CHECK(inf_norm(Vec{res.state.w[0] - 0.3, res.state.w[1] - 0.5, res.state.w[2] - 0.7}) < 1e-8);
}

TEST_CASE("ode flow converges to the attracting equilibrium") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    const auto res = ode_flow(mf, state1d({0.2, 0.4, 0.9}), 60.0);
    CHECK(std::abs(res.state.w[0] - 0.3) < 1e-6);
    CHECK(std::abs(res.state.w[1] - 0.5) < 1e-6);
    CHECK(std::abs(res.state.w[2] - 0.7) < 1e-6);
}

TEST_CASE("ode flow with zero horizon returns the initial state") {
    const auto mf = mf_1d(2, NeighborhoodFunction::indicator0());
    const auto res = ode_flow(mf, state1d({0.2, 0.9}), 0.0);
    CHECK(res.state.w == Vec{0.2, 0.9});
}

TEST_CASE("ode flow halving sanity: halved step moves the endpoint < 1e-8") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    OdeOptions a;
    a.dt = 0.02;
    OdeOptions b;
    b.dt = 0.01;
    const Vec ea = ode_flow(mf, state1d({0.25, 0.5, 0.8}), 20.0, a).state.w;
    const Vec eb = ode_flow(mf, state1d({0.25, 0.5, 0.8}), 20.0, b).state.w;
    for (std::size_t i = 0; i < ea.size(); ++i) CHECK(std::abs(ea[i] - eb[i]) < 1e-8);
}

TEST_CASE("solve_equilibrium matches the closed forms") {
    const auto eq3 = solve_equilibrium(mf_1d(3, NeighborhoodFunction::step(1)),
                                       state1d({0.2, 0.45, 0.9}));
    CHECK(eq3.state.w[0] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(eq3.state.w[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(eq3.state.w[2] == doctest::Approx(0.7).epsilon(1e-9));

    const auto eq1 = solve_equilibrium(mf_1d(1, NeighborhoodFunction::indicator0()),
                                       state1d({0.12}));
    CHECK(eq1.state.w[0] == doctest::Approx(0.5).epsilon(1e-10));

    Vec start(10);
    for (int i = 0; i < 10; ++i) start[static_cast<std::size_t>(i)] = 0.02 + 0.09 * i;
    const auto eq10 = solve_equilibrium(mf_1d(10, NeighborhoodFunction::indicator0()),
                                        state1d(start));
    for (int i = 0; i < 10; ++i)
        CHECK(eq10.state.w[static_cast<std::size_t>(i)] ==
              doctest::Approx((2.0 * i + 1.0) / 20.0).epsilon(1e-8));
}

TEST_CASE("uniform equilibrium linear system") {
    const Vec m3 = uniform_limit_linear_system(3, NeighborhoodFunction::step(1));
    CHECK(m3[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m3[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m3[2] == doctest::Approx(0.7).epsilon(1e-12));

    // n=2 under step(1) solves to the symmetric (degenerate) pair
    const Vec m2 = uniform_limit_linear_system(2, NeighborhoodFunction::step(1));
    CHECK(m2[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m2[1] == doctest::Approx(0.5).epsilon(1e-12));

    const Vec m10 = uniform_limit_linear_system(10, NeighborhoodFunction::indicator0());
    for (int i = 0; i < 10; ++i)
        CHECK(m10[static_cast<std::size_t>(i)] ==
              doctest::Approx((2.0 * i + 1.0) / 20.0).epsilon(1e-12));

    CHECK_THROWS_AS(uniform_limit_linear_system(4, NeighborhoodFunction::from_table({1, 0.5})),
                    NumericError);
}

TEST_CASE("linear system cross-validates against the Newton solver") {
    struct Case {
        NeighborhoodFunction lambda;
        int n_min;
    };
    // step(2) needs n >= 5: below that the closed-form equilibrium has
    // coinciding weights and the exact-path solver rightly refuses it.
    const Case cases[] = {{NeighborhoodFunction::indicator0(), 3},
                          {NeighborhoodFunction::step(1), 3},
                          {NeighborhoodFunction::step(2), 5}};
    for (const auto& c : cases) {
        for (int n = c.n_min; n <= 10; ++n) {
            const Vec lin = uniform_limit_linear_system(n, c.lambda);
            const auto mf = mf_1d(n, c.lambda);
            Vec start(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                start[static_cast<std::size_t>(i)] = (2.0 * i + 1.0) / (2.0 * n);
            const auto eq = solve_equilibrium(mf, state1d(start), 1e-11);
            for (int i = 0; i < n; ++i)
                CHECK(eq.state.w[static_cast<std::size_t>(i)] ==
                      doctest::Approx(lin[static_cast<std::size_t>(i)]).epsilon(1e-8));
        }
    }
    // the excluded pairs do produce coinciding weights
    for (int n : {3, 4}) {
        const Vec lin = uniform_limit_linear_system(n, NeighborhoodFunction::step(2));
        bool degenerate = false;
        for (std::size_t i = 0; i + 1 < lin.size(); ++i)
            if (lin[i] == lin[i + 1]) degenerate = true;
        CHECK(degenerate);
    }
}

TEST_CASE("grid states built from 1-d equilibria are ODE equilibria") {
    const Vec axis = uniform_limit_linear_system(3, NeighborhoodFunction::step(1));
    const NetworkState gs = grid_state(axis, axis);
    const auto mu2 = StimuliDistribution::uniform_box({{0.0, 1.0}, {0.0, 1.0}});
    const MeanField mf = MeanField::make(gs.lattice, NeighborhoodFunction::indicator8(), mu2);
    CHECK(inf_norm(evaluate_h(mf, gs)) < 1e-6);
    CHECK(classify_fpp(gs));
}

TEST_CASE("2x2 grid from the two-point axis optimum is stable with 0 neighbors") {
    const Vec axis = uniform_limit_linear_system(2, NeighborhoodFunction::indicator0());
    const NetworkState gs = grid_state(axis, axis);
    const auto mu2 = StimuliDistribution::uniform_box({{0.0, 1.0}, {0.0, 1.0}});
    const MeanField mf = MeanField::make(gs.lattice, NeighborhoodFunction::indicator0(), mu2);
    const auto rep = analyze_state(mf, gs);
    CHECK(rep.residual_inf < 1e-10);
    CHECK(rep.max_real_eig_flow < 0.0);
    CHECK(rep.verdict == StabilityVerdict::Stable);
}

TEST_CASE("permuting grid axis values relabels the equilibrium but breaks F++") {
    const Vec axis = uniform_limit_linear_system(3, NeighborhoodFunction::indicator0());
    const Vec permuted{axis[1], axis[0], axis[2]};
    const NetworkState gs = grid_state(permuted, permuted);
    const auto mu2 = StimuliDistribution::uniform_box({{0.0, 1.0}, {0.0, 1.0}});
    const MeanField mf = MeanField::make(gs.lattice, NeighborhoodFunction::indicator0(), mu2);
    CHECK(inf_norm(evaluate_h(mf, gs)) < 1e-10);
    CHECK_FALSE(classify_fpp(gs));
}

TEST_CASE("dimension selection: zero noise decouples") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    const auto base = state1d({0.3, 0.5, 0.7});
    const auto rep = dimension_selection_experiment(mf, base, 0.0);
    CHECK(rep.residual_inf < 1e-12);
    // base spectrum plus one relaxation rate per unit
    CHECK(rep.flow_eigs_real.size() == 6);
    CHECK(rep.max_real_eig_flow < 0.0);
    // unit 1 covers everything: relaxation rate 1; units 0 and 2 cover 0.6
    CHECK(std::count_if(rep.flow_eigs_real.begin(), rep.flow_eigs_real.end(), [](double v) {
              return std::abs(v + 0.6) < 1e-9;
          }) == 2);
}

TEST_CASE("dimension selection: small uniform noise keeps the equilibrium stable") {
    const auto mf = mf_1d(3, NeighborhoodFunction::step(1));
    const auto base = state1d({0.3, 0.5, 0.7});
    const auto rep = dimension_selection_experiment(mf, base, 0.01);
    CHECK(rep.residual_inf < 1e-9);
    CHECK(rep.verdict == StabilityVerdict::Stable);
}

TEST_CASE("an off-equilibrium noise coordinate leaves a residual") {
    const auto mu2 = StimuliDistribution::uniform_box({{0.0, 1.0}, {-0.01, 0.01}});
    const LatticeSpec lattice = LatticeSpec::string1d(3);
    const MeanField mf = MeanField::make(lattice, NeighborhoodFunction::step(1), mu2);
    const NetworkState s =
        NetworkState::from_weights(lattice, 2, {0.3, 0.5, 0.5, 0.5, 0.7, 0.5});
    CHECK(inf_norm(evaluate_h(mf, s)) > 1e-3);
}

TEST_CASE("solver reports non-convergence with the best residual") {
    // a frozen two-point law cannot zero h for 2 units at tolerance 0
    const auto mf = mf_1d(2, NeighborhoodFunction::step(1));
    CHECK_THROWS_AS(solve_equilibrium(mf, state1d({0.1, 0.2}), 0.0), NumericError);
}

TEST_CASE("Monte Carlo policy agrees with the exact path and stays reproducible") {
    const auto mu2 = StimuliDistribution::uniform_box({{0.0, 1.0}, {0.0, 1.0}});
    const LatticeSpec lattice = LatticeSpec::string1d(3);
    const auto lambda = NeighborhoodFunction::step(1);
    const MeanField exact = MeanField::make(lattice, lambda, mu2);
    MeanField mc = exact;
    mc.policy = HPolicy::MonteCarlo;
    mc.mc_samples = 200000;

    const auto s = NetworkState::from_weights(lattice, 2, {0.2, 0.3, 0.5, 0.6, 0.8, 0.4});
    const Vec he = evaluate_h(exact, s);
    const Vec hm = evaluate_h(mc, s);
    REQUIRE(he.size() == hm.size());
    for (std::size_t i = 0; i < he.size(); ++i)
        CHECK(std::abs(he[i] - hm[i]) < 0.01);  // ~ a few sampling standard errors
    CHECK(evaluate_h(mc, s) == hm);  // seeded: reproducible

    // common random numbers keep the finite-difference Jacobian usable
    const auto je = jacobian_h(exact, s);
    const auto jm = jacobian_h(mc, s);
    for (Eigen::Index r = 0; r < je.J.rows(); ++r)
        for (Eigen::Index c = 0; c < je.J.cols(); ++c)
            CHECK(std::abs(je.J(r, c) - jm.J(r, c)) < 0.35);
}
