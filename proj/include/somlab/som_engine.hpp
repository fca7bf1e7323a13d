#pragma once

#include <cassert>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "somlab/stimuli.hpp"
#include "somlab/topology.hpp"

namespace somlab {

// Process state: n weight vectors of dimension d plus the step counter.
struct NetworkState {
    LatticeSpec lattice;
    int dim = 1;
    Vec w;  // n x dim, row-major
    std::uint64_t time = 0;

    int units() const { return lattice.units(); }

    std::span<double> unit(int i) {
        return std::span<double>(w).subspan(static_cast<std::size_t>(i) * dim, dim);
    }
    std::span<const double> unit(int i) const {
        return std::span<const double>(w).subspan(static_cast<std::size_t>(i) * dim, dim);
    }

    static NetworkState from_weights(LatticeSpec lattice, int dim, Vec weights);
};

// Adaptation gain rule. All kinds are ]0,1[-valued for every t; only the
// power family with gamma in ]1/2, 1] satisfies the Robbins-Monro sums.
struct GainSchedule {
    enum class Kind { Constant, Power, Log };
    Kind kind = Kind::Constant;
    double a = 0.1;      // constant value, power numerator, or the log constant A
    double b = 0.0;      // power offset
    double gamma = 1.0;  // power exponent

    static GainSchedule constant(double eps);
    // eps_t = a / (b + t)^gamma
    static GainSchedule power(double a, double b, double gamma);
    // eps_t = A / ln(t + e); ln(t+e) keeps t=0 well-defined
    static GainSchedule log_rule(double A);

    double gain(std::uint64_t t) const;
    bool robbins_monro() const;
    std::string describe() const;
};

struct Metric {
    enum class Kind { Euclidean, Chi2 };
    Kind kind = Kind::Euclidean;
    Vec masses;  // chi2 reference masses, strictly positive, sum 1

    static Metric euclidean() { return Metric{}; }
    static Metric chi2(Vec masses);

    double distance_sq(std::span<const double> a, std::span<const double> b) const;
};

// Closest unit to x; ties broken by the lowest unit index.
int winner(const NetworkState& state, std::span<const double> x, const Metric& metric = Metric::euclidean());

// In-place one-step update with a known winner: m_i -= eps * L(dist(i0,i)) * (m_i - x).
void apply_update(NetworkState& state, std::span<const double> x, double eps,
                  const NeighborhoodFunction& lambda, int winner_unit);

// One step of the process; returns the advanced state with time incremented.
NetworkState step(NetworkState state, std::span<const double> x, double eps,
                  const NeighborhoodFunction& lambda, const Metric& metric = Metric::euclidean());

struct Observer {
    std::uint64_t stride = 1000;
    std::function<void(const NetworkState&)> fn;
};

struct RunHooks {
    std::vector<Observer> observers;
    // Checked after every step; the run stops the first time it returns true.
    std::function<bool(const NetworkState&)> stop;
};

struct RunResult {
    NetworkState state;
    std::uint64_t steps_done = 0;
    std::optional<std::uint64_t> stop_time;
};

// Simulate `steps` inputs drawn i.i.d. from mu. Deterministic given the
// initial state and the stream.
RunResult run(NetworkState initial, const StimuliDistribution& mu, const GainSchedule& schedule,
              const NeighborhoodFunction& lambda, std::uint64_t steps, RandomStream& rng,
              const RunHooks& hooks = {}, const Metric& metric = Metric::euclidean());

// Initial states.
NetworkState init_random(LatticeSpec lattice, const StimuliDistribution& mu, RandomStream& rng);
// Sorted uniform draw over the 1-d support: a point of F_n^+ almost surely.
NetworkState init_ordered_1d(LatticeSpec lattice, const StimuliDistribution& mu, RandomStream& rng);
// d=2 grid state with strictly increasing per-axis coordinates: inside F^{++}.
NetworkState init_grid_fpp(LatticeSpec lattice, const StimuliDistribution& mu, RandomStream& rng);

enum class InitMode { Random, Ordered1d, GridFpp, Explicit };

// Everything a trial needs besides its seed.
struct ProcessScenario {
    LatticeSpec lattice;
    NeighborhoodFunction lambda;
    StimuliDistribution mu;
    GainSchedule schedule;
    InitMode init = InitMode::Random;
    std::optional<NetworkState> explicit_init;

    NetworkState make_initial(RandomStream& rng) const;
};

}  // namespace somlab
