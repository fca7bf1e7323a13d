#include "somlab/som_engine.hpp"

#include <algorithm>
#include <cmath>

namespace somlab {

NetworkState NetworkState::from_weights(LatticeSpec lattice, int dim, Vec weights) {
    if (dim < 1) throw ConfigError("state dimension must be >= 1");
    if (weights.size() != static_cast<std::size_t>(lattice.units()) * dim)
        throw ConfigError("weight array size does not match n x d");
    return NetworkState{lattice, dim, std::move(weights), 0};
}

GainSchedule GainSchedule::constant(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("constant gain must lie in ]0,1[");
    return GainSchedule{Kind::Constant, eps, 0.0, 1.0};
}

GainSchedule GainSchedule::power(double a, double b, double gamma) {
    if (!(a > 0.0 && b > 0.0 && gamma > 0.0))
        throw ConfigError("power gain needs a > 0, b > 0, gamma > 0");
    const double eps0 = a / std::pow(b, gamma);
    if (!(eps0 > 0.0 && eps0 < 1.0))
        throw ConfigError("power gain must start inside ]0,1[: eps_0 = " + format_real(eps0));
    return GainSchedule{Kind::Power, a, b, gamma};
}

GainSchedule GainSchedule::log_rule(double A) {
    if (!(A > 0.0 && A < 1.0)) throw ConfigError("log gain constant must lie in ]0,1[");
    return GainSchedule{Kind::Log, A, 0.0, 1.0};
}

double GainSchedule::gain(std::uint64_t t) const {
    switch (kind) {
        case Kind::Constant:
            return a;
        case Kind::Power:
            return a / std::pow(b + static_cast<double>(t), gamma);
        case Kind::Log:
            return a / std::log(static_cast<double>(t) + M_E);
    }
    return a;
}

bool GainSchedule::robbins_monro() const {
    return kind == Kind::Power && gamma > 0.5 && gamma <= 1.0;
}

std::string GainSchedule::describe() const {
    switch (kind) {
        case Kind::Constant:
            return "constant(" + format_real(a) + ")";
        case Kind::Power:
            return "power(" + format_real(a) + "," + format_real(b) + "," + format_real(gamma) + ")";
        case Kind::Log:
            return "log(" + format_real(a) + ")";
    }
    return "?";
}

Metric Metric::chi2(Vec masses) {
    double total = 0.0;
    for (double m : masses) {
        if (!(m > 0.0)) throw ConfigError("chi2 metric masses must be strictly positive");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("chi2 metric masses must sum to 1");
    Metric m;
    m.kind = Kind::Chi2;
    m.masses = std::move(masses);
    return m;
}

double Metric::distance_sq(std::span<const double> a, std::span<const double> b) const {
    if (kind == Kind::Euclidean) return dist_sq(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += sq(a[k] - b[k]) / masses[k];
    return s;
}

int winner(const NetworkState& state, std::span<const double> x, const Metric& metric) {
    const int n = state.units();
    if (n == 0) throw UsageError("winner on an empty state");
    if (metric.kind == Metric::Kind::Euclidean)
        return nearest_unit(state.w, n, state.dim, x);
    int best = 0;
    double best_d = metric.distance_sq(state.unit(0), x);
    for (int i = 1; i < n; ++i) {
        const double di = metric.distance_sq(state.unit(i), x);
        if (di < best_d) {
            best_d = di;
            best = i;
        }
    }
    return best;
}

void apply_update(NetworkState& state, std::span<const double> x, double eps,
                  const NeighborhoodFunction& lambda, int winner_unit) {
    const int n = state.units();
    const int d = state.dim;
    for (int i = 0; i < n; ++i) {
        const double lv = lambda.value(state.lattice.distance(winner_unit, i));
        if (lv == 0.0) continue;
        const double g = eps * lv;
        double* wi = state.w.data() + static_cast<std::size_t>(i) * d;
        for (int k = 0; k < d; ++k) wi[k] -= g * (wi[k] - x[static_cast<std::size_t>(k)]);
    }
}

NetworkState step(NetworkState state, std::span<const double> x, double eps,
                  const NeighborhoodFunction& lambda, const Metric& metric) {
    if (!(eps > 0.0 && eps < 1.0)) throw UsageError("step gain must lie in ]0,1[");
    const int i0 = winner(state, x, metric);
    apply_update(state, x, eps, lambda, i0);
    ++state.time;
    return state;
}

RunResult run(NetworkState initial, const StimuliDistribution& mu, const GainSchedule& schedule,
              const NeighborhoodFunction& lambda, std::uint64_t steps, RandomStream& rng,
              const RunHooks& hooks, const Metric& metric) {
    RunResult res{std::move(initial), 0, std::nullopt};
    NetworkState& s = res.state;
    for (std::uint64_t k = 0; k < steps; ++k) {
        const Vec x = mu.sample(rng);
        const double eps = schedule.gain(s.time);
        const int i0 = winner(s, x, metric);
        apply_update(s, x, eps, lambda, i0);
        ++s.time;
        ++res.steps_done;
#ifndef NDEBUG
        for (int i = 0; i < s.units(); ++i)
            for (int a = 0; a < s.dim; ++a) {
                const double v = s.unit(i)[static_cast<std::size_t>(a)];
                assert(v >= mu.bounds()[static_cast<std::size_t>(a)].lo - 1e-12 &&
                       v <= mu.bounds()[static_cast<std::size_t>(a)].hi + 1e-12);
            }
#endif
        for (const auto& ob : hooks.observers) {
            if (ob.stride > 0 && s.time % ob.stride == 0) ob.fn(s);
        }
        if (hooks.stop && hooks.stop(s)) {
            res.stop_time = s.time;
            break;
        }
    }
    return res;
}

NetworkState init_random(LatticeSpec lattice, const StimuliDistribution& mu, RandomStream& rng) {
    const int n = lattice.units();
    const int d = mu.dim();
    Vec w(static_cast<std::size_t>(n) * d);
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) {
            const auto& b = mu.bounds()[static_cast<std::size_t>(a)];
            w[static_cast<std::size_t>(i) * d + a] = rng.uniform(b.lo, b.hi);
        }
    }
    return NetworkState::from_weights(lattice, d, std::move(w));
}

NetworkState init_ordered_1d(LatticeSpec lattice, const StimuliDistribution& mu, RandomStream& rng) {
    if (mu.dim() != 1) throw UsageError("ordered start needs a one-dimensional law");
    const int n = lattice.units();
    const auto& b = mu.bounds()[0];
    Vec w(static_cast<std::size_t>(n));
    for (auto& v : w) v = rng.uniform(b.lo, b.hi);
    std::sort(w.begin(), w.end());
    return NetworkState::from_weights(lattice, 1, std::move(w));
}

NetworkState ProcessScenario::make_initial(RandomStream& rng) const {
    switch (init) {
        case InitMode::Random:
            return init_random(lattice, mu, rng);
        case InitMode::Ordered1d:
            return init_ordered_1d(lattice, mu, rng);
        case InitMode::GridFpp:
            return init_grid_fpp(lattice, mu, rng);
        case InitMode::Explicit:
            if (!explicit_init) throw ConfigError("explicit initial state not provided");
            return *explicit_init;
    }
    throw UsageError("unreachable");
}

NetworkState init_grid_fpp(LatticeSpec lattice, const StimuliDistribution& mu, RandomStream& rng) {
    if (lattice.kind != LatticeKind::Grid2d || mu.dim() != 2)
        throw UsageError("F++ start needs a 2-d grid and a 2-d law");
    const int n1 = lattice.rows;
    const int n2 = lattice.cols;
    Vec xs(static_cast<std::size_t>(n1)), ys(static_cast<std::size_t>(n2));
    for (auto& v : xs) v = rng.uniform(mu.bounds()[0].lo, mu.bounds()[0].hi);
    for (auto& v : ys) v = rng.uniform(mu.bounds()[1].lo, mu.bounds()[1].hi);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    Vec w(static_cast<std::size_t>(n1) * n2 * 2);
    for (int r = 0; r < n1; ++r)
        for (int c = 0; c < n2; ++c) {
            w[2 * static_cast<std::size_t>(r * n2 + c)] = xs[static_cast<std::size_t>(r)];
            w[2 * static_cast<std::size_t>(r * n2 + c) + 1] = ys[static_cast<std::size_t>(c)];
        }
    return NetworkState::from_weights(lattice, 2, std::move(w));
}

}  // namespace somlab
