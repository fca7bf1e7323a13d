#include "somlab/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "somlab/geometry.hpp"
#include "somlab/meanfield.hpp"
#include "somlab/parallel.hpp"
#include "somlab/quadrature.hpp"

namespace somlab {

namespace {

void require_distinct(const NetworkState& s) {
    const int n = s.units();
    const int d = s.dim;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::equal(s.unit(i).begin(), s.unit(i).end(), s.unit(j).begin()))
                throw DegeneracyError("units " + std::to_string(i) + " and " + std::to_string(j) +
                                      " coincide");
    (void)d;
}

bool exact_2d_uniform(const NetworkState& s, const StimuliDistribution& mu) {
    return s.dim == 2 && mu.kind() == StimuliKind::UniformBox;
}

}  // namespace

DistortionValue distortion(const NetworkState& state, const StimuliDistribution& mu,
                           int mc_samples, std::uint64_t mc_seed) {
    const int n = state.units();
    const int d = state.dim;
    if (d != mu.dim()) throw UsageError("state and law dimensions differ");

    if (mu.kind() == StimuliKind::Discrete) {
        const auto& pts = mu.points();
        double acc = 0.0;
        for (const auto& p : pts) {
            double best = dist_sq(state.unit(0), p);
            for (int i = 1; i < n; ++i) best = std::min(best, dist_sq(state.unit(i), p));
            acc += best;
        }
        return {0.5 * acc / static_cast<double>(pts.size()), 0.0};
    }

    if (d == 1) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto cell = voronoi_cell_1d(state.w, n, i, mu.bounds()[0]);
            if (cell.empty) continue;
            acc += mu.interval_second_moment(cell.lo, cell.hi, state.w[static_cast<std::size_t>(i)]);
        }
        return {0.5 * acc, 0.0};
    }

    if (exact_2d_uniform(state, mu)) {
        const auto& b = mu.bounds();
        const Polygon box = box_polygon(b[0].lo, b[0].hi, b[1].lo, b[1].hi);
        const double box_area = (b[0].hi - b[0].lo) * (b[1].hi - b[1].lo);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const Polygon cell = voronoi_cell_2d(state.w, n, i, box);
            if (cell.empty()) continue;
            acc += polygon_second_moment_about(cell, state.unit(i)[0], state.unit(i)[1]);
        }
        return {0.5 * acc / box_area, 0.0};
    }

    RandomStream rng(mc_seed);
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < mc_samples; ++s) {
        const Vec x = mu.sample(rng);
        double best = dist_sq(state.unit(0), x);
        for (int i = 1; i < n; ++i) best = std::min(best, dist_sq(state.unit(i), x));
        const double v = 0.5 * best;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / mc_samples;
    const double var = std::max(sum2 / mc_samples - mean * mean, 0.0);
    return {mean, std::sqrt(var / mc_samples)};
}

Vec distortion_gradient(const NetworkState& state, const StimuliDistribution& mu) {
    const int n = state.units();
    const int d = state.dim;
    if (d != mu.dim()) throw UsageError("state and law dimensions differ");
    require_distinct(state);
    if (mu.is_continuous() && d > 1 && !exact_2d_uniform(state, mu))
        throw UsageError("distortion_gradient needs an exact cell path");

    Vec g(static_cast<std::size_t>(n) * d, 0.0);
    for (int i = 0; i < n; ++i) {
        const CellStats cs = voronoi_cell_stats(mu, state.w, n, d, i);
        if (cs.empty) continue;
        for (int k = 0; k < d; ++k)
            g[static_cast<std::size_t>(i) * d + k] =
                cs.mass * (state.unit(i)[static_cast<std::size_t>(k)] - cs.mean[static_cast<std::size_t>(k)]);
    }
    return g;
}

namespace {

// ||F_n - F||^2 by exact piecewise integration between consecutive atoms,
// plus the Kolmogorov-Smirnov distance. 1-d continuous laws only.
std::pair<double, double> distribution_distances(const std::vector<double>& atoms,
                                                 const Vec& weights,
                                                 const StimuliDistribution& mu) {
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

    const auto& b = mu.bounds()[0];
    const bool uniform = mu.kind() == StimuliKind::UniformBox;
    auto cdf = [&](double x) { return mu.cdf(x); };

    double l2 = 0.0, ks = 0.0, cum = 0.0, prev = b.lo;
    for (std::size_t r = 0; r <= order.size(); ++r) {
        const double next = (r < order.size()) ? std::clamp(atoms[order[r]], b.lo, b.hi) : b.hi;
        if (next > prev) {
            if (uniform) {
                // F(x) = (x-lo)/width; integrate (cum - F)^2 in closed form.
                const double width = b.hi - b.lo;
                const double u0 = cum - (prev - b.lo) / width;
                const double u1 = cum - (next - b.lo) / width;
                l2 += width * (u0 * u0 * u0 - u1 * u1 * u1) / 3.0;
            } else {
                const double c = cum;
                l2 += integrate([&](double x) { return sq(c - cdf(x)); }, prev, next, 1e-13);
            }
        }
        if (r < order.size()) {
            const double fx = cdf(atoms[order[r]]);
            ks = std::max(ks, std::abs(fx - cum));
            cum += weights[order[r]];
            ks = std::max(ks, std::abs(fx - cum));
            prev = std::max(prev, next);
        }
    }
    return {l2, ks};
}

}  // namespace

QuantizerReport quantizer_report(NetworkState state, const StimuliDistribution& mu,
                                 int mc_samples) {
    QuantizerReport rep;
    const int n = state.units();
    const int d = state.dim;
    const DistortionValue dv = distortion(state, mu, mc_samples);
    rep.distortion = dv.value;
    rep.distortion_se = dv.se;
    rep.scaled_distortion = std::pow(static_cast<double>(n), 2.0 / d) * dv.value;

    rep.cell_masses.assign(static_cast<std::size_t>(n), 0.0);
    const bool exact_cells =
        mu.kind() == StimuliKind::Discrete || d == 1 || exact_2d_uniform(state, mu);
    RandomStream rng(0x6d617373ULL);
    for (int i = 0; i < n; ++i) {
        const CellStats cs = exact_cells
                                 ? voronoi_cell_stats(mu, state.w, n, d, i)
                                 : voronoi_cell_stats(mu, state.w, n, d, i, mc_samples, &rng);
        rep.cell_masses[static_cast<std::size_t>(i)] = cs.mass;
    }

    if (d == 1 && mu.is_continuous()) {
        std::vector<double> atoms(state.w.begin(), state.w.end());
        rep.fdist_sq = distribution_distances(atoms, rep.cell_masses, mu).first;
        bool distinct = true;
        for (int i = 0; i < n && distinct; ++i)
            for (int j = i + 1; j < n; ++j)
                if (state.w[static_cast<std::size_t>(i)] == state.w[static_cast<std::size_t>(j)]) {
                    distinct = false;
                    break;
                }
        if (distinct) {
            const Vec g = distortion_gradient(state, mu);
            double r = 0.0;
            for (double v : g) r = std::max(r, std::abs(v));
            rep.gradient_residual = r;
        }
    }
    rep.state = std::move(state);
    return rep;
}

QuantizerReport train_0neighbor(const ProcessScenario& scenario, std::uint64_t steps,
                                std::uint64_t seed) {
    if (!(scenario.lambda.table.size() == 1 && scenario.lambda.table[0] == 1.0))
        throw UsageError("train_0neighbor needs the indicator-0 neighborhood");
    if (!scenario.schedule.robbins_monro())
        throw UsageError("train_0neighbor needs a Robbins-Monro schedule");
    RandomStream rng(seed);
    NetworkState s = scenario.make_initial(rng);
    const RunResult res = run(std::move(s), scenario.mu, scenario.schedule, scenario.lambda, steps, rng);
    return quantizer_report(res.state, scenario.mu);
}

namespace {

double cdf_inverse(const StimuliDistribution& mu, double p) {
    const auto& b = mu.bounds()[0];
    double lo = b.lo, hi = b.hi;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mu.cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

QuantizerReport optimal_quantizer_1d(int n, const StimuliDistribution& mu, double tol) {
    if (mu.dim() != 1 || !mu.is_continuous())
        throw UsageError("optimal_quantizer_1d needs a 1-d continuous law");
    if (!mu.h_mu_certified())
        throw UsageError("optimal_quantizer_1d needs a certified H_mu law");

    const LatticeSpec lattice = LatticeSpec::string1d(n);
    Vec m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        m[static_cast<std::size_t>(i)] = cdf_inverse(mu, (2.0 * i + 1.0) / (2.0 * n));

    // Lloyd: each code moves to its cell's conditional mean.
    const auto& b = mu.bounds()[0];
    for (int it = 0; it < 200000; ++it) {
        double delta = 0.0;
        Vec next = m;
        for (int i = 0; i < n; ++i) {
            const double lo = (i == 0) ? b.lo : 0.5 * (m[static_cast<std::size_t>(i - 1)] + m[static_cast<std::size_t>(i)]);
            const double hi = (i == n - 1) ? b.hi : 0.5 * (m[static_cast<std::size_t>(i)] + m[static_cast<std::size_t>(i + 1)]);
            const CellStats cs = mu.interval_stats(lo, hi);
            if (cs.empty) continue;
            next[static_cast<std::size_t>(i)] = cs.mean[0];
            delta = std::max(delta, std::abs(next[static_cast<std::size_t>(i)] - m[static_cast<std::size_t>(i)]));
        }
        m = std::move(next);
        if (delta < tol) break;
        if (it == 199999)
            throw NumericError("Lloyd iteration did not reach tol " + format_real(tol));
    }

    // Newton polish on grad V_n (= h with 0 neighbors).
    if (n > 1) {
        const MeanField mf =
            MeanField::make(lattice, NeighborhoodFunction::indicator0(), mu);
        try {
            const EquilibriumReport eq =
                solve_equilibrium(mf, NetworkState::from_weights(lattice, 1, m), 1e-12);
            m = eq.state.w;
        } catch (const NumericError&) {
            // keep the Lloyd point; the report carries its gradient residual
        }
    }
    return quantizer_report(NetworkState::from_weights(lattice, 1, std::move(m)), mu);
}

namespace {

// d=2 uniform box: Lloyd polishing with exact polygon centroids.
NetworkState lloyd_polish_2d(NetworkState s, const StimuliDistribution& mu, int iters) {
    const int n = s.units();
    const auto& b = mu.bounds();
    const Polygon box = box_polygon(b[0].lo, b[0].hi, b[1].lo, b[1].hi);
    for (int it = 0; it < iters; ++it) {
        double delta = 0.0;
        Vec next = s.w;
        for (int i = 0; i < n; ++i) {
            const Polygon cell = voronoi_cell_2d(s.w, n, i, box);
            if (cell.empty()) continue;
            const double area = polygon_area(cell);
            if (area <= 0.0) continue;
            const auto fm = polygon_first_moment(cell);
            const double cx = fm[0] / area, cy = fm[1] / area;
            delta = std::max({delta, std::abs(cx - s.unit(i)[0]), std::abs(cy - s.unit(i)[1])});
            next[2 * static_cast<std::size_t>(i)] = cx;
            next[2 * static_cast<std::size_t>(i) + 1] = cy;
        }
        s.w = std::move(next);
        if (delta < 1e-13) break;
    }
    return s;
}

}  // namespace

std::vector<ZadorRow> zador_scan(const std::vector<int>& ns, const StimuliDistribution& mu,
                                 int restarts, std::uint64_t master_seed,
                                 std::uint64_t sgd_steps) {
    if (!mu.is_continuous()) throw UsageError("zador_scan needs a continuous law");
    std::vector<ZadorRow> rows;
    for (int n : ns) {
        QuantizerReport best;
        if (mu.dim() == 1) {
            best = optimal_quantizer_1d(n, mu);
        } else if (mu.dim() == 2 && mu.kind() == StimuliKind::UniformBox) {
            const LatticeSpec lattice = LatticeSpec::string1d(n);
            std::vector<QuantizerReport> cand(static_cast<std::size_t>(restarts));
            parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
                RandomStream rng(trial_seed(master_seed, r));
                NetworkState s = init_random(lattice, mu, rng);
                const auto sched = GainSchedule::power(1.0, 100.0, 0.6);
                const RunResult res = run(std::move(s), mu, sched,
                                          NeighborhoodFunction::indicator0(), sgd_steps, rng);
                cand[r] = quantizer_report(lloyd_polish_2d(res.state, mu, 2000), mu);
            });
            best = cand.front();
            for (auto& c : cand)
                if (c.distortion < best.distortion) best = std::move(c);
        } else {
            throw UsageError("zador_scan supports 1-d laws and 2-d uniform boxes");
        }
        rows.push_back({n, best.distortion, best.scaled_distortion, best.fdist_sq});
    }
    return rows;
}

QuantizedMeasure quantized_measure(const QuantizerReport& report, const StimuliDistribution& mu) {
    QuantizedMeasure qm;
    const int n = report.state.units();
    for (int i = 0; i < n; ++i)
        qm.atoms.emplace_back(report.state.unit(i).begin(), report.state.unit(i).end());
    qm.weights = report.cell_masses;
    if (report.state.dim == 1 && mu.is_continuous()) {
        std::vector<double> atoms(report.state.w.begin(), report.state.w.end());
        const auto [l2, ks] = distribution_distances(atoms, report.cell_masses, mu);
        qm.fdist_sq = l2;
        qm.ks = ks;
    }
    return qm;
}

double quantize_integrate(const std::function<double(std::span<const double>)>& g,
                          const QuantizerReport& report) {
    double acc = 0.0;
    for (int i = 0; i < report.state.units(); ++i)
        acc += report.cell_masses[static_cast<std::size_t>(i)] * g(report.state.unit(i));
    return acc;
}

double quantize_integrate1d(const std::function<double(double)>& g,
                            const QuantizerReport& report) {
    return quantize_integrate([&](std::span<const double> x) { return g(x[0]); }, report);
}

std::vector<MagnificationRow> magnification_experiment(const StimuliDistribution& mu, int n) {
    if (mu.dim() != 1 || !mu.is_continuous())
        throw UsageError("magnification experiment is one-dimensional");
    const QuantizerReport rep = optimal_quantizer_1d(n, mu);
    const auto& b = mu.bounds()[0];

    const double norm =
        integrate([&](double x) { return std::cbrt(mu.density(x)); }, b.lo, b.hi, 1e-12);

    std::vector<MagnificationRow> rows;
    for (int i = 0; i < n; ++i) {
        const double m = rep.state.w[static_cast<std::size_t>(i)];
        const auto cell = voronoi_cell_1d(rep.state.w, n, i, b);
        MagnificationRow row;
        row.unit = i;
        row.code = m;
        row.cell_mass = rep.cell_masses[static_cast<std::size_t>(i)];
        row.code_density = cell.empty ? 0.0 : 1.0 / (n * (cell.hi - cell.lo));
        row.zador_density = std::cbrt(mu.density(m)) / norm;
        rows.push_back(row);
    }
    return rows;
}

double discrete_potential(const NetworkState& state, const StimuliDistribution& mu,
                          const NeighborhoodFunction& lambda) {
    if (mu.kind() != StimuliKind::Discrete) throw UsageError("discrete potential needs a discrete law");
    const auto& pts = mu.points();
    const int n = state.units();
    const int d = state.dim;
    double acc = 0.0;
    for (const auto& x : pts) {
        const int i = nearest_unit(state.w, n, d, x);
        for (int j = 0; j < n; ++j) {
            const double lv = lambda.value(state.lattice.distance(i, j));
            if (lv == 0.0) continue;
            acc += lv * dist_sq(state.unit(j), x);
        }
    }
    return acc / (2.0 * static_cast<double>(pts.size()));
}

}  // namespace somlab
