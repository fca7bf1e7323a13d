#include "somlab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "somlab/parallel.hpp"

namespace somlab {

namespace {

struct CellTable {
    Vec mass;  // n
    Vec mom;   // n x d, first moments (mass * mean)
};

void check_not_degenerate_1d(const NetworkState& s) {
    const int n = s.units();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (s.w[static_cast<std::size_t>(i)] == s.w[static_cast<std::size_t>(j)])
                throw DegeneracyError("units " + std::to_string(i) + " and " + std::to_string(j) +
                                      " coincide at " + format_real(s.w[static_cast<std::size_t>(i)]));
}

CellTable cells_deterministic(const MeanField& mf, const NetworkState& s) {
    const int n = s.units();
    const int d = s.dim;
    CellTable t;
    t.mass.assign(static_cast<std::size_t>(n), 0.0);
    t.mom.assign(static_cast<std::size_t>(n) * d, 0.0);
    if (mf.policy == HPolicy::Deterministic1d) check_not_degenerate_1d(s);
    for (int j = 0; j < n; ++j) {
        const CellStats cs = voronoi_cell_stats(mf.mu, s.w, n, d, j);
        if (cs.empty) continue;
        t.mass[static_cast<std::size_t>(j)] = cs.mass;
        for (int k = 0; k < d; ++k)
            t.mom[static_cast<std::size_t>(j) * d + k] = cs.mass * cs.mean[static_cast<std::size_t>(k)];
    }
    return t;
}

CellTable cells_from_samples(const NetworkState& s, const std::vector<Vec>& xs) {
    const int n = s.units();
    const int d = s.dim;
    CellTable t;
    t.mass.assign(static_cast<std::size_t>(n), 0.0);
    t.mom.assign(static_cast<std::size_t>(n) * d, 0.0);
    for (const auto& x : xs) {
        const int j = nearest_unit(s.w, n, d, x);
        t.mass[static_cast<std::size_t>(j)] += 1.0;
        for (int k = 0; k < d; ++k) t.mom[static_cast<std::size_t>(j) * d + k] += x[static_cast<std::size_t>(k)];
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& v : t.mass) v *= inv;
    for (auto& v : t.mom) v *= inv;
    return t;
}

std::vector<Vec> draw_samples(const MeanField& mf, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<Vec> xs;
    xs.reserve(static_cast<std::size_t>(mf.mc_samples));
    for (int i = 0; i < mf.mc_samples; ++i) xs.push_back(mf.mu.sample(rng));
    return xs;
}

Vec h_from_cells(const MeanField& mf, const NetworkState& s, const CellTable& t) {
    const int n = s.units();
    const int d = s.dim;
    Vec h(static_cast<std::size_t>(n) * d, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double lv = mf.lambda.value(mf.lattice.distance(i, j));
            if (lv == 0.0) continue;
            const double mj = t.mass[static_cast<std::size_t>(j)];
            for (int k = 0; k < d; ++k) {
                h[static_cast<std::size_t>(i) * d + k] +=
                    lv * (s.w[static_cast<std::size_t>(i) * d + k] * mj -
                          t.mom[static_cast<std::size_t>(j) * d + k]);
            }
        }
    }
    return h;
}

// Adjacency signature used to flag Jacobian columns whose perturbation
// crosses a Voronoi reordering: weight ranking in 1-d, emptiness elsewhere.
std::vector<int> cell_signature(const MeanField& mf, const NetworkState& s, const CellTable& t) {
    if (mf.policy == HPolicy::Deterministic1d) {
        std::vector<int> order(static_cast<std::size_t>(s.units()));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return s.w[static_cast<std::size_t>(a)] < s.w[static_cast<std::size_t>(b)];
        });
        return order;
    }
    std::vector<int> sig(t.mass.size());
    for (std::size_t j = 0; j < t.mass.size(); ++j) sig[j] = t.mass[j] > 0.0 ? 1 : 0;
    return sig;
}

}  // namespace

MeanField MeanField::make(LatticeSpec lattice, NeighborhoodFunction lambda, StimuliDistribution mu,
                          int mc_samples) {
    MeanField mf{std::move(lattice), std::move(lambda), std::move(mu)};
    mf.mc_samples = mc_samples;
    if (mf.mu.kind() == StimuliKind::Discrete)
        mf.policy = HPolicy::DiscreteExact;
    else if (mf.mu.dim() == 1)
        mf.policy = HPolicy::Deterministic1d;
    else if (mf.mu.dim() == 2 && mf.mu.kind() == StimuliKind::UniformBox)
        mf.policy = HPolicy::Polygon2d;
    else
        mf.policy = HPolicy::MonteCarlo;
    return mf;
}

Vec evaluate_h(const MeanField& mf, const NetworkState& state) {
    if (state.units() != mf.lattice.units() || state.dim != mf.mu.dim())
        throw UsageError("state does not match the mean field's lattice/law");
    if (mf.policy == HPolicy::MonteCarlo) {
        const auto xs = draw_samples(mf, mf.mc_seed);
        return h_from_cells(mf, state, cells_from_samples(state, xs));
    }
    return h_from_cells(mf, state, cells_deterministic(mf, state));
}

JacobianReport jacobian_h(const MeanField& mf, const NetworkState& state, double step) {
    const int n = state.units();
    const int d = state.dim;
    const int cols = n * d;
    JacobianReport rep;
    rep.J.resize(cols, cols);
    rep.flagged.assign(static_cast<std::size_t>(cols), 0);

    parallel_for(static_cast<std::size_t>(cols), [&](std::size_t c) {
        NetworkState plus = state;
        NetworkState minus = state;
        plus.w[c] += step;
        minus.w[c] -= step;
        Vec hp, hm;
        std::vector<int> sp, sm;
        if (mf.policy == HPolicy::MonteCarlo) {
            // Common random numbers across the +/- pair of this column.
            const auto xs = draw_samples(mf, splitmix64(mf.mc_seed ^ (c + 1)));
            const auto tp = cells_from_samples(plus, xs);
            const auto tm = cells_from_samples(minus, xs);
            hp = h_from_cells(mf, plus, tp);
            hm = h_from_cells(mf, minus, tm);
            sp = cell_signature(mf, plus, tp);
            sm = cell_signature(mf, minus, tm);
        } else {
            const auto tp = cells_deterministic(mf, plus);
            const auto tm = cells_deterministic(mf, minus);
            hp = h_from_cells(mf, plus, tp);
            hm = h_from_cells(mf, minus, tm);
            sp = cell_signature(mf, plus, tp);
            sm = cell_signature(mf, minus, tm);
        }
        for (int r = 0; r < cols; ++r)
            rep.J(r, static_cast<Eigen::Index>(c)) =
                (hp[static_cast<std::size_t>(r)] - hm[static_cast<std::size_t>(r)]) / (2.0 * step);
        if (sp != sm) rep.flagged[c] = 1;
    });
    return rep;
}

OdeResult ode_flow(const MeanField& mf, const NetworkState& initial, double horizon,
                   const OdeOptions& opts) {
    if (horizon < 0.0) throw UsageError("ode horizon must be >= 0");
    OdeResult out{initial, {}, opts.dt};
    if (horizon == 0.0) {
        out.trajectory.emplace_back(0.0, initial.w);
        return out;
    }

    auto rhs = [&](const Vec& w) {
        NetworkState tmp = initial;
        tmp.w = w;
        Vec h = evaluate_h(mf, tmp);
        for (auto& v : h) v = -v;
        return h;
    };

    auto integrate_fixed = [&](double dt, std::vector<std::pair<double, Vec>>* record) {
        Vec y = initial.w;
        if (record) record->emplace_back(0.0, y);
        double t = 0.0;
        std::uint64_t k = 0;
        const std::size_t m = y.size();
        Vec k1, k2, k3, k4, tmp(m);
        while (t < horizon - 1e-15) {
            const double step = std::min(dt, horizon - t);
            k1 = rhs(y);
            for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * step * k1[i];
            k2 = rhs(tmp);
            for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * step * k2[i];
            k3 = rhs(tmp);
            for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + step * k3[i];
            k4 = rhs(tmp);
            for (std::size_t i = 0; i < m; ++i)
                y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            t += step;
            ++k;
            if (record && opts.sample_stride > 0 && k % opts.sample_stride == 0)
                record->emplace_back(t, y);
        }
        return y;
    };

    double dt = opts.dt;
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        const Vec coarse = integrate_fixed(dt, nullptr);
        const Vec fine = integrate_fixed(0.5 * dt, nullptr);
        double diff = 0.0;
        for (std::size_t i = 0; i < coarse.size(); ++i)
            diff = std::max(diff, std::abs(coarse[i] - fine[i]));
        if (diff <= opts.endpoint_tol) {
            std::vector<std::pair<double, Vec>> record;
            const Vec final_w = integrate_fixed(0.5 * dt, &record);
            out.state.w = final_w;
            out.dt_used = 0.5 * dt;
            if (record.empty() || record.back().second != final_w)
                record.emplace_back(horizon, final_w);
            out.trajectory = std::move(record);
            return out;
        }
        dt *= 0.5;
    }
    throw NumericError("ode_flow: step-halving did not reach tolerance " +
                       format_real(opts.endpoint_tol) + " after " +
                       std::to_string(opts.max_retries) + " retries");
}

StabilityVerdict stability_verdict(double max_real_eig_flow) {
    if (max_real_eig_flow < -1e-8) return StabilityVerdict::Stable;
    if (max_real_eig_flow > 1e-8) return StabilityVerdict::Unstable;
    return StabilityVerdict::Inconclusive;
}

EquilibriumReport analyze_state(const MeanField& mf, const NetworkState& state, double fd_step) {
    EquilibriumReport rep;
    rep.state = state;
    const Vec h = evaluate_h(mf, state);
    rep.residual_inf = 0.0;
    for (double v : h) rep.residual_inf = std::max(rep.residual_inf, std::abs(v));

    const auto jac = jacobian_h(mf, state, fd_step);
    rep.cooperative = true;
    for (Eigen::Index r = 0; r < jac.J.rows(); ++r)
        for (Eigen::Index c = 0; c < jac.J.cols(); ++c)
            if (r != c && jac.J(r, c) > 1e-8) rep.cooperative = false;

    const Eigen::MatrixXd flow = -jac.J;
    Eigen::EigenSolver<Eigen::MatrixXd> es(flow, /*computeEigenvectors=*/false);
    rep.flow_eigs_real.resize(static_cast<std::size_t>(flow.rows()));
    for (Eigen::Index i = 0; i < flow.rows(); ++i)
        rep.flow_eigs_real[static_cast<std::size_t>(i)] = es.eigenvalues()[i].real();
    std::sort(rep.flow_eigs_real.rbegin(), rep.flow_eigs_real.rend());
    rep.max_real_eig_flow = rep.flow_eigs_real.front();
    rep.verdict = stability_verdict(rep.max_real_eig_flow);
    return rep;
}

EquilibriumReport solve_equilibrium(const MeanField& mf, const NetworkState& initial,
                                    double tolerance) {
    NetworkState state = initial;
    auto inf_norm = [](const Vec& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };

    Vec h = evaluate_h(mf, state);
    double best = inf_norm(h);
    bool flow_used = false;

    for (int iter = 0; iter < 60 && best > tolerance; ++iter) {
        const auto jac = jacobian_h(mf, state);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(h.size()));
        for (std::size_t i = 0; i < h.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = -h[i];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac.J);
        bool advanced = false;
        if (lu.isInvertible()) {
            const Eigen::VectorXd delta = lu.solve(rhs);
            double alpha = 1.0;
            for (int halves = 0; halves < 40; ++halves, alpha *= 0.5) {
                NetworkState cand = state;
                for (std::size_t i = 0; i < cand.w.size(); ++i)
                    cand.w[i] += alpha * delta(static_cast<Eigen::Index>(i));
                Vec hc;
                try {
                    hc = evaluate_h(mf, cand);
                } catch (const DegeneracyError&) {
                    continue;  // step collapsed two units; damp further
                }
                const double norm = inf_norm(hc);
                if (norm < best) {
                    state = std::move(cand);
                    h = std::move(hc);
                    best = norm;
                    advanced = true;
                    break;
                }
            }
        }
        if (!advanced) {
            if (flow_used) break;
            // Newton stalled: relax along the mean flow, then retry.
            state = ode_flow(mf, state, 50.0, OdeOptions{0.05, 1e-10, 8, 0}).state;
            h = evaluate_h(mf, state);
            best = inf_norm(h);
            flow_used = true;
        }
    }

    if (best > tolerance)
        throw NumericError("solve_equilibrium: stalled at residual " + format_real(best) +
                           " (tolerance " + format_real(tolerance) + ")");
    return analyze_state(mf, state);
}

Vec uniform_limit_linear_system(int n, const NeighborhoodFunction& lambda) {
    if (n < 1) throw UsageError("n must be >= 1");
    if (!lambda.is_step())
        throw NumericError("uniform equilibrium system needs a step neighborhood, got " +
                           lambda.name + " with n=" + std::to_string(n));
    const int k = lambda.step_radius();
    // h_i = 0 with uniform mu reduces to: m_i is the midpoint of the union of
    // its lambda-neighbors' cells, whose endpoints are weight midpoints.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        A(i, i) += 2.0;
        const int jl = std::max(0, i - k);
        const int jr = std::min(n - 1, i + k);
        if (jl > 0) {
            A(i, jl - 1) -= 0.5;
            A(i, jl) -= 0.5;
        }
        if (jr < n - 1) {
            A(i, jr) -= 0.5;
            A(i, jr + 1) -= 0.5;
        } else {
            rhs(i) += 1.0;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw NumericError("uniform equilibrium system is singular for " + lambda.name +
                           ", n=" + std::to_string(n));
    const Eigen::VectorXd sol = lu.solve(rhs);
    Vec out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = sol(i);
    return out;
}

NetworkState grid_state(const Vec& axis0, const Vec& axis1) {
    const int n1 = static_cast<int>(axis0.size());
    const int n2 = static_cast<int>(axis1.size());
    if (n1 < 1 || n2 < 1) throw UsageError("grid_state needs nonempty axes");
    const LatticeSpec lattice = LatticeSpec::grid2d(n1, n2);
    Vec w(static_cast<std::size_t>(n1) * n2 * 2);
    for (int r = 0; r < n1; ++r)
        for (int c = 0; c < n2; ++c) {
            w[2 * static_cast<std::size_t>(r * n2 + c)] = axis0[static_cast<std::size_t>(r)];
            w[2 * static_cast<std::size_t>(r * n2 + c) + 1] = axis1[static_cast<std::size_t>(c)];
        }
    return NetworkState::from_weights(lattice, 2, std::move(w));
}

DimSelReport dimension_selection_experiment(const MeanField& base, const NetworkState& base_state,
                                            double sigma) {
    if (base.mu.dim() != 1 || base_state.dim != 1)
        throw UsageError("dimension selection starts from a one-dimensional base");
    if (sigma < 0.0) throw UsageError("noise scale must be >= 0");

    const EquilibriumReport base_rep = analyze_state(base, base_state);
    if (base_rep.verdict != StabilityVerdict::Stable)
        throw UsageError("dimension selection needs a stable base equilibrium (max flow eig " +
                         format_real(base_rep.max_real_eig_flow) + ")");

    DimSelReport rep;
    rep.sigma = sigma;

    if (sigma == 0.0) {
        // Degenerate noise: the system decouples. The second block relaxes at
        // rate sum_j L(d(i,j)) mu(C_j) per unit.
        rep.residual_inf = base_rep.residual_inf;
        rep.flow_eigs_real = base_rep.flow_eigs_real;
        const int n = base_state.units();
        Vec masses(static_cast<std::size_t>(n), 0.0);
        for (int j = 0; j < n; ++j)
            masses[static_cast<std::size_t>(j)] =
                voronoi_cell_stats(base.mu, base_state.w, n, 1, j).mass;
        for (int i = 0; i < n; ++i) {
            double rate = 0.0;
            for (int j = 0; j < n; ++j)
                rate += base.lambda.value(base.lattice.distance(i, j)) *
                        masses[static_cast<std::size_t>(j)];
            rep.flow_eigs_real.push_back(-rate);
        }
        std::sort(rep.flow_eigs_real.rbegin(), rep.flow_eigs_real.rend());
        rep.max_real_eig_flow = rep.flow_eigs_real.front();
        rep.verdict = stability_verdict(rep.max_real_eig_flow);
        return rep;
    }

    StimuliDistribution noise = StimuliDistribution::uniform_box({Interval{-sigma, sigma}});
    StimuliDistribution augmented = [&] {
        if (base.mu.kind() == StimuliKind::UniformBox) {
            return StimuliDistribution::uniform_box({base.mu.bounds()[0], Interval{-sigma, sigma}});
        }
        std::vector<StimuliDistribution> factors{base.mu, noise};
        return StimuliDistribution::product(std::move(factors));
    }();

    const int n = base_state.units();
    Vec w(static_cast<std::size_t>(n) * 2, 0.0);
    const double noise_mean = 0.0;
    for (int i = 0; i < n; ++i) {
        w[2 * static_cast<std::size_t>(i)] = base_state.w[static_cast<std::size_t>(i)];
        w[2 * static_cast<std::size_t>(i) + 1] = noise_mean;
    }
    const NetworkState aug_state = NetworkState::from_weights(base.lattice, 2, std::move(w));
    const MeanField aug = MeanField::make(base.lattice, base.lambda, augmented, base.mc_samples);
    const EquilibriumReport aug_rep = analyze_state(aug, aug_state);
    rep.residual_inf = aug_rep.residual_inf;
    rep.flow_eigs_real = aug_rep.flow_eigs_real;
    rep.max_real_eig_flow = aug_rep.max_real_eig_flow;
    rep.verdict = aug_rep.verdict;
    return rep;
}

}  // namespace somlab
