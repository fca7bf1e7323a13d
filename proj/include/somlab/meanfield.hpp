#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "somlab/som_engine.hpp"

namespace somlab {

// How the per-cell masses and means behind h are computed.
enum class HPolicy {
    Deterministic1d,  // exact intervals (uniform closed form / density quadrature)
    Polygon2d,        // exact polygon clipping, uniform 2-d box
    DiscreteExact,    // finite sums
    MonteCarlo        // everything else; seeded, so still reproducible
};

// The mean update direction h(m): h_i = sum_j L(d(i,j)) * int_{C_j} (m_i - x) mu(dx).
// The ODE dm/dt = -h(m) is the averaged dynamics of the stochastic process.
struct MeanField {
    LatticeSpec lattice;
    NeighborhoodFunction lambda;
    StimuliDistribution mu;
    HPolicy policy = HPolicy::Deterministic1d;
    int mc_samples = 200000;
    std::uint64_t mc_seed = 0x534f4d4c4142ULL;

    static MeanField make(LatticeSpec lattice, NeighborhoodFunction lambda,
                          StimuliDistribution mu, int mc_samples = 200000);
    bool deterministic() const { return policy != HPolicy::MonteCarlo; }
};

// h at `state` as a flat n*d vector. The deterministic 1-d path refuses
// degenerate states (coinciding weights) and names the offending units.
Vec evaluate_h(const MeanField& mf, const NetworkState& state);

struct JacobianReport {
    Eigen::MatrixXd J;  // d h_flat / d m_flat, (n*d) x (n*d)
    // Columns whose +/- perturbation crossed a Voronoi re-adjacency.
    std::vector<std::uint8_t> flagged;
};

// Central finite differences of h.
JacobianReport jacobian_h(const MeanField& mf, const NetworkState& state, double step = 1e-5);

struct OdeOptions {
    double dt = 0.01;
    double endpoint_tol = 1e-8;  // accepted |endpoint(dt) - endpoint(dt/2)|_inf
    int max_retries = 6;
    std::uint64_t sample_stride = 0;  // 0: endpoints only
};

struct OdeResult {
    NetworkState state;
    std::vector<std::pair<double, Vec>> trajectory;  // (t, weights) samples
    double dt_used = 0.0;
};

// Classical RK4 on dm/dt = -h(m), fixed step with step-halving validation.
OdeResult ode_flow(const MeanField& mf, const NetworkState& initial, double horizon,
                   const OdeOptions& opts = {});

enum class StabilityVerdict { Stable, Unstable, Inconclusive };

struct EquilibriumReport {
    NetworkState state;
    double residual_inf = 0.0;
    // Real parts of the eigenvalues of the linearized flow -grad h, sorted
    // descending: negative max <=> attracting.
    Vec flow_eigs_real;
    double max_real_eig_flow = 0.0;
    bool cooperative = false;  // all off-diagonal entries of grad h <= 1e-8
    StabilityVerdict verdict = StabilityVerdict::Inconclusive;
};

StabilityVerdict stability_verdict(double max_real_eig_flow);

// Spectrum/cooperativity report at a given state (no solving).
EquilibriumReport analyze_state(const MeanField& mf, const NetworkState& state,
                                double fd_step = 1e-5);

// Damped Newton on h with finite-difference Jacobian; long-horizon ODE flow
// as fallback when Newton stalls. Throws NumericError with the best residual
// if the tolerance cannot be met.
EquilibriumReport solve_equilibrium(const MeanField& mf, const NetworkState& initial,
                                    double tolerance = 1e-10);

// Ordered 1-d equilibrium of the uniform law on [0,1] for a step
// neighborhood, via the closed-form linear system on cell endpoints.
Vec uniform_limit_linear_system(int n, const NeighborhoodFunction& lambda);

// Product state on an n1 x n2 grid from two per-axis 1-d states:
// unit (i1,i2) gets weights (axis0[i1], axis1[i2]).
NetworkState grid_state(const Vec& axis0, const Vec& axis1);

struct DimSelReport {
    double sigma = 0.0;
    double residual_inf = 0.0;
    Vec flow_eigs_real;
    double max_real_eig_flow = 0.0;
    StabilityVerdict verdict = StabilityVerdict::Inconclusive;
};

// Stability of a stable 1-d equilibrium after appending one noise dimension
// distributed uniformly on [-sigma, sigma]. sigma = 0 decouples exactly: the
// spectrum is the base spectrum plus the per-unit relaxation rates.
DimSelReport dimension_selection_experiment(const MeanField& base, const NetworkState& base_state,
                                            double sigma);

}  // namespace somlab
