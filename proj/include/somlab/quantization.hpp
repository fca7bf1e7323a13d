#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "somlab/som_engine.hpp"

namespace somlab {

struct DistortionValue {
    double value = 0.0;
    double se = 0.0;  // Monte Carlo path only
};

// V_n(m) = 1/2 * integral of min_i ||m_i - x||^2 against mu. Exact per-cell
// integration for d=1 and for 2-d uniform boxes, finite sum for discrete mu,
// Monte Carlo with standard error otherwise. Coinciding weights are allowed
// (the min-based form needs no cells).
DistortionValue distortion(const NetworkState& state, const StimuliDistribution& mu,
                           int mc_samples = 200000, std::uint64_t mc_seed = 0x5641444fULL);

// Gradient component i: mu(C_i) * (m_i - mean(C_i)). Needs pairwise distinct
// weights and an exact cell path (d=1, 2-d uniform box, or discrete).
Vec distortion_gradient(const NetworkState& state, const StimuliDistribution& mu);

struct QuantizerReport {
    NetworkState state;
    double distortion = 0.0;
    double distortion_se = 0.0;
    Vec cell_masses;
    double scaled_distortion = 0.0;            // n^{2/d} * V_n
    std::optional<double> fdist_sq;            // ||F_n - F||^2, 1-d continuous
    std::optional<double> gradient_residual;   // |grad V_n|_inf where exact
};

QuantizerReport quantizer_report(NetworkState state, const StimuliDistribution& mu,
                                 int mc_samples = 200000);

// 0-neighbor training = stochastic gradient descent on V_n. The scenario must
// carry the indicator-0 neighborhood and a Robbins-Monro schedule.
QuantizerReport train_0neighbor(const ProcessScenario& scenario, std::uint64_t steps,
                                std::uint64_t seed);

// Unique 1-d optimum under a certified H_mu law: Lloyd fixed point iterated
// to `tol`, then polished by Newton on grad V_n.
QuantizerReport optimal_quantizer_1d(int n, const StimuliDistribution& mu, double tol = 1e-12);

struct ZadorRow {
    int n = 0;
    double vn = 0.0;
    double scaled = 0.0;  // n^{2/d} * V_n
    std::optional<double> fdist_sq;
};

// Scaled-distortion scan over code sizes. 1-d: exact optima; d=2 uniform box:
// best of `restarts` seeded descents with Lloyd polishing.
std::vector<ZadorRow> zador_scan(const std::vector<int>& ns, const StimuliDistribution& mu,
                                 int restarts = 20, std::uint64_t master_seed = 1,
                                 std::uint64_t sgd_steps = 200000);

struct QuantizedMeasure {
    std::vector<Vec> atoms;  // code vectors
    Vec weights;             // Voronoi masses
    std::optional<double> fdist_sq;  // 1-d continuous
    std::optional<double> ks;        // Kolmogorov-Smirnov distance, 1-d
};

QuantizedMeasure quantized_measure(const QuantizerReport& report, const StimuliDistribution& mu);

// Sum of mass_i * g(m_i): the quantizer as a cubature rule.
double quantize_integrate(const std::function<double(std::span<const double>)>& g,
                          const QuantizerReport& report);
double quantize_integrate1d(const std::function<double(double)>& g, const QuantizerReport& report);

struct MagnificationRow {
    int unit = 0;
    double code = 0.0;           // m_i
    double cell_mass = 0.0;      // mu(C_i)
    double code_density = 0.0;   // 1 / (n * cell width)
    double zador_density = 0.0;  // f^{1/3}(m_i), normalized
};

// Juxtaposes the optimal-quantizer code density, the best-random-quantizer
// density f^{1/3}, and the weighted measure. Descriptive; the two densities
// agree only in the uniform case.
std::vector<MagnificationRow> magnification_experiment(const StimuliDistribution& mu, int n);

// Extended intra-class variance of the discrete case:
// (1/2N) sum_i sum_{x_l in C_i} sum_j L(d(i,j)) ||m_j - x_l||^2.
double discrete_potential(const NetworkState& state, const StimuliDistribution& mu,
                          const NeighborhoodFunction& lambda);

}  // namespace somlab
