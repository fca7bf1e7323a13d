#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "somlab/common.hpp"

namespace somlab {

enum class StimuliKind { UniformBox, Density1d, Product, Discrete };

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Mass and conditional mean of an input distribution over a cell. `mass_se`
// is nonzero only on the Monte Carlo path. An empty cell is signaled, never
// a crash; its mean is meaningless.
struct CellStats {
    double mass = 0.0;
    Vec mean;
    bool empty = true;
    double mass_se = 0.0;
};

// Input law mu on a bounded box. Immutable after construction; safe to share
// across trials, each of which owns its own RandomStream.
class StimuliDistribution {
  public:
    static StimuliDistribution uniform_box(std::vector<Interval> bounds);
    // Density on [0,1]; normalization is validated by quadrature at
    // construction (1e-10) and the declared strict log-concavity is
    // spot-checked on a 1000-point grid.
    static StimuliDistribution density1d(std::function<double(double)> f, std::string name,
                                         bool strictly_log_concave,
                                         bool boundary_limits_positive = false);
    // Product of independent one-dimensional factors. A product of pure
    // uniforms collapses to a uniform box.
    static StimuliDistribution product(std::vector<StimuliDistribution> factors);
    static StimuliDistribution discrete(std::vector<Vec> points);
    // One point per row, d columns, header row required.
    static StimuliDistribution discrete_from_csv(const std::string& path);

    StimuliKind kind() const { return kind_; }
    int dim() const { return static_cast<int>(bounds_.size()); }
    const std::vector<Interval>& bounds() const { return bounds_; }
    bool is_continuous() const { return kind_ != StimuliKind::Discrete; }
    const std::string& name() const { return name_; }

    Vec sample(RandomStream& rng) const;
    Vec mean() const;

    // One-dimensional continuous paths.
    double density(double x) const;
    double cdf(double x) const;
    // Exact (uniform) or adaptive-quadrature (density) mass and mean of mu
    // restricted to [a, b].
    CellStats interval_stats(double a, double b) const;
    // Integral of (x - about)^2 over [a, b] against mu.
    double interval_second_moment(double a, double b, double about) const;

    // H_mu status: a strictly log-concave certified density, or a law
    // accepted through the positive-boundary-limit alternative.
    bool h_mu_certified() const;

    const std::vector<Vec>& points() const;
    const StimuliDistribution& factor(int axis) const;

  private:
    StimuliDistribution() = default;

    StimuliKind kind_ = StimuliKind::UniformBox;
    std::string name_;
    std::vector<Interval> bounds_;

    // density-1d state
    std::function<double(double)> f_;
    Vec cdf_knots_;  // cumulative F at 2^14 equally spaced knots on [0,1]
    bool log_concave_strict_ = false;
    bool boundary_limits_positive_ = false;

    // product state
    std::vector<StimuliDistribution> factors_;

    // discrete state
    std::vector<Vec> points_;
};

// Statistics of mu over the Voronoi cell `cell` of the n x d weight matrix
// `w`. Exact for discrete laws, 1-d continuous laws and 2-d uniform boxes;
// Monte Carlo with `mc_samples` draws (standard error reported) otherwise.
CellStats voronoi_cell_stats(const StimuliDistribution& mu, std::span<const double> w, int n,
                             int d, int cell, int mc_samples = 0, RandomStream* rng = nullptr);

// 1-d only: the Voronoi cell of unit `i` as an interval within the support.
// Returns empty=true when another unit shadows it completely.
struct Interval1dCell {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = true;
};
Interval1dCell voronoi_cell_1d(std::span<const double> w, int n, int i, Interval support);

}  // namespace somlab
