#include "somlab/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "somlab/geometry.hpp"
#include "somlab/quadrature.hpp"

namespace somlab {

namespace {

constexpr int kCdfKnots = 1 << 14;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

StimuliDistribution StimuliDistribution::uniform_box(std::vector<Interval> bounds) {
    if (bounds.empty()) throw ConfigError("uniform box needs at least one axis");
    for (const auto& b : bounds) {
        if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi))
            throw ConfigError("uniform box bounds must be finite with lo < hi");
    }
    StimuliDistribution d;
    d.kind_ = StimuliKind::UniformBox;
    d.bounds_ = std::move(bounds);
    d.name_ = "uniform";
    return d;
}

StimuliDistribution StimuliDistribution::density1d(std::function<double(double)> f,
                                                   std::string name, bool strictly_log_concave,
                                                   bool boundary_limits_positive) {
    StimuliDistribution d;
    d.kind_ = StimuliKind::Density1d;
    d.bounds_ = {Interval{0.0, 1.0}};
    d.f_ = std::move(f);
    d.name_ = std::move(name);
    d.log_concave_strict_ = strictly_log_concave;
    d.boundary_limits_positive_ = boundary_limits_positive;

    const double total = integrate(d.f_, 0.0, 1.0, 1e-13);
    if (std::abs(total - 1.0) > 1e-10)
        throw ConfigError("density does not integrate to 1 on [0,1]: got " + format_real(total));

    // Cumulative table for inverse-CDF sampling: equally spaced knots,
    // monotone linear interpolation in between.
    d.cdf_knots_.resize(kCdfKnots);
    d.cdf_knots_[0] = 0.0;
    const double h = 1.0 / (kCdfKnots - 1);
    for (int i = 1; i < kCdfKnots; ++i) {
        const double a = (i - 1) * h;
        const double b = i * h;
        d.cdf_knots_[i] = d.cdf_knots_[i - 1] + integrate(d.f_, a, b, 1e-14);
    }
    const double norm = d.cdf_knots_.back();
    for (auto& v : d.cdf_knots_) v /= norm;
    for (int i = 1; i < kCdfKnots; ++i)
        d.cdf_knots_[i] = std::max(d.cdf_knots_[i], d.cdf_knots_[i - 1]);

    if (strictly_log_concave) {
        // Spot check: second differences of ln f must not be positive beyond
        // rounding at 1000 interior points.
        const double step = 1e-3;
        for (int j = 1; j <= 1000; ++j) {
            const double x = j / 1001.0;
            if (x - step <= 0.0 || x + step >= 1.0) continue;
            const double lm = std::log(d.f_(x - step));
            const double l0 = std::log(d.f_(x));
            const double lp = std::log(d.f_(x + step));
            if (!(std::isfinite(lm) && std::isfinite(l0) && std::isfinite(lp)))
                throw ConfigError("density declared log-concave but ln f is not finite on (0,1)");
            if (lp - 2.0 * l0 + lm > 1e-8)
                throw ConfigError("density declared log-concave fails the concavity spot check");
        }
    }
    return d;
}

StimuliDistribution StimuliDistribution::product(std::vector<StimuliDistribution> factors) {
    if (factors.empty()) throw ConfigError("product distribution needs at least one factor");
    bool all_uniform = true;
    std::vector<Interval> bounds;
    for (const auto& f : factors) {
        if (f.dim() != 1 || !f.is_continuous())
            throw ConfigError("product factors must be one-dimensional continuous laws");
        bounds.push_back(f.bounds()[0]);
        if (f.kind() != StimuliKind::UniformBox) all_uniform = false;
    }
    if (all_uniform) return uniform_box(std::move(bounds));
    StimuliDistribution d;
    d.kind_ = StimuliKind::Product;
    d.bounds_ = std::move(bounds);
    d.factors_ = std::move(factors);
    d.name_ = "product";
    return d;
}

StimuliDistribution StimuliDistribution::discrete(std::vector<Vec> points) {
    if (points.empty()) throw ConfigError("discrete distribution needs at least one point");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw ConfigError("discrete points need at least one coordinate");
    std::vector<Interval> bounds(dim, Interval{std::numeric_limits<double>::infinity(),
                                               -std::numeric_limits<double>::infinity()});
    for (const auto& p : points) {
        if (p.size() != dim) throw ConfigError("discrete points must share a dimension");
        for (std::size_t a = 0; a < dim; ++a) {
            if (!std::isfinite(p[a])) throw ConfigError("discrete points must be finite");
            bounds[a].lo = std::min(bounds[a].lo, p[a]);
            bounds[a].hi = std::max(bounds[a].hi, p[a]);
        }
    }
    for (auto& b : bounds) {
        if (b.lo == b.hi) b.hi = b.lo + 1.0;  // degenerate axis, keep the box valid
    }
    StimuliDistribution d;
    d.kind_ = StimuliKind::Discrete;
    d.bounds_ = std::move(bounds);
    d.points_ = std::move(points);
    d.name_ = "discrete";
    return d;
}

StimuliDistribution StimuliDistribution::discrete_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open points file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("points file is empty: " + path);
    std::vector<Vec> pts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Vec row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IngestionError(path + ":" + std::to_string(lineno) +
                                     ": not a number: " + cell);
            }
        }
        pts.push_back(std::move(row));
    }
    if (pts.empty()) throw IngestionError("points file has a header but no rows: " + path);
    return discrete(std::move(pts));
}

Vec StimuliDistribution::sample(RandomStream& rng) const {
    switch (kind_) {
        case StimuliKind::UniformBox: {
            Vec x(bounds_.size());
            for (std::size_t a = 0; a < bounds_.size(); ++a)
                x[a] = rng.uniform(bounds_[a].lo, bounds_[a].hi);
            return x;
        }
        case StimuliKind::Density1d: {
            const double u = rng.uniform01();
            const auto it = std::lower_bound(cdf_knots_.begin(), cdf_knots_.end(), u);
            const std::size_t hi = std::min<std::size_t>(
                std::max<std::size_t>(1, static_cast<std::size_t>(it - cdf_knots_.begin())),
                cdf_knots_.size() - 1);
            const double c0 = cdf_knots_[hi - 1];
            const double c1 = cdf_knots_[hi];
            const double t = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
            const double h = 1.0 / (kCdfKnots - 1);
            return {(static_cast<double>(hi - 1) + t) * h};
        }
        case StimuliKind::Product: {
            Vec x;
            x.reserve(factors_.size());
            for (const auto& f : factors_) x.push_back(f.sample(rng)[0]);
            return x;
        }
        case StimuliKind::Discrete:
            return points_[rng.index(points_.size())];
    }
    throw UsageError("unreachable");
}

Vec StimuliDistribution::mean() const {
    switch (kind_) {
        case StimuliKind::UniformBox: {
            Vec m(bounds_.size());
            for (std::size_t a = 0; a < bounds_.size(); ++a)
                m[a] = 0.5 * (bounds_[a].lo + bounds_[a].hi);
            return m;
        }
        case StimuliKind::Density1d:
            return {integrate([this](double x) { return x * f_(x); }, 0.0, 1.0, 1e-13)};
        case StimuliKind::Product: {
            Vec m;
            m.reserve(factors_.size());
            for (const auto& f : factors_) m.push_back(f.mean()[0]);
            return m;
        }
        case StimuliKind::Discrete: {
            Vec m(bounds_.size(), 0.0);
            for (const auto& p : points_)
                for (std::size_t a = 0; a < m.size(); ++a) m[a] += p[a];
            for (auto& v : m) v /= static_cast<double>(points_.size());
            return m;
        }
    }
    throw UsageError("unreachable");
}

double StimuliDistribution::density(double x) const {
    if (dim() != 1 || !is_continuous())
        throw UsageError("density(x) is a one-dimensional continuous operation");
    if (kind_ == StimuliKind::UniformBox) {
        const auto& b = bounds_[0];
        return (x >= b.lo && x <= b.hi) ? 1.0 / (b.hi - b.lo) : 0.0;
    }
    return (x >= 0.0 && x <= 1.0) ? f_(x) : 0.0;
}

double StimuliDistribution::cdf(double x) const {
    if (dim() != 1 || !is_continuous())
        throw UsageError("cdf(x) is a one-dimensional continuous operation");
    if (kind_ == StimuliKind::UniformBox) {
        const auto& b = bounds_[0];
        return clamp((x - b.lo) / (b.hi - b.lo), 0.0, 1.0);
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double h = 1.0 / (kCdfKnots - 1);
    const auto k = static_cast<std::size_t>(x / h);
    return clamp(cdf_knots_[k] + integrate(f_, k * h, x, 1e-14), 0.0, 1.0);
}

CellStats StimuliDistribution::interval_stats(double a, double b) const {
    if (dim() != 1 || !is_continuous())
        throw UsageError("interval_stats is a one-dimensional continuous operation");
    const auto& sup = bounds_[0];
    a = std::max(a, sup.lo);
    b = std::min(b, sup.hi);
    CellStats cs;
    if (!(a < b)) return cs;
    if (kind_ == StimuliKind::UniformBox) {
        const double w = sup.hi - sup.lo;
        cs.mass = (b - a) / w;
        cs.mean = {0.5 * (a + b)};
        cs.empty = cs.mass <= 0.0;
        return cs;
    }
    cs.mass = integrate(f_, a, b, 1e-13);
    if (cs.mass <= 0.0) return cs;
    cs.mean = {integrate([this](double x) { return x * f_(x); }, a, b, 1e-13) / cs.mass};
    cs.empty = false;
    return cs;
}

double StimuliDistribution::interval_second_moment(double a, double b, double about) const {
    if (dim() != 1 || !is_continuous())
        throw UsageError("interval_second_moment is a one-dimensional continuous operation");
    const auto& sup = bounds_[0];
    a = std::max(a, sup.lo);
    b = std::min(b, sup.hi);
    if (!(a < b)) return 0.0;
    if (kind_ == StimuliKind::UniformBox) {
        const double w = sup.hi - sup.lo;
        const double u1 = b - about, u0 = a - about;
        return (u1 * u1 * u1 - u0 * u0 * u0) / (3.0 * w);
    }
    return integrate([this, about](double x) { return sq(x - about) * f_(x); }, a, b, 1e-13);
}

bool StimuliDistribution::h_mu_certified() const {
    if (kind_ == StimuliKind::UniformBox && dim() == 1)
        return true;  // concave ln f with positive boundary limits
    if (kind_ == StimuliKind::Density1d)
        return log_concave_strict_ || boundary_limits_positive_;
    return false;
}

const std::vector<Vec>& StimuliDistribution::points() const {
    if (kind_ != StimuliKind::Discrete) throw UsageError("points() needs a discrete law");
    return points_;
}

const StimuliDistribution& StimuliDistribution::factor(int axis) const {
    if (kind_ == StimuliKind::Product) return factors_.at(static_cast<std::size_t>(axis));
    throw UsageError("factor() needs a product law");
}

Interval1dCell voronoi_cell_1d(std::span<const double> w, int n, int i, Interval support) {
    Interval1dCell cell;
    const double mi = w[static_cast<std::size_t>(i)];
    double lo = support.lo;
    double hi = support.hi;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double mj = w[static_cast<std::size_t>(j)];
        if (mj == mi) {
            if (j < i) return cell;  // lower index wins the shared location
            continue;
        }
        const double mid = 0.5 * (mi + mj);
        if (mj < mi)
            lo = std::max(lo, mid);
        else
            hi = std::min(hi, mid);
    }
    if (lo >= hi) return cell;
    cell.lo = lo;
    cell.hi = hi;
    cell.empty = false;
    return cell;
}

CellStats voronoi_cell_stats(const StimuliDistribution& mu, std::span<const double> w, int n,
                             int d, int cell, int mc_samples, RandomStream* rng) {
    if (cell < 0 || cell >= n) throw UsageError("cell index out of range");

    if (mu.kind() == StimuliKind::Discrete) {
        const auto& pts = mu.points();
        CellStats cs;
        Vec acc(static_cast<std::size_t>(d), 0.0);
        std::size_t hits = 0;
        for (const auto& p : pts) {
            if (nearest_unit(w, n, d, p) == cell) {
                ++hits;
                for (int a = 0; a < d; ++a) acc[static_cast<std::size_t>(a)] += p[static_cast<std::size_t>(a)];
            }
        }
        if (hits == 0) return cs;
        cs.mass = static_cast<double>(hits) / static_cast<double>(pts.size());
        for (auto& v : acc) v /= static_cast<double>(hits);
        cs.mean = std::move(acc);
        cs.empty = false;
        return cs;
    }

    if (d == 1) {
        const auto iv = voronoi_cell_1d(w, n, cell, mu.bounds()[0]);
        if (iv.empty) return CellStats{};
        return mu.interval_stats(iv.lo, iv.hi);
    }

    if (d == 2 && mu.kind() == StimuliKind::UniformBox) {
        const auto& b = mu.bounds();
        const Polygon box = box_polygon(b[0].lo, b[0].hi, b[1].lo, b[1].hi);
        const Polygon cp = voronoi_cell_2d(w, n, cell, box);
        CellStats cs;
        if (cp.empty()) return cs;
        const double area = polygon_area(cp);
        if (area <= 0.0) return cs;
        const double box_area = (b[0].hi - b[0].lo) * (b[1].hi - b[1].lo);
        const auto fm = polygon_first_moment(cp);
        cs.mass = area / box_area;
        cs.mean = {fm[0] / area, fm[1] / area};
        cs.empty = false;
        return cs;
    }

    if (mc_samples <= 0 || rng == nullptr)
        throw UsageError("Monte Carlo cell statistics need a sample count and a random stream");
    std::size_t hits = 0;
    Vec acc(static_cast<std::size_t>(d), 0.0);
    for (int s = 0; s < mc_samples; ++s) {
        const Vec x = mu.sample(*rng);
        if (nearest_unit(w, n, d, x) == cell) {
            ++hits;
            for (int a = 0; a < d; ++a) acc[static_cast<std::size_t>(a)] += x[static_cast<std::size_t>(a)];
        }
    }
    CellStats cs;
    const double p = static_cast<double>(hits) / mc_samples;
    cs.mass_se = std::sqrt(std::max(p * (1.0 - p), 0.0) / mc_samples);
    if (hits == 0) return cs;
    cs.mass = p;
    for (auto& v : acc) v /= static_cast<double>(hits);
    cs.mean = std::move(acc);
    cs.empty = false;
    return cs;
}

}  // namespace somlab
