#include "somlab/topology.hpp"

#include <cmath>
#include <cstdlib>

namespace somlab {

LatticeSpec LatticeSpec::string1d(int n) {
    if (n < 1) throw ConfigError("string-1d lattice needs n >= 1");
    return LatticeSpec{LatticeKind::String1d, n, 1};
}

LatticeSpec LatticeSpec::grid2d(int n1, int n2) {
    if (n1 < 1 || n2 < 1) throw ConfigError("grid-2d lattice needs n1, n2 >= 1");
    return LatticeSpec{LatticeKind::Grid2d, n1, n2};
}

int LatticeSpec::distance(int i, int j) const {
    const int n = units();
    if (i < 0 || j < 0 || i >= n || j >= n) throw UsageError("unit index out of range");
    if (kind == LatticeKind::String1d) return std::abs(i - j);
    const auto [ri, ci] = coords(i);
    const auto [rj, cj] = coords(j);
    return std::max(std::abs(ri - rj), std::abs(ci - cj));
}

NeighborhoodFunction NeighborhoodFunction::indicator0() {
    return from_table({1.0}, "indicator-0");
}

NeighborhoodFunction NeighborhoodFunction::step(int k) {
    if (k < 0) throw ConfigError("step neighborhood needs k >= 0");
    return from_table(std::vector<double>(static_cast<std::size_t>(k) + 1, 1.0),
                      "step(" + std::to_string(k) + ")");
}

NeighborhoodFunction NeighborhoodFunction::indicator8() {
    auto nf = step(1);
    nf.name = "indicator-8";
    return nf;
}

NeighborhoodFunction NeighborhoodFunction::from_table(std::vector<double> values,
                                                      std::string name) {
    if (values.empty() || values.front() != 1.0)
        throw ConfigError("neighborhood table must start with value 1 at distance 0");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw ConfigError("neighborhood values must lie in [0,1]");
        if (i + 1 < values.size() && values[i + 1] > values[i])
            throw ConfigError("neighborhood table must be non-increasing");
    }
    NeighborhoodFunction nf;
    nf.table = std::move(values);
    nf.name = std::move(name);
    return nf;
}

bool NeighborhoodFunction::satisfies_h_lambda(int n) const {
    const double bound = (n - 1) / 2.0;
    for (int k0 = 0; k0 < bound; ++k0) {
        if (value(k0 + 1) < value(k0)) return true;
    }
    return false;
}

bool NeighborhoodFunction::is_step() const {
    for (double v : table) {
        if (v != 1.0 && v != 0.0) return false;
    }
    return true;
}

int NeighborhoodFunction::step_radius() const {
    if (!is_step()) throw UsageError("neighborhood is not a step function");
    int k = 0;
    while (value(k + 1) == 1.0) ++k;
    return k;
}

}  // namespace somlab
