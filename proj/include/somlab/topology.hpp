#pragma once

#include <utility>
#include <vector>

#include "somlab/common.hpp"

namespace somlab {

enum class LatticeKind { String1d, Grid2d };

// Unit lattice: a 1-d string of n units or a 2-d grid of n1 x n2 units.
// Unit indices are 0-based; grid units are flattened row-major.
struct LatticeSpec {
    LatticeKind kind = LatticeKind::String1d;
    int rows = 1;  // n for string-1d, n1 for grid-2d
    int cols = 1;  // 1 for string-1d, n2 for grid-2d

    static LatticeSpec string1d(int n);
    static LatticeSpec grid2d(int n1, int n2);

    int units() const { return rows * cols; }

    // (row, col) of a flattened unit index.
    std::pair<int, int> coords(int u) const { return {u / cols, u % cols}; }

    // |i-j| on the string; Chebyshev distance on the grid.
    int distance(int i, int j) const;
};

// Neighborhood weights as an explicit per-distance table; distances beyond
// the table map to 0. Every analysis here assumes a fixed, time-invariant
// table, so no kernel machinery is provided.
struct NeighborhoodFunction {
    std::vector<double> table;
    std::string name;

    static NeighborhoodFunction indicator0();
    static NeighborhoodFunction step(int k);
    // step(1) under the grid Chebyshev metric: the 8-neighbor setting.
    static NeighborhoodFunction indicator8();
    static NeighborhoodFunction from_table(std::vector<double> values, std::string name = "table");

    double value(int dist) const {
        return (dist >= 0 && static_cast<std::size_t>(dist) < table.size())
                   ? table[static_cast<std::size_t>(dist)]
                   : 0.0;
    }

    // True iff some k0 < (n-1)/2 has value(k0+1) < value(k0).
    bool satisfies_h_lambda(int n) const;

    // True iff value(d) = 1 for d <= k and 0 beyond, for some k (the shapes
    // admitting the closed-form uniform equilibrium system).
    bool is_step() const;
    int step_radius() const;
};

}  // namespace somlab
