#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "somlab/common.hpp"

namespace somlab {

// Convex polygons, counterclockwise vertex order. Used for the exact
// two-dimensional Voronoi-cell integrals under a uniform box law.
struct Polygon {
    std::vector<std::array<double, 2>> v;

    bool empty() const { return v.size() < 3; }
};

inline Polygon box_polygon(double x0, double x1, double y0, double y1) {
    return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

// Keep the side a*x + b*y <= c (Sutherland-Hodgman step).
inline Polygon clip_halfplane(const Polygon& p, double a, double b, double c) {
    Polygon out;
    const std::size_t n = p.v.size();
    if (n == 0) return out;
    out.v.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cur = p.v[i];
        const auto& nxt = p.v[(i + 1) % n];
        const double dc = a * cur[0] + b * cur[1] - c;
        const double dn = a * nxt[0] + b * nxt[1] - c;
        if (dc <= 0) out.v.push_back(cur);
        if ((dc < 0 && dn > 0) || (dc > 0 && dn < 0)) {
            const double t = dc / (dc - dn);
            out.v.push_back({cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
        }
    }
    return out;
}

inline double polygon_area(const Polygon& p) {
    double s = 0.0;
    const std::size_t n = p.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = p.v[i];
        const auto& w = p.v[(i + 1) % n];
        s += u[0] * w[1] - w[0] * u[1];
    }
    return 0.5 * s;
}

// First moments (integral of x and of y over the polygon).
inline std::array<double, 2> polygon_first_moment(const Polygon& p) {
    double mx = 0.0, my = 0.0;
    const std::size_t n = p.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = p.v[i];
        const auto& w = p.v[(i + 1) % n];
        const double cr = u[0] * w[1] - w[0] * u[1];
        mx += (u[0] + w[0]) * cr;
        my += (u[1] + w[1]) * cr;
    }
    return {mx / 6.0, my / 6.0};
}

// Integral of ||x - p0||^2 over the polygon.
inline double polygon_second_moment_about(const Polygon& p, double px, double py) {
    double ixx = 0.0, iyy = 0.0, mx = 0.0, my = 0.0, area2 = 0.0;
    const std::size_t n = p.v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& u = p.v[i];
        const auto& w = p.v[(i + 1) % n];
        const double cr = u[0] * w[1] - w[0] * u[1];
        area2 += cr;
        mx += (u[0] + w[0]) * cr;
        my += (u[1] + w[1]) * cr;
        ixx += (u[0] * u[0] + u[0] * w[0] + w[0] * w[0]) * cr;
        iyy += (u[1] * u[1] + u[1] * w[1] + w[1] * w[1]) * cr;
    }
    const double area = 0.5 * area2;
    mx /= 6.0;
    my /= 6.0;
    ixx /= 12.0;
    iyy /= 12.0;
    return ixx + iyy - 2.0 * (px * mx + py * my) + (px * px + py * py) * area;
}

// Voronoi cell of row `i` of the n x 2 weight matrix, clipped to `box`.
// Exactly coinciding rows follow the winner tie-break: the lower index keeps
// the cell, the higher one gets an empty polygon.
inline Polygon voronoi_cell_2d(std::span<const double> w, int n, int i, const Polygon& box) {
    Polygon cell = box;
    const double xi = w[2 * static_cast<std::size_t>(i)];
    const double yi = w[2 * static_cast<std::size_t>(i) + 1];
    for (int j = 0; j < n && !cell.empty(); ++j) {
        if (j == i) continue;
        const double xj = w[2 * static_cast<std::size_t>(j)];
        const double yj = w[2 * static_cast<std::size_t>(j) + 1];
        const double a = xj - xi;
        const double b = yj - yi;
        if (a == 0.0 && b == 0.0) {
            if (j < i) return Polygon{};
            continue;
        }
        const double c = 0.5 * (xj * xj + yj * yj - xi * xi - yi * yi);
        cell = clip_halfplane(cell, a, b, c);
    }
    return cell;
}

}  // namespace somlab
