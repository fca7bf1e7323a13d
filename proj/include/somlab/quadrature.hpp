#pragma once

#include <cmath>
#include <functional>

#include "somlab/common.hpp"

namespace somlab {

// Adaptive Gauss-Kronrod (G7,K15) integration on [a,b]. The error estimate
// per panel is |K15 - G7|; panels are split until the estimate drops below
// the local share of `tol`.
namespace detail {

inline constexpr double kKronrodNodes[8] = {
    0.000000000000000000000000000000000e+00, 2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01, 5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01, 8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01, 9.914553711208126392068546975263285e-01};

inline constexpr double kKronrodWeights[8] = {
    2.094821410847278280129991748917143e-01, 2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01, 1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01, 1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02, 2.293532201052922496373200805896959e-02};

inline constexpr double kGaussWeights[4] = {
    4.179591836734693877551020408163265e-01, 3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01, 1.294849661688696932706114326790820e-01};

template <class F>
void gk15(const F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resg = fc * kGaussWeights[0];
    double resk = fc * kKronrodWeights[0];
    for (int j = 1; j < 8; ++j) {
        const double x = h * kKronrodNodes[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        resk += kKronrodWeights[j] * (f1 + f2);
        if (j % 2 == 0) resg += kGaussWeights[j / 2] * (f1 + f2);
    }
    result = resk * h;
    err = std::abs((resk - resg) * h);
}

template <class F>
double adapt(const F& f, double a, double b, double tol, int depth) {
    double r, e;
    gk15(f, a, b, r, e);
    if (e <= tol || depth >= 48) return r;
    const double c = 0.5 * (a + b);
    return adapt(f, a, c, 0.5 * tol, depth + 1) + adapt(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-12) {
    if (!(a <= b)) return -integrate(f, b, a, tol);
    if (a == b) return 0.0;
    return detail::adapt(f, a, b, tol, 0);
}

}  // namespace somlab
