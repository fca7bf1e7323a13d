#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace somlab {

using Vec = std::vector<double>;

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// catch one type and map it to a nonzero exit status.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct UsageError : Error {
    using Error::Error;
};
struct DegeneracyError : Error {
    using Error::Error;
};
struct IngestionError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for trial `index` under a master seed. Streams are independent because
// the constructor scrambles through splitmix64 before seeding the engine.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
    return master ^ index;
}

// Deterministic random stream. All draws are implemented on top of the raw
// 64-bit output so trajectories replay bit-identically on any platform
// (std::uniform_real_distribution et al. are implementation-defined).
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t raw() { return eng_(); }

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n) by rejection.
    std::size_t index(std::size_t n) {
        if (n == 0) throw UsageError("RandomStream::index: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = eng_();
        while (x >= limit) x = eng_();
        return static_cast<std::size_t>(x % n);
    }

  private:
    std::mt19937_64 eng_;
};

// Fixed rendering used by every CSV emitter: 12 significant digits.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline double sq(double x) { return x * x; }

inline double dist_sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += sq(a[k] - b[k]);
    return s;
}

// Index of the closest row of `w` (n rows, d columns) to `x` under the
// Euclidean metric; ties resolved to the lowest index.
inline int nearest_unit(std::span<const double> w, int n, int d, std::span<const double> x) {
    int best = 0;
    double best_d = dist_sq(w.subspan(0, d), x);
    for (int i = 1; i < n; ++i) {
        const double di = dist_sq(w.subspan(static_cast<std::size_t>(i) * d, d), x);
        if (di < best_d) {
            best_d = di;
            best = i;
        }
    }
    return best;
}

}  // namespace somlab
