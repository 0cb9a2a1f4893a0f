// Shared helpers for the unit tests: seeded generators and quadrature oracles.
#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace kinobs::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    std::vector<double> field(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 rng_;
};

/// Tanh-sinh integral of f over [a, b]; tolerates square-root endpoint
/// behaviour. Kinks at `breaks` are split out.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> breaks = {}) {
    std::vector<double> pts{a};
    for (double x : breaks) {
        if (x > a && x < b) pts.push_back(x);
    }
    pts.push_back(b);
    std::sort(pts.begin() + 1, pts.end() - 1);
    static boost::math::quadrature::tanh_sinh<double> rule;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] > pts[i]) sum += rule.integrate([&f](double x) { return f(x); }, pts[i], pts[i + 1], 1e-14);
    }
    return sum;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace kinobs::testing
