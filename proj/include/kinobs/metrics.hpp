#pragma once

#include <span>
#include <vector>

#include "kinobs/grid.hpp"

namespace kinobs {

/// sum |a - b| dx / sum |b| dx, or the absolute error when b vanishes.
double l1_relative(std::span<const double> a, std::span<const double> b, double dx);
double l1_absolute(std::span<const double> a, std::span<const double> b, double dx);
double l2_absolute(std::span<const double> a, std::span<const double> b, double dx);

/// Homogeneous periodic seminorm (sum_{k != 0} |2 pi k / L|^{2s} |rho_k|^2)^{1/2}
/// with rho_k = (1/n) sum_j rho_j exp(-2 pi i j k / n), k over signed
/// frequencies. Throws std::domain_error unless 0 <= s < 1.
double sobolev_seminorm(std::span<const double> field, double s, const Grid1D& grid);

struct ErrorSeries {
    double sobolev_order = 0.125;
    std::vector<double> times;
    std::vector<double> l1_rel;
    std::vector<double> l1_abs;
    std::vector<double> l2_abs;
    std::vector<double> sobolev;

    std::size_t size() const { return times.size(); }
};

/// Least-squares slope of -log(values) against t over [t0, t1].
/// Nonpositive values are skipped; throws std::invalid_argument when fewer
/// than three points remain.
double fit_decay_rate(std::span<const double> times, std::span<const double> values,
                      double t0, double t1);

struct SweepMinimum {
    double lambda_opt;
    double error_min;
    bool is_interior;
    std::size_t index;
};

/// Argmin over a curve with strictly increasing lambda; the smallest lambda
/// wins ties. Non-finite errors never win. Throws std::invalid_argument for
/// fewer than three points or unsorted lambdas.
SweepMinimum sweep_minimum(std::span<const double> lambdas, std::span<const double> errors);

}  // namespace kinobs
