#pragma once

#include <cstddef>
#include <string_view>

namespace kinobs {

enum class BoundaryKind { DirichletZero, Periodic, ReflectiveWall };

std::string_view to_string(BoundaryKind bc);
BoundaryKind boundary_kind_from_string(std::string_view name);

/// Uniform partition of [x_min, x_max] into n_cells cells.
class Grid1D {
public:
    /// Throws std::invalid_argument for n_cells < 2 or x_max <= x_min.
    Grid1D(int n_cells, double x_min, double x_max, BoundaryKind bc);

    int n_cells() const { return n_cells_; }
    std::size_t size() const { return static_cast<std::size_t>(n_cells_); }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double length() const { return x_max_ - x_min_; }
    double dx() const { return dx_; }
    BoundaryKind bc() const { return bc_; }

    double center(std::size_t i) const { return x_min_ + (static_cast<double>(i) + 0.5) * dx_; }

    /// Index of the cell containing x, clamped to the grid.
    std::size_t locate(double x) const;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    int n_cells_;
    double x_min_;
    double x_max_;
    double dx_;
    BoundaryKind bc_;
};

}  // namespace kinobs
