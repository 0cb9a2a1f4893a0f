#include "kinobs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kinobs {

std::string_view to_string(BoundaryKind bc) {
    switch (bc) {
        case BoundaryKind::DirichletZero: return "dirichlet_zero";
        case BoundaryKind::Periodic: return "periodic";
        case BoundaryKind::ReflectiveWall: return "wall";
    }
    return "unknown";
}

BoundaryKind boundary_kind_from_string(std::string_view name) {
    if (name == "dirichlet_zero") return BoundaryKind::DirichletZero;
    if (name == "periodic") return BoundaryKind::Periodic;
    if (name == "wall") return BoundaryKind::ReflectiveWall;
    throw std::invalid_argument("unknown boundary condition '" + std::string(name) + "'");
}

Grid1D::Grid1D(int n_cells, double x_min, double x_max, BoundaryKind bc)
    : n_cells_(n_cells), x_min_(x_min), x_max_(x_max), dx_(0.0), bc_(bc) {
    if (n_cells < 2) throw std::invalid_argument("grid needs at least 2 cells");
    if (!(x_max > x_min)) throw std::invalid_argument("grid needs x_max > x_min");
    dx_ = (x_max - x_min) / n_cells;
}

std::size_t Grid1D::locate(double x) const {
    const double pos = std::floor((x - x_min_) / dx_);
    const double clamped = std::clamp(pos, 0.0, static_cast<double>(n_cells_ - 1));
    return static_cast<std::size_t>(clamped);
}

}  // namespace kinobs
