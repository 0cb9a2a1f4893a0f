#include "kinobs/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kinobs/errors.hpp"
#include "kinobs/kinetic_core.hpp"

namespace kinobs {

namespace {

// Relative slack on CFL checks so that a step computed by burgers_cfl with
// safety 1 is never rejected because of rounding.
constexpr double kCflSlack = 1e-12;

double max_gain(double lambda, std::span<const double> gain_weights) {
    if (gain_weights.empty()) return lambda;
    double w = 0.0;
    for (double g : gain_weights) w = std::max(w, g);
    return lambda * w;
}

double gain_at(std::span<const double> gain_weights, std::size_t i) {
    return gain_weights.empty() ? 1.0 : gain_weights[i];
}

void check_gain_weights(std::span<const double> gain_weights, std::size_t n) {
    if (!gain_weights.empty() && gain_weights.size() != n) {
        throw std::invalid_argument("gain weights do not match the grid");
    }
}

// Value at index idx, which may be a ghost (-1 or n).
template <typename Get>
double neighbour(const Grid1D& grid, long idx, Get&& get) {
    const long n = grid.n_cells();
    if (idx >= 0 && idx < n) return get(static_cast<std::size_t>(idx));
    switch (grid.bc()) {
        case BoundaryKind::Periodic:
            return get(static_cast<std::size_t>((idx + n) % n));
        case BoundaryKind::DirichletZero:
            return 0.0;
        case BoundaryKind::ReflectiveWall:
            break;
    }
    throw std::invalid_argument("reflective walls are not defined for scalar kinetic transport");
}

double wrap_periodic(double x, double x_min, double length) {
    double r = std::fmod(x - x_min, length);
    if (r < 0.0) r += length;
    return x_min + r;
}

}  // namespace

XiGrid::XiGrid(double xi_min, double xi_max, int n_xi) {
    if (n_xi < 1) throw std::invalid_argument("xi grid needs at least one node");
    if (!(xi_min < 0.0 && 0.0 < xi_max)) {
        throw std::invalid_argument("xi grid must satisfy xi_min < 0 < xi_max");
    }
    xi_min_ = xi_min;
    xi_max_ = xi_max;
    spacing_ = (xi_max - xi_min) / n_xi;
    nodes_.resize(static_cast<std::size_t>(n_xi));
    weights_.assign(static_cast<std::size_t>(n_xi), spacing_);
    for (int j = 0; j < n_xi; ++j) {
        nodes_[static_cast<std::size_t>(j)] = xi_min + (j + 0.5) * spacing_;
    }
}

XiGrid XiGrid::covering(double u_min, double u_max, double margin, int n_xi) {
    if (n_xi < 2) throw std::invalid_argument("covering xi grid needs at least two nodes");
    if (!(margin > 0.0)) throw std::invalid_argument("xi margin must be positive");
    const double lo = std::min(u_min, 0.0) - margin;
    const double hi = std::max(u_max, 0.0) + margin;
    int negative = static_cast<int>(std::lround(n_xi * (-lo) / (hi - lo)));
    negative = std::clamp(negative, 1, n_xi - 1);
    const double spacing = std::max(-lo / negative, hi / (n_xi - negative));

    XiGrid grid;
    grid.spacing_ = spacing;
    grid.xi_min_ = -negative * spacing;
    grid.xi_max_ = (n_xi - negative) * spacing;
    grid.nodes_.resize(static_cast<std::size_t>(n_xi));
    grid.weights_.assign(static_cast<std::size_t>(n_xi), spacing);
    for (int j = 0; j < n_xi; ++j) {
        grid.nodes_[static_cast<std::size_t>(j)] = (j - negative + 0.5) * spacing;
    }
    return grid;
}

XiGrid XiGrid::single(double xi) {
    XiGrid grid;
    grid.single_ = true;
    grid.xi_min_ = xi;
    grid.xi_max_ = xi;
    grid.spacing_ = 1.0;
    grid.nodes_ = {xi};
    grid.weights_ = {1.0};
    return grid;
}

double XiGrid::max_speed() const {
    double m = 0.0;
    for (double x : nodes_) m = std::max(m, std::abs(x));
    return m;
}

ScalarState KineticField::macroscopic(const XiGrid& xi) const {
    if (static_cast<std::size_t>(xi.size()) != n_xi_) {
        throw std::invalid_argument("xi grid does not match kinetic field");
    }
    ScalarState u(n_cells_, 0.0);
    for (std::size_t i = 0; i < n_cells_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_xi_; ++j) s += xi.weights()[j] * values_[i * n_xi_ + j];
        u[i] = s;
    }
    return u;
}

KineticField equilibrium_field(const ScalarState& u, const XiGrid& xi) {
    if (xi.is_single()) {
        throw std::invalid_argument("chi equilibria need a velocity grid, not a single node");
    }
    const auto n_xi = static_cast<std::size_t>(xi.size());
    KineticField f(u.size(), n_xi);
    const double h = xi.spacing();
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < n_xi; ++j) {
            const double centre = xi.nodes()[j];
            f(i, j) = chi_indicator_integral(centre - 0.5 * h, centre + 0.5 * h, u[i]) / h;
        }
    }
    return f;
}

double burgers_cfl(double lambda, double dx, double xi_sup, double cfl_safety) {
    if (!(dx > 0.0)) throw std::domain_error("burgers_cfl: dx must be positive");
    if (!(xi_sup > 0.0)) throw std::domain_error("burgers_cfl: xi_sup must be positive");
    if (!(lambda >= 0.0)) throw std::domain_error("burgers_cfl: lambda must be nonnegative");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
        throw std::domain_error("burgers_cfl: safety must lie in (0, 1]");
    }
    return cfl_safety / (lambda + xi_sup / dx);
}

KineticField step_kinetic_transport(const KineticField& f, const KineticField& target,
                                    const Grid1D& grid, const XiGrid& xi, double lambda,
                                    double dt, std::span<const double> gain_weights) {
    const std::size_t n = grid.size();
    const auto n_xi = static_cast<std::size_t>(xi.size());
    if (f.n_cells() != n || f.n_xi() != n_xi) {
        throw std::invalid_argument("kinetic field does not match the grids");
    }
    check_gain_weights(gain_weights, n);
    const double lam_max = max_gain(lambda, gain_weights);
    if (lam_max > 0.0 && (target.n_cells() != n || target.n_xi() != n_xi)) {
        throw std::invalid_argument("kinetic target does not match the grids");
    }
    const double rate = lam_max + xi.max_speed() / grid.dx();
    if (dt * rate > 1.0 + kCflSlack) throw CflViolation(dt, 1.0 / rate);

    const double sigma = dt / grid.dx();
    KineticField out(n, n_xi);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<long>(i);
        const double relax = lambda * gain_at(gain_weights, i) * dt;
        for (std::size_t j = 0; j < n_xi; ++j) {
            const double v = xi.nodes()[j];
            auto get = [&](std::size_t k) { return f(k, j); };
            const double fi = f(i, j);
            double upd = fi;
            if (v >= 0.0) {
                upd -= sigma * v * (fi - neighbour(grid, idx - 1, get));
            } else {
                upd -= sigma * v * (neighbour(grid, idx + 1, get) - fi);
            }
            if (relax != 0.0) upd += relax * (target(i, j) - fi);
            out(i, j) = upd;
        }
    }
    return out;
}

KineticField step_kinetic_burgers(const KineticField& f, const ScalarState& obs_u,
                                  const Grid1D& grid, const XiGrid& xi, double lambda,
                                  double dt, bool collapse,
                                  std::span<const double> gain_weights) {
    KineticField target;
    if (lambda > 0.0) {
        if (obs_u.size() != grid.size()) {
            throw std::invalid_argument("observation does not match the grid");
        }
        target = equilibrium_field(obs_u, xi);
    }
    KineticField next = step_kinetic_transport(f, target, grid, xi, lambda, dt, gain_weights);
    if (collapse) next = equilibrium_field(next.macroscopic(xi), xi);
    return next;
}

ScalarState step_macroscopic_burgers(const ScalarState& u, const ScalarState& obs_u,
                                     const Grid1D& grid, double lambda, double dt,
                                     std::span<const double> gain_weights) {
    const std::size_t n = grid.size();
    if (u.size() != n) throw std::invalid_argument("state does not match the grid");
    check_gain_weights(gain_weights, n);
    const double lam_max = max_gain(lambda, gain_weights);
    if (lam_max > 0.0 && obs_u.size() != n) {
        throw std::invalid_argument("observation does not match the grid");
    }
    double u_sup = 0.0;
    for (double v : u) u_sup = std::max(u_sup, std::abs(v));
    const double rate = lam_max + u_sup / grid.dx();
    if (dt * rate > 1.0 + kCflSlack) throw CflViolation(dt, 1.0 / rate);

    auto get = [&](std::size_t k) { return u[k]; };
    auto flux = [](double left, double right) {
        return 0.5 * std::max(left, 0.0) * left + 0.5 * std::min(right, 0.0) * right;
    };
    const double sigma = dt / grid.dx();
    ScalarState next(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<long>(i);
        const double left = neighbour(grid, idx - 1, get);
        const double right = neighbour(grid, idx + 1, get);
        double v = u[i] - sigma * (flux(u[i], right) - flux(left, u[i]));
        const double relax = lambda * gain_at(gain_weights, i) * dt;
        if (relax != 0.0) v += relax * (obs_u[i] - u[i]);
        next[i] = v;
    }
    return next;
}

double relaxation_solution_at(const KineticInitial& f0, const KineticHistory& target,
                              double lambda, double t, double x, double xi,
                              double tolerance) {
    const double transported = f0(x - xi * t, xi) * std::exp(-lambda * t);
    if (lambda == 0.0 || t <= 0.0) return transported;
    auto integrand = [&](double s) {
        return std::exp(-lambda * s) * target(t - s, x - xi * s, xi);
    };
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 15>::integrate(integrand, 0.0, t, 20, tolerance);
    return transported + lambda * integral;
}

KineticField exact_relaxation_solution(const KineticField& f0, const Grid1D& grid,
                                       const XiGrid& xi, const KineticHistory& target,
                                       double lambda, double t, double tolerance) {
    const std::size_t n = grid.size();
    const auto n_xi = static_cast<std::size_t>(xi.size());
    if (f0.n_cells() != n || f0.n_xi() != n_xi) {
        throw std::invalid_argument("kinetic field does not match the grids");
    }
    std::vector<double> xi_nodes = xi.nodes();
    KineticInitial initial = [&](double x, double v) {
        if (grid.bc() == BoundaryKind::Periodic) {
            x = wrap_periodic(x, grid.x_min(), grid.length());
        } else if (x < grid.x_min() || x >= grid.x_max()) {
            return 0.0;
        }
        const auto j = static_cast<std::size_t>(
            std::lower_bound(xi_nodes.begin(), xi_nodes.end(), v) - xi_nodes.begin());
        return f0(grid.locate(x), std::min(j, n_xi - 1));
    };
    KineticField out(n, n_xi);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n_xi; ++j) {
            out(i, j) = relaxation_solution_at(initial, target, lambda, t, grid.center(i),
                                               xi_nodes[j], tolerance);
        }
    }
    return out;
}

}  // namespace kinobs
