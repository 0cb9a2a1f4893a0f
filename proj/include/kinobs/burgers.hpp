/**
 * @file burgers.hpp
 * @brief Kinetic (BGK) and macroscopic Engquist-Osher schemes for Burgers'
 *        equation with a nudging term, plus the exact solution of the linear
 *        relaxation equation used as an oracle.
 *
 * The kinetic observer solves, per velocity node xi_j,
 *
 *   f_t + xi f_x = lambda (chi(xi, u_obs) - f)
 *
 * with first-order upwind transport and explicit Euler relaxation. In
 * collapse mode the transported density is projected back onto
 * chi(xi, u_hat) after every step, which reproduces the Engquist-Osher
 * scheme up to the velocity quadrature.
 */
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kinobs/grid.hpp"

namespace kinobs {

using ScalarState = std::vector<double>;

/// Uniform midpoint discretisation of the kinetic velocity.
class XiGrid {
public:
    /// Uniform cells on [xi_min, xi_max]; requires xi_min < 0 < xi_max.
    XiGrid(double xi_min, double xi_max, int n_xi);

    /// Grid covering [min(u_min, 0) - margin, max(u_max, 0) + margin] whose
    /// cell edges contain xi = 0, so chi(., u) has at most one partial cell.
    static XiGrid covering(double u_min, double u_max, double margin, int n_xi);

    /// A single velocity node with unit weight (linear transport at speed xi).
    static XiGrid single(double xi);

    int size() const { return static_cast<int>(nodes_.size()); }
    double xi_min() const { return xi_min_; }
    double xi_max() const { return xi_max_; }
    double spacing() const { return spacing_; }
    double node(int j) const { return nodes_[static_cast<std::size_t>(j)]; }
    double weight(int j) const { return weights_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    bool is_single() const { return single_; }

    /// max_j |xi_j|
    double max_speed() const;

private:
    XiGrid() = default;

    double xi_min_ = 0.0;
    double xi_max_ = 0.0;
    double spacing_ = 0.0;
    bool single_ = false;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Density f(x_i, xi_j), stored cell-major.
class KineticField {
public:
    KineticField() = default;
    KineticField(std::size_t n_cells, std::size_t n_xi, double fill = 0.0)
        : n_cells_(n_cells), n_xi_(n_xi), values_(n_cells * n_xi, fill) {}

    std::size_t n_cells() const { return n_cells_; }
    std::size_t n_xi() const { return n_xi_; }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * n_xi_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_xi_ + j]; }

    std::span<double> cell(std::size_t i) { return {values_.data() + i * n_xi_, n_xi_}; }
    std::span<const double> cell(std::size_t i) const {
        return {values_.data() + i * n_xi_, n_xi_};
    }

    const std::vector<double>& values() const { return values_; }

    /// u_hat_i = sum_j w_j f_ij
    ScalarState macroscopic(const XiGrid& xi) const;

    friend bool operator==(const KineticField&, const KineticField&) = default;

private:
    std::size_t n_cells_ = 0;
    std::size_t n_xi_ = 0;
    std::vector<double> values_;
};

/// Cell-averaged chi(xi, u_i) on every velocity cell; the xi-integral of
/// each cell row equals u_i exactly when u_i lies inside the grid.
KineticField equilibrium_field(const ScalarState& u, const XiGrid& xi);

/// cfl_safety / (lambda + xi_sup / dx). Throws std::domain_error for
/// dx <= 0, xi_sup <= 0, lambda < 0 or a safety outside (0, 1].
double burgers_cfl(double lambda, double dx, double xi_sup, double cfl_safety = 1.0);

/// Upwind transport of each velocity node plus explicit relaxation toward
/// an arbitrary kinetic target. gain_weights (per cell, optional) scales
/// lambda locally. Throws CflViolation if dt exceeds the convexity bound.
KineticField step_kinetic_transport(const KineticField& f, const KineticField& target,
                                    const Grid1D& grid, const XiGrid& xi, double lambda,
                                    double dt, std::span<const double> gain_weights = {});

/// One step of the kinetic observer. obs_u is ignored when lambda == 0.
KineticField step_kinetic_burgers(const KineticField& f, const ScalarState& obs_u,
                                  const Grid1D& grid, const XiGrid& xi, double lambda,
                                  double dt, bool collapse,
                                  std::span<const double> gain_weights = {});

/// Engquist-Osher scheme with nudging source lambda dt (u_obs - u).
ScalarState step_macroscopic_burgers(const ScalarState& u, const ScalarState& obs_u,
                                     const Grid1D& grid, double lambda, double dt,
                                     std::span<const double> gain_weights = {});

using KineticInitial = std::function<double(double x, double xi)>;
using KineticHistory = std::function<double(double t, double x, double xi)>;

/// f0(x - xi t, xi) e^{-lambda t} + lambda int_0^t e^{-lambda s} M(t - s, x - xi s, xi) ds,
/// with the time integral evaluated by adaptive Gauss-Kronrod quadrature.
double relaxation_solution_at(const KineticInitial& f0, const KineticHistory& target,
                              double lambda, double t, double x, double xi,
                              double tolerance = 1e-8);

/// Field version on cell centres; f0 is read as piecewise constant and
/// extended according to the grid's boundary kind (periodic wrap or zero).
KineticField exact_relaxation_solution(const KineticField& f0, const Grid1D& grid,
                                       const XiGrid& xi, const KineticHistory& target,
                                       double lambda, double t, double tolerance = 1e-8);

}  // namespace kinobs
