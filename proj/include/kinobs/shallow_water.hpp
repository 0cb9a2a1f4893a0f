/**
 * @file shallow_water.hpp
 * @brief Kinetic finite-volume Saint-Venant solver with hydrostatic
 *        reconstruction, the height-only nudged observer and energy accounting.
 */
#pragma once

#include <span>
#include <vector>

#include "kinobs/burgers.hpp"
#include "kinobs/grid.hpp"
#include "kinobs/kinetic_core.hpp"

namespace kinobs {

inline constexpr double kDefaultDryDepth = 1e-8;

/// Conservative shallow-water state on a grid, with bathymetry.
struct SWState {
    Grid1D grid;
    ChiProfile profile;
    double gravity = kDefaultGravity;
    double h_dry = kDefaultDryDepth;
    std::vector<double> H;
    std::vector<double> q;
    std::vector<double> z_b;

    SWState(Grid1D g, ChiProfile p, double gravity_ = kDefaultGravity,
            double h_dry_ = kDefaultDryDepth);

    std::size_t size() const { return H.size(); }
    /// q/H where H >= h_dry, else 0.
    double velocity(std::size_t i) const;
    bool wet(std::size_t i) const { return H[i] >= h_dry; }
    /// Sum of H dx.
    double mass() const;
};

/// Hydrostatic reconstruction at one interface between a left and right cell.
struct InterfaceReconstruction {
    double H_left = 0.0;    ///< depth of the left cell
    double H_right = 0.0;   ///< depth of the right cell
    double u_left = 0.0;
    double u_right = 0.0;
    double H_minus = 0.0;
    double H_plus = 0.0;
    double z_interface = 0.0;
    double dz_minus = 0.0;  ///< z_interface - z_b of the left cell
    double dz_plus = 0.0;   ///< z_interface - z_b of the right cell
};

/// Reconstruction at the n + 1 interfaces, boundary ghosts included.
/// Walls mirror the boundary cell with negated velocity, periodic grids wrap.
/// Throws std::invalid_argument for Dirichlet grids.
std::vector<InterfaceReconstruction> hydrostatic_reconstruct(const SWState& state);

struct InterfaceFlux {
    double F_H = 0.0;
    double F_q_left = 0.0;   ///< momentum flux seen by the left cell
    double F_q_right = 0.0;  ///< momentum flux seen by the right cell
};

/// Kinetic flux of the reconstructed Gibbs equilibria plus the hydrostatic
/// correction g/2 (H_cell^2 - H_reconstructed^2) on each side.
InterfaceFlux sv_interface_flux(const InterfaceReconstruction& rec, const ChiProfile& profile,
                                double gravity = kDefaultGravity);

/// safety * min over wet cells of dx / (lambda dx + |u| + w c).
double sv_cfl(const SWState& state, double lambda, double cfl_safety = 1.0);

/// One conservative step. Throws CflViolation if dt exceeds sv_cfl(state, 0, 1).
SWState sv_forward_step(const SWState& state, double dt);

/// Transport step plus the moments of lambda (M_obs - M) on cells with a
/// positive gain weight, where M_obs is the Gibbs state with the observed
/// depth and the observer velocity. obs_H entries outside the gain support
/// are ignored; a negative or missing observation on it throws
/// std::invalid_argument. Empty gain_weights means full observation.
SWState sv_observer_step(const SWState& state, const ScalarState& obs_H, double lambda,
                         double dt, std::span<const double> gain_weights = {});

struct EnergyBudget {
    std::vector<double> zeta_hat;    ///< observer energy per cell
    std::vector<double> zeta_tilde;  ///< energy of the observation equilibrium
    std::vector<double> G;           ///< energy flux at the n + 1 interfaces
};

/// Per-cell energies and interface energy fluxes. zeta includes g H z_b;
/// G includes the potential flux g z_interface F_H. When obs_H is empty,
/// zeta_tilde is left empty.
EnergyBudget energy_budget(const SWState& state, const ScalarState& obs_H = {});

/// Sum of (H u^2/2 + g H^2/2 + g H z_b) dx.
double total_energy(const SWState& state);

struct ThackerParams {
    double a = 1.0;
    double L = 4.0;
    double h_m = 0.5;

    friend bool operator==(const ThackerParams&, const ThackerParams&) = default;
};

struct ThackerSetup {
    SWState truth;
    SWState observer;
};

/// Parabolic bowl z_b = (h_m/a^2)((x - L/2)^2 - a^2) on [0, L] with walls.
/// Truth: the bowl parabola shifted by half a unit, so its free surface is
/// planar. Observer: max(0, -z_b), the bowl filled to level 0. Both at rest.
ThackerSetup thacker_setup(const ThackerParams& params, int n_cells,
                           ChiProfile profile = ChiProfile{},
                           double gravity = kDefaultGravity);

double thacker_bathymetry(const ThackerParams& params, double x);
double thacker_truth_depth(const ThackerParams& params, double x);
/// Analytic depth of the planar oscillation started from thacker_truth_depth.
/// Period 2 pi a / sqrt(2 g h_m).
double thacker_exact_depth(const ThackerParams& params, double x, double t,
                           double gravity = kDefaultGravity);
/// Uniform velocity of the same oscillation on its wet region.
double thacker_exact_velocity(const ThackerParams& params, double t,
                              double gravity = kDefaultGravity);

/// Still water with surface eta over the given bathymetry.
SWState lake_at_rest(const Grid1D& grid, const std::vector<double>& z_b, double eta,
                     ChiProfile profile = ChiProfile{}, double gravity = kDefaultGravity);

/// Flat-bottom Riemann data at rest: H_left for x < x0, H_right otherwise.
SWState dam_break(const Grid1D& grid, double H_left, double H_right, double x0,
                  ChiProfile profile = ChiProfile{}, double gravity = kDefaultGravity);

}  // namespace kinobs
