/**
 * @file kinetic_core.hpp
 * @brief Kinetic profiles, Gibbs equilibria and half-line velocity integrals.
 *
 * A Gibbs equilibrium for the shallow-water system is the density
 *
 *   M(xi) = (H / c) * chi((xi - u) / c),   c = sqrt(g H / 2),
 *
 * where chi is an even, nonnegative, compactly supported profile with
 * unit zeroth and second moments. Every finite-volume flux in the library
 * is a moment of M over a half line {xi >= 0} or {xi < 0}; those moments
 * are evaluated here in closed form so that fluxes do not depend on any
 * discretisation of the velocity variable.
 */
#pragma once

#include <string_view>

namespace kinobs {

inline constexpr double kDefaultGravity = 9.81;

enum class ChiKind { Rectangle, Semicircle };

std::string_view to_string(ChiKind kind);
ChiKind chi_kind_from_string(std::string_view name);

/// Shape function chi. Rectangle: 1/(2 sqrt 3) on |z| <= sqrt 3.
/// Semicircle: (1/pi) sqrt(1 - z^2/4) on |z| <= 2 (the energy minimiser).
class ChiProfile {
public:
    explicit ChiProfile(ChiKind kind = ChiKind::Semicircle) : kind_(kind) {}

    ChiKind kind() const { return kind_; }
    double support_halfwidth() const;
    double value(double z) const;

    /// Integral of z^k chi(z)^m over [lo, hi] (clipped to the support).
    /// Supports k in [0, 3] for m == 1 and k in [0, 1] for m == 3.
    double partial_moment(int k, int m, double lo, double hi) const;

    friend bool operator==(const ChiProfile&, const ChiProfile&) = default;

private:
    ChiKind kind_;
};

/// Scalar kinetic indicator: +1 on 0 < xi < u, -1 on u < xi < 0, else 0.
double chi_indicator(double xi, double u);

/// Exact integral of chi_indicator(., u) over [lo, hi].
double chi_indicator_integral(double lo, double hi, double u);

double chi_profile_value(const ChiProfile& profile, double z);

/// k3 = int chi^3.
double chi_cube_integral(const ChiProfile& profile);

enum class XiSide { PositiveXi, NegativeXi };

class GibbsEquilibrium {
public:
    /// Throws std::domain_error when depth < 0 or gravity <= 0.
    GibbsEquilibrium(double depth, double velocity, ChiProfile profile,
                     double gravity = kDefaultGravity);

    double depth() const { return depth_; }
    double velocity() const { return velocity_; }
    double sound_speed() const { return sound_speed_; }
    double gravity() const { return gravity_; }
    const ChiProfile& profile() const { return profile_; }
    bool dry() const { return depth_ == 0.0; }

    double density(double xi) const;

    /// int_{side} xi^power M(xi)^chi_power dxi, closed form.
    double halfline_moment(XiSide side, int power, int chi_power = 1) const;

    /// Largest |xi| in the support of M.
    double max_speed() const;

private:
    double depth_;
    double velocity_;
    double sound_speed_;
    double gravity_;
    ChiProfile profile_;
};

struct GibbsMoments {
    double mass;
    double momentum;
    double energy;
};

/// Moments of M computed from the kinetic integrals; the energy is
/// int xi^2/2 M + g^2/(8 k3) M^3.
GibbsMoments gibbs_moments(const GibbsEquilibrium& eq);

/// H * int_{side} (u + z c)^power chi(z) dz for power in {1, 2} (0 and 3 accepted).
double halfline_flux_moment(const GibbsEquilibrium& eq, XiSide side, int power);

/// Kinetic energy flux int_{side} xi e(M(xi)) dxi with e(f) = xi^2/2 f + g^2/(8 k3) f^3.
double halfline_energy_flux(const GibbsEquilibrium& eq, XiSide side);

/// H u^2 / 2 + g H^2 / 2.
double macroscopic_energy(double depth, double velocity, double gravity = kDefaultGravity);

}  // namespace kinobs
