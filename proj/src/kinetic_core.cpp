#include "kinobs/kinetic_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kinobs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kRectHeight = 1.0 / (2.0 * kSqrt3);

// Antiderivatives in theta for the substitution z = 2 sin(theta), written
// in terms of s = sin(theta), co = cos(theta) >= 0.
struct SemicircleAngle {
    double theta;
    double s;
    double co;
};

SemicircleAngle semicircle_angle(double z) {
    if (z >= 2.0) return {kPi / 2.0, 1.0, 0.0};
    if (z <= -2.0) return {-kPi / 2.0, -1.0, 0.0};
    const double s = 0.5 * z;
    return {std::asin(s), s, std::sqrt((1.0 - s) * (1.0 + s))};
}

// int sin^k cos^2
double power_cos2_antiderivative(int k, const SemicircleAngle& a) {
    const double co3 = a.co * a.co * a.co;
    switch (k) {
        case 0: return 0.5 * a.theta + 0.5 * a.s * a.co;
        case 1: return -co3 / 3.0;
        case 2: return a.theta / 8.0 - a.s * a.co * (1.0 - 2.0 * a.s * a.s) / 8.0;
        case 3: return -co3 / 3.0 + co3 * a.co * a.co / 5.0;
        default: throw std::invalid_argument("unsupported power in semicircle moment");
    }
}

// int sin^k cos^4
double power_cos4_antiderivative(int k, const SemicircleAngle& a) {
    switch (k) {
        case 0:
            return 3.0 * a.theta / 8.0 + 0.5 * a.s * a.co +
                   a.s * a.co * (1.0 - 2.0 * a.s * a.s) / 8.0;
        case 1: {
            const double co2 = a.co * a.co;
            return -co2 * co2 * a.co / 5.0;
        }
        default: throw std::invalid_argument("unsupported power in semicircle cubic moment");
    }
}

double binomial(int n, int k) {
    static constexpr std::array<std::array<double, 4>, 4> table{{
        {1, 0, 0, 0},
        {1, 1, 0, 0},
        {1, 2, 1, 0},
        {1, 3, 3, 1},
    }};
    return table[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

}  // namespace

std::string_view to_string(ChiKind kind) {
    return kind == ChiKind::Rectangle ? "rectangle" : "semicircle";
}

ChiKind chi_kind_from_string(std::string_view name) {
    if (name == "rectangle") return ChiKind::Rectangle;
    if (name == "semicircle") return ChiKind::Semicircle;
    throw std::invalid_argument("unknown chi profile '" + std::string(name) + "'");
}

double ChiProfile::support_halfwidth() const {
    return kind_ == ChiKind::Rectangle ? kSqrt3 : 2.0;
}

double ChiProfile::value(double z) const {
    if (kind_ == ChiKind::Rectangle) {
        return std::abs(z) <= kSqrt3 ? kRectHeight : 0.0;
    }
    if (std::abs(z) > 2.0) return 0.0;
    return std::sqrt(std::max(0.0, 1.0 - 0.25 * z * z)) / kPi;
}

double ChiProfile::partial_moment(int k, int m, double lo, double hi) const {
    if (m != 1 && m != 3) throw std::invalid_argument("chi power must be 1 or 3");
    if (k < 0 || k > 3 || (m == 3 && k > 1)) {
        throw std::invalid_argument("unsupported moment order");
    }
    const double w = support_halfwidth();
    lo = std::max(lo, -w);
    hi = std::min(hi, w);
    if (!(hi > lo)) return 0.0;

    if (kind_ == ChiKind::Rectangle) {
        const double height = m == 1 ? kRectHeight : kRectHeight * kRectHeight * kRectHeight;
        const double upper = std::pow(hi, k + 1);
        const double lower = std::pow(lo, k + 1);
        return height * (upper - lower) / (k + 1);
    }

    const SemicircleAngle a = semicircle_angle(lo);
    const SemicircleAngle b = semicircle_angle(hi);
    const double scale = std::pow(2.0, k + 1);
    if (m == 1) {
        return scale / kPi * (power_cos2_antiderivative(k, b) - power_cos2_antiderivative(k, a));
    }
    return scale / (kPi * kPi * kPi) *
           (power_cos4_antiderivative(k, b) - power_cos4_antiderivative(k, a));
}

double chi_indicator(double xi, double u) {
    if (0.0 < xi && xi < u) return 1.0;
    if (u < xi && xi < 0.0) return -1.0;
    return 0.0;
}

double chi_indicator_integral(double lo, double hi, double u) {
    if (!(hi > lo)) return 0.0;
    if (u > 0.0) return std::max(0.0, std::min(hi, u) - std::max(lo, 0.0));
    if (u < 0.0) return -std::max(0.0, std::min(hi, 0.0) - std::max(lo, u));
    return 0.0;
}

double chi_profile_value(const ChiProfile& profile, double z) { return profile.value(z); }

double chi_cube_integral(const ChiProfile& profile) {
    const double w = profile.support_halfwidth();
    return profile.partial_moment(0, 3, -w, w);
}

GibbsEquilibrium::GibbsEquilibrium(double depth, double velocity, ChiProfile profile,
                                   double gravity)
    : depth_(depth), velocity_(velocity), sound_speed_(0.0), gravity_(gravity),
      profile_(profile) {
    if (!(depth >= 0.0)) throw std::domain_error("Gibbs equilibrium requires depth >= 0");
    if (!(gravity > 0.0)) throw std::domain_error("Gibbs equilibrium requires gravity > 0");
    if (depth_ > 0.0) sound_speed_ = std::sqrt(0.5 * gravity_ * depth_);
}

double GibbsEquilibrium::density(double xi) const {
    if (dry()) return 0.0;
    return depth_ / sound_speed_ * profile_.value((xi - velocity_) / sound_speed_);
}

double GibbsEquilibrium::max_speed() const {
    if (dry()) return 0.0;
    return std::abs(velocity_) + profile_.support_halfwidth() * sound_speed_;
}

double GibbsEquilibrium::halfline_moment(XiSide side, int power, int chi_power) const {
    if (power < 0 || power > 3) throw std::invalid_argument("unsupported flux moment power");
    if (dry()) return 0.0;
    const double c = sound_speed_;
    const double u = velocity_;
    const double w = profile_.support_halfwidth();
    // xi >= 0  <=>  z >= -u/c; the bound itself belongs to the positive side.
    const double z0 = -u / c;
    const double lo = side == XiSide::PositiveXi ? z0 : -w;
    const double hi = side == XiSide::PositiveXi ? w : z0;

    double sum = 0.0;
    for (int k = 0; k <= power; ++k) {
        const double coeff = binomial(power, k) * std::pow(u, power - k) * std::pow(c, k);
        if (coeff == 0.0) continue;
        sum += coeff * profile_.partial_moment(k, chi_power, lo, hi);
    }
    // int xi^p M^m dxi = H^m c^(1-m) int (u + z c)^p chi^m dz
    if (chi_power == 1) return depth_ * sum;
    return depth_ * depth_ * depth_ / (c * c) * sum;
}

GibbsMoments gibbs_moments(const GibbsEquilibrium& eq) {
    if (eq.dry()) return {0.0, 0.0, 0.0};
    auto both = [&](int power, int chi_power) {
        return eq.halfline_moment(XiSide::PositiveXi, power, chi_power) +
               eq.halfline_moment(XiSide::NegativeXi, power, chi_power);
    };
    const double g = eq.gravity();
    const double k3 = chi_cube_integral(eq.profile());
    const double kinetic = 0.5 * both(2, 1);
    const double pressure = g * g / (8.0 * k3) * both(0, 3);
    return {both(0, 1), both(1, 1), kinetic + pressure};
}

double halfline_flux_moment(const GibbsEquilibrium& eq, XiSide side, int power) {
    return eq.halfline_moment(side, power, 1);
}

double halfline_energy_flux(const GibbsEquilibrium& eq, XiSide side) {
    if (eq.dry()) return 0.0;
    const double g = eq.gravity();
    const double k3 = chi_cube_integral(eq.profile());
    return 0.5 * eq.halfline_moment(side, 3, 1) +
           g * g / (8.0 * k3) * eq.halfline_moment(side, 1, 3);
}

double macroscopic_energy(double depth, double velocity, double gravity) {
    return 0.5 * depth * velocity * velocity + 0.5 * gravity * depth * depth;
}

}  // namespace kinobs
