#include "kinobs/shallow_water.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kinobs/errors.hpp"

namespace kinobs {

namespace {

constexpr double kCflSlack = 1e-12;

struct CellView {
    double H;
    double u;
    double z;
};

CellView ghost_or_cell(const SWState& s, long idx) {
    const long n = static_cast<long>(s.size());
    if (idx >= 0 && idx < n) {
        const auto i = static_cast<std::size_t>(idx);
        return {s.H[i], s.velocity(i), s.z_b[i]};
    }
    switch (s.grid.bc()) {
        case BoundaryKind::Periodic: {
            const auto i = static_cast<std::size_t>((idx + n) % n);
            return {s.H[i], s.velocity(i), s.z_b[i]};
        }
        case BoundaryKind::ReflectiveWall: {
            const auto i = static_cast<std::size_t>(idx < 0 ? 0 : n - 1);
            return {s.H[i], -s.velocity(i), s.z_b[i]};
        }
        case BoundaryKind::DirichletZero:
            break;
    }
    throw std::invalid_argument("shallow water supports wall or periodic boundaries only");
}

double wave_speed(const SWState& s, std::size_t i) {
    const double c = std::sqrt(0.5 * s.gravity * s.H[i]);
    return std::abs(s.velocity(i)) + s.profile.support_halfwidth() * c;
}

// Largest dt * (lambda_i + speed_i / dx) over wet cells.
double cfl_number(const SWState& s, double dt, double lambda,
                  std::span<const double> gain_weights) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double lam = lambda * (gain_weights.empty() ? 1.0 : gain_weights[i]);
        const double speed = s.wet(i) ? wave_speed(s, i) : 0.0;
        worst = std::max(worst, dt * (lam + speed / s.grid.dx()));
    }
    return worst;
}

void check_state(const SWState& s) {
    const std::size_t n = s.grid.size();
    if (s.H.size() != n || s.q.size() != n || s.z_b.size() != n) {
        throw std::invalid_argument("shallow water state does not match its grid");
    }
}

// Transport update; the returned state is not yet cleaned.
SWState transport(const SWState& s, double dt) {
    const auto rec = hydrostatic_reconstruct(s);
    const std::size_t n = s.size();
    std::vector<InterfaceFlux> flux(rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) {
        flux[k] = sv_interface_flux(rec[k], s.profile, s.gravity);
    }
    const double sigma = dt / s.grid.dx();
    SWState out = s;
    for (std::size_t i = 0; i < n; ++i) {
        out.H[i] = s.H[i] - sigma * (flux[i + 1].F_H - flux[i].F_H);
        out.q[i] = s.q[i] - sigma * (flux[i + 1].F_q_left - flux[i].F_q_right);
    }
    return out;
}

// Rounding-level negative depths are set to zero and dry cells lose momentum.
void clean(SWState& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.H[i] < 0.0) s.H[i] = 0.0;
        if (s.H[i] < s.h_dry) s.q[i] = 0.0;
    }
}

}  // namespace

SWState::SWState(Grid1D g, ChiProfile p, double gravity_, double h_dry_)
    : grid(g), profile(p), gravity(gravity_), h_dry(h_dry_),
      H(g.size(), 0.0), q(g.size(), 0.0), z_b(g.size(), 0.0) {
    if (!(gravity_ > 0.0)) throw std::invalid_argument("gravity must be positive");
    if (!(h_dry_ >= 0.0)) throw std::invalid_argument("dry threshold must be nonnegative");
}

double SWState::velocity(std::size_t i) const {
    return H[i] >= h_dry && H[i] > 0.0 ? q[i] / H[i] : 0.0;
}

double SWState::mass() const {
    double m = 0.0;
    for (double h : H) m += h;
    return m * grid.dx();
}

std::vector<InterfaceReconstruction> hydrostatic_reconstruct(const SWState& state) {
    check_state(state);
    const long n = static_cast<long>(state.size());
    std::vector<InterfaceReconstruction> rec(static_cast<std::size_t>(n + 1));
    for (long k = 0; k <= n; ++k) {
        const CellView left = ghost_or_cell(state, k - 1);
        const CellView right = ghost_or_cell(state, k);
        InterfaceReconstruction& r = rec[static_cast<std::size_t>(k)];
        r.H_left = left.H;
        r.H_right = right.H;
        r.u_left = left.u;
        r.u_right = right.u;
        r.z_interface = std::max(left.z, right.z);
        r.dz_minus = r.z_interface - left.z;
        r.dz_plus = r.z_interface - right.z;
        r.H_minus = std::max(0.0, left.H + left.z - r.z_interface);
        r.H_plus = std::max(0.0, right.H + right.z - r.z_interface);
    }
    return rec;
}

InterfaceFlux sv_interface_flux(const InterfaceReconstruction& rec, const ChiProfile& profile,
                                double gravity) {
    InterfaceFlux f;
    if (rec.H_minus > 0.0) {
        const GibbsEquilibrium m(rec.H_minus, rec.u_left, profile, gravity);
        f.F_H += halfline_flux_moment(m, XiSide::PositiveXi, 1);
        f.F_q_left += halfline_flux_moment(m, XiSide::PositiveXi, 2);
    }
    if (rec.H_plus > 0.0) {
        const GibbsEquilibrium m(rec.H_plus, rec.u_right, profile, gravity);
        f.F_H += halfline_flux_moment(m, XiSide::NegativeXi, 1);
        f.F_q_left += halfline_flux_moment(m, XiSide::NegativeXi, 2);
    }
    f.F_q_right = f.F_q_left;
    f.F_q_left += 0.5 * gravity * (rec.H_left * rec.H_left - rec.H_minus * rec.H_minus);
    f.F_q_right += 0.5 * gravity * (rec.H_right * rec.H_right - rec.H_plus * rec.H_plus);
    return f;
}

double sv_cfl(const SWState& state, double lambda, double cfl_safety) {
    check_state(state);
    if (!(lambda >= 0.0)) throw std::domain_error("sv_cfl: lambda must be nonnegative");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
        throw std::domain_error("sv_cfl: safety must lie in (0, 1]");
    }
    const double dx = state.grid.dx();
    double rate = 0.0;
    bool any_wet = false;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!state.wet(i)) continue;
        any_wet = true;
        rate = std::max(rate, wave_speed(state, i));
    }
    if (!any_wet) {
        rate = state.profile.support_halfwidth() *
               std::sqrt(0.5 * state.gravity * std::max(state.h_dry, 1e-300));
    }
    return cfl_safety * dx / (lambda * dx + rate);
}

SWState sv_forward_step(const SWState& state, double dt) {
    check_state(state);
    const double nu = cfl_number(state, dt, 0.0, {});
    if (nu > 1.0 + kCflSlack) throw CflViolation(dt, dt / nu);
    SWState out = transport(state, dt);
    clean(out);
    return out;
}

SWState sv_observer_step(const SWState& state, const ScalarState& obs_H, double lambda,
                         double dt, std::span<const double> gain_weights) {
    check_state(state);
    const std::size_t n = state.size();
    if (!gain_weights.empty() && gain_weights.size() != n) {
        throw std::invalid_argument("gain weights do not match the grid");
    }
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    const bool active = lambda > 0.0;
    if (active && obs_H.size() != n) {
        throw std::invalid_argument("observation does not match the grid");
    }
    const double nu = cfl_number(state, dt, lambda, gain_weights);
    if (nu > 1.0 + kCflSlack) throw CflViolation(dt, dt / nu);

    SWState out = transport(state, dt);
    if (active) {
        for (std::size_t i = 0; i < n; ++i) {
            const double w = gain_weights.empty() ? 1.0 : gain_weights[i];
            if (w <= 0.0) continue;
            const double h_obs = obs_H[i];
            if (!(h_obs >= 0.0)) {
                throw std::invalid_argument("observed depth must be a nonnegative number");
            }
            const double dH = lambda * w * dt * (h_obs - state.H[i]);
            out.H[i] += dH;
            out.q[i] += state.velocity(i) * dH;
        }
    }
    clean(out);
    return out;
}

EnergyBudget energy_budget(const SWState& state, const ScalarState& obs_H) {
    check_state(state);
    const std::size_t n = state.size();
    const double g = state.gravity;
    EnergyBudget b;
    b.zeta_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.zeta_hat[i] = macroscopic_energy(state.H[i], state.velocity(i), g) +
                        g * state.H[i] * state.z_b[i];
    }
    if (!obs_H.empty()) {
        if (obs_H.size() != n) throw std::invalid_argument("observation does not match the grid");
        b.zeta_tilde.resize(n, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isnan(obs_H[i])) continue;
            b.zeta_tilde[i] = macroscopic_energy(obs_H[i], state.velocity(i), g) +
                              g * obs_H[i] * state.z_b[i];
        }
    }
    const auto rec = hydrostatic_reconstruct(state);
    b.G.resize(rec.size());
    for (std::size_t k = 0; k < rec.size(); ++k) {
        const InterfaceReconstruction& r = rec[k];
        double G = 0.0;
        double F_H = 0.0;
        if (r.H_minus > 0.0) {
            const GibbsEquilibrium m(r.H_minus, r.u_left, state.profile, g);
            G += halfline_energy_flux(m, XiSide::PositiveXi);
            F_H += halfline_flux_moment(m, XiSide::PositiveXi, 1);
        }
        if (r.H_plus > 0.0) {
            const GibbsEquilibrium m(r.H_plus, r.u_right, state.profile, g);
            G += halfline_energy_flux(m, XiSide::NegativeXi);
            F_H += halfline_flux_moment(m, XiSide::NegativeXi, 1);
        }
        b.G[k] = G + g * r.z_interface * F_H;
    }
    return b;
}

double total_energy(const SWState& state) {
    double e = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        e += macroscopic_energy(state.H[i], state.velocity(i), state.gravity) +
             state.gravity * state.H[i] * state.z_b[i];
    }
    return e * state.grid.dx();
}

double thacker_bathymetry(const ThackerParams& p, double x) {
    const double d = x - 0.5 * p.L;
    return p.h_m / (p.a * p.a) * (d * d - p.a * p.a);
}

double thacker_truth_depth(const ThackerParams& p, double x) {
    const double d = x - 0.5 * p.L + 0.5;
    return std::max(0.0, -p.h_m / (p.a * p.a) * (d * d - p.a * p.a));
}

double thacker_exact_depth(const ThackerParams& p, double x, double t, double gravity) {
    // Planar surface eta = A cos(wt) d + beta(t) with uniform velocity.
    constexpr double shift = 0.5;
    const double a2 = p.a * p.a;
    const double omega = std::sqrt(2.0 * gravity * p.h_m) / p.a;
    const double c = std::cos(omega * t);
    const double d = x - 0.5 * p.L;
    const double eta = -2.0 * shift * p.h_m / a2 * c * d - shift * shift * p.h_m / a2 * c * c;
    return std::max(0.0, eta - thacker_bathymetry(p, x));
}

double thacker_exact_velocity(const ThackerParams& p, double t, double gravity) {
    constexpr double shift = 0.5;
    const double omega = std::sqrt(2.0 * gravity * p.h_m) / p.a;
    return 2.0 * shift * p.h_m / (p.a * p.a) * gravity / omega * std::sin(omega * t);
}

ThackerSetup thacker_setup(const ThackerParams& p, int n_cells, ChiProfile profile,
                           double gravity) {
    if (!(p.a > 0.0 && p.h_m > 0.0)) throw std::invalid_argument("thacker: a and h_m must be positive");
    if (!(p.L > 2.0 * p.a)) throw std::invalid_argument("thacker: L must exceed 2a");
    const Grid1D grid(n_cells, 0.0, p.L, BoundaryKind::ReflectiveWall);
    SWState truth(grid, profile, gravity);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.center(i);
        truth.z_b[i] = thacker_bathymetry(p, x);
        truth.H[i] = thacker_truth_depth(p, x);
    }
    SWState observer = truth;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        observer.H[i] = std::max(0.0, -observer.z_b[i]);
    }
    return {truth, observer};
}

SWState lake_at_rest(const Grid1D& grid, const std::vector<double>& z_b, double eta,
                     ChiProfile profile, double gravity) {
    if (z_b.size() != grid.size()) throw std::invalid_argument("bathymetry does not match the grid");
    SWState s(grid, profile, gravity);
    s.z_b = z_b;
    for (std::size_t i = 0; i < grid.size(); ++i) s.H[i] = std::max(0.0, eta - z_b[i]);
    return s;
}

SWState dam_break(const Grid1D& grid, double H_left, double H_right, double x0,
                  ChiProfile profile, double gravity) {
    if (!(H_left >= 0.0 && H_right >= 0.0)) throw std::invalid_argument("dam break depths must be nonnegative");
    SWState s(grid, profile, gravity);
    for (std::size_t i = 0; i < grid.size(); ++i) s.H[i] = grid.center(i) < x0 ? H_left : H_right;
    return s;
}

}  // namespace kinobs
