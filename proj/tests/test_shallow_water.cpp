#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "kinobs/errors.hpp"
#include "kinobs/kinetic_core.hpp"
#include "kinobs/observation.hpp"
#include "kinobs/shallow_water.hpp"
#include "support.hpp"

using namespace kinobs;
using kinobs::testing::Gen;
using kinobs::testing::integrate;

namespace {

const ChiProfile kRect{ChiKind::Rectangle};
const ChiProfile kSemi{ChiKind::Semicircle};

std::vector<double> bump(const Grid1D& g, double height, double centre, double width) {
    std::vector<double> z(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = (g.center(i) - centre) / width;
        z[i] = std::abs(d) < 1.0 ? height * (1.0 - d * d) : 0.0;
    }
    return z;
}

SWState random_state(Gen& g, const Grid1D& grid, const ChiProfile& p, bool topography,
                     bool dry_patches) {
    SWState s(grid, p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.z_b[i] = topography ? g.uniform(-0.3, 0.3) : 0.0;
        s.H[i] = g.uniform(0.0, 2.0);
        if (dry_patches && g.integer(0, 4) == 0) s.H[i] = 0.0;
        s.q[i] = s.H[i] * g.uniform(-1.0, 1.0);
    }
    return s;
}

double max_surface_deviation(const SWState& s, double eta) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.H[i] > 0.0) d = std::max(d, std::abs(s.H[i] + s.z_b[i] - eta));
        else d = std::max(d, s.H[i]);
    }
    return d;
}

}  // namespace

TEST_CASE("reconstruction examples") {
    const Grid1D grid(3, 0.0, 3.0, BoundaryKind::ReflectiveWall);
    SWState flat(grid, kSemi);
    flat.H = {1.0, 0.4, 2.0};
    const auto r = hydrostatic_reconstruct(flat);
    REQUIRE(r.size() == 4);
    CHECK(r[1].H_minus == 1.0);
    CHECK(r[1].H_plus == 0.4);
    CHECK(r[2].H_minus == 0.4);
    CHECK(r[2].H_plus == 2.0);

    SWState lake(grid, kSemi);
    lake.z_b = {0.0, 0.3, 0.1};
    for (std::size_t i = 0; i < 3; ++i) lake.H[i] = 1.0 - lake.z_b[i];
    const auto rl = hydrostatic_reconstruct(lake);
    for (std::size_t k = 1; k < 3; ++k) {
        CHECK(rl[k].H_minus == doctest::Approx(1.0 - rl[k].z_interface).epsilon(1e-15));
        CHECK(rl[k].H_plus == doctest::Approx(1.0 - rl[k].z_interface).epsilon(1e-15));
    }

    SWState step(grid, kSemi);
    step.H = {0.1, 0.0, 0.0};
    step.z_b = {0.0, 0.5, 0.5};
    const auto rs = hydrostatic_reconstruct(step);
    CHECK(rs[1].H_minus == 0.0);
    CHECK(rs[1].z_interface == 0.5);
    CHECK(rs[1].dz_minus == 0.5);
    CHECK(rs[1].dz_plus == 0.0);

    SWState bad(Grid1D(3, 0.0, 1.0, BoundaryKind::DirichletZero), kSemi);
    CHECK_THROWS_AS(hydrostatic_reconstruct(bad), std::invalid_argument);
}

TEST_CASE("property: reconstruction invariants") {
    Gen g(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto bc = g.coin() ? BoundaryKind::Periodic : BoundaryKind::ReflectiveWall;
        const SWState s = random_state(g, Grid1D(g.integer(2, 30), 0.0, 1.0, bc), kSemi, true, true);
        const auto rec = hydrostatic_reconstruct(s);
        CHECK(rec.size() == s.size() + 1);
        for (std::size_t k = 0; k < rec.size(); ++k) {
            const auto& r = rec[k];
            CHECK(r.H_minus >= 0.0);
            CHECK(r.H_plus >= 0.0);
            CHECK(r.H_minus <= r.H_left + 1e-15);
            CHECK(r.H_plus <= r.H_right + 1e-15);
            CHECK(r.dz_minus >= 0.0);
            CHECK(r.dz_plus >= 0.0);
            CHECK(std::min(r.dz_minus, r.dz_plus) == 0.0);
        }
    }
}

TEST_CASE("interface flux examples") {
    InterfaceReconstruction dry;
    const auto f0 = sv_interface_flux(dry, kSemi);
    CHECK(f0.F_H == 0.0);
    CHECK(f0.F_q_left == 0.0);
    CHECK(f0.F_q_right == 0.0);

    for (const auto& p : {kRect, kSemi}) {
        InterfaceReconstruction still;
        still.H_left = still.H_right = still.H_minus = still.H_plus = 1.7;
        const double g = 9.81;
        const auto f = sv_interface_flux(still, p, g);
        CHECK(std::abs(f.F_H) < 1e-15);
        CHECK(f.F_q_left == doctest::Approx(g * 1.7 * 1.7 / 2.0).epsilon(1e-13));
        CHECK(f.F_q_right == doctest::Approx(g * 1.7 * 1.7 / 2.0).epsilon(1e-13));
        // Each half line carries g H^2 / 4, by quadrature of the profile.
        const GibbsEquilibrium m(1.7, 0.0, p, g);
        const double half = integrate([&](double xi) { return xi * xi * m.density(xi); }, 0.0,
                                      m.max_speed());
        CHECK(half == doctest::Approx(g * 1.7 * 1.7 / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("property: interface flux is mirror-antisymmetric") {
    Gen g(43);
    for (int trial = 0; trial < 100; ++trial) {
        InterfaceReconstruction r;
        r.H_left = g.uniform(0.0, 2.0);
        r.H_right = g.uniform(0.0, 2.0);
        r.H_minus = r.H_left * g.uniform(0.0, 1.0);
        r.H_plus = r.H_right * g.uniform(0.0, 1.0);
        r.u_left = g.uniform(-2.0, 2.0);
        r.u_right = g.uniform(-2.0, 2.0);
        InterfaceReconstruction m;
        m.H_left = r.H_right;
        m.H_right = r.H_left;
        m.H_minus = r.H_plus;
        m.H_plus = r.H_minus;
        m.u_left = -r.u_right;
        m.u_right = -r.u_left;
        const auto a = sv_interface_flux(r, kSemi);
        const auto b = sv_interface_flux(m, kSemi);
        CHECK(a.F_H == doctest::Approx(-b.F_H).epsilon(1e-12).scale(1.0));
        CHECK(a.F_q_left == doctest::Approx(b.F_q_right).epsilon(1e-12).scale(1.0));
        CHECK(a.F_q_right == doctest::Approx(b.F_q_left).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("sv_cfl examples") {
    const Grid1D grid(10, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s(grid, kRect, 9.81);
    std::fill(s.H.begin(), s.H.end(), 1.0);
    const double ref = 0.1 / (std::sqrt(3.0) * std::sqrt(9.81 / 2.0));
    CHECK(sv_cfl(s, 0.0, 1.0) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(sv_cfl(s, 0.0, 1.0) == doctest::Approx(0.02608).epsilon(1e-3));
    CHECK(sv_cfl(s, 0.0, 0.5) == doctest::Approx(0.5 * ref).epsilon(1e-14));
    CHECK(sv_cfl(s, 1e9, 0.7) == doctest::Approx(0.7 / 1e9).epsilon(1e-6));

    SWState coarse(Grid1D(10, 0.0, 2.0, BoundaryKind::ReflectiveWall), kRect, 9.81);
    std::fill(coarse.H.begin(), coarse.H.end(), 1.0);
    CHECK(sv_cfl(coarse, 0.0) == doctest::Approx(2.0 * sv_cfl(s, 0.0)).epsilon(1e-14));

    SWState dry(grid, kSemi);
    const double floor = sv_cfl(dry, 0.0);
    CHECK(std::isfinite(floor));
    CHECK(floor > 0.0);
    CHECK_THROWS_AS(sv_cfl(s, -1.0), std::domain_error);
}

TEST_CASE("lake at rest over a bump is preserved") {
    for (const auto& p : {kRect, kSemi}) {
        const Grid1D grid(100, 0.0, 1.0, BoundaryKind::ReflectiveWall);
        SWState s = lake_at_rest(grid, bump(grid, 0.4, 0.5, 0.2), 1.0, p);
        const double dt = sv_cfl(s, 0.0, 0.9);
        for (int n = 0; n < 1000; ++n) s = sv_forward_step(s, dt);
        CHECK(max_surface_deviation(s, 1.0) < 1e-12);
        for (double q : s.q) CHECK(std::abs(q) < 1e-12);
    }
}

TEST_CASE("lake at rest with an emerging island is preserved") {
    const Grid1D grid(80, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s = lake_at_rest(grid, bump(grid, 1.5, 0.5, 0.2), 1.0);
    const double dt = sv_cfl(s, 0.0, 0.9);
    for (int n = 0; n < 500; ++n) s = sv_forward_step(s, dt);
    CHECK(max_surface_deviation(s, 1.0) < 1e-12);
    CHECK(s.H[grid.locate(0.5)] == 0.0);
}

TEST_CASE("dam break keeps depths nonnegative and conserves mass") {
    const Grid1D grid(200, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    for (double h_right : {1.0, 0.0}) {
        SWState s = dam_break(grid, 2.0, h_right, 0.5);
        const double m0 = s.mass();
        for (int n = 0; n < 400; ++n) {
            s = sv_forward_step(s, sv_cfl(s, 0.0, 0.9));
            for (double h : s.H) REQUIRE(h >= 0.0);
        }
        CHECK(std::abs(s.mass() - m0) <= 1e-12 * m0);
    }
}

TEST_CASE("symmetric hump stays mirror-symmetric") {
    const Grid1D grid(101, -1.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s(grid, kSemi);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.center(i);
        s.H[i] = 1.0 + 0.5 * std::exp(-20.0 * x * x);
    }
    // Exactly mirrored cell centres.
    for (std::size_t i = 0; i < grid.size() / 2; ++i) s.H[grid.size() - 1 - i] = s.H[i];
    for (int n = 0; n < 200; ++n) s = sv_forward_step(s, sv_cfl(s, 0.0, 0.9));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t j = grid.size() - 1 - i;
        CHECK(std::abs(s.H[i] - s.H[j]) < 1e-12);
        CHECK(std::abs(s.q[i] + s.q[j]) < 1e-12);
    }
}

TEST_CASE("forward step rejects CFL violations") {
    const Grid1D grid(10, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s = dam_break(grid, 2.0, 1.0, 0.5);
    const double dt = sv_cfl(s, 0.0, 1.0);
    CHECK_THROWS_AS(sv_forward_step(s, 1.01 * dt), CflViolation);
    CHECK_NOTHROW(sv_forward_step(s, dt));
    CHECK_THROWS_AS(sv_observer_step(s, s.H, 50.0, dt), CflViolation);
}

TEST_CASE("observer step examples") {
    const Grid1D grid(40, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s = dam_break(grid, 1.5, 1.0, 0.4);
    for (std::size_t i = 0; i < grid.size(); ++i) s.q[i] = 0.1 * s.H[i];
    const double dt = sv_cfl(s, 20.0, 0.9);
    const ScalarState obs(grid.size(), 1.2);

    const SWState a = sv_observer_step(s, obs, 0.0, dt);
    const SWState b = sv_forward_step(s, dt);
    CHECK(a.H == b.H);
    CHECK(a.q == b.q);

    SWState uniform(Grid1D(10, 0.0, 1.0, BoundaryKind::Periodic), kSemi);
    std::fill(uniform.H.begin(), uniform.H.end(), 1.0);
    std::fill(uniform.q.begin(), uniform.q.end(), 0.3);
    const double lam = 4.0;
    const double h = sv_cfl(uniform, lam, 0.9);
    const auto next = sv_observer_step(uniform, ScalarState(10, 1.5), lam, h);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(next.H[i] == doctest::Approx(1.0 + lam * h * 0.5).epsilon(1e-14));
        CHECK(next.velocity(i) == doctest::Approx(0.3).epsilon(1e-14));
    }

    ScalarState negative = obs;
    negative[3] = -0.1;
    CHECK_THROWS_AS(sv_observer_step(s, negative, 1.0, dt), std::invalid_argument);
    CHECK_THROWS_AS(sv_observer_step(s, ScalarState(3, 1.0), 1.0, dt), std::invalid_argument);
    CHECK_THROWS_AS(sv_observer_step(s, obs, -1.0, dt), std::invalid_argument);
}

TEST_CASE("observer source is confined to the gain support") {
    const Grid1D grid(40, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s = dam_break(grid, 1.5, 1.0, 0.5);
    std::vector<double> weights(grid.size(), 0.0);
    for (std::size_t i = 10; i < 20; ++i) weights[i] = 1.0;
    ScalarState obs(grid.size(), kAbsent);
    for (std::size_t i = 10; i < 20; ++i) obs[i] = 1.3;
    const double dt = sv_cfl(s, 10.0, 0.9);
    const auto nudged = sv_observer_step(s, obs, 10.0, dt, weights);
    const auto free = sv_forward_step(s, dt);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (weights[i] > 0.0) CHECK(nudged.H[i] != free.H[i]);
        else CHECK(nudged.H[i] == free.H[i]);
    }
}

TEST_CASE("property: observer steps keep depths nonnegative") {
    Gen g(47);
    for (int trial = 0; trial < 40; ++trial) {
        const Grid1D grid(g.integer(5, 40), 0.0, 1.0, BoundaryKind::ReflectiveWall);
        SWState s = random_state(g, grid, g.coin() ? kRect : kSemi, g.coin(), true);
        for (int n = 0; n < 20; ++n) {
            const double lam = g.uniform(0.0, 100.0);
            const auto obs = g.field(grid.size(), 0.0, 2.0);
            s = sv_observer_step(s, obs, lam, sv_cfl(s, lam, g.uniform(0.2, 1.0)));
            for (double h : s.H) REQUIRE(h >= 0.0);
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!s.wet(i)) CHECK(s.q[i] == 0.0);
            }
        }
    }
}

TEST_CASE("energy budget examples") {
    const double g = 9.81;
    const Grid1D grid(4, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s(grid, kSemi, g);
    s.H = {1.0, 0.0, 2.0, 1.0};
    s.q = {0.0, 0.0, 1.0, 0.0};
    s.z_b = {0.0, 0.0, 0.0, 0.5};
    const auto b = energy_budget(s, ScalarState{1.0, kAbsent, 1.0, 1.0});
    CHECK(b.zeta_hat[0] == doctest::Approx(g / 2.0));
    CHECK(b.zeta_hat[1] == 0.0);
    CHECK(b.zeta_hat[2] == doctest::Approx(2.0 * 0.25 / 2.0 + g * 4.0 / 2.0));
    CHECK(b.zeta_hat[3] == doctest::Approx(g / 2.0 + g * 0.5));
    CHECK(std::isnan(b.zeta_tilde[1]));
    CHECK(b.zeta_tilde[2] == doctest::Approx(0.25 / 2.0 + g / 2.0));
    CHECK(b.G.size() == 5);
    CHECK(std::abs(b.G.front()) < 1e-14);
    CHECK(std::abs(b.G.back()) < 1e-14);
    CHECK(energy_budget(s).zeta_tilde.empty());
}

TEST_CASE("property: cell energies match the kinetic energy integral") {
    Gen g(53);
    for (int trial = 0; trial < 30; ++trial) {
        const Grid1D grid(g.integer(3, 20), 0.0, 1.0, BoundaryKind::ReflectiveWall);
        SWState s = random_state(g, grid, kSemi, true, true);
        s = sv_forward_step(s, sv_cfl(s, 0.0, 0.9));
        const auto b = energy_budget(s);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double kinetic =
                gibbs_moments(GibbsEquilibrium(s.H[i], s.velocity(i), s.profile, s.gravity)).energy;
            const double ref = kinetic + s.gravity * s.H[i] * s.z_b[i];
            CHECK(b.zeta_hat[i] == doctest::Approx(ref).epsilon(1e-10).scale(1e-10));
        }
    }
}

TEST_CASE("dam break energy is non-increasing") {
    const Grid1D grid(100, 0.0, 1.0, BoundaryKind::ReflectiveWall);
    SWState s = dam_break(grid, 2.0, 0.5, 0.5);
    double e = total_energy(s);
    for (int n = 0; n < 300; ++n) {
        s = sv_forward_step(s, sv_cfl(s, 0.0, 0.95));
        const double next = total_energy(s);
        CHECK(next - e <= 1e-10);
        e = next;
    }
}

TEST_CASE("property: cell-wise observer entropy inequality on flat bottoms") {
    Gen g(59);
    for (int trial = 0; trial < 20; ++trial) {
        const Grid1D grid(g.integer(10, 60), 0.0, 1.0, BoundaryKind::ReflectiveWall);
        SWState s = random_state(g, grid, kSemi, false, false);
        for (int n = 0; n < 10; ++n) {
            const double lam = g.uniform(0.0, 100.0);
            const auto obs = g.field(grid.size(), 0.1, 2.0);
            const double dt = sv_cfl(s, lam, g.uniform(0.2, 1.0));
            const auto before = energy_budget(s, obs);
            const SWState next = sv_observer_step(s, obs, lam, dt);
            const auto after = energy_budget(next);
            const double sigma = dt / grid.dx();
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!s.wet(i)) continue;
                const double bound = before.zeta_hat[i] - sigma * (before.G[i + 1] - before.G[i]) +
                                     lam * dt * (before.zeta_tilde[i] - before.zeta_hat[i]);
                CHECK(after.zeta_hat[i] - bound <= 1e-10);
            }
            s = next;
        }
    }
}

TEST_CASE("Thacker setup") {
    const ThackerParams p;
    const auto setup = thacker_setup(p, 400);
    const Grid1D& grid = setup.truth.grid;
    CHECK(grid.bc() == BoundaryKind::ReflectiveWall);
    CHECK(thacker_bathymetry(p, 2.0) == doctest::Approx(-0.5));
    CHECK(thacker_truth_depth(p, 2.0) == doctest::Approx(0.375));
    CHECK(thacker_truth_depth(p, 2.0) == doctest::Approx(0.5 * (1.0 - 0.25)));
    const double exact_mass = 4.0 / 3.0 * p.h_m * p.a;
    CHECK(exact_mass == doctest::Approx(2.0 / 3.0));
    CHECK(setup.observer.mass() == doctest::Approx(exact_mass).epsilon(1e-4));
    CHECK(setup.truth.mass() == doctest::Approx(exact_mass).epsilon(1e-4));
    const double by_quadrature =
        integrate([&](double x) { return std::max(0.0, -thacker_bathymetry(p, x)); }, 0.0, 4.0, {1.0, 3.0});
    CHECK(by_quadrature == doctest::Approx(exact_mass).epsilon(1e-12));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(setup.truth.q[i] == 0.0);
        CHECK(setup.observer.q[i] == 0.0);
        CHECK(setup.observer.H[i] == doctest::Approx(std::max(0.0, -setup.observer.z_b[i])));
    }
    // The truth surface is planar where wet.
    std::vector<double> slopes;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto& t = setup.truth;
        if (t.H[i] > 0.0 && t.H[i - 1] > 0.0) {
            slopes.push_back((t.H[i] + t.z_b[i] - t.H[i - 1] - t.z_b[i - 1]) / grid.dx());
        }
    }
    REQUIRE(!slopes.empty());
    for (double k : slopes) CHECK(k == doctest::Approx(slopes.front()).epsilon(1e-9));
    CHECK_THROWS_AS(thacker_setup({1.0, 1.5, 0.5}, 10), std::invalid_argument);
    CHECK_THROWS_AS(thacker_setup({-1.0, 4.0, 0.5}, 10), std::invalid_argument);
}

TEST_CASE("analytic Thacker oscillation") {
    const ThackerParams p;
    const double g = 9.81;
    const double period = 2.0 * 3.141592653589793 * p.a / std::sqrt(2.0 * g * p.h_m);
    for (double x = 0.05; x < 4.0; x += 0.1) {
        CHECK(thacker_exact_depth(p, x, 0.0, g) == doctest::Approx(thacker_truth_depth(p, x)).scale(1.0));
        CHECK(thacker_exact_depth(p, x, period, g) ==
              doctest::Approx(thacker_truth_depth(p, x)).epsilon(1e-12).scale(1.0));
    }
    for (double t : {0.3, 0.7, 1.9}) {
        const double m = integrate([&](double x) { return thacker_exact_depth(p, x, t, g); }, 0.0, 4.0,
                                   {0.5, 1.0, 1.5, 2.5, 3.0, 3.5});
        CHECK(m == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    }
    // The solver converges toward it.
    std::vector<double> errs;
    for (int n : {100, 200, 400}) {
        SWState s = thacker_setup(p, n).truth;
        double t = 0.0;
        while (t < 1.0) {
            const double dt = std::min(sv_cfl(s, 0.0, 0.9), 1.0 - t);
            s = sv_forward_step(s, dt);
            t += dt;
        }
        double e = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            e += std::abs(s.H[i] - thacker_exact_depth(p, s.grid.center(i), 1.0, g)) * s.grid.dx();
        }
        errs.push_back(e);
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
}
