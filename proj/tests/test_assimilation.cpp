#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "kinobs/assimilation.hpp"
#include "kinobs/errors.hpp"
#include "support.hpp"

using namespace kinobs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

InitialCondition box(double value, double x0, double x1) {
    InitialCondition ic;
    ic.kind = IcKind::Box;
    ic.value = value;
    ic.x0 = x0;
    ic.x1 = x1;
    return ic;
}

InitialCondition sine(double offset, double amplitude, double k = 1.0) {
    InitialCondition ic;
    ic.kind = IcKind::Sine;
    ic.offset = offset;
    ic.amplitude = amplitude;
    ic.wavenumber = k;
    return ic;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
    return v;
}

// Box truth, displaced lower box observer, 30 observation times over [0, 2].
RunConfig burgers_twin(BurgersObserverMode mode) {
    RunConfig c;
    c.model = ModelKind::Burgers;
    c.observer_mode = mode;
    c.t_final = 2.0;
    c.n_cells = 100;
    c.bc = BoundaryKind::DirichletZero;
    c.truth = box(1.0, 0.125, 0.25);
    c.observer = box(0.75, 1.0 / 12.0, 1.0 / 6.0);
    c.gain.lambda = 100.0;
    c.gain.temporal = TemporalMode::AtObservationTimesOnly;
    c.obs_times = linspace(0.0, 2.0, 30);
    return c;
}

RunConfig advection_twin(double lambda, double dt, int steps) {
    RunConfig c;
    c.model = ModelKind::Advection;
    c.advection_speed = 1.0;
    c.n_cells = 200;
    c.bc = BoundaryKind::Periodic;
    c.truth = sine(0.5, 0.2, 2.0);
    c.observer = sine(1.5, 0.7, 1.0);
    c.gain.lambda = lambda;
    c.gain.temporal = TemporalMode::EveryStep;
    c.dt_fixed = dt;
    c.t_final = dt * steps;
    return c;
}

bool same_result(const RunResult& a, const RunResult& b) {
    return a.errors.times == b.errors.times && a.errors.l1_rel == b.errors.l1_rel &&
           a.errors.sobolev == b.errors.sobolev && a.final_observer == b.final_observer &&
           a.final_truth == b.final_truth && a.dt_history == b.dt_history && a.energy == b.energy;
}

std::string validation_message(const RunConfig& c) {
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("identical initial conditions give zero error") {
    // bgk observers evolve a different scheme from the collapsed truth
    for (auto mode : {BurgersObserverMode::Collapse, BurgersObserverMode::Macroscopic}) {
        RunConfig c = burgers_twin(mode);
        c.observer = c.truth;
        c.gain.lambda = 0.0;
        const RunResult r = run_twin(c);
        REQUIRE(r.errors.size() > 2);
        CHECK(*std::max_element(r.errors.l1_abs.begin(), r.errors.l1_abs.end()) == 0.0);
        CHECK(*std::max_element(r.errors.sobolev.begin(), r.errors.sobolev.end()) == 0.0);
        CHECK(r.final_observer == r.final_truth);
    }
}

TEST_CASE("zero gain reproduces a forward run of the observer") {
    RunConfig c = burgers_twin(BurgersObserverMode::Collapse);
    c.gain.lambda = 0.0;
    c.dt_fixed = 0.004;
    const RunResult r = run_twin(c);
    RunConfig forward = c;
    forward.truth = c.observer;
    forward.observer = c.truth;  // same velocity grid
    CHECK(r.final_observer == record_truth(forward).states.back());
    CHECK(r.final_truth == record_truth(c).states.back());
    CHECK(r.errors.l1_rel.back() > 0.1);
}

TEST_CASE("record_truth covers the run") {
    const RunConfig c = burgers_twin(BurgersObserverMode::Bgk);
    const Trajectory traj = record_truth(c);
    const RunResult r = run_twin(c);
    REQUIRE(traj.times.size() == traj.states.size());
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(c.t_final).epsilon(1e-12));
    CHECK(traj.states.size() == r.steps + 1);
    CHECK(traj.states.back() == r.final_truth);
    CHECK(std::is_sorted(traj.times.begin(), traj.times.end()));
}

TEST_CASE("Burgers twin beats the unassimilated baseline at t = 0.5") {
    for (auto mode : {BurgersObserverMode::Bgk, BurgersObserverMode::Collapse}) {
        RunConfig c = burgers_twin(mode);
        c.t_final = 0.5;
        const double with_gain = run_twin(c).errors.l1_rel.back();
        c.gain.lambda = 0.0;
        const double baseline = run_twin(c).errors.l1_rel.back();
        CHECK(with_gain < 0.5 * baseline);
    }
}

TEST_CASE("runs are deterministic") {
    RunConfig c = burgers_twin(BurgersObserverMode::Bgk);
    c.noise = NoiseSpec{};
    c.noise->epsilon = 0.02;
    CHECK(same_result(run_twin(c), run_twin(c)));
    RunConfig sw;
    sw.model = ModelKind::ShallowWater;
    sw.bc = BoundaryKind::ReflectiveWall;
    sw.n_cells = 60;
    sw.t_final = 0.05;
    sw.truth.kind = IcKind::DamBreak;
    sw.truth.h_left = 2.0;
    sw.truth.h_right = 1.0;
    sw.truth.x0 = 0.5;
    sw.observer = sw.truth;
    sw.observer.h_left = 1.5;
    sw.gain.lambda = 10.0;
    sw.gain.temporal = TemporalMode::EveryStep;
    CHECK(same_result(run_twin(sw), run_twin(sw)));
}

TEST_CASE("gain masking leaves upstream cells untouched") {
    RunConfig c = advection_twin(50.0, 0.002, 150);
    c.bc = BoundaryKind::DirichletZero;
    c.gain.mask = MaskInterval{0.5, 0.7};
    const RunResult nudged = run_twin(c);
    c.gain.lambda = 0.0;
    const RunResult free = run_twin(c);
    const Grid1D grid = c.grid();
    bool changed_downstream = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.center(i) < 0.5) {
            CHECK(nudged.final_observer[i] == free.final_observer[i]);
        } else if (nudged.final_observer[i] != free.final_observer[i]) {
            changed_downstream = true;
        }
    }
    CHECK(changed_downstream);
}

TEST_CASE("final error does not grow with the gain under full exact observation") {
    RunConfig c = burgers_twin(BurgersObserverMode::Collapse);
    c.gain.temporal = TemporalMode::EveryStep;
    c.obs_times.clear();
    c.dt_fixed = 0.002;
    c.t_final = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {0.0, 1.0, 3.0, 10.0, 30.0, 100.0}) {
        c.gain.lambda = lam;
        const double err = run_twin(c).errors.l1_rel.back();
        CHECK(err <= prev);
        prev = err;
    }
}

TEST_CASE("advection error matches the discrete representation formula") {
    for (double lam : {5.0, 20.0}) {
        const double dt = 1e-4 / lam;
        const RunConfig c = advection_twin(lam, dt, 100);
        const RunResult r = run_twin(c);
        REQUIRE(r.steps == 100);
        const Grid1D grid = c.grid();
        const std::size_t n = grid.size();
        // e^{n+1}_i = e^n_i - nu (e^n_i - e^n_{i-1}) - lambda dt e^n_i, periodic
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.center(i);
            e[i] = (1.5 + 0.7 * std::sin(kTwoPi * x)) - (0.5 + 0.2 * std::sin(kTwoPi * 2.0 * x));
        }
        const double nu = dt / grid.dx();
        for (int step = 0; step < 100; ++step) {
            std::vector<double> next(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double left = e[(i + n - 1) % n];
                next[i] = e[i] - nu * (e[i] - left) - lam * dt * e[i];
            }
            e = next;
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double got = r.final_observer[i] - r.final_truth[i];
            worst = std::max(worst, std::abs(got - e[i]) / std::abs(e[i]));
        }
        CHECK(worst < 1e-10);
        // the error stays positive, so its L1 norm decays like (1 - lambda dt)^n
        const double ratio = r.errors.l1_abs.back() / r.errors.l1_abs.front();
        CHECK(ratio == doctest::Approx(std::pow(1.0 - lam * dt, 100)).epsilon(1e-12));
        CHECK(ratio == doctest::Approx(std::exp(-lam * r.t_end)).epsilon(1e-6));
    }
}

TEST_CASE("decay study rates") {
    SUBCASE("linear advection") {
        const DecayStudy d = decay_study(advection_twin(10.0, 0.002, 100));
        CHECK(d.relative_deviation < 0.05);
        CHECK(std::abs(d.rate - 10.0) < 0.5);
        CHECK_FALSE(d.floor_limited);
    }
    SUBCASE("no gain") {
        const DecayStudy d = decay_study(advection_twin(0.0, 0.002, 100));
        CHECK(std::abs(d.rate) < 1e-8);
    }
    SUBCASE("smooth Burgers before the shock") {
        RunConfig c;
        c.model = ModelKind::Burgers;
        c.observer_mode = BurgersObserverMode::Collapse;
        c.bc = BoundaryKind::Periodic;
        c.n_cells = 200;
        c.n_xi = 128;
        c.truth = sine(0.0, 0.5);
        c.observer = sine(0.2, 0.3);
        c.gain.lambda = 50.0;
        c.t_final = 0.25;  // shock forms at 1 / (pi)
        const DecayStudy d = decay_study(c);
        CHECK(d.relative_deviation < 0.10);
    }
}

TEST_CASE("gain sweeps") {
    RunConfig c = burgers_twin(BurgersObserverMode::Collapse);
    c.t_final = 0.5;
    const std::vector<double> lambdas{30.0, 1.0, 10.0, 0.0};
    const auto seq = sweep_lambda(c, lambdas, 1);
    const auto par = sweep_lambda(c, lambdas, 3);
    REQUIRE(seq.size() == lambdas.size());
    REQUIRE(par.size() == lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        CHECK(seq[k].lambda == lambdas[k]);
        CHECK(seq[k].ok);
        CHECK(par[k].lambda == seq[k].lambda);
        CHECK(par[k].final_l1_rel == seq[k].final_l1_rel);
        CHECK(par[k].final_sobolev == seq[k].final_sobolev);
        RunConfig single = c;
        single.gain.lambda = lambdas[k];
        CHECK(seq[k].final_l1_rel == run_twin(single).errors.l1_rel.back());
    }

    SUBCASE("failed runs become sentinels") {
        RunConfig fixed = c;
        fixed.dt_fixed = 0.004;  // violates the augmented CFL bound once lambda is large
        const auto s = sweep_lambda(fixed, {1.0, 1000.0, 10.0}, 2);
        REQUIRE(s.size() == 3);
        CHECK(s[0].ok);
        CHECK(s[2].ok);
        CHECK_FALSE(s[1].ok);
        CHECK(std::isnan(s[1].final_l1_rel));
        CHECK(std::isnan(s[1].final_sobolev));
        CHECK(!s[1].message.empty());
        fixed.gain.lambda = 1000.0;
        CHECK_THROWS_AS(run_twin(fixed), SolverError);
    }
}

TEST_CASE("configuration validation names the field") {
    const RunConfig base = burgers_twin(BurgersObserverMode::Bgk);
    CHECK(validation_message(base).empty());
    auto expect = [&](auto mutate, const std::string& field) {
        RunConfig c = base;
        mutate(c);
        const std::string msg = validation_message(c);
        CHECK_MESSAGE(msg.find(field) != std::string::npos, field, ": ", msg);
        CHECK_THROWS_AS(run_twin(c), std::invalid_argument);
    };
    expect([](RunConfig& c) { c.t_final = 0.0; }, "model.t_final");
    expect([](RunConfig& c) { c.cfl_safety = 1.5; }, "model.cfl_safety");
    expect([](RunConfig& c) { c.gain.lambda = -1.0; }, "gain.lambda");
    expect([](RunConfig& c) { c.n_cells = 1; }, "grid.n_cells");
    expect([](RunConfig& c) { c.x_max = c.x_min; }, "grid.x_max");
    expect([](RunConfig& c) { c.obs_times = {0.5, 0.2}; }, "observations.times");
    expect([](RunConfig& c) { c.obs_times.clear(); }, "observations.times");
    expect([](RunConfig& c) {
        c.gain.temporal = TemporalMode::Mollified;
        c.gain.sigma = 0.0;
    }, "gain.sigma");
    expect([](RunConfig& c) { c.obs_interpolate = true; }, "observations.interpolate");
    expect([](RunConfig& c) { c.bc = BoundaryKind::ReflectiveWall; }, "grid.bc");
    expect([](RunConfig& c) { c.sobolev_order = 1.0; }, "output.sobolev_order");
    expect([](RunConfig& c) { c.gain.mask = MaskInterval{0.6, 0.4}; }, "gain.mask");
    expect([](RunConfig& c) {
        c.model = ModelKind::Advection;
        c.advection_speed = 0.0;
    }, "model.speed");
    expect([](RunConfig& c) {
        c.model = ModelKind::ShallowWater;
        c.bc = BoundaryKind::DirichletZero;
    }, "grid.bc");
    expect([](RunConfig& c) {
        c.noise = NoiseSpec{};
        c.noise->alpha = 2.0;
    }, "noise");
}

TEST_CASE("initial conditions and bathymetry on the grid") {
    const Grid1D grid(8, 0.0, 1.0, BoundaryKind::Periodic);
    const std::vector<double> flat(8, 0.0);
    const auto b = evaluate_ic(box(2.0, 0.25, 0.5), grid, flat);
    CHECK(b == std::vector<double>{0, 0, 2, 2, 0, 0, 0, 0});
    const auto s = evaluate_ic(sine(1.0, 0.5, 2.0), grid, flat);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(s[i] == doctest::Approx(1.0 + 0.5 * std::sin(kTwoPi * 2.0 * grid.center(i))));
    }
    InitialCondition dam;
    dam.kind = IcKind::DamBreak;
    dam.h_left = 3.0;
    dam.h_right = 1.0;
    dam.x0 = 0.5;
    CHECK(evaluate_ic(dam, grid, flat) == std::vector<double>{3, 3, 3, 3, 1, 1, 1, 1});
    InitialCondition lake;
    lake.kind = IcKind::Lake;
    lake.eta = 0.3;
    std::vector<double> z{0.0, 0.1, 0.5, 0.2, -0.1, 0.3, 0.4, 0.0};
    const auto h = evaluate_ic(lake, grid, z);
    for (std::size_t i = 0; i < 8; ++i) CHECK(h[i] == doctest::Approx(std::max(0.0, 0.3 - z[i])));
    CHECK_THROWS_AS(evaluate_ic(lake, grid, std::vector<double>(3, 0.0)), std::invalid_argument);

    RunConfig c;
    c.model = ModelKind::ShallowWater;
    c.bathymetry = BathymetryKind::Thacker;
    c.n_cells = 40;
    c.x_max = 4.0;
    c.bc = BoundaryKind::ReflectiveWall;
    const Grid1D g = c.grid();
    const auto zb = evaluate_bathymetry(c, g);
    InitialCondition truth;
    truth.kind = IcKind::ThackerTruth;
    InitialCondition obs;
    obs.kind = IcKind::ThackerObserver;
    const auto ht = evaluate_ic(truth, g, zb, c.thacker);
    const auto ho = evaluate_ic(obs, g, zb, c.thacker);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = g.center(i) - 2.0;
        CHECK(zb[i] == doctest::Approx(0.5 * (d * d - 1.0)));
        CHECK(ht[i] == doctest::Approx(thacker_truth_depth(c.thacker, g.center(i))));
        CHECK(ho[i] == doctest::Approx(std::max(0.0, -zb[i])));
    }
}

TEST_CASE("shallow-water twins") {
    SUBCASE("lake at rest stays at rest under nudging") {
        RunConfig c;
        c.model = ModelKind::ShallowWater;
        c.bathymetry = BathymetryKind::Thacker;
        c.n_cells = 80;
        c.x_max = 4.0;
        c.bc = BoundaryKind::ReflectiveWall;
        c.t_final = 0.5;
        c.truth.kind = IcKind::Lake;
        c.truth.eta = 0.0;
        c.observer = c.truth;
        c.gain.lambda = 10.0;
        c.gain.temporal = TemporalMode::EveryStep;
        const RunResult r = run_twin(c);
        CHECK(*std::max_element(r.errors.l1_abs.begin(), r.errors.l1_abs.end()) < 1e-12);
        for (double q : r.final_observer_q) CHECK(std::abs(q) < 1e-12);
    }
    SUBCASE("Thacker observer approaches the truth") {
        RunConfig c;
        c.model = ModelKind::ShallowWater;
        c.bathymetry = BathymetryKind::Thacker;
        c.n_cells = 100;
        c.x_max = 4.0;
        c.bc = BoundaryKind::ReflectiveWall;
        c.t_final = 3.0;
        c.truth.kind = IcKind::ThackerTruth;
        c.observer.kind = IcKind::ThackerObserver;
        c.gain.lambda = 10.0;
        c.gain.temporal = TemporalMode::EveryStep;
        c.gain.mask = MaskInterval{1.5, 2.5};
        c.obs_mask = c.gain.mask;
        c.obs_times.clear();
        for (int k = 0; k <= 60; ++k) c.obs_times.push_back(0.05 * k);
        c.obs_interpolate = true;
        const RunResult nudged = run_twin(c);
        c.gain.lambda = 0.0;
        const RunResult free = run_twin(c);
        CHECK(nudged.errors.l1_rel.back() < 0.5 * free.errors.l1_rel.back());
        for (double h : nudged.final_observer) CHECK(h >= 0.0);
    }
    SUBCASE("nudged dam break stays nonnegative") {
        RunConfig c;
        c.model = ModelKind::ShallowWater;
        c.bc = BoundaryKind::ReflectiveWall;
        c.n_cells = 100;
        c.t_final = 0.1;
        c.truth.kind = IcKind::DamBreak;
        c.truth.h_left = 2.0;
        c.truth.h_right = 1.0;
        c.truth.x0 = 0.5;
        c.observer = c.truth;
        c.observer.h_left = 1.5;
        c.gain.lambda = 100.0;
        c.gain.temporal = TemporalMode::EveryStep;
        const RunResult r = run_twin(c);
        for (double h : r.final_observer) CHECK(h >= 0.0);
        CHECK(r.errors.l1_rel.back() < r.errors.l1_rel.front());
    }
}
