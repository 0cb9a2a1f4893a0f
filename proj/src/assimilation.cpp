#include "kinobs/assimilation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "kinobs/errors.hpp"

namespace kinobs {

namespace {

template <typename Enum, std::size_t N>
Enum lookup(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
            const char* what) {
    for (const auto& [name, value] : table) {
        if (name == s) return value;
    }
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum v, const std::pair<std::string_view, Enum> (&table)[N]) {
    for (const auto& [name, value] : table) {
        if (value == v) return name;
    }
    return "unknown";
}

constexpr std::pair<std::string_view, ModelKind> kModels[] = {
    {"burgers", ModelKind::Burgers},
    {"shallow_water", ModelKind::ShallowWater},
    {"advection", ModelKind::Advection},
};
constexpr std::pair<std::string_view, TemporalMode> kTemporal[] = {
    {"every_step", TemporalMode::EveryStep},
    {"observation_times", TemporalMode::AtObservationTimesOnly},
    {"mollified", TemporalMode::Mollified},
};
constexpr std::pair<std::string_view, BurgersObserverMode> kObserverModes[] = {
    {"bgk", BurgersObserverMode::Bgk},
    {"collapse", BurgersObserverMode::Collapse},
    {"macroscopic", BurgersObserverMode::Macroscopic},
};
constexpr std::pair<std::string_view, BathymetryKind> kBathymetry[] = {
    {"flat", BathymetryKind::Flat},
    {"thacker", BathymetryKind::Thacker},
    {"bump", BathymetryKind::Bump},
};
constexpr std::pair<std::string_view, IcKind> kIcs[] = {
    {"constant", IcKind::Constant},
    {"box", IcKind::Box},
    {"sine", IcKind::Sine},
    {"dam_break", IcKind::DamBreak},
    {"lake", IcKind::Lake},
    {"thacker_truth", IcKind::ThackerTruth},
    {"thacker_observer", IcKind::ThackerObserver},
};

void require(bool ok, const char* field, const std::string& why) {
    if (!ok) throw std::invalid_argument(std::string(field) + ": " + why);
}

// Per-cell gain: 1 inside both the gain mask and the observed cells.
std::vector<double> gain_weights(const RunConfig& cfg, const Grid1D& grid) {
    const auto g = cell_mask(grid, cfg.gain.mask);
    const auto o = cell_mask(grid, cfg.obs_mask);
    std::vector<double> w(grid.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (g[i] && o[i]) ? 1.0 : 0.0;
    return w;
}

double max_weight(const std::vector<double>& w) {
    double m = 0.0;
    for (double v : w) m = std::max(m, v);
    return m;
}

// Observation times falling in the step [t0, t1); the final step also
// takes t1 itself.
bool observation_in_step(const std::vector<double>& times, double t0, double t1, bool last,
                         std::size_t& next, std::vector<std::size_t>* hits = nullptr) {
    bool any = false;
    while (next < times.size() && (times[next] < t1 || (last && times[next] <= t1))) {
        if (times[next] >= t0) {
            any = true;
            if (hits) hits->push_back(next);
        }
        ++next;
    }
    return any;
}

std::vector<double> block_average(const std::vector<double>& fine, std::size_t factor) {
    std::vector<double> out(fine.size() / factor, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < factor; ++k) s += fine[i * factor + k];
        out[i] = s / static_cast<double>(factor);
    }
    return out;
}

struct StepClock {
    double dt;
    double t_final;
    std::size_t n_steps;

    StepClock(double dt_, double t_final_) : dt(dt_), t_final(t_final_) {
        if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw SolverError("time step is not positive");
        n_steps = static_cast<std::size_t>(std::ceil(t_final_ / dt_ - 1e-9));
        if (n_steps == 0) n_steps = 1;
    }
    double start(std::size_t n) const { return static_cast<double>(n) * dt; }
    double end(std::size_t n) const {
        return n + 1 == n_steps ? t_final : static_cast<double>(n + 1) * dt;
    }
};

class Recorder {
public:
    Recorder(RunResult& r, const Grid1D& grid, double s, int every)
        : r_(r), grid_(grid), s_(s), every_(static_cast<std::size_t>(every)) {
        r_.errors.sobolev_order = s;
    }

    bool due(std::size_t step, bool last) const { return last || step % every_ == 0; }

    void record(double t, const ScalarState& observer, const ScalarState& truth, double energy,
                double dt) {
        std::vector<double> diff(observer.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = observer[i] - truth[i];
        r_.errors.times.push_back(t);
        r_.errors.l1_rel.push_back(l1_relative(observer, truth, grid_.dx()));
        r_.errors.l1_abs.push_back(l1_absolute(observer, truth, grid_.dx()));
        r_.errors.l2_abs.push_back(l2_absolute(observer, truth, grid_.dx()));
        r_.errors.sobolev.push_back(sobolev_seminorm(diff, s_, grid_));
        r_.energy.push_back(energy);
        r_.dt.push_back(dt);
    }

private:
    RunResult& r_;
    const Grid1D& grid_;
    double s_;
    std::size_t every_;
};

// ---------------------------------------------------------------- scalar

enum class ScalarScheme { Bgk, Collapse, Macroscopic, Linear };

class ScalarRunner {
public:
    ScalarRunner(ScalarScheme scheme, const Grid1D& grid, const XiGrid& xi, const ScalarState& u0)
        : scheme_(scheme), grid_(grid), xi_(xi), f_(represent(u0)) {}

    ScalarState macro() const {
        if (scheme_ == ScalarScheme::Bgk || scheme_ == ScalarScheme::Collapse) {
            return f_.macroscopic(xi_);
        }
        return f_.values();
    }

    KineticField represent(const ScalarState& u) const {
        ScalarState clean = u;
        for (double& v : clean) {
            if (is_absent(v)) v = 0.0;
        }
        if (scheme_ == ScalarScheme::Bgk || scheme_ == ScalarScheme::Collapse) {
            return equilibrium_field(clean, xi_);
        }
        KineticField f(clean.size(), 1);
        for (std::size_t i = 0; i < clean.size(); ++i) f(i, 0) = clean[i];
        return f;
    }

    const KineticField& state() const { return f_; }

    void relax_step(const KineticField& target, double lambda, double dt,
                    std::span<const double> w) {
        if (scheme_ == ScalarScheme::Macroscopic) {
            ScalarState obs;
            if (lambda > 0.0) obs = target.values();
            const ScalarState u = step_macroscopic_burgers(f_.values(), obs, grid_, lambda, dt, w);
            for (std::size_t i = 0; i < u.size(); ++i) f_(i, 0) = u[i];
        } else {
            f_ = step_kinetic_transport(f_, target, grid_, xi_, lambda, dt, w);
        }
    }

    void add_forcing(const KineticField& target, const KineticField& snapshot, double coeff,
                     std::span<const double> w) {
        for (std::size_t i = 0; i < f_.n_cells(); ++i) {
            const double c = coeff * w[i];
            if (c == 0.0) continue;
            for (std::size_t j = 0; j < f_.n_xi(); ++j) f_(i, j) += c * (target(i, j) - snapshot(i, j));
        }
    }

    void finish() {
        if (scheme_ == ScalarScheme::Collapse) f_ = equilibrium_field(f_.macroscopic(xi_), xi_);
    }

private:
    ScalarScheme scheme_;
    const Grid1D& grid_;
    const XiGrid& xi_;
    KineticField f_;
};

struct ScalarSetup {
    Grid1D grid;
    XiGrid xi;
    ScalarScheme truth_scheme;
    ScalarScheme observer_scheme;
    ScalarState u_truth;
    ScalarState u_observer;
    std::vector<double> noise;
    double dt;
};

ScalarSetup scalar_setup(const RunConfig& cfg) {
    cfg.validate();
    const Grid1D grid = cfg.grid();
    const std::vector<double> flat(grid.size(), 0.0);
    ScalarState ut = evaluate_ic(cfg.truth, grid, flat);
    ScalarState uo = evaluate_ic(cfg.observer, grid, flat);
    std::vector<double> noise;
    if (cfg.noise) noise = noise_field(*cfg.noise, grid);

    if (cfg.model == ModelKind::Advection) {
        const XiGrid xi = XiGrid::single(cfg.advection_speed);
        const double speed = std::abs(cfg.advection_speed);
        const double lam = cfg.gain.temporal == TemporalMode::Mollified ? 0.0 : cfg.gain.lambda;
        const double dt = cfg.dt_fixed ? *cfg.dt_fixed
                                       : cfg.cfl_safety / (lam + speed / grid.dx());
        return {grid, xi, ScalarScheme::Linear, ScalarScheme::Linear, ut, uo, noise, dt};
    }

    double lo = 0.0;
    double hi = 0.0;
    for (const auto* u : {&ut, &uo}) {
        for (double v : *u) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!noise.empty()) {
        const double amp = cfg.noise->amplitude();
        lo = std::min(lo, -amp);
        hi += amp;
    }
    const XiGrid xi = XiGrid::covering(lo, hi, cfg.xi_margin, cfg.n_xi);
    ScalarScheme obs_scheme = ScalarScheme::Bgk;
    ScalarScheme truth_scheme = ScalarScheme::Collapse;
    switch (cfg.observer_mode) {
        case BurgersObserverMode::Bgk: obs_scheme = ScalarScheme::Bgk; break;
        case BurgersObserverMode::Collapse: obs_scheme = ScalarScheme::Collapse; break;
        case BurgersObserverMode::Macroscopic:
            obs_scheme = ScalarScheme::Macroscopic;
            truth_scheme = ScalarScheme::Macroscopic;
            break;
    }
    const double lam = cfg.gain.temporal == TemporalMode::Mollified ? 0.0 : cfg.gain.lambda;
    // The macroscopic scheme only needs the largest |u|, which the nudged
    // update cannot exceed; the kinetic ones need the largest node speed.
    const double speed = obs_scheme == ScalarScheme::Macroscopic
                             ? std::max({std::abs(lo), std::abs(hi), 1e-12})
                             : xi.max_speed();
    const double dt = cfg.dt_fixed ? *cfg.dt_fixed
                                   : burgers_cfl(lam, grid.dx(), speed, cfg.cfl_safety);
    return {grid, xi, truth_scheme, obs_scheme, ut, uo, noise, dt};
}

ScalarState noisy_masked(const ScalarState& truth, const std::vector<double>& noise,
                         const std::vector<char>& mask, bool clip_nonnegative) {
    ScalarState obs(truth.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!mask[i]) {
            obs[i] = kAbsent;
            continue;
        }
        double v = truth[i] + (noise.empty() ? 0.0 : noise[i]);
        if (clip_nonnegative) v = std::max(0.0, v);
        obs[i] = v;
    }
    return obs;
}

ObservationSeries noisy_series(const RunConfig& cfg, const Trajectory& truth, const Grid1D& grid,
                               bool clip_nonnegative) {
    std::vector<double> times;
    for (double t : cfg.obs_times) {
        if (t <= truth.times.back()) times.push_back(t);
    }
    ObservationSeries clean = sample_observations(truth, grid, times, cfg.obs_mask, std::nullopt);
    std::vector<double> noise;
    if (cfg.noise) noise = noise_field(*cfg.noise, grid);
    ObservationSeries out(grid, clean.mask());
    for (std::size_t k = 0; k < clean.size(); ++k) {
        out.append(clean.times()[k], noisy_masked(clean.fields()[k], noise, clean.mask(),
                                                  clip_nonnegative));
    }
    return out;
}

Trajectory record_scalar_truth(const RunConfig& cfg) {
    const ScalarSetup s = scalar_setup(cfg);
    ScalarRunner truth(s.truth_scheme, s.grid, s.xi, s.u_truth);
    const StepClock clock(s.dt, cfg.t_final);
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(truth.macro());
    const KineticField none;
    for (std::size_t n = 0; n < clock.n_steps; ++n) {
        truth.relax_step(none, 0.0, clock.end(n) - clock.start(n), {});
        truth.finish();
        traj.times.push_back(clock.end(n));
        traj.states.push_back(truth.macro());
    }
    return traj;
}

// ---------------------------------------------------------------- shallow water

struct SWSetup {
    SWState truth;
    SWState observer;
    std::size_t refinement;
};

SWState make_sw_state(const RunConfig& cfg, const Grid1D& grid, const InitialCondition& ic) {
    SWState s(grid, cfg.profile, cfg.gravity, cfg.h_dry);
    s.z_b = evaluate_bathymetry(cfg, grid);
    s.H = evaluate_ic(ic, grid, s.z_b, cfg.thacker);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.H[i] < 0.0) throw std::invalid_argument("initial depth is negative");
        s.q[i] = s.H[i] >= s.h_dry ? s.H[i] * ic.u0 : 0.0;
    }
    return s;
}

SWSetup sw_setup(const RunConfig& cfg) {
    cfg.validate();
    const Grid1D grid = cfg.grid();
    const auto r = static_cast<std::size_t>(cfg.truth_refinement);
    const Grid1D fine(cfg.n_cells * cfg.truth_refinement, cfg.x_min, cfg.x_max, cfg.bc);
    return {make_sw_state(cfg, fine, cfg.truth), make_sw_state(cfg, grid, cfg.observer), r};
}

ScalarState coarse_depth(const SWState& truth, std::size_t r) {
    return r == 1 ? truth.H : block_average(truth.H, r);
}

Trajectory record_sw_truth(const RunConfig& cfg) {
    SWSetup s = sw_setup(cfg);
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(coarse_depth(s.truth, s.refinement));
    double t = 0.0;
    std::size_t step = 0;
    while (t < cfg.t_final) {
        double dt = cfg.dt_fixed ? *cfg.dt_fixed : sv_cfl(s.truth, 0.0, cfg.cfl_safety);
        const bool last = t + dt >= cfg.t_final - 1e-9 * dt;
        if (last) dt = cfg.t_final - t;
        s.truth = sv_forward_step(s.truth, dt);
        t = last ? cfg.t_final : t + dt;
        traj.times.push_back(t);
        traj.states.push_back(coarse_depth(s.truth, s.refinement));
        if (++step > 100000000) throw SolverError("truth run exceeded the step limit");
    }
    return traj;
}

[[noreturn]] void rethrow_with_step(std::size_t step, const std::exception& e) {
    throw SolverError("step " + std::to_string(step) + ": " + e.what());
}

}  // namespace

std::string_view to_string(ModelKind v) { return name_of(v, kModels); }
std::string_view to_string(TemporalMode v) { return name_of(v, kTemporal); }
std::string_view to_string(BurgersObserverMode v) { return name_of(v, kObserverModes); }
std::string_view to_string(BathymetryKind v) { return name_of(v, kBathymetry); }
std::string_view to_string(IcKind v) { return name_of(v, kIcs); }
ModelKind model_kind_from_string(std::string_view s) { return lookup(s, kModels, "model"); }
TemporalMode temporal_mode_from_string(std::string_view s) {
    return lookup(s, kTemporal, "temporal mode");
}
BurgersObserverMode observer_mode_from_string(std::string_view s) {
    return lookup(s, kObserverModes, "observer mode");
}
BathymetryKind bathymetry_kind_from_string(std::string_view s) {
    return lookup(s, kBathymetry, "bathymetry");
}
IcKind ic_kind_from_string(std::string_view s) { return lookup(s, kIcs, "initial condition"); }

void RunConfig::validate() const {
    require(t_final > 0.0 && std::isfinite(t_final), "model.t_final", "must be positive");
    require(cfl_safety > 0.0 && cfl_safety <= 1.0, "model.cfl_safety", "must lie in (0, 1]");
    require(gravity > 0.0, "model.g", "must be positive");
    require(h_dry >= 0.0, "model.h_dry", "must be nonnegative");
    require(!dt_fixed || *dt_fixed > 0.0, "model.dt", "must be positive");
    require(n_cells >= 2, "grid.n_cells", "must be at least 2");
    require(x_max > x_min, "grid.x_max", "must exceed grid.x_min");
    require(n_xi >= 2, "grid.n_xi", "must be at least 2");
    require(xi_margin > 0.0, "grid.xi_margin", "must be positive");
    require(truth_refinement >= 1, "truth.refinement", "must be at least 1");
    require(record_every >= 1, "output.record_every", "must be at least 1");
    require(sobolev_order >= 0.0 && sobolev_order < 1.0, "output.sobolev_order", "must lie in [0, 1)");
    require(gain.lambda >= 0.0 && std::isfinite(gain.lambda), "gain.lambda", "must be nonnegative");
    if (gain.temporal == TemporalMode::Mollified) {
        require(gain.sigma > 0.0, "gain.sigma", "must be positive in mollified mode");
        require(model != ModelKind::ShallowWater, "gain.temporal",
                "mollified sampling is only available for scalar models");
        require(!obs_interpolate, "observations.interpolate", "does not combine with mollified sampling");
    }
    if (gain.mask) require(gain.mask->a <= gain.mask->b, "gain.mask", "needs a <= b");
    if (obs_mask) require(obs_mask->a <= obs_mask->b, "observations.mask", "needs a <= b");
    for (std::size_t k = 0; k < obs_times.size(); ++k) {
        require(obs_times[k] >= 0.0 && std::isfinite(obs_times[k]), "observations.times",
                "must be nonnegative");
        if (k > 0) require(obs_times[k] > obs_times[k - 1], "observations.times", "must increase strictly");
    }
    if (gain.lambda > 0.0 && gain.temporal != TemporalMode::EveryStep) {
        require(!obs_times.empty(), "observations.times", "required when the gain is sampled in time");
    }
    if (obs_interpolate) {
        require(obs_times.size() >= 2, "observations.interpolate", "needs at least two observation times");
        require(gain.temporal == TemporalMode::EveryStep, "observations.interpolate",
                "requires gain.temporal = every_step");
    }
    if (noise) {
        try {
            noise->validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("noise: ") + e.what());
        }
    }
    if (model == ModelKind::ShallowWater) {
        require(bc != BoundaryKind::DirichletZero, "grid.bc", "shallow water needs wall or periodic");
    } else {
        require(bc != BoundaryKind::ReflectiveWall, "grid.bc", "scalar models need dirichlet_zero or periodic");
        require(truth_refinement == 1, "truth.refinement", "only available for shallow water");
    }
    if (model == ModelKind::Advection) {
        require(advection_speed != 0.0 && std::isfinite(advection_speed), "model.speed", "must be nonzero");
    }
    if (bathymetry == BathymetryKind::Thacker) {
        require(thacker.a > 0.0 && thacker.h_m > 0.0, "model.thacker_a", "a and h_m must be positive");
        require(thacker.L > 2.0 * thacker.a, "model.thacker_L", "must exceed 2a");
    }
    if (bathymetry == BathymetryKind::Bump) require(bump.width > 0.0, "model.bump_width", "must be positive");
}

std::vector<double> evaluate_bathymetry(const RunConfig& cfg, const Grid1D& grid) {
    std::vector<double> z(grid.size(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double x = grid.center(i);
        switch (cfg.bathymetry) {
            case BathymetryKind::Flat: break;
            case BathymetryKind::Thacker: z[i] = thacker_bathymetry(cfg.thacker, x); break;
            case BathymetryKind::Bump: {
                const double d = (x - cfg.bump.center) / cfg.bump.width;
                z[i] = cfg.bump.height * std::max(0.0, 1.0 - d * d);
                break;
            }
        }
    }
    return z;
}

std::vector<double> evaluate_ic(const InitialCondition& ic, const Grid1D& grid,
                                const std::vector<double>& z_b, const ThackerParams& thacker) {
    if (z_b.size() != grid.size()) throw std::invalid_argument("bathymetry does not match the grid");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = grid.center(i);
        switch (ic.kind) {
            case IcKind::Constant: v[i] = ic.value; break;
            case IcKind::Box: v[i] = (x >= ic.x0 && x <= ic.x1) ? ic.value : ic.background; break;
            case IcKind::Sine:
                v[i] = ic.offset + ic.amplitude * std::sin(2.0 * std::numbers::pi * ic.wavenumber *
                                                           (x - grid.x_min()) / grid.length());
                break;
            case IcKind::DamBreak: v[i] = x < ic.x0 ? ic.h_left : ic.h_right; break;
            case IcKind::Lake: v[i] = std::max(0.0, ic.eta - z_b[i]); break;
            case IcKind::ThackerTruth: v[i] = thacker_truth_depth(thacker, x); break;
            case IcKind::ThackerObserver: v[i] = std::max(0.0, -z_b[i]); break;
        }
    }
    return v;
}

Trajectory record_truth(const RunConfig& cfg) {
    return cfg.model == ModelKind::ShallowWater ? record_sw_truth(cfg) : record_scalar_truth(cfg);
}

RunResult run_twin(const RunConfig& cfg) {
    return cfg.model == ModelKind::ShallowWater ? run_sv_twin(cfg) : run_burgers_twin(cfg);
}

RunResult run_burgers_twin(const RunConfig& cfg) {
    if (cfg.model == ModelKind::ShallowWater) throw std::invalid_argument("model: not a scalar model");
    const ScalarSetup s = scalar_setup(cfg);
    const Grid1D& grid = s.grid;
    ScalarRunner truth(s.truth_scheme, grid, s.xi, s.u_truth);
    ScalarRunner observer(s.observer_scheme, grid, s.xi, s.u_observer);
    const std::vector<double> w = gain_weights(cfg, grid);
    const std::vector<char> mask = cell_mask(grid, cfg.obs_mask);
    const double lambda = cfg.gain.lambda;
    const TemporalMode mode = cfg.gain.temporal;

    std::optional<ObservationSeries> series;
    if (cfg.obs_interpolate && lambda > 0.0) {
        series = noisy_series(cfg, record_scalar_truth(cfg), grid, false);
    }
    std::optional<Mollifier> mollifier;
    if (mode == TemporalMode::Mollified) mollifier.emplace(cfg.gain.sigma);
    std::vector<KineticField> snapshots(cfg.obs_times.size());
    std::vector<KineticField> targets(cfg.obs_times.size());

    RunResult result;
    Recorder rec(result, grid, cfg.sobolev_order, cfg.record_every);
    auto energy = [&](const ScalarState& u) {
        double e = 0.0;
        for (double v : u) e += 0.5 * v * v;
        return e * grid.dx();
    };
    ScalarState ut = truth.macro();
    ScalarState uo = observer.macro();
    rec.record(0.0, uo, ut, energy(uo), 0.0);

    const StepClock clock(s.dt, cfg.t_final);
    std::size_t next_obs = 0;
    const KineticField none;
    for (std::size_t n = 0; n < clock.n_steps; ++n) {
        const double t0 = clock.start(n);
        const double t1 = clock.end(n);
        const double h = t1 - t0;
        const bool last = n + 1 == clock.n_steps;
        try {
            if (lambda > 0.0 && mode == TemporalMode::Mollified) {
                std::vector<std::size_t> hits;
                observation_in_step(cfg.obs_times, t0, t1, last, next_obs, &hits);
                for (std::size_t k : hits) {
                    snapshots[k] = observer.state();
                    targets[k] = observer.represent(noisy_masked(ut, s.noise, mask, false));
                }
                observer.relax_step(none, 0.0, h, {});
                const MollifiedGain g =
                    mollified_step_gain(cfg.obs_times, *mollifier, t0, t1, mollifier->sigma());
                for (const MollifiedTerm& term : g.terms) {
                    if (snapshots[term.index].n_cells() == 0) continue;
                    observer.add_forcing(targets[term.index], snapshots[term.index],
                                         lambda * term.weight, w);
                }
            } else {
                bool active = false;
                ScalarState obs;
                if (lambda > 0.0) {
                    if (mode == TemporalMode::AtObservationTimesOnly) {
                        active = observation_in_step(cfg.obs_times, t0, t1, last, next_obs);
                        if (active) obs = noisy_masked(ut, s.noise, mask, false);
                    } else if (series) {
                        active = t0 >= series->times().front() && t0 <= series->times().back();
                        if (active) obs = interpolate_in_time(*series, t0);
                    } else {
                        active = true;
                        obs = noisy_masked(ut, s.noise, mask, false);
                    }
                }
                if (active) {
                    observer.relax_step(observer.represent(obs), lambda, h, w);
                } else {
                    observer.relax_step(none, 0.0, h, {});
                }
            }
            observer.finish();
            truth.relax_step(none, 0.0, h, {});
            truth.finish();
        } catch (const std::exception& e) {
            rethrow_with_step(n, e);
        }
        ut = truth.macro();
        uo = observer.macro();
        result.dt_history.push_back(h);
        if (rec.due(n + 1, last)) rec.record(t1, uo, ut, energy(uo), h);
    }
    result.steps = clock.n_steps;
    result.t_end = cfg.t_final;
    result.final_truth = ut;
    result.final_observer = uo;
    return result;
}

RunResult run_sv_twin(const RunConfig& cfg) {
    if (cfg.model != ModelKind::ShallowWater) throw std::invalid_argument("model: not shallow water");
    SWSetup s = sw_setup(cfg);
    const Grid1D grid = cfg.grid();
    const std::vector<double> w = gain_weights(cfg, grid);
    const std::vector<char> mask = cell_mask(grid, cfg.obs_mask);
    const double lambda = cfg.gain.lambda;
    const TemporalMode mode = cfg.gain.temporal;
    std::vector<double> noise;
    if (cfg.noise) noise = noise_field(*cfg.noise, grid);

    std::optional<ObservationSeries> series;
    if (cfg.obs_interpolate && lambda > 0.0) series = noisy_series(cfg, record_sw_truth(cfg), grid, true);
    const double lam_cfl = lambda * max_weight(w);

    RunResult result;
    Recorder rec(result, grid, cfg.sobolev_order, cfg.record_every);
    ScalarState Ht = coarse_depth(s.truth, s.refinement);
    rec.record(0.0, s.observer.H, Ht, total_energy(s.observer), 0.0);

    double t = 0.0;
    std::size_t n = 0;
    std::size_t next_obs = 0;
    while (t < cfg.t_final) {
        double h = cfg.dt_fixed ? *cfg.dt_fixed
                                : std::min(sv_cfl(s.truth, 0.0, cfg.cfl_safety),
                                           sv_cfl(s.observer, lam_cfl, cfg.cfl_safety));
        const bool last = t + h >= cfg.t_final - 1e-9 * h;
        const double t1 = last ? cfg.t_final : t + h;
        h = t1 - t;
        try {
            bool active = false;
            ScalarState obs;
            if (lambda > 0.0) {
                if (mode == TemporalMode::AtObservationTimesOnly) {
                    active = observation_in_step(cfg.obs_times, t, t1, last, next_obs);
                    if (active) obs = noisy_masked(Ht, noise, mask, true);
                } else if (series) {
                    active = t >= series->times().front() && t <= series->times().back();
                    if (active) obs = interpolate_in_time(*series, t);
                } else {
                    active = true;
                    obs = noisy_masked(Ht, noise, mask, true);
                }
            }
            if (active) {
                s.observer = sv_observer_step(s.observer, obs, lambda, h, w);
            } else {
                s.observer = sv_forward_step(s.observer, h);
            }
            s.truth = sv_forward_step(s.truth, h);
        } catch (const std::exception& e) {
            rethrow_with_step(n, e);
        }
        t = t1;
        ++n;
        Ht = coarse_depth(s.truth, s.refinement);
        result.dt_history.push_back(h);
        if (rec.due(n, last)) rec.record(t, s.observer.H, Ht, total_energy(s.observer), h);
        if (n > 100000000) throw SolverError("run exceeded the step limit");
    }
    result.steps = n;
    result.t_end = t;
    result.final_truth = Ht;
    result.final_observer = s.observer.H;
    result.final_truth_q = s.refinement == 1 ? s.truth.q : block_average(s.truth.q, s.refinement);
    result.final_observer_q = s.observer.q;
    return result;
}

std::vector<SweepEntry> sweep_lambda(const RunConfig& cfg, const std::vector<double>& lambdas,
                                     int jobs) {
    if (lambdas.empty()) throw std::invalid_argument("sweep needs at least one lambda");
    for (double l : lambdas) {
        if (!(l >= 0.0)) throw std::invalid_argument("sweep lambdas must be nonnegative");
    }
    std::vector<SweepEntry> out(lambdas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= lambdas.size()) return;
            RunConfig c = cfg;
            c.gain.lambda = lambdas[k];
            const double nan = std::numeric_limits<double>::quiet_NaN();
            try {
                const RunResult r = run_twin(c);
                out[k] = {lambdas[k], r.errors.l1_rel.back(), r.errors.sobolev.back(), true, ""};
            } catch (const std::exception& e) {
                out[k] = {lambdas[k], nan, nan, false, e.what()};
            }
        }
    };
    const std::size_t n_threads =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, lambdas.size());
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

DecayStudy decay_study(RunConfig cfg) {
    cfg.gain.temporal = TemporalMode::EveryStep;
    cfg.obs_times.clear();
    cfg.obs_interpolate = false;
    cfg.noise.reset();
    cfg.obs_mask.reset();
    cfg.gain.mask.reset();
    DecayStudy d;
    d.run = run_twin(cfg);
    const auto& times = d.run.errors.times;
    const auto& err = d.run.errors.l1_abs;
    d.window_end = cfg.t_final;
    d.floor_limited = false;
    const double floor = 1e-10 * err.front();
    for (std::size_t i = 0; i < err.size(); ++i) {
        if (err[i] <= floor) {
            d.window_end = times[i > 0 ? i - 1 : 0];
            d.floor_limited = true;
            break;
        }
    }
    d.rate = fit_decay_rate(times, err, 0.0, d.window_end);
    const double lam = cfg.gain.lambda;
    d.relative_deviation = lam > 0.0 ? std::abs(d.rate - lam) / lam : std::abs(d.rate);
    return d;
}

}  // namespace kinobs
