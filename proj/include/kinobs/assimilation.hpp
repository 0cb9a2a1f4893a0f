/**
 * @file assimilation.hpp
 * @brief Twin experiments: a truth run without feedback and a nudged
 *        observer advanced in lockstep, plus gain sweeps and decay studies.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kinobs/burgers.hpp"
#include "kinobs/grid.hpp"
#include "kinobs/kinetic_core.hpp"
#include "kinobs/metrics.hpp"
#include "kinobs/observation.hpp"
#include "kinobs/shallow_water.hpp"

namespace kinobs {

enum class ModelKind { Burgers, ShallowWater, Advection };
enum class TemporalMode { EveryStep, AtObservationTimesOnly, Mollified };
/// bgk: free kinetic density; collapse: projected onto chi(xi, u) every step;
/// macroscopic: Engquist-Osher scheme on u.
enum class BurgersObserverMode { Bgk, Collapse, Macroscopic };
enum class BathymetryKind { Flat, Thacker, Bump };
enum class IcKind { Constant, Box, Sine, DamBreak, Lake, ThackerTruth, ThackerObserver };

std::string_view to_string(ModelKind v);
std::string_view to_string(TemporalMode v);
std::string_view to_string(BurgersObserverMode v);
std::string_view to_string(BathymetryKind v);
std::string_view to_string(IcKind v);
ModelKind model_kind_from_string(std::string_view s);
TemporalMode temporal_mode_from_string(std::string_view s);
BurgersObserverMode observer_mode_from_string(std::string_view s);
BathymetryKind bathymetry_kind_from_string(std::string_view s);
IcKind ic_kind_from_string(std::string_view s);

struct GainSchedule {
    double lambda = 0.0;
    std::optional<MaskInterval> mask;
    TemporalMode temporal = TemporalMode::AtObservationTimesOnly;
    double sigma = 0.0;  ///< mollifier half-width, Mollified mode only

    friend bool operator==(const GainSchedule&, const GainSchedule&) = default;
};

/// Initial field. Burgers and advection read the scalar fields; shallow
/// water reads depths, with velocity u0 everywhere.
struct InitialCondition {
    IcKind kind = IcKind::Constant;
    double value = 0.0;       ///< constant / box level
    double background = 0.0;  ///< level outside the box
    double x0 = 0.0;          ///< box start, dam position
    double x1 = 0.0;          ///< box end
    double offset = 0.0;      ///< sine: offset + amplitude sin(2 pi k (x - x_min) / L)
    double amplitude = 0.0;
    double wavenumber = 1.0;
    double h_left = 0.0;
    double h_right = 0.0;
    double eta = 0.0;         ///< lake surface
    double u0 = 0.0;

    friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct BumpParams {
    double center = 0.5;
    double height = 0.0;
    double width = 0.1;

    friend bool operator==(const BumpParams&, const BumpParams&) = default;
};

struct RunConfig {
    ModelKind model = ModelKind::Burgers;
    double gravity = kDefaultGravity;
    ChiProfile profile{ChiKind::Semicircle};
    BurgersObserverMode observer_mode = BurgersObserverMode::Bgk;
    double advection_speed = 1.0;
    double t_final = 1.0;
    double cfl_safety = 0.95;
    std::optional<double> dt_fixed;  ///< overrides the CFL step when set
    double h_dry = kDefaultDryDepth;

    int n_cells = 100;
    double x_min = 0.0;
    double x_max = 1.0;
    BoundaryKind bc = BoundaryKind::DirichletZero;
    int n_xi = 64;
    double xi_margin = 1.0;

    BathymetryKind bathymetry = BathymetryKind::Flat;
    ThackerParams thacker;
    BumpParams bump;
    int truth_refinement = 1;

    InitialCondition truth;
    InitialCondition observer;
    GainSchedule gain;

    std::vector<double> obs_times;  ///< empty: observe at every step
    std::optional<MaskInterval> obs_mask;
    bool obs_interpolate = false;
    std::optional<NoiseSpec> noise;

    int record_every = 1;
    double sobolev_order = 0.125;

    Grid1D grid() const { return Grid1D(n_cells, x_min, x_max, bc); }
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct RunResult {
    ErrorSeries errors;
    std::vector<double> energy;  ///< observer energy at each record
    std::vector<double> dt;      ///< step that ended at each record (0 first)
    std::vector<double> dt_history;
    ScalarState final_truth;     ///< u or H on the run grid
    ScalarState final_observer;
    ScalarState final_truth_q;   ///< shallow water only
    ScalarState final_observer_q;
    std::size_t steps = 0;
    double t_end = 0.0;
};

/// Scalar initial field on the grid (Burgers, advection and SW depths).
std::vector<double> evaluate_ic(const InitialCondition& ic, const Grid1D& grid,
                                const std::vector<double>& z_b,
                                const ThackerParams& thacker = {});
std::vector<double> evaluate_bathymetry(const RunConfig& cfg, const Grid1D& grid);

RunResult run_twin(const RunConfig& cfg);
RunResult run_burgers_twin(const RunConfig& cfg);
RunResult run_sv_twin(const RunConfig& cfg);

/// Truth run alone, recorded every step on the run grid.
Trajectory record_truth(const RunConfig& cfg);

struct SweepEntry {
    double lambda;
    double final_l1_rel;   ///< NaN when the run failed
    double final_sobolev;  ///< NaN when the run failed
    bool ok;
    std::string message;
};

/// Independent run_twin per lambda on up to `jobs` threads; entries keep
/// the order of `lambdas`; failures yield an entry with ok == false.
std::vector<SweepEntry> sweep_lambda(const RunConfig& cfg, const std::vector<double>& lambdas,
                                     int jobs = 1);

struct DecayStudy {
    double rate;
    double relative_deviation;  ///< |rate - lambda| / lambda, or |rate| when lambda == 0
    double window_end;
    bool floor_limited;         ///< window shortened because the error hit round-off
    RunResult run;
};

/// Twin with continuous exact observations; fits the decay rate of the L1
/// error over [0, t_final].
DecayStudy decay_study(RunConfig cfg);

}  // namespace kinobs
