/**
 * @file observation.hpp
 * @brief Synthetic observations: spatial masks, time sampling, oscillatory
 *        noise, linear time interpolation and a mollified sampling kernel.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "kinobs/burgers.hpp"
#include "kinobs/grid.hpp"

namespace kinobs {

/// Marker stored in masked-out cells.
inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
inline bool is_absent(double v) { return v != v; }

enum class NoiseKind { Oscillatory, Uniform };

/// eps^(r - alpha) cos(x / eps + alpha pi / 2), or a seeded uniform draw of
/// the same amplitude. Throws std::invalid_argument unless eps > 0 and
/// 0 <= alpha < 1/2.
struct NoiseSpec {
    double epsilon = 0.0;
    double r = 1.0;
    double alpha = 0.0;
    NoiseKind kind = NoiseKind::Oscillatory;
    std::uint64_t seed = 0;

    void validate() const;
    double amplitude() const;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

std::vector<double> noise_field(const NoiseSpec& spec, const Grid1D& grid);

/// Exact L2([0, 1]) norm of the continuous oscillatory noise,
/// amp sqrt(1/2 + eps/4 (sin(2/eps + alpha pi) - sin(alpha pi))).
double noise_l2_closed_form(const NoiseSpec& spec);

/// Raised-cosine kernel phi_sigma(s) = (1 + cos(pi s / sigma)) / (2 sigma) on [-sigma, sigma].
class Mollifier {
public:
    /// Throws std::invalid_argument unless sigma > 0.
    explicit Mollifier(double sigma);

    double sigma() const { return sigma_; }
    double operator()(double s) const;
    /// Integral of phi_sigma over [s0, s1].
    double integral(double s0, double s1) const;

private:
    double cumulative(double s) const;
    double sigma_;
};

/// Closed interval [a, b] of observed positions.
struct MaskInterval {
    double a;
    double b;

    friend bool operator==(const MaskInterval&, const MaskInterval&) = default;
};

/// Cells whose centre lies in the interval (every cell when mask is empty).
std::vector<char> cell_mask(const Grid1D& grid, const std::optional<MaskInterval>& mask);

class ObservationSeries {
public:
    ObservationSeries(Grid1D grid, std::vector<char> mask);

    /// Appends a snapshot; masked-out entries are replaced by kAbsent.
    /// Throws std::invalid_argument if t does not exceed the last time or
    /// the size is wrong.
    void append(double t, std::vector<double> field);

    const Grid1D& grid() const { return grid_; }
    const std::vector<char>& mask() const { return mask_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<std::vector<double>>& fields() const { return fields_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double observed_fraction() const;

private:
    Grid1D grid_;
    std::vector<char> mask_;
    std::vector<double> times_;
    std::vector<std::vector<double>> fields_;
};

/// Recorded truth: strictly increasing times and one state per time.
struct Trajectory {
    std::vector<double> times;
    std::vector<ScalarState> states;
};

/// Nearest recorded state at each requested time, masked, plus noise where
/// observed. Throws std::out_of_range if a time lies outside the record.
ObservationSeries sample_observations(const Trajectory& truth, const Grid1D& grid,
                                      const std::vector<double>& times,
                                      const std::optional<MaskInterval>& mask,
                                      const std::optional<NoiseSpec>& noise);

/// Piecewise-linear interpolation between stored snapshots; absent cells stay
/// absent. Throws std::out_of_range outside [t_first, t_last].
std::vector<double> interpolate_in_time(const ObservationSeries& series, double t);

struct MollifiedTerm {
    std::size_t index;  ///< snapshot index k
    double weight;      ///< phi_sigma(t - t_k)
};

struct MollifiedGain {
    double weight = 0.0;
    std::vector<MollifiedTerm> terms;
};

/// Sum of phi_sigma(t - t_k) and the contributing snapshots.
MollifiedGain mollified_gain(const ObservationSeries& series, const Mollifier& mollifier,
                             double t);

/// Same sum integrated over [t0, t1] after delaying the kernel by `delay`,
/// i.e. weights int_{t0}^{t1} phi_sigma(s - delay - t_k) ds.
MollifiedGain mollified_step_gain(const std::vector<double>& obs_times,
                                  const Mollifier& mollifier, double t0, double t1,
                                  double delay);

struct Observability {
    bool observable;
    double T_min;  ///< infinity for speed 0
    double X_inf;  ///< shortest time any characteristic spends in [a, b] over [0, T]
};

/// Constant-speed transport on the periodic unit interval observed on [a, b].
/// Throws std::invalid_argument unless 0 < a < b < 1 and T >= 0.
Observability observability_check(double speed, double a, double b, double T);

/// CSV with header t,cell_index,value; absent cells are omitted.
void write_observations_csv(const ObservationSeries& series, const std::filesystem::path& path);
ObservationSeries read_observations_csv(const std::filesystem::path& path, const Grid1D& grid);

}  // namespace kinobs
