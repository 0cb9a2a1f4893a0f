#include "kinobs/observation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "kinobs/io.hpp"

namespace kinobs {

void NoiseSpec::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("noise epsilon must be positive");
    if (!(alpha >= 0.0 && alpha < 0.5)) throw std::invalid_argument("noise alpha must lie in [0, 1/2)");
    if (!std::isfinite(r)) throw std::invalid_argument("noise exponent r must be finite");
}

double NoiseSpec::amplitude() const { return std::pow(epsilon, r - alpha); }

std::vector<double> noise_field(const NoiseSpec& spec, const Grid1D& grid) {
    spec.validate();
    const double amp = spec.amplitude();
    std::vector<double> out(grid.size());
    if (spec.kind == NoiseKind::Uniform) {
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> dist(-amp, amp);
        for (double& v : out) v = dist(rng);
        return out;
    }
    const double phase = spec.alpha * std::numbers::pi / 2.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = amp * std::cos(grid.center(i) / spec.epsilon + phase);
    }
    return out;
}

double noise_l2_closed_form(const NoiseSpec& spec) {
    spec.validate();
    const double e = spec.epsilon;
    const double ap = spec.alpha * std::numbers::pi;
    return spec.amplitude() * std::sqrt(0.5 + 0.25 * e * (std::sin(2.0 / e + ap) - std::sin(ap)));
}

Mollifier::Mollifier(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("mollifier sigma must be positive");
}

double Mollifier::operator()(double s) const {
    const double u = s / sigma_;
    if (u < -1.0 || u > 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * u)) / sigma_;
}

double Mollifier::cumulative(double s) const {
    const double u = std::clamp(s / sigma_, -1.0, 1.0);
    if (u == -1.0) return 0.0;
    if (u == 1.0) return 1.0;
    return 0.5 * (u + 1.0) + std::sin(std::numbers::pi * u) / (2.0 * std::numbers::pi);
}

double Mollifier::integral(double s0, double s1) const { return cumulative(s1) - cumulative(s0); }

std::vector<char> cell_mask(const Grid1D& grid, const std::optional<MaskInterval>& mask) {
    std::vector<char> out(grid.size(), 1);
    if (!mask) return out;
    if (!(mask->a <= mask->b)) throw std::invalid_argument("mask interval needs a <= b");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.center(i);
        out[i] = (x >= mask->a && x <= mask->b) ? 1 : 0;
    }
    return out;
}

ObservationSeries::ObservationSeries(Grid1D grid, std::vector<char> mask)
    : grid_(grid), mask_(std::move(mask)) {
    if (mask_.size() != grid_.size()) throw std::invalid_argument("mask does not match the grid");
}

void ObservationSeries::append(double t, std::vector<double> field) {
    if (field.size() != grid_.size()) throw std::invalid_argument("observation does not match the grid");
    if (!times_.empty() && !(t > times_.back())) {
        throw std::invalid_argument("observation times must be strictly increasing");
    }
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!mask_[i]) field[i] = kAbsent;
    }
    times_.push_back(t);
    fields_.push_back(std::move(field));
}

double ObservationSeries::observed_fraction() const {
    const auto n = std::count(mask_.begin(), mask_.end(), 1);
    return static_cast<double>(n) / static_cast<double>(mask_.size());
}

ObservationSeries sample_observations(const Trajectory& truth, const Grid1D& grid,
                                      const std::vector<double>& times,
                                      const std::optional<MaskInterval>& mask,
                                      const std::optional<NoiseSpec>& noise) {
    if (truth.times.empty() || truth.times.size() != truth.states.size()) {
        throw std::invalid_argument("truth trajectory is empty or inconsistent");
    }
    const double first = truth.times.front();
    const double last = truth.times.back();
    const double tol = 1e-12 * std::max(1.0, std::abs(last));
    std::vector<double> extra;
    if (noise) extra = noise_field(*noise, grid);

    ObservationSeries series(grid, cell_mask(grid, mask));
    for (double t : times) {
        if (t < first - tol || t > last + tol) {
            throw std::out_of_range("observation time " + std::to_string(t) +
                                    " outside the recorded truth");
        }
        auto it = std::lower_bound(truth.times.begin(), truth.times.end(), t);
        std::size_t k = static_cast<std::size_t>(it - truth.times.begin());
        if (k == truth.times.size()) {
            k = truth.times.size() - 1;
        } else if (k > 0 && t - truth.times[k - 1] <= truth.times[k] - t) {
            --k;
        }
        std::vector<double> field = truth.states[k];
        if (field.size() != grid.size()) throw std::invalid_argument("truth state does not match the grid");
        if (!extra.empty()) {
            for (std::size_t i = 0; i < field.size(); ++i) field[i] += extra[i];
        }
        series.append(t, std::move(field));
    }
    return series;
}

std::vector<double> interpolate_in_time(const ObservationSeries& series, double t) {
    const auto& ts = series.times();
    if (ts.empty() || t < ts.front() || t > ts.back()) {
        throw std::out_of_range("interpolation time " + std::to_string(t) +
                                " outside the observation window");
    }
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.end()) return series.fields().back();
    const std::size_t k1 = static_cast<std::size_t>(it - ts.begin());
    const std::size_t k0 = k1 - 1;
    if (t == ts[k0]) return series.fields()[k0];
    const double w = (t - ts[k0]) / (ts[k1] - ts[k0]);
    const auto& f0 = series.fields()[k0];
    const auto& f1 = series.fields()[k1];
    std::vector<double> out(f0.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = is_absent(f0[i]) ? kAbsent : (1.0 - w) * f0[i] + w * f1[i];
    }
    return out;
}

MollifiedGain mollified_gain(const ObservationSeries& series, const Mollifier& mollifier,
                             double t) {
    MollifiedGain g;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double w = mollifier(t - series.times()[k]);
        if (w > 0.0) {
            g.weight += w;
            g.terms.push_back({k, w});
        }
    }
    return g;
}

MollifiedGain mollified_step_gain(const std::vector<double>& obs_times,
                                  const Mollifier& mollifier, double t0, double t1,
                                  double delay) {
    MollifiedGain g;
    for (std::size_t k = 0; k < obs_times.size(); ++k) {
        const double s = t0 - delay - obs_times[k];
        const double w = mollifier.integral(s, s + (t1 - t0));
        if (w > 0.0) {
            g.weight += w;
            g.terms.push_back({k, w});
        }
    }
    return g;
}

Observability observability_check(double speed, double a, double b, double T) {
    if (!(0.0 < a && a < b && b < 1.0)) throw std::invalid_argument("observability needs 0 < a < b < 1");
    if (!(T >= 0.0)) throw std::invalid_argument("observability horizon must be nonnegative");
    const double len = b - a;
    const double c = std::abs(speed);
    if (c == 0.0) return {false, std::numeric_limits<double>::infinity(), 0.0};
    const double T_min = (1.0 - len) / c;
    const double D = c * T;
    const double q = std::floor(D);
    const double r = D - q;
    const double X_inf = (q * len + std::max(0.0, r - (1.0 - len))) / c;
    return {T > T_min, T_min, X_inf};
}

void write_observations_csv(const ObservationSeries& series, const std::filesystem::path& path) {
    std::string out = "t,cell_index,value\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const std::string t = format_double(series.times()[k]);
        const auto& f = series.fields()[k];
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (is_absent(f[i])) continue;
            out += t;
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += format_double(f[i]);
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

ObservationSeries read_observations_csv(const std::filesystem::path& path, const Grid1D& grid) {
    const std::string text = read_file(path);
    auto lines = split(text, '\n');
    if (lines.empty() || trim(lines.front()) != "t,cell_index,value") {
        throw std::runtime_error(path.string() + ": missing observation CSV header");
    }
    std::map<double, std::vector<double>> by_time;
    std::vector<char> mask(grid.size(), 0);
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 3) {
            throw std::runtime_error(path.string() + ":" + std::to_string(ln + 1) + ": expected 3 columns");
        }
        const double t = parse_double(cols[0]);
        const long i = parse_long(cols[1]);
        if (i < 0 || static_cast<std::size_t>(i) >= grid.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(ln + 1) + ": cell index out of range");
        }
        auto& field = by_time.try_emplace(t, grid.size(), kAbsent).first->second;
        field[static_cast<std::size_t>(i)] = parse_double(cols[2]);
        mask[static_cast<std::size_t>(i)] = 1;
    }
    ObservationSeries series(grid, mask);
    for (auto& [t, field] : by_time) series.append(t, std::move(field));
    return series;
}

}  // namespace kinobs
