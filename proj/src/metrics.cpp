#include "kinobs/metrics.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

namespace kinobs {

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("fields have different sizes");
}

// FFTW's planner is not thread safe; execution with new-array calls is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

double l1_absolute(std::span<const double> a, std::span<const double> b, double dx) {
    check_sizes(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s * dx;
}

double l1_relative(std::span<const double> a, std::span<const double> b, double dx) {
    const double err = l1_absolute(a, b, dx);
    double norm = 0.0;
    for (double v : b) norm += std::abs(v);
    norm *= dx;
    return norm > 0.0 ? err / norm : err;
}

double l2_absolute(std::span<const double> a, std::span<const double> b, double dx) {
    check_sizes(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s * dx);
}

double sobolev_seminorm(std::span<const double> field, double s, const Grid1D& grid) {
    if (!(s >= 0.0 && s < 1.0)) throw std::domain_error("sobolev order must lie in [0, 1)");
    const std::size_t n = field.size();
    if (n != grid.size()) throw std::invalid_argument("field does not match the grid");
    const std::size_t n_out = n / 2 + 1;

    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n_out);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    for (std::size_t j = 0; j < n; ++j) in[j] = field[j];
    fftw_execute(plan);

    const double base = 2.0 * std::numbers::pi / grid.length();
    double sum = 0.0;
    for (std::size_t k = 1; k < n_out; ++k) {
        const double re = out[k][0] / static_cast<double>(n);
        const double im = out[k][1] / static_cast<double>(n);
        const double weight = std::pow(base * static_cast<double>(k), 2.0 * s);
        // Every positive frequency has a mirrored negative one except Nyquist.
        const double multiplicity = (2 * k == n) ? 1.0 : 2.0;
        sum += multiplicity * weight * (re * re + im * im);
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return std::sqrt(sum);
}

double fit_decay_rate(std::span<const double> times, std::span<const double> values,
                      double t0, double t1) {
    if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 || times[i] > t1 || !(values[i] > 0.0)) continue;
        const double x = times[i];
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 3) throw std::invalid_argument("decay fit needs at least three positive samples");
    const double mm = static_cast<double>(m);
    const double denom = mm * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("decay fit needs distinct times");
    return -(mm * sxy - sx * sy) / denom;
}

SweepMinimum sweep_minimum(std::span<const double> lambdas, std::span<const double> errors) {
    if (lambdas.size() != errors.size()) throw std::invalid_argument("sweep curve lengths differ");
    if (lambdas.size() < 3) throw std::invalid_argument("sweep curve needs at least three points");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("sweep lambdas must increase strictly");
    }
    std::size_t best = lambdas.size();
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!std::isfinite(errors[i])) continue;
        if (best == lambdas.size() || errors[i] < errors[best]) best = i;
    }
    if (best == lambdas.size()) throw std::invalid_argument("sweep curve has no finite error");
    return {lambdas[best], errors[best], best != 0 && best + 1 != lambdas.size(), best};
}

}  // namespace kinobs
