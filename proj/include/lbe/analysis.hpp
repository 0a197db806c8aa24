#pragma once

// Lower bound error of an ensemble of pseudo-orbits and the Lyapunov exponent
// read from its growth.
//
// For k pseudo-orbits of the same map, at least one of them is off from the
// true orbit by no less than
//
//     zeta_n = max_{i<j} |x_{i,n} - x_{j,n}| / 2
//
// since intervals of any smaller radius around the two farthest-apart
// values cannot both contain the true value. With k = 2 this is the
// two-orbit bound |x_{a,n} - x_{b,n}| / 2.

#include <lbe/error.hpp>
#include <lbe/narmax.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lbe {

struct ErrorPoint {
    double zeta = 0.0; // NaN when !valid
    std::size_t i = 0;
    std::size_t j = 1;
    bool valid = true;
};

struct ErrorSeries {
    std::vector<ErrorPoint> points;

    std::size_t size() const { return points.size(); }
    const ErrorPoint& operator[](std::size_t n) const { return points[n]; }
};

namespace detail {

inline ErrorPoint max_pairwise(std::span<const double> column) {
    ErrorPoint point;
    double best = -1.0;
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (!std::isfinite(column[i])) {
            point.valid = false;
            point.zeta = std::numeric_limits<double>::quiet_NaN();
            return point;
        }
    }
    for (std::size_t i = 0; i < column.size(); ++i) {
        for (std::size_t j = i + 1; j < column.size(); ++j) {
            const double distance = std::fabs(column[i] - column[j]);
            if (distance > best) { // strict: first (i, j) wins ties
                best = distance;
                point.i = i;
                point.j = j;
            }
        }
    }
    point.zeta = best / 2.0;
    return point;
}

} // namespace detail

// Per-step zeta_n with the argmax pair. Steps where any row is non-finite are
// marked invalid.
inline ErrorSeries lbe_series(const PseudoOrbitEnsemble& ensemble) {
    if (ensemble.size() < 2) {
        throw std::invalid_argument("lower bound error needs at least 2 pseudo-orbits, got " +
                                    std::to_string(ensemble.size()));
    }
    const std::size_t columns = ensemble.rows.front().values.size();
    for (const auto& row : ensemble.rows) {
        if (row.values.size() != columns) {
            throw std::invalid_argument("pseudo-orbits have different lengths");
        }
    }
    ErrorSeries series;
    series.points.reserve(columns);
    std::vector<double> column(ensemble.size());
    for (std::size_t n = 0; n < columns; ++n) {
        for (std::size_t r = 0; r < ensemble.size(); ++r) {
            column[r] = ensemble.rows[r].values[n];
        }
        series.points.push_back(detail::max_pairwise(column));
    }
    return series;
}

// Two-orbit special case: delta_n = |a_n - b_n| / 2.
inline ErrorSeries two_orbit_lbe(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("orbit lengths differ: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
    ErrorSeries series;
    series.points.reserve(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        ErrorPoint p;
        if (std::isfinite(a[n]) && std::isfinite(b[n])) {
            p.zeta = std::fabs(a[n] - b[n]) / 2.0;
        } else {
            p.valid = false;
            p.zeta = std::numeric_limits<double>::quiet_NaN();
        }
        series.points.push_back(p);
    }
    return series;
}

struct Interval {
    double lower;
    double upper;
};

struct IntervalCheck {
    std::size_t step;
    std::size_t a;
    std::size_t b;
    double radius;
    Interval around_a;
    Interval around_b;
    bool intersects;
};

namespace detail {

// Exact test of |a - b| <= bound for finite a, b and a representable bound,
// using the rounding error of the subtraction (two-sum).
inline bool distance_at_most(double a, double b, double bound) {
    const double hi = a - b;
    const double v = hi - a;
    const double lo = (a - (hi - v)) + (-b - v);
    const double d = std::fabs(hi);
    const double tail = hi < 0.0 ? -lo : lo;
    if (d != bound) {
        return d < bound;
    }
    return tail <= 0.0;
}

} // namespace detail

// Closed intervals [x - r, x + r] around the step's argmax pair. The endpoints
// are reported rounded to binary64; the intersection itself is decided on the
// exact real intervals, i.e. |x_a - x_b| <= 2r without rounding. With the exact
// half-distance as radius the intervals touch at the midpoint and any smaller
// radius separates them.
inline IntervalCheck interval_check(const PseudoOrbitEnsemble& ensemble, const ErrorSeries& series, std::size_t step,
                                    double radius) {
    if (step >= series.size()) {
        throw std::out_of_range("step " + std::to_string(step) + " outside series of length " +
                                std::to_string(series.size()));
    }
    const auto& p = series[step];
    const double xa = ensemble.at(p.i, step);
    const double xb = ensemble.at(p.j, step);
    IntervalCheck check{step, p.i, p.j, radius, {xa - radius, xa + radius}, {xb - radius, xb + radius}, false};
    const double twice = 2.0 * radius;
    if (std::isfinite(xa) && std::isfinite(xb) && radius >= 0.0) {
        check.intersects = std::isinf(twice) || detail::distance_at_most(xa, xb, twice);
    }
    return check;
}

struct LogPoint {
    std::size_t step;
    double log2_zeta;
};

// Zero and invalid steps are dropped rather than mapped to -inf.
inline std::vector<LogPoint> log2_series(const ErrorSeries& series) {
    std::vector<LogPoint> out;
    for (std::size_t n = 0; n < series.size(); ++n) {
        const auto& p = series[n];
        if (p.valid && p.zeta > 0.0) {
            out.push_back({n, std::log2(p.zeta)});
        }
    }
    return out;
}

struct FitWindow {
    std::size_t first;
    std::size_t last;

    friend bool operator==(const FitWindow&, const FitWindow&) = default;
};

struct WindowOptions {
    double sat_fraction = 0.01;
    double floor = 0.0;
};

// Peak-to-peak range of the finite values of row 0.
inline double orbit_amplitude(const PseudoOrbitEnsemble& ensemble) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : ensemble.rows.front().values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return hi >= lo ? hi - lo : 0.0;
}

// Growth region: from the first step with zeta above `floor` up to the step
// before zeta first reaches sat_fraction * amplitude.
inline FitWindow select_fit_window(const ErrorSeries& series, double amplitude, const WindowOptions& options = {}) {
    std::size_t positive = 0;
    std::optional<std::size_t> first;
    std::optional<std::size_t> last_valid;
    for (std::size_t n = 0; n < series.size(); ++n) {
        const auto& p = series[n];
        if (!p.valid) {
            if (first) {
                break;
            }
            continue;
        }
        if (p.zeta > 0.0) {
            ++positive;
        }
        if (!first && p.zeta > options.floor) {
            first = n;
        }
        if (first) {
            last_valid = n;
        }
    }
    if (positive < 5 || !first) {
        throw fit_error("window too small: only " + std::to_string(positive) + " steps with nonzero error");
    }
    const double threshold = options.sat_fraction * amplitude;
    std::size_t last = *last_valid;
    for (std::size_t n = *first; n <= *last_valid; ++n) {
        if (series[n].zeta >= threshold) {
            if (n == 0) {
                throw fit_error("window too small: error saturated at step 0");
            }
            last = n - 1;
            break;
        }
    }
    if (last < *first || last - *first < 4) {
        throw fit_error("window too small: [" + std::to_string(*first) + ", " + std::to_string(last) +
                        "] spans fewer than 5 steps");
    }
    return {*first, last};
}

inline FitWindow select_fit_window(const ErrorSeries& series, const PseudoOrbitEnsemble& ensemble,
                                   const WindowOptions& options = {}) {
    return select_fit_window(series, orbit_amplitude(ensemble), options);
}

struct LyapunovFit {
    double slope;     // bits per iteration
    double intercept; // bits
    FitWindow window;
    double r_squared;
    std::size_t points;
    std::optional<double> slope_per_time; // slope / Ts when the input defines Ts
};

// Ordinary least squares of log2 zeta against n over the points inside the window.
inline LyapunovFit fit_lyapunov(std::span<const LogPoint> points, FitWindow window,
                                std::optional<double> sample_period = std::nullopt) {
    std::vector<LogPoint> used;
    for (const auto& p : points) {
        if (p.step >= window.first && p.step <= window.last) {
            used.push_back(p);
        }
    }
    if (used.size() < 5) {
        throw fit_error("insufficient points: " + std::to_string(used.size()) + " in window [" +
                        std::to_string(window.first) + ", " + std::to_string(window.last) + "], need 5");
    }
    const auto count = static_cast<double>(used.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& p : used) {
        mean_x += static_cast<double>(p.step);
        mean_y += p.log2_zeta;
    }
    mean_x /= count;
    mean_y /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& p : used) {
        const double dx = static_cast<double>(p.step) - mean_x;
        const double dy = p.log2_zeta - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LyapunovFit fit{};
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.window = window;
    fit.points = used.size();
    double residual = 0.0;
    for (const auto& p : used) {
        const double r = p.log2_zeta - (fit.intercept + fit.slope * static_cast<double>(p.step));
        residual += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - residual / syy : 1.0;
    if (sample_period && *sample_period > 0.0) {
        fit.slope_per_time = fit.slope / *sample_period;
    }
    return fit;
}

} // namespace lbe
