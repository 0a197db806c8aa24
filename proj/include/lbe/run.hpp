#pragma once

// End-to-end analysis: validate the extensions, simulate one pseudo-orbit per
// extension, compute the lower bound error, pick the growth window and fit
// the exponent. Produces the CSV series and a text report.

#include <lbe/analysis.hpp>
#include <lbe/cases.hpp>
#include <lbe/error.hpp>
#include <lbe/model_file.hpp>
#include <lbe/narmax.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace lbe {

struct RunOptions {
    std::optional<std::size_t> steps;
    std::optional<PowMode> pow_mode;
    std::optional<std::size_t> fit_start;
    std::optional<std::size_t> fit_end;
    WindowOptions window;
    bool per_orbit = false;
    Execution execution = Execution::parallel;
};

struct RunInput {
    NarmaxModel model;
    std::optional<std::size_t> default_steps;
    std::vector<std::string> assumptions;
    std::optional<double> expected_lambda;
    std::optional<double> tolerance;
};

inline RunInput run_input(const CaseStudy& c) {
    return {c.model, c.default_steps, c.assumptions, c.expected_lambda, c.tolerance};
}

inline RunInput run_input(const ModelFile& f) { return {f.model, f.steps, f.assumptions, {}, {}}; }

inline constexpr std::size_t fallback_steps = 1000;

struct RunReport {
    std::string model_name;
    std::size_t extensions = 0;
    std::size_t steps = 0;
    PowMode pow_mode = PowMode::libm;
    std::string csv_path;
    std::optional<double> sample_period;
    std::optional<LyapunovFit> fit;
    std::optional<std::string> fit_failure;
    std::optional<double> expected_lambda;
    std::optional<double> tolerance;
    std::vector<std::string> warnings;
};

struct RunResult {
    PseudoOrbitEnsemble ensemble;
    ErrorSeries series;
    RunReport report;
    std::string csv;
};

namespace detail {

inline void append_double(std::string& out, double v) {
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), v);
    out.append(buffer.data(), result.ptr);
}

} // namespace detail

// Columns n,zeta,log2_zeta,argmax_i,argmax_j[,x_0..x_{k-1}]. Doubles use the
// shortest representation that reads back to the same bits. Invalid steps
// leave the error columns empty; zero error leaves log2_zeta empty.
inline std::string format_csv(const PseudoOrbitEnsemble& ensemble, const ErrorSeries& series, bool per_orbit) {
    std::string out = "n,zeta,log2_zeta,argmax_i,argmax_j";
    if (per_orbit) {
        for (std::size_t i = 0; i < ensemble.size(); ++i) {
            out += ",x_" + std::to_string(i);
        }
    }
    out += '\n';
    for (std::size_t n = 0; n < series.size(); ++n) {
        const auto& p = series[n];
        out += std::to_string(n);
        out += ',';
        if (p.valid) {
            detail::append_double(out, p.zeta);
            out += ',';
            if (p.zeta > 0.0) {
                detail::append_double(out, std::log2(p.zeta));
            }
            out += ',' + std::to_string(p.i) + ',' + std::to_string(p.j);
        } else {
            out += ",,,";
        }
        if (per_orbit) {
            for (std::size_t i = 0; i < ensemble.size(); ++i) {
                out += ',';
                detail::append_double(out, ensemble.at(i, n));
            }
        }
        out += '\n';
    }
    return out;
}

// Throws validation_error when the model is rejected. A failed window
// selection or fit is recorded in report.fit_failure so the CSV can still be
// written.
inline RunResult run_analysis(const RunInput& input, const RunOptions& options) {
    RunResult result;
    auto& report = result.report;
    auto model = input.model;
    if (options.pow_mode) {
        model.pow_mode = *options.pow_mode;
    }
    const std::size_t steps = options.steps.value_or(input.default_steps.value_or(fallback_steps));

    report.model_name = model.name;
    report.extensions = model.extensions.size();
    report.steps = steps;
    report.pow_mode = model.pow_mode;
    report.expected_lambda = input.expected_lambda;
    report.tolerance = input.tolerance;
    report.warnings = input.assumptions;
    if (!options.steps) {
        report.warnings.push_back("step count N = " + std::to_string(steps) + " is a default");
    }
    if (!model.strict_equivalence) {
        report.warnings.push_back("equivalence check of the extensions was disabled");
    }
    if (model.input.kind == InputSignal::Kind::cosine) {
        report.sample_period = model.input.sample_period;
    }

    result.ensemble = simulate_ensemble(model, steps, options.execution);
    for (std::size_t i = 0; i < result.ensemble.size(); ++i) {
        if (const auto at = result.ensemble.rows[i].diverged_at) {
            report.warnings.push_back("extension " + std::to_string(i) + " diverged at step " +
                                      std::to_string(*at));
        }
    }
    result.series = lbe_series(result.ensemble);
    result.csv = format_csv(result.ensemble, result.series, options.per_orbit);

    try {
        FitWindow window{};
        if (options.fit_start && options.fit_end) {
            window = {*options.fit_start, *options.fit_end};
        } else {
            window = select_fit_window(result.series, result.ensemble, options.window);
            window.first = options.fit_start.value_or(window.first);
            window.last = options.fit_end.value_or(window.last);
        }
        if (window.last < window.first) {
            throw fit_error("fit window [" + std::to_string(window.first) + ", " + std::to_string(window.last) +
                            "] is empty");
        }
        const auto points = log2_series(result.series);
        report.fit = fit_lyapunov(points, window, report.sample_period);
    } catch (const fit_error& e) {
        report.fit_failure = e.what();
    }
    return result;
}

inline std::string format_report(const RunReport& r) {
    std::string out;
    const auto line = [&](const std::string& key, const std::string& value) { out += key + ": " + value + "\n"; };
    const auto number = [](double v) {
        std::string s;
        detail::append_double(s, v);
        return s;
    };
    line("model", r.model_name);
    line("extensions", std::to_string(r.extensions));
    line("steps", std::to_string(r.steps));
    line("pow_mode", std::string(to_string(r.pow_mode)));
    if (!r.csv_path.empty()) {
        line("csv", r.csv_path);
    }
    if (r.fit) {
        const auto& f = *r.fit;
        line("fit_window", "[" + std::to_string(f.window.first) + ", " + std::to_string(f.window.last) + "]");
        line("fit_points", std::to_string(f.points));
        line("lambda_bits_per_iteration", number(f.slope));
        if (f.slope_per_time && r.sample_period) {
            line("lambda_bits_per_time", number(*f.slope_per_time));
            line("lambda_nats_per_time", number(f.slope * std::numbers::ln2 / *r.sample_period));
        }
        line("intercept_bits", number(f.intercept));
        line("r_squared", number(f.r_squared));
    } else if (r.fit_failure) {
        line("fit_error", *r.fit_failure);
    }
    if (r.expected_lambda) {
        line("reference_lambda", number(*r.expected_lambda) + " +/- " + number(r.tolerance.value_or(0.0)));
    }
    for (const auto& w : r.warnings) {
        line("warning", w);
    }
    return out;
}

} // namespace lbe
