#pragma once

// Free-run simulation of polynomial NARMAX models: every extension of a model
// is iterated on its own past outputs from the same initial lags and the same
// input trace, giving one pseudo-orbit per extension.

#include <lbe/canonical.hpp>
#include <lbe/error.hpp>
#include <lbe/expr.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace lbe {

struct InputSignal {
    enum class Kind { none, cosine, samples };

    Kind kind = Kind::none;
    double amplitude = 0.0;
    // Radians per step. `sample_period_text` keeps the literal it came from
    // (e.g. "pi/60") so exported model files stay readable.
    double sample_period = 0.0;
    std::string sample_period_text;
    std::vector<double> samples;

    static InputSignal none() { return {}; }

    static InputSignal cosine(double amplitude, double sample_period, std::string text = {}) {
        InputSignal s;
        s.kind = Kind::cosine;
        s.amplitude = amplitude;
        s.sample_period = sample_period;
        s.sample_period_text = std::move(text);
        return s;
    }

    static InputSignal from_samples(std::vector<double> values) {
        InputSignal s;
        s.kind = Kind::samples;
        s.samples = std::move(values);
        return s;
    }
};

// u_0 .. u_steps. Cosine input is A*cos(n*Ts) with n*Ts rounded to binary64
// before the cosine.
inline std::vector<double> build_input(const InputSignal& signal, std::size_t steps) {
    std::vector<double> trace(steps + 1, 0.0);
    switch (signal.kind) {
    case InputSignal::Kind::none: break;
    case InputSignal::Kind::cosine:
        for (std::size_t n = 0; n <= steps; ++n) {
            const double phase = static_cast<double>(n) * signal.sample_period;
            trace[n] = signal.amplitude * std::cos(phase);
        }
        break;
    case InputSignal::Kind::samples:
        if (signal.samples.size() < steps + 1) {
            throw validation_error("input has " + std::to_string(signal.samples.size()) +
                                   " samples, need " + std::to_string(steps + 1));
        }
        std::copy_n(signal.samples.begin(), steps + 1, trace.begin());
        break;
    }
    return trace;
}

struct NarmaxModel {
    std::string name;
    std::vector<Expression> extensions;
    std::vector<double> initial; // y_0 .. y_{n_y - 1}
    InputSignal input;
    PowMode pow_mode = PowMode::libm;
    int output_lags = 0; // n_y
    int input_lags = 0;  // n_u
    bool strict_equivalence = true;
};

// Largest lags referenced by any extension.
inline std::pair<int, int> infer_lags(std::span<const Expression> extensions) {
    int ny = 0;
    int nu = 0;
    for (const auto& e : extensions) {
        ny = std::max(ny, max_lag(e, Stream::y));
        nu = std::max(nu, max_lag(e, Stream::u));
    }
    return {ny, nu};
}

// Builds a model with lags inferred from the extensions.
inline NarmaxModel make_model(std::string name, std::vector<Expression> extensions, std::vector<double> initial,
                              InputSignal input = InputSignal::none(), PowMode mode = PowMode::libm) {
    NarmaxModel m;
    m.name = std::move(name);
    const auto [ny, nu] = infer_lags(extensions);
    m.extensions = std::move(extensions);
    m.initial = std::move(initial);
    m.input = std::move(input);
    m.pow_mode = mode;
    m.output_lags = ny;
    m.input_lags = nu;
    return m;
}

// Checks arity, lag bookkeeping and (unless disabled) pairwise equivalence.
// The equivalence failure message names the pair and their canonical difference.
inline void validate_model(const NarmaxModel& m) {
    if (m.extensions.size() < 2) {
        throw validation_error("model '" + m.name + "' needs at least 2 extensions, has " +
                               std::to_string(m.extensions.size()));
    }
    const auto [ny, nu] = infer_lags(m.extensions);
    if (ny < 1) {
        throw validation_error("model '" + m.name + "' does not reference any past output y(n-k)");
    }
    if (m.output_lags < ny) {
        throw validation_error("n_y = " + std::to_string(m.output_lags) + " but extensions reference y(n-" +
                               std::to_string(ny) + ")");
    }
    if (m.input_lags < nu) {
        throw validation_error("n_u = " + std::to_string(m.input_lags) + " but extensions reference u(n-" +
                               std::to_string(nu) + ")");
    }
    if (m.initial.size() != static_cast<std::size_t>(m.output_lags)) {
        throw validation_error("expected " + std::to_string(m.output_lags) + " initial values (n_y), got " +
                               std::to_string(m.initial.size()));
    }
    if (!m.strict_equivalence) {
        return;
    }
    std::vector<CanonicalPolynomial> forms;
    forms.reserve(m.extensions.size());
    for (std::size_t i = 0; i < m.extensions.size(); ++i) {
        try {
            forms.push_back(expand_canonical(m.extensions[i]));
        } catch (const unsupported_form_error& e) {
            throw validation_error("extension " + std::to_string(i) + " cannot be checked for equivalence: " +
                                   e.what());
        }
    }
    for (std::size_t i = 0; i < forms.size(); ++i) {
        for (std::size_t j = i + 1; j < forms.size(); ++j) {
            if (!(forms[i] == forms[j])) {
                throw validation_error("extensions " + std::to_string(i) + " and " + std::to_string(j) +
                                       " are not equivalent; difference: " + (forms[i] - forms[j]).to_string());
            }
        }
    }
}

// One pseudo-orbit. Entries from `diverged_at` onward are NaN.
struct OrbitRow {
    std::vector<double> values;
    std::optional<std::size_t> diverged_at;
};

struct OrbitContext {
    std::span<const double> initial;
    std::span<const double> input;
    PowMode pow_mode = PowMode::libm;
};

// Simulates x_0..x_steps. Entries below initial.size() are the initial lags.
// A non-finite result or a division by zero marks the row diverged.
inline OrbitRow simulate_orbit(const Expression& e, const OrbitContext& context, std::size_t steps) {
    OrbitRow row;
    row.values.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());
    const std::size_t warmup = std::min(context.initial.size(), steps + 1);
    std::copy_n(context.initial.begin(), warmup, row.values.begin());

    std::size_t n = context.initial.size();
    const auto env = [&](const Variable& v) -> double {
        const auto lag = static_cast<std::size_t>(v.lag);
        if (v.stream == Stream::y) {
            if (lag > n) {
                throw validation_error("y lag exceeds available history at step " + std::to_string(n));
            }
            return row.values[n - lag];
        }
        if (lag > n) {
            return 0.0; // input before n = 0
        }
        if (n - lag >= context.input.size()) {
            throw validation_error("input trace too short for step " + std::to_string(n));
        }
        return context.input[n - lag];
    };
    for (; n <= steps; ++n) {
        double value = 0.0;
        try {
            value = evaluate_strict(e, env, context.pow_mode);
        } catch (const evaluation_error&) {
            value = std::numeric_limits<double>::quiet_NaN();
        }
        if (!std::isfinite(value)) {
            row.diverged_at = n;
            break;
        }
        row.values[n] = value;
    }
    return row;
}

// k rows x (steps+1) columns plus the shared input trace.
struct PseudoOrbitEnsemble {
    std::vector<OrbitRow> rows;
    std::vector<double> input;
    std::size_t initial_count = 0;

    std::size_t size() const { return rows.size(); }
    std::size_t steps() const { return rows.empty() ? 0 : rows.front().values.size() - 1; }
    double at(std::size_t row, std::size_t n) const { return rows[row].values[n]; }
};

enum class Execution { sequential, parallel };

// Each row is an independent recursion, so rows may run on separate threads;
// per-row arithmetic is identical either way.
inline PseudoOrbitEnsemble simulate_ensemble(const NarmaxModel& m, std::size_t steps,
                                             Execution execution = Execution::parallel) {
    validate_model(m);
    PseudoOrbitEnsemble ensemble;
    ensemble.input = build_input(m.input, steps);
    ensemble.initial_count = m.initial.size();
    ensemble.rows.resize(m.extensions.size());

    const OrbitContext context{m.initial, ensemble.input, m.pow_mode};
    if (execution == Execution::sequential) {
        for (std::size_t i = 0; i < m.extensions.size(); ++i) {
            ensemble.rows[i] = simulate_orbit(m.extensions[i], context, steps);
        }
    } else {
        std::vector<std::jthread> workers;
        workers.reserve(m.extensions.size());
        for (std::size_t i = 0; i < m.extensions.size(); ++i) {
            workers.emplace_back(
                [&, i] { ensemble.rows[i] = simulate_orbit(m.extensions[i], context, steps); });
        }
    }
    return ensemble;
}

} // namespace lbe
