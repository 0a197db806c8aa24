#pragma once

// Built-in case studies: two identified polynomial models, each written out
// as four algebraically equal extensions that differ only in operation order.

#include <lbe/expr.hpp>
#include <lbe/narmax.hpp>

#include <array>
#include <charconv>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lbe {

struct CaseStudy {
    std::string id;
    NarmaxModel model;
    std::size_t default_steps;
    double expected_lambda; // bits per iteration
    double tolerance;
    std::string note;
    // Parameters the identified model does not fix; surfaced as run warnings.
    std::vector<std::string> assumptions;
};

// Sine map x' = 1.2*pi*sin(x), identified as y(n) = 2.6868 y(n-1) - 0.2462 y(n-1)^3.
inline constexpr std::array<std::string_view, 4> sine_map_extensions{
    "2.6868*y(n-1) - 0.2462*y(n-1)^3",              // F
    "2.6868*y(n-1) - (0.2462*y(n-1))*y(n-1)^2",     // G
    "2.6868*y(n-1) - 0.2462*y(n-1)*y(n-1)*y(n-1)",  // H
    "y(n-1)*(2.6868 - 0.2462*y(n-1)*y(n-1))",       // L
};

// Identified Duffing-Ueda oscillator, sampled at Ts = pi/60. F is the model
// as identified; G moves the input terms first; H additionally writes the
// last cube as a product; L writes the first cube as a product.
inline constexpr std::array<std::string_view, 4> duffing_ueda_extensions{
    "2.1579*y(n-1) - 1.3203*y(n-2) + 0.16239*y(n-3) + 0.0003416*u(n-1) + 0.001963*u(n-2)"
    " - 0.0048196*y(n-1)^3 + 0.003523*y(n-1)^2*y(n-2) - 0.0012162*y(n-1)*y(n-2)*y(n-3)"
    " + 0.0002248*y(n-3)^3",
    "0.0003416*u(n-1) + 0.001963*u(n-2) + 2.1579*y(n-1) - 1.3203*y(n-2) + 0.16239*y(n-3)"
    " - 0.0048196*y(n-1)^3 + 0.003523*y(n-1)^2*y(n-2) - 0.0012162*y(n-1)*y(n-2)*y(n-3)"
    " + 0.0002248*y(n-3)^3",
    "0.0003416*u(n-1) + 0.001963*u(n-2) + 2.1579*y(n-1) - 1.3203*y(n-2) + 0.16239*y(n-3)"
    " - 0.0048196*y(n-1)^3 + 0.003523*y(n-1)^2*y(n-2) - 0.0012162*y(n-1)*y(n-2)*y(n-3)"
    " + 0.0002248*y(n-3)*y(n-3)*y(n-3)",
    "2.1579*y(n-1) - 1.3203*y(n-2) + 0.16239*y(n-3) + 0.0003416*u(n-1) + 0.001963*u(n-2)"
    " - 0.0048196*y(n-1)*y(n-1)*y(n-1) + 0.003523*y(n-1)^2*y(n-2) - 0.0012162*y(n-1)*y(n-2)*y(n-3)"
    " + 0.0002248*y(n-3)^3",
};

inline constexpr double duffing_default_amplitude = 11.0;
inline constexpr double duffing_sample_period = std::numbers::pi / 60.0;

namespace detail {

template <std::size_t K>
std::vector<Expression> parse_all(const std::array<std::string_view, K>& texts) {
    std::vector<Expression> out;
    out.reserve(K);
    for (auto text : texts) {
        out.push_back(parse_expression(text));
    }
    return out;
}

inline std::string format_double(double v) {
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), v);
    return {buffer.data(), result.ptr};
}

} // namespace detail

inline CaseStudy sine_map_case() {
    CaseStudy c;
    c.id = "sine";
    c.model = make_model("sine-map", detail::parse_all(sine_map_extensions), {0.1});
    c.default_steps = 100;
    c.expected_lambda = 1.15;
    c.tolerance = 0.15;
    c.note = "identified sine map (alpha = 1.2*pi), x0 = 0.1; reference exponent 1.15 bits/iteration";
    return c;
}

struct DuffingOptions {
    std::optional<double> amplitude;
    std::optional<std::vector<double>> initial;
};

inline CaseStudy duffing_ueda_case(const DuffingOptions& options = {}) {
    CaseStudy c;
    c.id = "duffing";
    const double amplitude = options.amplitude.value_or(duffing_default_amplitude);
    std::vector<double> initial = options.initial.value_or(std::vector<double>{0.0, 0.0, 0.0});
    c.model = make_model("duffing-ueda", detail::parse_all(duffing_ueda_extensions), initial,
                         InputSignal::cosine(amplitude, duffing_sample_period, "pi/60"));
    c.default_steps = 1000;
    c.expected_lambda = 0.1202;
    c.tolerance = 0.03;
    c.note = "identified Duffing-Ueda oscillator, u(n) = A*cos(n*Ts), Ts = pi/60; reference exponent 0.1202";

    if (options.amplitude) {
        c.assumptions.push_back("input amplitude A = " + detail::format_double(amplitude) +
                                " overrides the assumed default A = 11; the reference exponent was not "
                                "established for this value");
    } else {
        c.assumptions.push_back("input amplitude A = 11 is an assumed default; the identified model does "
                                "not fix it");
    }
    if (options.initial) {
        std::string values;
        for (double v : initial) {
            values += (values.empty() ? "" : ", ") + detail::format_double(v);
        }
        c.assumptions.push_back("initial lags [" + values +
                                "] override the assumed default [0, 0, 0]; the reference exponent was not "
                                "established for these values");
    } else {
        c.assumptions.push_back("initial lags y0 = y1 = y2 = 0 are an assumed default; the identified model does "
                                "not fix them");
    }
    return c;
}

inline std::optional<CaseStudy> find_case(std::string_view id) {
    if (id == "sine") {
        return sine_map_case();
    }
    if (id == "duffing") {
        return duffing_ueda_case();
    }
    return std::nullopt;
}

} // namespace lbe
