#pragma once

// JSON model files.
//
//   {
//     "name": "duffing-ueda",
//     "extensions": ["2.1579*y(n-1) - ...", "..."],
//     "initial": [0.0, 0.0, 0.0],
//     "input": {"kind": "cosine", "amplitude": 11.0, "ts": "pi/60"},
//     "n_y": 3,                      optional, inferred from extensions
//     "n_u": 2,                      optional, inferred from extensions
//     "pow_mode": "libm",            optional, "libm" | "repeated"
//     "steps": 1000,                 optional default step count
//     "strict_equivalence": true,    optional, false skips the equivalence gate
//     "assumptions": ["..."]         optional notes echoed as run warnings
//   }
//
// input.kind is "none", "cosine" (amplitude, ts) or "samples" (samples: [...]).
// ts is a number or a string of the form "pi", "pi/60", "2*pi/60" or a decimal.

#include <lbe/cases.hpp>
#include <lbe/error.hpp>
#include <lbe/expr.hpp>
#include <lbe/narmax.hpp>

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace lbe {

struct ModelFile {
    NarmaxModel model;
    std::optional<std::size_t> steps;
    std::vector<std::string> assumptions;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    double value = 0.0;
    const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
    if (result.ec != std::errc{} || result.ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

} // namespace detail

// "pi/60" -> pi / 60.0 in binary64, "2*pi/60" -> (2.0 * pi) / 60.0.
inline double parse_sample_period(std::string_view text) {
    const auto bad = [&] { return validation_error("invalid ts '" + std::string(text) + "'"); };
    const auto pi_at = text.find("pi");
    if (pi_at == std::string_view::npos) {
        if (auto v = detail::parse_double(text)) {
            return *v;
        }
        throw bad();
    }
    double value = std::numbers::pi;
    const auto prefix = detail::trim(text.substr(0, pi_at));
    if (!prefix.empty()) {
        if (prefix.back() != '*') {
            throw bad();
        }
        const auto scale = detail::parse_double(prefix.substr(0, prefix.size() - 1));
        if (!scale) {
            throw bad();
        }
        value = *scale * value;
    }
    const auto suffix = detail::trim(text.substr(pi_at + 2));
    if (!suffix.empty()) {
        if (suffix.front() != '/') {
            throw bad();
        }
        const auto divisor = detail::parse_double(suffix.substr(1));
        if (!divisor || *divisor == 0.0) {
            throw bad();
        }
        value = value / *divisor;
    }
    return value;
}

namespace detail {

inline double number_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) {
        throw validation_error(std::string("missing field '") + key + "'");
    }
    const auto& v = j.at(key);
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        if (auto d = parse_double(v.get<std::string>())) {
            return *d;
        }
    }
    throw validation_error(std::string("field '") + key + "' must be a number");
}

inline std::vector<double> number_list(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw validation_error(std::string("field '") + key + "' must be a list of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (v.is_number()) {
            out.push_back(v.get<double>());
        } else if (v.is_string() && parse_double(v.get<std::string>())) {
            out.push_back(*parse_double(v.get<std::string>()));
        } else {
            throw validation_error(std::string("field '") + key + "' must be a list of numbers");
        }
    }
    return out;
}

inline InputSignal parse_input(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw validation_error("field 'input' must be an object");
    }
    const auto kind = j.value("kind", std::string("none"));
    if (kind == "none") {
        return InputSignal::none();
    }
    if (kind == "cosine") {
        const double amplitude = number_field(j, "amplitude");
        if (!j.contains("ts")) {
            throw validation_error("cosine input needs 'ts'");
        }
        const auto& ts = j.at("ts");
        if (ts.is_number()) {
            return InputSignal::cosine(amplitude, ts.get<double>());
        }
        if (ts.is_string()) {
            const auto text = ts.get<std::string>();
            return InputSignal::cosine(amplitude, parse_sample_period(text), text);
        }
        throw validation_error("field 'ts' must be a number or a string like \"pi/60\"");
    }
    if (kind == "samples") {
        return InputSignal::from_samples(number_list(j, "samples"));
    }
    throw validation_error("unknown input kind '" + kind + "'");
}

} // namespace detail

inline ModelFile parse_model_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw validation_error("model file must be a JSON object");
    }
    try {
        ModelFile file;
        auto& m = file.model;
        m.name = j.value("name", std::string("model"));
        if (!j.contains("extensions") || !j.at("extensions").is_array()) {
            throw validation_error("field 'extensions' must be a list of expression strings");
        }
        for (const auto& e : j.at("extensions")) {
            if (!e.is_string()) {
                throw validation_error("field 'extensions' must be a list of expression strings");
            }
            const auto source = e.get<std::string>();
            try {
                m.extensions.push_back(parse_expression(source));
            } catch (const parse_error& err) {
                throw validation_error("extension " + std::to_string(m.extensions.size()) + " '" + source +
                                       "': " + err.what());
            }
        }
        m.initial = detail::number_list(j, "initial");
        m.input = j.contains("input") ? detail::parse_input(j.at("input")) : InputSignal::none();
        const auto [ny, nu] = infer_lags(m.extensions);
        m.output_lags = j.contains("n_y") ? j.at("n_y").get<int>() : ny;
        m.input_lags = j.contains("n_u") ? j.at("n_u").get<int>() : nu;
        if (j.contains("pow_mode")) {
            const auto mode = parse_pow_mode(j.at("pow_mode").get<std::string>());
            if (!mode) {
                throw validation_error("pow_mode must be \"libm\" or \"repeated\"");
            }
            m.pow_mode = *mode;
        }
        m.strict_equivalence = j.value("strict_equivalence", true);
        if (j.contains("steps")) {
            file.steps = j.at("steps").get<std::size_t>();
        }
        if (j.contains("assumptions")) {
            file.assumptions = j.at("assumptions").get<std::vector<std::string>>();
        }
        return file;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("model file field has the wrong type: ") + e.what());
    }
}

inline ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open model file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model_json(buffer.str());
}

inline std::string to_model_json(const ModelFile& file) {
    const auto& m = file.model;
    nlohmann::ordered_json j;
    j["name"] = m.name;
    auto extensions = nlohmann::ordered_json::array();
    for (const auto& e : m.extensions) {
        extensions.push_back(format_expression(e));
    }
    j["extensions"] = extensions;
    j["initial"] = m.initial;
    nlohmann::ordered_json input;
    switch (m.input.kind) {
    case InputSignal::Kind::none: input["kind"] = "none"; break;
    case InputSignal::Kind::cosine:
        input["kind"] = "cosine";
        input["amplitude"] = m.input.amplitude;
        if (m.input.sample_period_text.empty()) {
            input["ts"] = m.input.sample_period;
        } else {
            input["ts"] = m.input.sample_period_text;
        }
        break;
    case InputSignal::Kind::samples:
        input["kind"] = "samples";
        input["samples"] = m.input.samples;
        break;
    }
    j["input"] = input;
    j["n_y"] = m.output_lags;
    j["n_u"] = m.input_lags;
    j["pow_mode"] = std::string(to_string(m.pow_mode));
    j["strict_equivalence"] = m.strict_equivalence;
    if (file.steps) {
        j["steps"] = *file.steps;
    }
    if (!file.assumptions.empty()) {
        j["assumptions"] = file.assumptions;
    }
    return j.dump(2) + "\n";
}

inline ModelFile case_model_file(const CaseStudy& c) { return {c.model, c.default_steps, c.assumptions}; }

} // namespace lbe
