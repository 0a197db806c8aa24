// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <lbe/lbe.hpp>

#include "oracles.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <sys/wait.h>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace lbe;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string output;
    double seconds = 0.0;
    std::map<std::string, std::string> fields;
};

CliRun run_cli(const std::string& args) {
    CliRun r;
    const std::string command = std::string(LBE_CLI_PATH) + " " + args + " 2>&1";
    const auto start = std::chrono::steady_clock::now();
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    char buffer[4096];
    while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) {
        r.output += buffer;
    }
    const int status = pclose(pipe);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::istringstream lines(r.output);
    std::string line;
    while (std::getline(lines, line)) {
        const auto colon = line.find(": ");
        if (colon != std::string::npos && !r.fields.contains(line.substr(0, colon))) {
            r.fields[line.substr(0, colon)] = line.substr(colon + 2);
        }
    }
    return r;
}

double field_number(const CliRun& r, const std::string& key) {
    const auto it = r.fields.find(key);
    return it == r.fields.end() ? std::nan("") : std::stod(it->second);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

PseudoOrbitEnsemble ensemble_of(const std::vector<std::vector<double>>& rows) {
    PseudoOrbitEnsemble e;
    for (const auto& r : rows) {
        e.rows.push_back({r, std::nullopt});
    }
    return e;
}

struct Outcome {
    bool pass;
    std::string detail;
};

// 1
Outcome sine_lyapunov() {
    const auto r = run_cli("run --case sine --out acceptance_sine.csv");
    const double lambda = field_number(r, "lambda_bits_per_iteration");
    const double r2 = field_number(r, "r_squared");
    const bool pass = r.exit_code == 0 && lambda >= 1.00 && lambda <= 1.30 && r2 >= 0.9 && r.seconds < 1.0;
    std::ostringstream d;
    d << "lambda=" << lambda << " bits/iteration (target [1.00, 1.30]), r^2=" << r2 << ", window "
      << (r.fields.contains("fit_window") ? r.fields.at("fit_window") : "-") << ", runtime " << r.seconds << " s";
    return {pass, d.str()};
}

// 2
Outcome duffing_lyapunov() {
    const auto r = run_cli("run --case duffing --out acceptance_duffing.csv");
    const double lambda = field_number(r, "lambda_bits_per_iteration");
    const bool states_defaults = r.output.find("A = 11 is an assumed default") != std::string::npos &&
                                 r.output.find("initial lags y0 = y1 = y2 = 0 are an assumed default") !=
                                     std::string::npos;
    const bool pass = r.exit_code == 0 && lambda >= 0.09 && lambda <= 0.15 && states_defaults && r.seconds < 5.0;
    std::ostringstream d;
    d << "lambda=" << lambda << " bits/iteration (target [0.09, 0.15]), "
      << field_number(r, "lambda_bits_per_time") << " bits/time, " << field_number(r, "lambda_nats_per_time")
      << " nats/time, window " << (r.fields.contains("fit_window") ? r.fields.at("fit_window") : "-")
      << ", defaults reported " << (states_defaults ? "yes" : "no") << ", runtime " << r.seconds << " s";
    return {pass, d.str()};
}

// 3
Outcome two_row_reduction() {
    std::mt19937 rng(20240601);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto rows = test_support::random_rows(rng, 2, 64);
        const auto general = lbe_series(ensemble_of(rows));
        const auto pair = two_orbit_lbe(rows[0], rows[1]);
        for (std::size_t n = 0; n < rows[0].size(); ++n) {
            if (!same_bits(general[n].zeta, pair[n].zeta)) {
                ++mismatches;
            }
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatching steps over 1000 ensembles"};
}

// 4
Outcome brute_force_oracle() {
    std::mt19937 rng(777);
    std::uniform_int_distribution<std::size_t> pick_k(2, 6);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto rows = test_support::random_rows(rng, pick_k(rng), 48);
        const auto series = lbe_series(ensemble_of(rows));
        std::vector<double> column(rows.size());
        for (std::size_t n = 0; n < rows[0].size(); ++n) {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                column[r] = rows[r][n];
            }
            if (!same_bits(series[n].zeta, test_support::all_pairs_half_max(column))) {
                ++mismatches;
            }
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatching steps over 1000 ensembles"};
}

// 5
Outcome interval_mechanization() {
    const auto result = run_analysis(run_input(sine_map_case()), {});
    std::size_t checked = 0;
    std::size_t failures = 0;
    for (std::size_t n = 0; n < result.series.size(); ++n) {
        const auto& p = result.series[n];
        if (!p.valid || !(p.zeta > 0.0)) {
            continue;
        }
        ++checked;
        const bool touch = interval_check(result.ensemble, result.series, n, p.zeta).intersects;
        const bool apart = !interval_check(result.ensemble, result.series, n, 0.999 * p.zeta).intersects;
        if (!touch || !apart) {
            ++failures;
        }
    }
    return {checked > 0 && failures == 0,
            std::to_string(checked) + " steps checked, " + std::to_string(failures) + " failures"};
}

// 6
Outcome reference_orbit_bound() {
    using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<256>>;
    const Big a("2.6868");
    const Big b("0.2462");
    const auto c = sine_map_case();
    const auto ens = simulate_ensemble(c.model, 60);
    const auto series = lbe_series(ens);
    Big x(c.model.initial.front());
    std::size_t violations = 0;
    std::size_t checked = 0;
    for (std::size_t n = 0; n <= 60; ++n) {
        if (n > 0) {
            x = a * x - b * x * x * x;
        }
        if (!series[n].valid) {
            continue;
        }
        ++checked;
        Big worst = 0;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            worst = std::max(worst, Big(abs(x - Big(ens.at(i, n)))));
        }
        if (worst < Big(series[n].zeta)) {
            ++violations;
        }
    }
    return {violations == 0 && checked == 61,
            std::to_string(checked) + " steps checked, " + std::to_string(violations) + " violations"};
}

// 7
Outcome equivalence_gate() {
    std::size_t positive = 0;
    std::size_t expected = 0;
    for (const auto& texts : {std::vector<std::string_view>(sine_map_extensions.begin(), sine_map_extensions.end()),
                              std::vector<std::string_view>(duffing_ueda_extensions.begin(),
                                                            duffing_ueda_extensions.end())}) {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            for (std::size_t j = i + 1; j < texts.size(); ++j) {
                ++expected;
                if (check_equivalence(parse_expression(texts[i]), parse_expression(texts[j]))) {
                    ++positive;
                }
            }
        }
    }
    const bool perturbed = check_equivalence(parse_expression(sine_map_extensions[0]),
                                             parse_expression("2.6868*y(n-1) - 0.2463*y(n-1)^3"));
    return {positive == 12 && expected == 12 && !perturbed,
            std::to_string(positive) + "/" + std::to_string(expected) + " pairs equivalent, perturbed pair " +
                (perturbed ? "equivalent" : "rejected")};
}

// 8
Outcome exact_slope() {
    std::vector<LogPoint> points;
    for (std::size_t n = 0; n <= 40; ++n) {
        const double zeta = std::exp2(0.5 * static_cast<double>(n) - 10.0);
        points.push_back({n, std::log2(zeta)});
    }
    const auto fit = fit_lyapunov(points, {0, 40});
    std::ostringstream d;
    d.precision(17);
    d << "slope=" << fit.slope << ", |error|=" << std::fabs(fit.slope - 0.5);
    return {std::fabs(fit.slope - 0.5) <= 1e-12, d.str()};
}

// 9
Outcome determinism() {
    const auto a = run_cli("run --case sine --per-orbit --out acceptance_det_a.csv");
    const auto b = run_cli("run --case sine --per-orbit --out acceptance_det_b.csv");
    const auto csv_a = slurp("acceptance_det_a.csv");
    const bool csv_same = a.exit_code == 0 && b.exit_code == 0 && !csv_a.empty() && csv_a == slurp("acceptance_det_b.csv");

    bool ensembles_same = true;
    for (const auto& c : {sine_map_case(), duffing_ueda_case()}) {
        const auto seq = simulate_ensemble(c.model, c.default_steps, Execution::sequential);
        const auto par = simulate_ensemble(c.model, c.default_steps, Execution::parallel);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            for (std::size_t n = 0; n <= seq.steps(); ++n) {
                ensembles_same = ensembles_same && same_bits(seq.at(i, n), par.at(i, n));
            }
        }
    }
    return {csv_same && ensembles_same, std::string("CSV ") + (csv_same ? "identical" : "differs") +
                                            ", sequential vs parallel " + (ensembles_same ? "identical" : "differs")};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"sine map Lyapunov exponent", sine_lyapunov},
        {"Duffing-Ueda Lyapunov exponent", duffing_lyapunov},
        {"two-orbit reduction", two_row_reduction},
        {"brute-force pairwise oracle", brute_force_oracle},
        {"interval check at every sine step", interval_mechanization},
        {"high-precision reference orbit bound", reference_orbit_bound},
        {"equivalence gate", equivalence_gate},
        {"exact slope fit", exact_slope},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o{false, ""};
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
