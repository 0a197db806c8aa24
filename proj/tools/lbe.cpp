// lbe: lower bound error analysis of polynomial NARMAX free-run simulation.
//
//   lbe run --case sine|duffing [options]
//   lbe run --model model.json [options]
//   lbe export --case sine|duffing [--out file.json]
//
// Exit codes: 0 ok, 2 validation, 3 fit, 4 I/O.

#include <lbe/lbe.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_fit = 3;
constexpr int exit_io = 4;

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw lbe::io_error("cannot write '" + path + "'");
    }
    out << contents;
    if (!out) {
        throw lbe::io_error("write failed for '" + path + "'");
    }
}

struct RunArgs {
    std::string case_id;
    std::string model_path;
    std::optional<std::size_t> steps;
    std::string pow_mode;
    std::optional<std::size_t> fit_start;
    std::optional<std::size_t> fit_end;
    double sat_fraction = 0.01;
    std::string out;
    bool per_orbit = false;
    bool sequential = false;
    bool allow_inequivalent = false;
    std::optional<double> amplitude;
    std::vector<double> initial;
};

lbe::RunInput select_input(const RunArgs& args) {
    if (!args.model_path.empty()) {
        if (args.amplitude || !args.initial.empty()) {
            throw lbe::validation_error("--amplitude and --initial apply to built-in cases; edit the model file instead");
        }
        return lbe::run_input(lbe::load_model_file(args.model_path));
    }
    if (args.case_id == "duffing") {
        lbe::DuffingOptions options;
        options.amplitude = args.amplitude;
        if (!args.initial.empty()) {
            options.initial = args.initial;
        }
        return lbe::run_input(lbe::duffing_ueda_case(options));
    }
    if (args.amplitude) {
        throw lbe::validation_error("--amplitude applies to the duffing case only");
    }
    auto c = lbe::sine_map_case();
    if (!args.initial.empty()) {
        c.model.initial = args.initial;
        c.assumptions.push_back("initial value overrides the reference x0 = 0.1");
    }
    return lbe::run_input(c);
}

int run_command(RunArgs args) {
    auto input = select_input(args);
    input.model.strict_equivalence = input.model.strict_equivalence && !args.allow_inequivalent;

    lbe::RunOptions options;
    options.steps = args.steps;
    if (!args.pow_mode.empty()) {
        options.pow_mode = lbe::parse_pow_mode(args.pow_mode);
    }
    options.fit_start = args.fit_start;
    options.fit_end = args.fit_end;
    options.window.sat_fraction = args.sat_fraction;
    options.per_orbit = args.per_orbit;
    options.execution = args.sequential ? lbe::Execution::sequential : lbe::Execution::parallel;

    auto result = lbe::run_analysis(input, options);
    result.report.csv_path = args.out.empty() ? result.report.model_name + ".csv" : args.out;
    write_file(result.report.csv_path, result.csv);
    std::cout << lbe::format_report(result.report);
    return result.report.fit ? exit_ok : exit_fit;
}

int export_command(const std::string& case_id, const std::string& out) {
    const auto c = lbe::find_case(case_id);
    const auto text = lbe::to_model_json(lbe::case_model_file(*c));
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_file(out, text);
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lower bound error and Lyapunov exponent of NARMAX free-run simulation"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "simulate all extensions and fit the error growth");
    auto* case_opt = run_cmd->add_option("--case", run.case_id, "built-in case study")
                         ->check(CLI::IsMember({"sine", "duffing"}));
    auto* model_opt = run_cmd->add_option("--model", run.model_path, "JSON model file");
    case_opt->excludes(model_opt);
    run_cmd->add_option("--n", run.steps, "number of steps N (orbit has N+1 points)");
    run_cmd->add_option("--pow-mode", run.pow_mode, "evaluation of x^k")->check(CLI::IsMember({"libm", "repeated"}));
    run_cmd->add_option("--fit-start", run.fit_start, "first step of the fit window");
    run_cmd->add_option("--fit-end", run.fit_end, "last step of the fit window");
    run_cmd->add_option("--sat-fraction", run.sat_fraction, "saturation threshold as a fraction of orbit range")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run.out, "CSV output path (default <model>.csv)");
    run_cmd->add_flag("--per-orbit", run.per_orbit, "add one CSV column per pseudo-orbit");
    run_cmd->add_flag("--sequential", run.sequential, "simulate extensions on one thread");
    run_cmd->add_flag("--allow-inequivalent", run.allow_inequivalent, "skip the equivalence check");
    run_cmd->add_option("--amplitude", run.amplitude, "input amplitude A (duffing case)");
    run_cmd->add_option("--initial", run.initial, "initial lags y0 .. y_{n_y-1} (built-in cases)");

    std::string export_case;
    std::string export_out;
    auto* export_cmd = app.add_subcommand("export", "write a built-in case as a model file");
    export_cmd->add_option("--case", export_case, "built-in case study")
        ->required()
        ->check(CLI::IsMember({"sine", "duffing"}));
    export_cmd->add_option("--out", export_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_validation;
    }

    try {
        if (run_cmd->parsed()) {
            if (run.case_id.empty() && run.model_path.empty()) {
                std::cerr << "error: run needs --case or --model\n";
                return exit_validation;
            }
            return run_command(run);
        }
        return export_command(export_case, export_out);
    } catch (const lbe::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const lbe::fit_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_fit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
}
