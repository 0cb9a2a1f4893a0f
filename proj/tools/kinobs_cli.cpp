// Command-line front end: twin runs, gain sweeps and the observability check.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinobs/assimilation.hpp"
#include "kinobs/config.hpp"
#include "kinobs/errors.hpp"
#include "kinobs/io.hpp"
#include "kinobs/metrics.hpp"
#include "kinobs/observation.hpp"
#include "kinobs/report.hpp"

namespace {

using namespace kinobs;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool with_config = true) {
    if (with_config) app->add_option("config", c.config, "configuration file")->required();
    app->add_option("--out", c.out, "output CSV path");
    app->add_option("--seed", c.seed, "seed for uniform noise");
    app->add_flag("--quiet", c.quiet, "suppress the summary");
}

ParsedConfig load(const Common& c) {
    ParsedConfig p = parse_config(c.config);
    if (c.seed && p.run.noise) p.run.noise->seed = *c.seed;
    return p;
}

std::string output_path(const Common& c, const ParsedConfig& p) {
    if (!c.out.empty()) return c.out;
    return p.csv.value_or("");
}

int run_single(const Common& c, bool shallow_water) {
    const ParsedConfig p = load(c);
    const bool is_sw = p.run.model == ModelKind::ShallowWater;
    if (is_sw != shallow_water) {
        throw ConfigError(std::string("model.type: ") +
                          (shallow_water ? "run-sv needs shallow_water" : "run-burgers needs burgers or advection"));
    }
    const RunResult r = run_twin(p.run);
    std::string summary = "steps " + std::to_string(r.steps) + "\n" +
                          "t_end " + format_double(r.t_end) + "\n" +
                          "final_l1_rel " + format_double(r.errors.l1_rel.back()) + "\n" +
                          "final_sobolev " + format_double(r.errors.sobolev.back()) + "\n" +
                          "final_energy " + format_double(r.energy.back()) + "\n";
    const std::string out = output_path(c, p);
    if (!out.empty()) {
        emit_csv(r, out);
        write_report(out + ".report.txt", p.run, summary);
    }
    if (!c.quiet) std::cout << summary;
    return 0;
}

int run_sweep(const Common& c, const std::string& lambdas_text, int jobs) {
    const ParsedConfig p = load(c);
    std::vector<double> lambdas;
    for (auto part : split(lambdas_text, ',')) {
        try {
            lambdas.push_back(parse_double(part));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--lambdas: ") + e.what());
        }
        if (!(lambdas.back() >= 0.0)) throw ConfigError("--lambdas: values must be nonnegative");
    }
    const auto sweep = sweep_lambda(p.run, lambdas, jobs);
    std::string summary;
    std::vector<double> ls;
    std::vector<double> es;
    bool sorted = true;
    for (const auto& e : sweep) {
        summary += "lambda " + format_double(e.lambda) + " l1_rel " + format_double(e.final_l1_rel) +
                   " sobolev " + format_double(e.final_sobolev) +
                   (e.ok ? std::string() : " failed: " + e.message) + "\n";
        if (!ls.empty() && !(e.lambda > ls.back())) sorted = false;
        ls.push_back(e.lambda);
        es.push_back(e.final_sobolev);
    }
    if (ls.size() >= 3 && sorted) {
        try {
            const SweepMinimum m = sweep_minimum(ls, es);
            summary += "lambda_opt " + format_double(m.lambda_opt) + " interior " +
                       (m.is_interior ? "true" : "false") + "\n";
        } catch (const std::invalid_argument&) {
            summary += "lambda_opt none\n";
        }
    }
    const std::string out = output_path(c, p);
    if (!out.empty()) {
        emit_csv(sweep, out);
        write_report(out + ".report.txt", p.run, summary);
    }
    if (!c.quiet) std::cout << summary;
    return 0;
}

int run_observability(double speed, const std::string& interval, double horizon, bool quiet) {
    const auto parts = split(interval, ',');
    if (parts.size() != 2) throw ConfigError("--interval: expected a,b");
    double a = 0.0;
    double b = 0.0;
    try {
        a = parse_double(parts[0]);
        b = parse_double(parts[1]);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--interval: ") + e.what());
    }
    Observability o{};
    try {
        o = observability_check(speed, a, b, horizon);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!quiet) {
        std::cout << "observable=" << (o.observable ? "true" : "false") << "\n"
                  << "T_min=" << format_double(o.T_min) << "\n"
                  << "X_inf=" << format_double(o.X_inf) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kinetic nudging observers for Burgers and shallow water"};
    app.require_subcommand(1);

    Common burgers, sv, sweep, obs;
    auto* cmd_burgers = app.add_subcommand("run-burgers", "scalar twin experiment");
    add_common(cmd_burgers, burgers);
    auto* cmd_sv = app.add_subcommand("run-sv", "shallow-water twin experiment");
    add_common(cmd_sv, sv);

    auto* cmd_sweep = app.add_subcommand("sweep-lambda", "final errors over a list of gains");
    add_common(cmd_sweep, sweep);
    std::string lambdas;
    int jobs = 1;
    cmd_sweep->add_option("--lambdas", lambdas, "comma-separated gains")->required();
    cmd_sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

    auto* cmd_obs = app.add_subcommand("observability", "constant-speed observability test");
    add_common(cmd_obs, obs, false);
    double speed = 0.0;
    double horizon = 0.0;
    std::string interval;
    cmd_obs->add_option("--speed", speed, "transport speed")->required();
    cmd_obs->add_option("--interval", interval, "observed interval a,b")->required();
    cmd_obs->add_option("--horizon", horizon, "observation horizon T")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*cmd_burgers) return run_single(burgers, false);
        if (*cmd_sv) return run_single(sv, true);
        if (*cmd_sweep) return run_sweep(sweep, lambdas, jobs);
        if (*cmd_obs) return run_observability(speed, interval, horizon, obs.quiet);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
