#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fdigame/experiment.hpp"

namespace fdigame {

namespace {

// Command-line values; each one, when given, overrides the config file.
struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<unsigned> workers;
    std::optional<double> horizon;
    std::optional<double> slope;
    std::optional<double> success_floor;
    std::optional<double> false_alarm;
    bool symmetric = false;

    std::optional<std::uint64_t> trials;
    std::optional<std::string> deviation_file;

    std::optional<std::string> drift;
    std::optional<double> level;
    std::optional<double> target;
    std::optional<std::size_t> count;
    std::optional<std::size_t> steps;

    std::optional<std::vector<double>> horizons;
    std::optional<std::string> regime;
};

void add_common(CLI::App& sub, Overrides& o) {
    sub.add_option("--config", o.config_path, "YAML experiment config");
    sub.add_option("--seed", o.seed, "Base seed (default 42)");
    sub.add_option("--out", o.out, "Output path (default stdout)");
    sub.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub.add_option("--workers", o.workers, "Monte Carlo worker threads, 0 = all cores");
    sub.add_option("--horizon", o.horizon, "Horizon T");
    sub.add_option("--slope", o.slope, "Unsafe slope d");
    sub.add_option("--success-floor", o.success_floor, "Attack success floor c");
    sub.add_option("--false-alarm", o.false_alarm, "False-alarm budget epsilon");
    sub.add_flag("--symmetric", o.symmetric, "Set c = 1 - epsilon");
}

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_experiment_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output_path = *o.out;
    if (o.format) cfg.format = *o.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (o.workers) cfg.workers = *o.workers;
    if (o.horizon) cfg.game.horizon = *o.horizon;
    if (o.slope) cfg.game.unsafe_slope = *o.slope;
    if (o.success_floor) cfg.game.success_floor = *o.success_floor;
    if (o.false_alarm) cfg.game.false_alarm_budget = *o.false_alarm;
    if (o.symmetric) cfg.game.symmetric = true;
    if (o.trials) cfg.trials = *o.trials;
    if (o.deviation_file) {
        const auto extra = load_attacker_specs(*o.deviation_file);
        cfg.attackers.insert(cfg.attackers.end(), extra.begin(), extra.end());
    }
    if (o.drift) {
        if (*o.drift == "zero") {
            cfg.drift = PathDrift::Zero;
        } else if (*o.drift == "constant") {
            cfg.drift = PathDrift::Constant;
        } else {
            cfg.drift = PathDrift::Bridge;
        }
    }
    if (o.level) cfg.drift_level = *o.level;
    if (o.target) cfg.bridge_target = *o.target;
    if (o.count) cfg.path_count = *o.count;
    if (o.steps) cfg.steps = *o.steps;
    if (o.horizons) cfg.horizons = *o.horizons;
    if (o.regime) cfg.regime = exponent_regime_from_string(*o.regime);
    cfg.game.validate();
    return cfg;
}

template <class Report>
void emit(const Report& report, const ExperimentConfig& cfg, std::ostream& out) {
    const std::string text = cfg.format == OutputFormat::Json ? to_json(report).dump(2) + "\n" : render_csv(report);
    if (cfg.output_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(cfg.output_path, std::ios::binary);
    if (!file) throw ConfigError("cannot write output file '" + cfg.output_path + "'");
    file << text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attacker-vs-detector drift game: closed forms, Monte Carlo checks, sample paths"};
    app.require_subcommand(1);
    Overrides o;

    auto* value = app.add_subcommand("value", "Closed-form saddle quantities");
    add_common(*value, o);

    auto* saddle = app.add_subcommand("saddle", "Monte Carlo check of the saddle-point inequalities");
    add_common(*saddle, o);
    saddle->add_option("--trials", o.trials, "Trials per estimate");
    saddle->add_option("--deviations", o.deviation_file, "YAML file with extra attacker deviations");

    auto* paths = app.add_subcommand("paths", "Sample paths as long-format CSV");
    add_common(*paths, o);
    paths->add_option("--drift", o.drift, "zero, constant or bridge")
        ->check(CLI::IsMember({"zero", "constant", "bridge"}));
    paths->add_option("--level", o.level, "Constant drift level");
    paths->add_option("--target", o.target, "Bridge target b");
    paths->add_option("--count", o.count, "Number of paths");
    paths->add_option("--steps", o.steps, "Euler steps per path");

    auto* exponents = app.add_subcommand("exponents", "Error-exponent curve of the saddle value");
    add_common(*exponents, o);
    exponents->add_option("--horizons", o.horizons, "Comma-separated horizons")->delimiter(',');
    exponents->add_option("--regime", o.regime, "fixed_signal or per_horizon")
        ->check(CLI::IsMember({"fixed_signal", "per_horizon"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const ExperimentConfig cfg = resolve(o);
        if (value->parsed()) {
            emit(cmd_value(cfg), cfg, out);
        } else if (saddle->parsed()) {
            const auto report = cmd_saddle(cfg);
            for (const auto& why : report.skipped) err << "warning: skipped deviation: " << why << '\n';
            emit(report, cfg, out);
            if (!report.all_pass()) {
                err << "saddle inequality violated beyond the Monte Carlo margin\n";
                return kExitSaddleViolated;
            }
        } else if (paths->parsed()) {
            emit(cmd_paths(cfg), cfg, out);
        } else {
            emit(cmd_exponents(cfg), cfg, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace fdigame
