#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "fdigame/experiment.hpp"

using namespace fdigame;

namespace {

const std::string kData = FDIGAME_TEST_DATA_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fdigame");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("config defaults") {
    const auto cfg = parse_experiment_config("");
    CHECK(cfg.seed == kDefaultSeed);
    CHECK(cfg.game.horizon == 1.0);
    CHECK(cfg.game.unsafe_slope == 1.5);
    CHECK(cfg.trials == 1000000);
    CHECK(cfg.format == OutputFormat::Csv);
    CHECK(cfg.attackers.empty());
    CHECK(cfg.regime == ExponentRegime::FixedSignal);
}

TEST_CASE("full config file") {
    const auto cfg = load_experiment_config(kData + "/full.yaml");
    CHECK(cfg.game.horizon == 2.0);
    CHECK(cfg.seed == 9);
    CHECK(cfg.workers == 2);
    CHECK(cfg.format == OutputFormat::Json);
    CHECK(cfg.trials == 5000);
    REQUIRE(cfg.attackers.size() == 2);
    CHECK(std::get<std::string>(cfg.attackers[0]) == "pulse");
    REQUIRE(cfg.detectors.size() == 4);
    CHECK(cfg.detectors[1].kind == DetectorSpec::Kind::TerminalLevel);
    CHECK(cfg.detectors[2].kind == DetectorSpec::Kind::TerminalCutoff);
    CHECK(cfg.detectors[3].kind == DetectorSpec::Kind::LikelihoodRatio);
    CHECK(cfg.drift == PathDrift::Bridge);
    CHECK(cfg.bridge_target == 2.5);
    CHECK(cfg.horizons == std::vector<double>{1, 2, 3, 4, 5});
    CHECK(cfg.regime == ExponentRegime::PerHorizon);

    const auto game = cfg.game.validate();
    const auto pulse = build_attacker(cfg.attackers[0], game);
    CHECK(is_admissible_attack(pulse, game));
    CHECK_FALSE(pulse.is_constant(game.horizon()));
    const auto detector = build_detector(cfg.detectors[2], game);
    CHECK(std::get<TerminalThreshold>(detector.form()).cutoff == 5.0);
}

TEST_CASE("config errors name the field") {
    CHECK_THROWS_WITH_AS(parse_experiment_config("game: {horizon: 1, colour: red}"),
                         doctest::Contains("unknown key 'colour'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_experiment_config("game: {horizon: abc}"), doctest::Contains("game.horizon"),
                         ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("output: {format: xml}"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("saddle: {attackers: [wobble]}"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("saddle: {detectors: [{type: terminal}]}"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("exponents: {regime: linear}"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("game: [1, 2"), ConfigError);
    CHECK_THROWS_AS(load_experiment_config(kData + "/missing.yaml"), ConfigError);

    GameParams params;
    params.success_floor = 0.4;
    CHECK_THROWS_WITH_AS(params.validate(), "success_floor must exceed 0.5", ConfigError);
    params.success_floor = 0.95;
    params.false_alarm_budget = 0.05;
    params.symmetric = true;
    CHECK(params.validate().success_floor().value() == doctest::Approx(0.95));
}

TEST_CASE("value command") {
    const auto r = cli({"value"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("# fdigame value v1", 0) == 0);
    CHECK(r.out.find("game_value,0.0668072012689\n") != std::string::npos);
    CHECK(r.out.find("theta_bar,3.14485362695\n") != std::string::npos);

    const auto bad = cli({"value", "--success-floor", "0.4"});
    CHECK(bad.code == kExitUsage);
    CHECK(bad.err.find("success_floor must exceed 0.5") != std::string::npos);

    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"dance"}).code == kExitUsage);
    CHECK(cli({"value", "--format", "xml"}).code == kExitUsage);
}

TEST_CASE("saddle command") {
    const auto ok = cli({"saddle", "--trials", "100000", "--workers", "2"});
    CHECK(ok.code == kExitOk);
    CHECK(count_lines(ok.out) == 2 + 1 + 3 + 4);

    const auto zero = cli({"saddle", "--trials", "0"});
    CHECK(zero.code == kExitUsage);
    CHECK(zero.err.rfind("error: ", 0) == 0);

    const auto weak = cli({"saddle", "--trials", "20000", "--deviations", kData + "/weak_deviation.yaml"});
    CHECK(weak.code == kExitOk);
    CHECK(weak.err.find("warning: skipped deviation: constant(level=1)") != std::string::npos);
}

TEST_CASE("saddle output is deterministic across runs and worker counts") {
    const auto a = cli({"saddle", "--trials", "50000", "--workers", "1", "--seed", "5"});
    const auto b = cli({"saddle", "--trials", "50000", "--workers", "4", "--seed", "5"});
    const auto c = cli({"saddle", "--trials", "50000", "--workers", "4", "--seed", "5"});
    CHECK(a.out == b.out);
    CHECK(b.out == c.out);
    const auto d = cli({"saddle", "--trials", "50000", "--seed", "6"});
    CHECK(d.out != a.out);
}

TEST_CASE("paths command") {
    const auto r = cli({"paths", "--drift", "constant", "--level", "2", "--count", "10", "--steps", "1000", "--seed",
                        "7"});
    CHECK(r.code == kExitOk);
    CHECK(count_lines(r.out) == 2 + 10 * 1001);

    const auto zero = cli({"paths", "--drift", "zero", "--count", "200", "--steps", "10"});
    std::istringstream lines(zero.out);
    std::string line;
    double terminal_sum = 0.0;
    int terminals = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("#", 0) == 0 || line.rfind("path_id", 0) == 0) continue;
        if (line.find(",1,") == std::string::npos) continue;
        terminal_sum += std::stod(line.substr(line.rfind(',') + 1));
        ++terminals;
    }
    CHECK(terminals == 200);
    CHECK(std::abs(terminal_sum / terminals) <= 4.0 / std::sqrt(200.0));

    const auto bridge = cli({"paths", "--drift", "bridge", "--target", "1.57", "--format", "json", "--steps", "10000"});
    REQUIRE(bridge.code == kExitOk);
    const auto set = path_set_from_json(nlohmann::json::parse(bridge.out));
    for (const auto& p : set.paths) CHECK(std::abs(p.terminal() - 1.57) <= 0.05);

    const auto outside = cli({"paths", "--drift", "bridge", "--target", "1.7"});
    CHECK(outside.code == kExitUsage);
    CHECK(outside.err.find("1.64485362695") != std::string::npos);
}

TEST_CASE("exponents command") {
    const auto r = cli({"exponents", "--horizons", "1,2,3"});
    CHECK(r.code == kExitOk);
    CHECK(count_lines(r.out) == 2 + 3);
    CHECK(r.out.find("\n1,3.14485362695,2.70594440082,") != std::string::npos);

    CHECK(cli({"exponents"}).code == kExitUsage);
    CHECK(cli({"exponents", "--horizons", "1,-2"}).code == kExitUsage);
    CHECK(cli({"exponents", "--horizons", "3,1"}).code == kExitUsage);
}

TEST_CASE("output file and config override") {
    const auto path = std::filesystem::temp_directory_path() / "fdigame_value_test.json";
    std::filesystem::remove(path);
    const auto r = cli({"value", "--config", kData + "/full.yaml", "--horizon", "1", "--out", path.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.empty());
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("report") == "value");
    CHECK(j.at("config").at("horizon") == 1.0);
    CHECK(j.at("config").at("unsafe_slope") == 1.0);
    std::filesystem::remove(path);
}

TEST_CASE("JSON round trips") {
    ExperimentConfig cfg;
    cfg.trials = 20000;
    cfg.horizons = {1, 10};
    cfg.path_count = 2;
    cfg.steps = 20;

    const auto value = to_json(cmd_value(cfg));
    CHECK(to_json(value_report_from_json(value)) == value);
    const auto saddle = to_json(cmd_saddle(cfg));
    CHECK(to_json(saddle_report_from_json(saddle)) == saddle);
    const auto paths = to_json(cmd_paths(cfg));
    CHECK(to_json(path_set_from_json(paths)) == paths);
    const auto curve = to_json(cmd_exponents(cfg));
    CHECK(to_json(exponent_curve_from_json(curve)) == curve);
}

TEST_CASE("symmetric value report") {
    ExperimentConfig cfg;
    cfg.game.symmetric = true;
    const auto r = cmd_value(cfg);
    CHECK(r.symmetric_case);
    CHECK(r.symmetric_gap <= 1e-15);
    CHECK(format_decimal(0.1) == "0.1");
    CHECK(format_decimal(1.0 / 3.0) == "0.333333333333");
}

TEST_CASE("CSV output matches golden files") {
    const auto read = [](const std::string& name) {
        std::ifstream in(kData + "/golden/" + name, std::ios::binary);
        std::ostringstream text;
        text << in.rdbuf();
        return text.str();
    };
    CHECK(cli({"value"}).out == read("value_default.csv"));
    CHECK(cli({"exponents", "--horizons", "1,2,5,10,100"}).out == read("exponents_default.csv"));
}

TEST_CASE("shipped example config holds the defaults") {
    const auto cfg = load_experiment_config(FDIGAME_EXAMPLE_CONFIG);
    const ExperimentConfig defaults;
    CHECK(cfg.game.horizon == defaults.game.horizon);
    CHECK(cfg.game.unsafe_slope == defaults.game.unsafe_slope);
    CHECK(cfg.game.success_floor == defaults.game.success_floor);
    CHECK(cfg.game.false_alarm_budget == defaults.game.false_alarm_budget);
    CHECK(cfg.seed == defaults.seed);
    CHECK(cfg.trials == defaults.trials);
    CHECK(cfg.drift_level == defaults.drift_level);
    CHECK(cfg.bridge_target == defaults.bridge_target);
    CHECK(cfg.path_count == defaults.path_count);
    CHECK(cfg.steps == defaults.steps);
    CHECK(cfg.horizons.size() == 100);
}
