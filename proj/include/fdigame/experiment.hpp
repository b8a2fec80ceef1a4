#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fdigame/game.hpp"

namespace fdigame {

inline constexpr std::uint64_t kDefaultSeed = 42;

enum class OutputFormat { Csv, Json };

/// Attacker deviation as written in a config: a canonical name
/// ("constant", "pulse", "ramp", "two_level"), mass-matched at build time,
/// or a fully specified signal.
using AttackerSpec = std::variant<std::string, AttackSignal>;

/// Detector deviation as written in a config.
struct DetectorSpec {
    enum class Kind { Canonical, TerminalLevel, TerminalCutoff, LikelihoodRatio };
    Kind kind = Kind::Canonical;
    std::string name;  ///< canonical: "terminal_strict", "terminal_half", "lr_pulse", "lr_ramp"
    double value = 0;  ///< level or cutoff
    std::optional<AttackerSpec> reference;
};

enum class PathDrift { Zero, Constant, Bridge };

/// Unvalidated game parameters as read from file and flags.
struct GameParams {
    double horizon = 1.0;
    double unsafe_slope = 1.5;
    double success_floor = 0.95;
    double false_alarm_budget = 0.05;
    bool symmetric = false;  ///< force success_floor = 1 - false_alarm_budget

    GameConfig validate() const;
};

struct ExperimentConfig {
    GameParams game;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
    std::string output_path;  ///< empty: stdout
    OutputFormat format = OutputFormat::Csv;

    // saddle
    std::uint64_t trials = 1'000'000;
    std::vector<AttackerSpec> attackers;  ///< empty: canonical library
    std::vector<DetectorSpec> detectors;  ///< empty: canonical library

    // paths
    PathDrift drift = PathDrift::Constant;
    double drift_level = 2.0;
    double bridge_target = 1.57;
    std::size_t path_count = 10;
    std::size_t steps = 1000;

    // exponents
    std::vector<double> horizons;
    ExponentRegime regime = ExponentRegime::FixedSignal;
};

/// Parses the YAML experiment format. Missing keys keep their defaults;
/// throws ConfigError on malformed values.
ExperimentConfig parse_experiment_config(const std::string& yaml_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Attacker deviations from a standalone YAML file with an `attackers:` list.
std::vector<AttackerSpec> load_attacker_specs(const std::string& path);

AttackSignal build_attacker(const AttackerSpec& spec, const GameConfig& config);
Detector build_detector(const DetectorSpec& spec, const GameConfig& config);

// Reports --------------------------------------------------------------------

struct ValueReport {
    GameConfig config;
    double theta_bar = 0;
    double mass_bound = 0;
    double detection_cutoff = 0;
    double log_lambda = 0;
    double game_value = 0;
    bool symmetric_case = false;
    double symmetric_value = 0;  ///< Phi(-sqrt(T) d), meaningful when symmetric_case
    double symmetric_gap = 0;    ///< |game_value - symmetric_value|
};

struct PathSet {
    double horizon = 0;
    std::string drift;
    std::uint64_t seed = 0;
    std::vector<Trajectory> paths;
};

ValueReport cmd_value(const ExperimentConfig& cfg);
SaddleReport cmd_saddle(const ExperimentConfig& cfg);
PathSet cmd_paths(const ExperimentConfig& cfg);
ExponentCurve cmd_exponents(const ExperimentConfig& cfg);

// Serialization --------------------------------------------------------------

std::string render_csv(const ValueReport& report);
std::string render_csv(const SaddleReport& report);
std::string render_csv(const PathSet& paths);
std::string render_csv(const ExponentCurve& curve);

nlohmann::json to_json(const GameConfig& config);
nlohmann::json to_json(const MonteCarloEstimate& estimate);
nlohmann::json to_json(const ValueReport& report);
nlohmann::json to_json(const SaddleReport& report);
nlohmann::json to_json(const PathSet& paths);
nlohmann::json to_json(const ExponentCurve& curve);

GameConfig game_config_from_json(const nlohmann::json& j);
MonteCarloEstimate estimate_from_json(const nlohmann::json& j);
ValueReport value_report_from_json(const nlohmann::json& j);
SaddleReport saddle_report_from_json(const nlohmann::json& j);
PathSet path_set_from_json(const nlohmann::json& j);
ExponentCurve exponent_curve_from_json(const nlohmann::json& j);

/// 12 significant digits, as used in every CSV cell.
std::string format_decimal(double v);

// Entry point ------------------------------------------------------------------

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitSaddleViolated = 2 };

/// Full command-line driver; `out` receives reports written to stdout,
/// `err` receives diagnostics and warnings.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdigame
