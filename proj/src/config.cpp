#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fdigame/experiment.hpp"

namespace fdigame {

namespace {

void check_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) throw ConfigError("'" + section + "' must be a mapping");
    for (const auto& entry : node) {
        const auto key = entry.first.as<std::string>();
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError("unknown key '" + key + "' in " + section);
    }
}

template <class T>
T read(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("field '" + field + "' has an invalid value");
    }
}

template <class T>
void read_into(const YAML::Node& parent, const char* key, const std::string& section, T& out) {
    if (const auto node = parent[key]) out = read<T>(node, section + "." + key);
}

AttackSignal parse_signal(const YAML::Node& node, const std::string& field) {
    check_keys(node, field, {"type", "level", "height", "start", "width", "slope", "values"});
    if (!node["type"]) throw ConfigError("field '" + field + ".type' is required");
    const auto type = read<std::string>(node["type"], field + ".type");
    auto number = [&](const char* key) {
        if (!node[key]) throw ConfigError("field '" + field + "." + key + "' is required for type " + type);
        return read<double>(node[key], field + "." + key);
    };
    try {
        if (type == "zero") return AttackSignal::zero();
        if (type == "constant") return AttackSignal::constant(number("level"));
        if (type == "pulse") return AttackSignal::pulse(number("height"), number("start"), number("width"));
        if (type == "ramp") return AttackSignal::ramp(number("slope"));
        if (type == "piecewise") {
            if (!node["values"]) throw ConfigError("field '" + field + ".values' is required for type piecewise");
            return AttackSignal::piecewise(read<std::vector<double>>(node["values"], field + ".values"));
        }
    } catch (const DomainError& e) {
        throw ConfigError("field '" + field + "': " + e.what());
    }
    throw ConfigError("field '" + field + ".type' must be zero, constant, pulse, ramp or piecewise");
}

AttackerSpec parse_attacker(const YAML::Node& node, const std::string& field) {
    if (node.IsScalar()) {
        auto name = read<std::string>(node, field);
        if (name != "constant" && name != "pulse" && name != "ramp" && name != "two_level") {
            throw ConfigError("field '" + field + "': unknown canonical attacker '" + name +
                              "' (expected constant, pulse, ramp or two_level)");
        }
        return name;
    }
    return parse_signal(node, field);
}

DetectorSpec parse_detector(const YAML::Node& node, const std::string& field) {
    DetectorSpec spec;
    if (node.IsScalar()) {
        spec.name = read<std::string>(node, field);
        if (spec.name != "terminal_strict" && spec.name != "terminal_half" && spec.name != "lr_pulse" &&
            spec.name != "lr_ramp") {
            throw ConfigError("field '" + field + "': unknown canonical detector '" + spec.name +
                              "' (expected terminal_strict, terminal_half, lr_pulse or lr_ramp)");
        }
        return spec;
    }
    check_keys(node, field, {"type", "level", "cutoff", "reference"});
    if (!node["type"]) throw ConfigError("field '" + field + ".type' is required");
    const auto type = read<std::string>(node["type"], field + ".type");
    if (type == "terminal") {
        if (node["level"] && node["cutoff"]) throw ConfigError("field '" + field + "': give level or cutoff, not both");
        if (node["level"]) {
            spec.kind = DetectorSpec::Kind::TerminalLevel;
            spec.value = read<double>(node["level"], field + ".level");
        } else if (node["cutoff"]) {
            spec.kind = DetectorSpec::Kind::TerminalCutoff;
            spec.value = read<double>(node["cutoff"], field + ".cutoff");
        } else {
            throw ConfigError("field '" + field + "': terminal detector needs level or cutoff");
        }
        return spec;
    }
    if (type == "lr") {
        if (!node["reference"]) throw ConfigError("field '" + field + ".reference' is required for type lr");
        spec.kind = DetectorSpec::Kind::LikelihoodRatio;
        spec.reference = parse_attacker(node["reference"], field + ".reference");
        return spec;
    }
    throw ConfigError("field '" + field + ".type' must be terminal or lr");
}

std::vector<AttackerSpec> parse_attacker_list(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) throw ConfigError("field '" + field + "' must be a list");
    std::vector<AttackerSpec> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(parse_attacker(node[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<double> parse_horizons(const YAML::Node& node) {
    if (node.IsSequence()) return read<std::vector<double>>(node, "exponents.horizons");
    check_keys(node, "exponents.horizons", {"from", "to", "step"});
    double from = 1.0, to = 100.0, step = 1.0;
    read_into(node, "from", "exponents.horizons", from);
    read_into(node, "to", "exponents.horizons", to);
    read_into(node, "step", "exponents.horizons", step);
    if (!(step > 0.0) || !(to >= from)) throw ConfigError("exponents.horizons range needs step > 0 and to >= from");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(from + step * static_cast<double>(i));
    return out;
}

}  // namespace

GameConfig GameParams::validate() const {
    const double floor = symmetric ? 1.0 - false_alarm_budget : success_floor;
    return GameConfig(horizon, unsafe_slope, floor, false_alarm_budget);
}

ExperimentConfig parse_experiment_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    ExperimentConfig cfg;
    if (root.IsNull()) return cfg;
    check_keys(root, "config", {"game", "seed", "workers", "output", "saddle", "paths", "exponents"});

    if (const auto game = root["game"]) {
        check_keys(game, "game", {"horizon", "unsafe_slope", "success_floor", "false_alarm_budget", "symmetric"});
        read_into(game, "horizon", "game", cfg.game.horizon);
        read_into(game, "unsafe_slope", "game", cfg.game.unsafe_slope);
        read_into(game, "success_floor", "game", cfg.game.success_floor);
        read_into(game, "false_alarm_budget", "game", cfg.game.false_alarm_budget);
        read_into(game, "symmetric", "game", cfg.game.symmetric);
    }
    if (root["seed"]) cfg.seed = read<std::uint64_t>(root["seed"], "seed");
    if (root["workers"]) cfg.workers = read<unsigned>(root["workers"], "workers");
    if (const auto output = root["output"]) {
        check_keys(output, "output", {"path", "format"});
        read_into(output, "path", "output", cfg.output_path);
        if (output["format"]) {
            const auto format = read<std::string>(output["format"], "output.format");
            if (format == "csv") {
                cfg.format = OutputFormat::Csv;
            } else if (format == "json") {
                cfg.format = OutputFormat::Json;
            } else {
                throw ConfigError("output.format must be csv or json");
            }
        }
    }
    if (const auto saddle = root["saddle"]) {
        check_keys(saddle, "saddle", {"trials", "attackers", "detectors", "deviation_file"});
        read_into(saddle, "trials", "saddle", cfg.trials);
        if (saddle["attackers"]) cfg.attackers = parse_attacker_list(saddle["attackers"], "saddle.attackers");
        if (const auto detectors = saddle["detectors"]) {
            if (!detectors.IsSequence()) throw ConfigError("field 'saddle.detectors' must be a list");
            for (std::size_t i = 0; i < detectors.size(); ++i) {
                cfg.detectors.push_back(parse_detector(detectors[i], "saddle.detectors[" + std::to_string(i) + "]"));
            }
        }
        if (saddle["deviation_file"]) {
            const auto extra = load_attacker_specs(read<std::string>(saddle["deviation_file"], "saddle.deviation_file"));
            cfg.attackers.insert(cfg.attackers.end(), extra.begin(), extra.end());
        }
    }
    if (const auto paths = root["paths"]) {
        check_keys(paths, "paths", {"drift", "level", "target", "count", "steps"});
        if (paths["drift"]) {
            const auto drift = read<std::string>(paths["drift"], "paths.drift");
            if (drift == "zero") {
                cfg.drift = PathDrift::Zero;
            } else if (drift == "constant") {
                cfg.drift = PathDrift::Constant;
            } else if (drift == "bridge") {
                cfg.drift = PathDrift::Bridge;
            } else {
                throw ConfigError("paths.drift must be zero, constant or bridge");
            }
        }
        read_into(paths, "level", "paths", cfg.drift_level);
        read_into(paths, "target", "paths", cfg.bridge_target);
        read_into(paths, "count", "paths", cfg.path_count);
        read_into(paths, "steps", "paths", cfg.steps);
    }
    if (const auto exponents = root["exponents"]) {
        check_keys(exponents, "exponents", {"horizons", "regime"});
        if (exponents["horizons"]) cfg.horizons = parse_horizons(exponents["horizons"]);
        if (exponents["regime"]) {
            cfg.regime = exponent_regime_from_string(read<std::string>(exponents["regime"], "exponents.regime"));
        }
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment_config(text.str());
}

std::vector<AttackerSpec> load_attacker_specs(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw ConfigError("cannot read deviation file '" + path + "': " + e.what());
    }
    if (!root.IsMap() || !root["attackers"]) throw ConfigError("deviation file '" + path + "' needs an attackers list");
    check_keys(root, "deviation file", {"attackers"});
    return parse_attacker_list(root["attackers"], "attackers");
}

AttackSignal build_attacker(const AttackerSpec& spec, const GameConfig& config) {
    if (const auto* signal = std::get_if<AttackSignal>(&spec)) return *signal;
    const auto& name = std::get<std::string>(spec);
    if (name == "constant") return constant_bias_attack(config);
    const auto canonical = canonical_attacker_deviations(config);
    if (name == "pulse") return canonical[0];
    if (name == "ramp") return canonical[1];
    if (name == "two_level") return canonical[2];
    throw ConfigError("unknown canonical attacker '" + name + "'");
}

Detector build_detector(const DetectorSpec& spec, const GameConfig& config) {
    switch (spec.kind) {
        case DetectorSpec::Kind::TerminalLevel:
            if (!(spec.value > 0.0 && spec.value < 1.0)) throw ConfigError("terminal detector level must lie in (0, 1)");
            return terminal_detector_at_level(config, spec.value);
        case DetectorSpec::Kind::TerminalCutoff:
            return Detector::terminal(spec.value);
        case DetectorSpec::Kind::LikelihoodRatio:
            return lr_detector(build_attacker(*spec.reference, config), config);
        case DetectorSpec::Kind::Canonical:
            break;
    }
    const auto canonical = canonical_detector_deviations(config);
    if (spec.name == "terminal_strict") return canonical[0];
    if (spec.name == "terminal_half") return canonical[1];
    if (spec.name == "lr_pulse") return canonical[2];
    if (spec.name == "lr_ramp") return canonical[3];
    throw ConfigError("unknown canonical detector '" + spec.name + "'");
}

}  // namespace fdigame
