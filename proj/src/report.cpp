#include <cmath>
#include <cstdio>
#include <sstream>

#include "fdigame/experiment.hpp"

namespace fdigame {

using nlohmann::json;

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Commands ------------------------------------------------------------------

ValueReport cmd_value(const ExperimentConfig& cfg) {
    const GameConfig game = cfg.game.validate();
    ValueReport r{game};
    r.theta_bar = game.threshold_drift();
    r.mass_bound = game.mass_bound();
    r.detection_cutoff = game.detection_cutoff();
    r.log_lambda = np_log_threshold(constant_bias_attack(game), game);
    r.game_value = static_cast<double>(game_value(game).value());
    const long double c = game.success_floor().value();
    r.symmetric_case = std::fabs(c - game.false_alarm_budget().complement()) <= 1e-15L;
    r.symmetric_value = static_cast<double>(phi_cdf(-std::sqrt(game.horizon()) * game.unsafe_slope()).value());
    r.symmetric_gap = r.symmetric_case ? std::abs(r.game_value - r.symmetric_value) : 0.0;
    return r;
}

SaddleReport cmd_saddle(const ExperimentConfig& cfg) {
    const GameConfig game = cfg.game.validate();
    if (cfg.trials == 0) throw ConfigError("saddle.trials must be at least 1");
    std::vector<AttackSignal> attackers;
    if (cfg.attackers.empty()) {
        attackers = canonical_attacker_deviations(game);
    } else {
        for (const auto& spec : cfg.attackers) attackers.push_back(build_attacker(spec, game));
    }
    std::vector<Detector> detectors;
    if (cfg.detectors.empty()) {
        detectors = canonical_detector_deviations(game);
    } else {
        for (const auto& spec : cfg.detectors) detectors.push_back(build_detector(spec, game));
    }
    return saddle_check(game, attackers, detectors, cfg.trials, cfg.seed, cfg.workers, OnInadmissible::Skip);
}

PathSet cmd_paths(const ExperimentConfig& cfg) {
    const GameConfig game = cfg.game.validate();
    if (cfg.path_count == 0) throw ConfigError("paths.count must be at least 1");
    if (cfg.steps == 0) throw ConfigError("paths.steps must be at least 1");
    Attack attack = AttackSignal::zero();
    switch (cfg.drift) {
        case PathDrift::Zero: break;
        case PathDrift::Constant: attack = AttackSignal::constant(cfg.drift_level); break;
        case PathDrift::Bridge: attack = bridge_attack(cfg.bridge_target, game); break;
    }
    PathSet set{game.horizon(), describe(attack), cfg.seed, {}};
    set.paths.reserve(cfg.path_count);
    for (std::size_t i = 0; i < cfg.path_count; ++i) {
        RandomStream rng(cfg.seed, i);
        set.paths.push_back(simulate_path(attack, game, cfg.steps, rng));
    }
    return set;
}

ExponentCurve cmd_exponents(const ExperimentConfig& cfg) {
    const GameConfig game = cfg.game.validate();
    if (cfg.horizons.empty()) throw ConfigError("exponents.horizons must not be empty");
    return exponent_curve(game, cfg.horizons, cfg.regime);
}

// CSV -------------------------------------------------------------------------

std::string render_csv(const ValueReport& r) {
    std::ostringstream os;
    os << "# fdigame value v1: quantity,value\n";
    os << "quantity,value\n";
    auto row = [&](const char* name, double v) { os << name << ',' << format_decimal(v) << '\n'; };
    row("horizon", r.config.horizon());
    row("unsafe_slope", r.config.unsafe_slope());
    row("success_floor", static_cast<double>(r.config.success_floor().value()));
    row("false_alarm_budget", static_cast<double>(r.config.false_alarm_budget().value()));
    row("theta_bar", r.theta_bar);
    row("mass_bound", r.mass_bound);
    row("detection_cutoff", r.detection_cutoff);
    row("log_lambda", r.log_lambda);
    row("game_value", r.game_value);
    row("symmetric_case", r.symmetric_case ? 1.0 : 0.0);
    row("symmetric_value", r.symmetric_value);
    row("symmetric_gap", r.symmetric_gap);
    return os.str();
}

std::string render_csv(const SaddleReport& r) {
    std::ostringstream os;
    os << "# fdigame saddle v1: kind,description,mass,alpha,alpha_stderr,beta,beta_stderr,closed_form,difference,"
          "margin,pass\n";
    os << "kind,description,mass,alpha,alpha_stderr,beta,beta_stderr,closed_form,difference,margin,pass\n";
    const auto& star = r.beta_star_mc;
    os << "value," << quoted(constant_bias_attack(r.config).describe()) << ','
       << format_decimal(r.config.mass_bound()) << ",,," << format_decimal(star.value()) << ','
       << format_decimal(star.standard_error) << ',' << format_decimal(static_cast<double>(r.value_closed_form.value()))
       << ',' << format_decimal(star.value() - static_cast<double>(r.value_closed_form.value())) << ','
       << format_decimal(r.value_margin) << ',' << (r.value_consistent ? "pass" : "fail") << '\n';
    for (const auto& a : r.attacker_deviations) {
        os << "attacker," << quoted(a.description) << ',' << format_decimal(a.mass) << ",,,"
           << format_decimal(a.beta.value()) << ',' << format_decimal(a.beta.standard_error) << ','
           << format_decimal(a.closed_form_beta) << ',' << format_decimal(a.difference) << ','
           << format_decimal(a.margin) << ',' << (a.pass ? "pass" : "fail") << '\n';
    }
    for (const auto& d : r.detector_deviations) {
        os << "detector," << quoted(d.description) << ",," << format_decimal(d.alpha.value()) << ','
           << format_decimal(d.alpha.standard_error) << ',' << format_decimal(d.beta.value()) << ','
           << format_decimal(d.beta.standard_error) << ",," << format_decimal(d.difference) << ','
           << format_decimal(d.margin) << ',' << (d.pass ? "pass" : "fail") << '\n';
    }
    return os.str();
}

std::string render_csv(const PathSet& set) {
    std::ostringstream os;
    os << "# fdigame paths v1: path_id,t,x\n";
    os << "path_id,t,x\n";
    for (std::size_t id = 0; id < set.paths.size(); ++id) {
        const auto& path = set.paths[id];
        const auto values = path.values();
        for (std::size_t k = 0; k < values.size(); ++k) {
            os << id << ',' << format_decimal(path.time(k)) << ',' << format_decimal(values[k]) << '\n';
        }
    }
    return os.str();
}

std::string render_csv(const ExponentCurve& curve) {
    std::ostringstream os;
    os << "# fdigame exponents v1: T,theta_bar,neg_log_beta,first_order_term,second_order_term,hoeffding_bound,"
          "residual\n";
    os << "T,theta_bar,neg_log_beta,first_order_term,second_order_term,hoeffding_bound,residual\n";
    for (const auto& row : curve.rows) {
        os << format_decimal(row.horizon) << ',' << format_decimal(row.theta_bar) << ','
           << format_decimal(row.neg_log_beta) << ',' << format_decimal(row.first_order_term) << ','
           << format_decimal(row.second_order_term) << ',' << format_decimal(row.hoeffding_bound) << ','
           << format_decimal(row.residual) << '\n';
    }
    return os.str();
}

// JSON ------------------------------------------------------------------------

json to_json(const GameConfig& c) {
    return {{"horizon", c.horizon()},
            {"unsafe_slope", c.unsafe_slope()},
            {"success_floor", static_cast<double>(c.success_floor().value())},
            {"false_alarm_budget", static_cast<double>(c.false_alarm_budget().value())}};
}

GameConfig game_config_from_json(const json& j) {
    return GameConfig(j.at("horizon").get<double>(), j.at("unsafe_slope").get<double>(),
                      j.at("success_floor").get<double>(), j.at("false_alarm_budget").get<double>());
}

json to_json(const MonteCarloEstimate& e) {
    return {{"estimate", e.value()}, {"standard_error", e.standard_error}, {"trials", e.trials}, {"seed", e.seed}};
}

MonteCarloEstimate estimate_from_json(const json& j) {
    return {Probability(j.at("estimate").get<double>()), j.at("standard_error").get<double>(),
            j.at("trials").get<std::uint64_t>(), j.at("seed").get<std::uint64_t>()};
}

json to_json(const ValueReport& r) {
    return {{"report", "value"},
            {"config", to_json(r.config)},
            {"theta_bar", r.theta_bar},
            {"mass_bound", r.mass_bound},
            {"detection_cutoff", r.detection_cutoff},
            {"log_lambda", r.log_lambda},
            {"game_value", r.game_value},
            {"symmetric_case", r.symmetric_case},
            {"symmetric_value", r.symmetric_value},
            {"symmetric_gap", r.symmetric_gap}};
}

ValueReport value_report_from_json(const json& j) {
    ValueReport r{game_config_from_json(j.at("config"))};
    r.theta_bar = j.at("theta_bar").get<double>();
    r.mass_bound = j.at("mass_bound").get<double>();
    r.detection_cutoff = j.at("detection_cutoff").get<double>();
    r.log_lambda = j.at("log_lambda").get<double>();
    r.game_value = j.at("game_value").get<double>();
    r.symmetric_case = j.at("symmetric_case").get<bool>();
    r.symmetric_value = j.at("symmetric_value").get<double>();
    r.symmetric_gap = j.at("symmetric_gap").get<double>();
    return r;
}

json to_json(const SaddleReport& r) {
    json attackers = json::array();
    for (const auto& a : r.attacker_deviations) {
        attackers.push_back({{"description", a.description},
                             {"mass", a.mass},
                             {"beta", to_json(a.beta)},
                             {"closed_form_beta", a.closed_form_beta},
                             {"best_response", a.best_response},
                             {"difference", a.difference},
                             {"margin", a.margin},
                             {"pass", a.pass}});
    }
    json detectors = json::array();
    for (const auto& d : r.detector_deviations) {
        detectors.push_back({{"description", d.description},
                             {"alpha", to_json(d.alpha)},
                             {"beta", to_json(d.beta)},
                             {"difference", d.difference},
                             {"margin", d.margin},
                             {"pass", d.pass}});
    }
    return {{"report", "saddle"},
            {"config", to_json(r.config)},
            {"value_closed_form", static_cast<double>(r.value_closed_form.value())},
            {"beta_star_mc", to_json(r.beta_star_mc)},
            {"value_margin", r.value_margin},
            {"value_consistent", r.value_consistent},
            {"attacker_deviations", attackers},
            {"detector_deviations", detectors},
            {"skipped", r.skipped},
            {"all_pass", r.all_pass()}};
}

SaddleReport saddle_report_from_json(const json& j) {
    SaddleReport r{game_config_from_json(j.at("config")), Probability(j.at("value_closed_form").get<double>()),
                   estimate_from_json(j.at("beta_star_mc"))};
    r.value_margin = j.at("value_margin").get<double>();
    r.value_consistent = j.at("value_consistent").get<bool>();
    for (const auto& a : j.at("attacker_deviations")) {
        AttackerDeviationResult row;
        row.description = a.at("description").get<std::string>();
        row.mass = a.at("mass").get<double>();
        row.beta = estimate_from_json(a.at("beta"));
        row.closed_form_beta = a.at("closed_form_beta").get<double>();
        row.best_response = a.at("best_response").get<double>();
        row.difference = a.at("difference").get<double>();
        row.margin = a.at("margin").get<double>();
        row.pass = a.at("pass").get<bool>();
        r.attacker_deviations.push_back(std::move(row));
    }
    for (const auto& d : j.at("detector_deviations")) {
        DetectorDeviationResult row;
        row.description = d.at("description").get<std::string>();
        row.alpha = estimate_from_json(d.at("alpha"));
        row.beta = estimate_from_json(d.at("beta"));
        row.difference = d.at("difference").get<double>();
        row.margin = d.at("margin").get<double>();
        row.pass = d.at("pass").get<bool>();
        r.detector_deviations.push_back(std::move(row));
    }
    r.skipped = j.at("skipped").get<std::vector<std::string>>();
    return r;
}

json to_json(const PathSet& set) {
    json paths = json::array();
    for (const auto& p : set.paths) paths.push_back(std::vector<double>(p.values().begin(), p.values().end()));
    return {{"report", "paths"}, {"horizon", set.horizon}, {"drift", set.drift}, {"seed", set.seed}, {"paths", paths}};
}

PathSet path_set_from_json(const json& j) {
    PathSet set{j.at("horizon").get<double>(), j.at("drift").get<std::string>(), j.at("seed").get<std::uint64_t>(),
                {}};
    for (const auto& p : j.at("paths")) set.paths.emplace_back(set.horizon, p.get<std::vector<double>>());
    return set;
}

json to_json(const ExponentCurve& curve) {
    json rows = json::array();
    for (const auto& r : curve.rows) {
        rows.push_back({{"T", r.horizon},
                        {"theta_bar", r.theta_bar},
                        {"neg_log_beta", r.neg_log_beta},
                        {"relative_entropy_rate", r.relative_entropy_rate},
                        {"variance_rate", r.variance_rate},
                        {"first_order_term", r.first_order_term},
                        {"second_order_term", r.second_order_term},
                        {"hoeffding_bound", r.hoeffding_bound},
                        {"residual", r.residual},
                        {"first_order_ratio", r.first_order_ratio}});
    }
    return {{"report", "exponents"},
            {"regime", to_string(curve.regime)},
            {"template_horizon", curve.template_horizon},
            {"false_alarm_budget", static_cast<double>(curve.false_alarm_budget.value())},
            {"rows", rows}};
}

ExponentCurve exponent_curve_from_json(const json& j) {
    ExponentCurve curve;
    curve.regime = exponent_regime_from_string(j.at("regime").get<std::string>());
    curve.template_horizon = j.at("template_horizon").get<double>();
    curve.false_alarm_budget = Probability(j.at("false_alarm_budget").get<double>());
    for (const auto& r : j.at("rows")) {
        ExponentRow row;
        row.horizon = r.at("T").get<double>();
        row.theta_bar = r.at("theta_bar").get<double>();
        row.neg_log_beta = r.at("neg_log_beta").get<double>();
        row.relative_entropy_rate = r.at("relative_entropy_rate").get<double>();
        row.variance_rate = r.at("variance_rate").get<double>();
        row.first_order_term = r.at("first_order_term").get<double>();
        row.second_order_term = r.at("second_order_term").get<double>();
        row.hoeffding_bound = r.at("hoeffding_bound").get<double>();
        row.residual = r.at("residual").get<double>();
        row.first_order_ratio = r.at("first_order_ratio").get<double>();
        curve.rows.push_back(row);
    }
    return curve;
}

}  // namespace fdigame
