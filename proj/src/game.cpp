#include "fdigame/game.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace fdigame {

namespace {

double upper_quantile(const GameConfig& config) {
    return phi_inv(Probability(config.false_alarm_budget().complement()));
}

unsigned resolve_workers(unsigned workers, std::uint64_t trials) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1)));
}

// Counts trials k in [0, trials) for which hit(k) is true. Each worker takes
// a contiguous block of trial indices; the sum does not depend on the split.
template <class Hit>
std::uint64_t count_hits(std::uint64_t trials, unsigned workers, const Hit& hit) {
    workers = resolve_workers(workers, trials);
    std::vector<std::uint64_t> counts(workers, 0);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run_block = [&](unsigned w) {
        try {
            const std::uint64_t begin = trials * w / workers;
            const std::uint64_t end = trials * (w + 1) / workers;
            std::uint64_t local = 0;
            for (std::uint64_t k = begin; k < end; ++k) local += hit(k) ? 1 : 0;
            counts[w] = local;
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
    }
    if (failure) std::rethrow_exception(failure);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    return total;
}

void require_trials(std::uint64_t trials) {
    if (trials == 0) throw PreconditionError("Monte Carlo estimate needs at least one trial");
}

void require_matching_horizon(const LikelihoodRatio& rule, const GameConfig& config) {
    if (std::abs(rule.horizon - config.horizon()) > 1e-12 * config.horizon()) {
        throw DimensionError("likelihood-ratio detector calibrated for horizon " + std::to_string(rule.horizon) +
                             " used on horizon " + std::to_string(config.horizon()));
    }
}

// theta(t_k) for k = 0..steps-1 on the uniform grid.
std::vector<double> grid_values(const AttackSignal& signal, double horizon, std::size_t steps) {
    std::vector<double> out(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        out[k] = signal.value_at(horizon * static_cast<double>(k) / static_cast<double>(steps), horizon);
    }
    return out;
}

AttackSignal scaled(const AttackSignal& signal, double factor) {
    return std::visit(
        [&](const auto& f) -> AttackSignal {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, ZeroSignal>) {
                return AttackSignal::zero();
            } else if constexpr (std::is_same_v<F, ConstantBias>) {
                return AttackSignal::constant(f.level * factor);
            } else if constexpr (std::is_same_v<F, PiecewiseConstant>) {
                auto values = f.values;
                for (auto& v : values) v *= factor;
                return AttackSignal::piecewise(std::move(values));
            } else if constexpr (std::is_same_v<F, Pulse>) {
                return AttackSignal::pulse(f.height * factor, f.start, f.width);
            } else {
                return AttackSignal::ramp(f.slope * factor);
            }
        },
        signal.form());
}

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

MonteCarloEstimate MonteCarloEstimate::from_counts(std::uint64_t hits, std::uint64_t trials, std::uint64_t seed) {
    require_trials(trials);
    if (hits > trials) throw PreconditionError("hit count exceeds trial count");
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return {Probability(p), std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials, seed};
}

std::uint64_t MonteCarloEstimate::hits() const {
    return static_cast<std::uint64_t>(std::llround(value() * static_cast<double>(trials)));
}

// ---------------------------------------------------------------------------

Probability success_rate(const AttackSignal& signal, const GameConfig& config) {
    const double root_t = std::sqrt(config.horizon());
    return phi_cdf(attack_mass(signal, config) / root_t - root_t * config.unsafe_slope());
}

Probability success_rate(const Attack& attack, const GameConfig& config) {
    const auto* signal = std::get_if<AttackSignal>(&attack);
    if (signal == nullptr) {
        throw UnsupportedPolicyError("no closed-form success rate for " + describe(attack) + "; use estimate_gamma");
    }
    return success_rate(*signal, config);
}

bool is_admissible_attack(const AttackSignal& signal, const GameConfig& config) {
    return attack_mass(signal, config) >= config.mass_bound();
}

std::string attack_admissibility_violation(const AttackSignal& signal, const GameConfig& config) {
    const double mass = attack_mass(signal, config);
    const double bound = config.mass_bound();
    if (mass >= bound) return {};
    return signal.describe() + " violates the success-rate constraint: mass " + format_number(mass) +
           " < sqrt(T) Phi^-1(c) + T d = " + format_number(bound);
}

Probability game_value(const GameConfig& config) {
    return phi_cdf(upper_quantile(config) - phi_inv(config.success_floor()) -
                   std::sqrt(config.horizon()) * config.unsafe_slope());
}

Probability best_response_beta(const AttackSignal& signal, const GameConfig& config) {
    const double energy = attack_energy(signal, config);
    if (!(energy > 0.0)) {
        throw DegenerateReferenceError("best response undefined for zero-energy signal " + signal.describe());
    }
    return phi_cdf(upper_quantile(config) - std::sqrt(energy));
}

Probability terminal_detector_beta(const AttackSignal& signal, const GameConfig& config) {
    return phi_cdf(upper_quantile(config) - attack_mass(signal, config) / std::sqrt(config.horizon()));
}

Probability lr_detector_beta(const AttackSignal& reference, const AttackSignal& signal, const GameConfig& config) {
    const double energy = attack_energy(reference, config);
    if (!(energy > 0.0)) {
        throw DegenerateReferenceError("reference " + reference.describe() + " has zero energy");
    }
    const double overlap = signal_inner_product(reference, signal, config.horizon());
    return phi_cdf(upper_quantile(config) - overlap / std::sqrt(energy));
}

// ---------------------------------------------------------------------------

MonteCarloEstimate estimate_alpha(const Detector& detector, const GameConfig& config, std::uint64_t trials,
                                  std::uint64_t seed, unsigned workers) {
    require_trials(trials);
    std::uint64_t hits = 0;
    if (const auto* rule = std::get_if<TerminalThreshold>(&detector.form())) {
        const double root_t = std::sqrt(config.horizon());
        const double cutoff = rule->cutoff;
        hits = count_hits(trials, workers, [&](std::uint64_t k) {
            RandomStream rng(seed, k);
            return root_t * rng.normal() > cutoff;
        });
    } else {
        const auto& lr = std::get<LikelihoodRatio>(detector.form());
        require_matching_horizon(lr, config);
        const double energy = attack_energy(lr.reference, config);
        const double spread = std::sqrt(energy);
        hits = count_hits(trials, workers, [&](std::uint64_t k) {
            RandomStream rng(seed, k);
            return detector.decide_statistic({spread * rng.normal() - 0.5 * energy}) == Decision::RejectNull;
        });
    }
    return MonteCarloEstimate::from_counts(hits, trials, seed);
}

MonteCarloEstimate estimate_alpha_paths(const Detector& detector, const GameConfig& config, std::uint64_t trials,
                                        std::size_t steps, std::uint64_t seed, unsigned workers) {
    require_trials(trials);
    const Attack null_attack = AttackSignal::zero();
    const auto hits = count_hits(trials, workers, [&](std::uint64_t k) {
        RandomStream rng(seed, k);
        return detector.decide(simulate_path(null_attack, config, steps, rng)) == Decision::RejectNull;
    });
    return MonteCarloEstimate::from_counts(hits, trials, seed);
}

MonteCarloEstimate estimate_beta(const Detector& detector, const Attack& attack, const GameConfig& config,
                                 std::uint64_t trials, std::size_t steps, std::uint64_t seed, unsigned workers) {
    require_trials(trials);
    const double horizon = config.horizon();
    const double root_t = std::sqrt(horizon);
    const auto* terminal_rule = std::get_if<TerminalThreshold>(&detector.form());
    const auto* lr_rule = std::get_if<LikelihoodRatio>(&detector.form());
    if (lr_rule != nullptr) require_matching_horizon(*lr_rule, config);

    std::uint64_t accepted = 0;
    if (const auto* signal = std::get_if<AttackSignal>(&attack)) {
        if (terminal_rule != nullptr) {
            const double mass = attack_mass(*signal, config);
            const double cutoff = terminal_rule->cutoff;
            accepted = count_hits(trials, workers, [&](std::uint64_t k) {
                RandomStream rng(seed, k);
                return !(mass + root_t * rng.normal() > cutoff);
            });
        } else {
            // Under the attack, the integral of reference dx is N(<reference, theta>, energy).
            const double energy = attack_energy(lr_rule->reference, config);
            const double spread = std::sqrt(energy);
            const double shift = signal_inner_product(lr_rule->reference, *signal, horizon);
            accepted = count_hits(trials, workers, [&](std::uint64_t k) {
                RandomStream rng(seed, k);
                const LogLikelihood stat{shift + spread * rng.normal() - 0.5 * energy};
                return detector.decide_statistic(stat) == Decision::AcceptNull;
            });
        }
    } else {
        if (steps == 0) throw PreconditionError("feedback attacks need at least one simulation step");
        if (terminal_rule != nullptr) {
            const double cutoff = terminal_rule->cutoff;
            accepted = count_hits(trials, workers, [&](std::uint64_t k) {
                RandomStream rng(seed, k);
                return !(simulate_terminal(attack, config, steps, rng) > cutoff);
            });
        } else {
            const auto levels = grid_values(lr_rule->reference, horizon, steps);
            const double half_energy = 0.5 * attack_energy(lr_rule->reference, config);
            accepted = count_hits(trials, workers, [&](std::uint64_t k) {
                RandomStream rng(seed, k);
                double integral = 0.0;
                euler_walk(attack, horizon, steps, rng,
                           [&](std::size_t i, double x, double next) { integral += levels[i] * (next - x); });
                return detector.decide_statistic({integral - half_energy}) == Decision::AcceptNull;
            });
        }
    }
    return MonteCarloEstimate::from_counts(accepted, trials, seed);
}

MonteCarloEstimate estimate_gamma(const Attack& attack, const GameConfig& config, std::uint64_t trials,
                                  std::size_t steps, std::uint64_t seed, unsigned workers) {
    require_trials(trials);
    const double unsafe_level = config.horizon() * config.unsafe_slope();
    std::uint64_t hits = 0;
    if (const auto* signal = std::get_if<AttackSignal>(&attack)) {
        hits = count_hits(trials, workers, [&](std::uint64_t k) {
            RandomStream rng(seed, k);
            return sample_terminal(*signal, config, rng) > unsafe_level;
        });
    } else {
        if (steps == 0) throw PreconditionError("feedback attacks need at least one simulation step");
        hits = count_hits(trials, workers, [&](std::uint64_t k) {
            RandomStream rng(seed, k);
            return simulate_terminal(attack, config, steps, rng) > unsafe_level;
        });
    }
    return MonteCarloEstimate::from_counts(hits, trials, seed);
}

// ---------------------------------------------------------------------------

bool SaddleReport::all_pass() const {
    if (!value_consistent) return false;
    for (const auto& a : attacker_deviations) {
        if (!a.pass) return false;
    }
    for (const auto& d : detector_deviations) {
        if (!d.pass) return false;
    }
    return true;
}

SaddleReport saddle_check(const GameConfig& config, std::span<const AttackSignal> attacker_deviations,
                          std::span<const Detector> detector_deviations, std::uint64_t trials, std::uint64_t seed,
                          unsigned workers, OnInadmissible on_inadmissible) {
    require_trials(trials);
    std::vector<std::string> skipped;
    auto reject = [&](std::string why) {
        if (on_inadmissible == OnInadmissible::Throw) throw InadmissibleDeviationError(why);
        skipped.push_back(std::move(why));
    };
    for (const auto& signal : attacker_deviations) {
        if (auto why = attack_admissibility_violation(signal, config); !why.empty()) reject(std::move(why));
    }

    const Attack saddle_attack = constant_bias_attack(config);
    const Detector saddle_detector = terminal_detector(config);
    const double epsilon = static_cast<double>(config.false_alarm_budget().value());

    SaddleReport report{config, game_value(config),
                        estimate_beta(saddle_detector, saddle_attack, config, trials, 1, derive_seed(seed, 0), workers)};
    const auto& star = report.beta_star_mc;
    const double value = static_cast<double>(report.value_closed_form.value());
    report.value_margin = kMarginStdErrs * star.standard_error - std::abs(star.value() - value);
    report.value_consistent = report.value_margin >= 0.0;

    std::uint64_t label = 1;
    for (const auto& signal : attacker_deviations) {
        if (!is_admissible_attack(signal, config)) continue;
        AttackerDeviationResult row;
        row.description = signal.describe();
        row.mass = attack_mass(signal, config);
        row.beta = estimate_beta(saddle_detector, signal, config, trials, 1, derive_seed(seed, label++), workers);
        row.closed_form_beta = static_cast<double>(terminal_detector_beta(signal, config).value());
        row.best_response = static_cast<double>(best_response_beta(signal, config).value());
        row.difference = star.value() - row.beta.value();
        const double combined = std::hypot(star.standard_error, row.beta.standard_error);
        row.margin = row.difference + kMarginStdErrs * combined;
        row.pass = row.margin >= 0.0;
        report.attacker_deviations.push_back(std::move(row));
    }

    label = 1000;
    for (const auto& detector : detector_deviations) {
        DetectorDeviationResult row;
        row.description = detector.describe();
        row.alpha = estimate_alpha(detector, config, trials, derive_seed(seed, label++), workers);
        if (row.alpha.value() > epsilon + kMarginStdErrs * row.alpha.standard_error) {
            reject(row.description + " violates the false-alarm budget: alpha = " +
                   format_number(row.alpha.value()) + " > epsilon = " + format_number(epsilon));
            continue;
        }
        row.beta = estimate_beta(detector, saddle_attack, config, trials, 1, derive_seed(seed, label++), workers);
        row.difference = row.beta.value() - star.value();
        const double combined = std::hypot(star.standard_error, row.beta.standard_error);
        row.margin = row.difference + kMarginStdErrs * combined;
        row.pass = row.margin >= 0.0;
        report.detector_deviations.push_back(std::move(row));
    }
    report.skipped = std::move(skipped);
    return report;
}

AttackSignal mass_matched(const AttackSignal& signal, const GameConfig& config) {
    const double mass = attack_mass(signal, config);
    if (!(mass > 0.0)) {
        throw PreconditionError("cannot mass-match " + signal.describe() + ": its mass is not positive");
    }
    const double bound = config.mass_bound();
    double factor = bound / mass;
    constexpr double inf = std::numeric_limits<double>::infinity();
    AttackSignal out = scaled(signal, factor);
    while (attack_mass(out, config) < bound) {
        factor = std::nextafter(factor, inf);
        out = scaled(signal, factor);
    }
    return out;
}

std::vector<AttackSignal> canonical_attacker_deviations(const GameConfig& config) {
    const double horizon = config.horizon();
    return {
        mass_matched(AttackSignal::pulse(1.0, 0.0, 0.5 * horizon), config),
        mass_matched(AttackSignal::ramp(1.0), config),
        mass_matched(AttackSignal::piecewise({0.5, 1.5}), config),
    };
}

std::vector<Detector> canonical_detector_deviations(const GameConfig& config) {
    const double epsilon = static_cast<double>(config.false_alarm_budget().value());
    const auto attackers = canonical_attacker_deviations(config);
    return {
        terminal_detector_at_level(config, epsilon / 5.0),
        terminal_detector_at_level(config, epsilon / 2.0),
        lr_detector(attackers[0], config),
        lr_detector(attackers[1], config),
    };
}

// ---------------------------------------------------------------------------

bool ExponentCurve::hoeffding_holds() const {
    return std::all_of(rows.begin(), rows.end(), [](const ExponentRow& r) { return r.hoeffding_bound <= r.neg_log_beta; });
}

ExponentCurve exponent_curve(const GameConfig& config_template, std::span<const double> horizons,
                             ExponentRegime regime) {
    if (horizons.empty()) throw ConfigError("exponent curve needs at least one horizon");
    for (double t : horizons) {
        if (!(std::isfinite(t) && t > 0.0)) throw ConfigError("horizons must be positive and finite");
    }
    if (!std::is_sorted(horizons.begin(), horizons.end())) throw ConfigError("horizons must be sorted ascending");
    const double upper = upper_quantile(config_template);
    const double lower = -upper;  // Phi^-1(epsilon)

    ExponentCurve curve;
    curve.regime = regime;
    curve.template_horizon = config_template.horizon();
    curve.false_alarm_budget = config_template.false_alarm_budget();
    curve.rows.reserve(horizons.size());
    for (double t : horizons) {
        ExponentRow row;
        row.horizon = t;
        row.theta_bar = regime == ExponentRegime::FixedSignal ? config_template.threshold_drift()
                                                              : config_template.with_horizon(t).threshold_drift();
        const double root_t = std::sqrt(t);
        row.neg_log_beta = -log_phi_cdf(upper - root_t * row.theta_bar);
        row.relative_entropy_rate = 0.5 * row.theta_bar * row.theta_bar;
        row.variance_rate = row.theta_bar * row.theta_bar;
        row.first_order_term = t * row.relative_entropy_rate;
        row.second_order_term = root_t * std::sqrt(row.variance_rate) * lower;
        const double gap = root_t * row.theta_bar + lower;
        row.hoeffding_bound = gap > 0.0 ? 0.5 * gap * gap : 0.0;
        row.residual = row.neg_log_beta - row.first_order_term - row.second_order_term;
        row.first_order_ratio = row.neg_log_beta / row.first_order_term;
        curve.rows.push_back(row);
    }
    return curve;
}

const char* to_string(ExponentRegime regime) {
    return regime == ExponentRegime::FixedSignal ? "fixed_signal" : "per_horizon";
}

ExponentRegime exponent_regime_from_string(const std::string& name) {
    if (name == "fixed_signal") return ExponentRegime::FixedSignal;
    if (name == "per_horizon") return ExponentRegime::PerHorizon;
    throw ConfigError("exponents.regime must be fixed_signal or per_horizon, got '" + name + "'");
}

}  // namespace fdigame
