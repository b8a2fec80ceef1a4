#include "fdigame/detect.hpp"

#include <cmath>
#include <sstream>

namespace fdigame {

Detector Detector::terminal(double cutoff) {
    if (std::isnan(cutoff)) throw DomainError("terminal cutoff must not be NaN");
    return Detector(TerminalThreshold{cutoff});
}

Detector Detector::likelihood_ratio(AttackSignal reference, double horizon, double log_threshold) {
    if (!std::isfinite(log_threshold)) throw DomainError("likelihood-ratio threshold must be finite");
    return Detector(LikelihoodRatio{std::move(reference), horizon, log_threshold});
}

Decision Detector::decide_terminal(double terminal_value) const {
    const auto* rule = std::get_if<TerminalThreshold>(&form_);
    if (rule == nullptr) throw PreconditionError("decide_terminal called on a likelihood-ratio detector");
    return terminal_value > rule->cutoff ? Decision::RejectNull : Decision::AcceptNull;
}

Decision Detector::decide_statistic(LogLikelihood statistic) const {
    const auto* rule = std::get_if<LikelihoodRatio>(&form_);
    if (rule == nullptr) throw PreconditionError("decide_statistic called on a terminal detector");
    return statistic.value > rule->log_threshold ? Decision::RejectNull : Decision::AcceptNull;
}

Decision Detector::decide(const Trajectory& path) const {
    if (std::holds_alternative<TerminalThreshold>(form_)) return decide_terminal(path.terminal());
    const auto& rule = std::get<LikelihoodRatio>(form_);
    return decide_statistic(log_lr_statistic(rule.reference, rule.horizon, path));
}

std::string Detector::describe() const {
    std::ostringstream os;
    os.precision(12);
    if (const auto* t = std::get_if<TerminalThreshold>(&form_)) {
        os << "terminal(cutoff=" << t->cutoff << ")";
    } else {
        const auto& lr = std::get<LikelihoodRatio>(form_);
        os << "lr(reference=" << lr.reference.describe() << " log_threshold=" << lr.log_threshold << ")";
    }
    return os.str();
}

LogLikelihood log_lr_statistic(const AttackSignal& reference, const GameConfig& config, const Trajectory& path) {
    return log_lr_statistic(reference, config.horizon(), path);
}

LogLikelihood log_lr_statistic(const AttackSignal& reference, double horizon, const Trajectory& path) {
    if (std::abs(path.horizon() - horizon) > 1e-12 * horizon) {
        throw DimensionError("reference horizon " + std::to_string(horizon) + " does not match trajectory horizon " +
                             std::to_string(path.horizon()));
    }
    const auto x = path.values();
    const std::size_t steps = path.steps();
    double integral = 0.0;
    std::size_t run_start = 0;
    double run_level = reference.value_at(path.time(0), horizon);
    for (std::size_t k = 1; k < steps; ++k) {
        const double level = reference.value_at(path.time(k), horizon);
        if (level != run_level) {
            integral += run_level * (x[k] - x[run_start]);
            run_start = k;
            run_level = level;
        }
    }
    integral += run_level * (x[steps] - x[run_start]);
    return {integral - 0.5 * attack_energy(reference, horizon)};
}

double np_log_threshold(const AttackSignal& reference, const GameConfig& config) {
    const double energy = attack_energy(reference, config);
    if (!(energy > 0.0)) {
        throw DegenerateReferenceError("reference " + reference.describe() +
                                       " has zero energy; a likelihood-ratio test cannot be calibrated");
    }
    const double s = std::sqrt(energy);
    const double quantile = phi_inv(Probability(config.false_alarm_budget().complement()));
    return s * quantile - 0.5 * energy;
}

Detector lr_detector(const AttackSignal& reference, const GameConfig& config) {
    return Detector::likelihood_ratio(reference, config.horizon(), np_log_threshold(reference, config));
}

Detector terminal_detector(const GameConfig& config) { return Detector::terminal(config.detection_cutoff()); }

Detector terminal_detector_at_level(const GameConfig& config, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("detector level must lie in (0, 1)");
    return Detector::terminal(std::sqrt(config.horizon()) * phi_inv(Probability(1.0L - alpha)));
}

}  // namespace fdigame
