#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "fdigame/model.hpp"

namespace fdigame {

/// Reference signal and trajectory live on different horizons.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A zero-energy reference cannot be calibrated to a false-alarm budget.
class DegenerateReferenceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Decision { AcceptNull = 0, RejectNull = 1 };

/// Natural log of the Girsanov likelihood ratio between the attacked law and
/// Brownian motion.
struct LogLikelihood {
    double value;
};

/// Rejects iff x(T) > cutoff.
struct TerminalThreshold {
    double cutoff;
};

/// Rejects iff log z(x, T) > log_threshold for the given reference signal.
struct LikelihoodRatio {
    AttackSignal reference;
    double horizon;
    double log_threshold;
};

/// A deterministic test mapping a trajectory to accept/reject H0.
/// Ties accept H0.
class Detector {
public:
    using Form = std::variant<TerminalThreshold, LikelihoodRatio>;

    static Detector terminal(double cutoff);
    static Detector likelihood_ratio(AttackSignal reference, double horizon, double log_threshold);

    const Form& form() const { return form_; }

    Decision decide(const Trajectory& path) const;

    /// Rule applied to an already computed x(T). TerminalThreshold only.
    Decision decide_terminal(double terminal_value) const;
    /// Rule applied to an already computed log statistic. LikelihoodRatio only.
    Decision decide_statistic(LogLikelihood statistic) const;

    std::string describe() const;

private:
    explicit Detector(Form form) : form_(std::move(form)) {}

    Form form_;
};

/// Left-endpoint Ito sum of theta dx minus half the closed-form energy.
/// Runs of equal theta telescope, so a constant reference yields
/// theta x(T) - T theta^2 / 2 up to roundoff.
LogLikelihood log_lr_statistic(const AttackSignal& reference, const GameConfig& config, const Trajectory& path);
LogLikelihood log_lr_statistic(const AttackSignal& reference, double horizon, const Trajectory& path);

/// log lambda* = s Phi^-1(1 - epsilon) - s^2/2 with s^2 the reference energy.
/// Under H0 the integral of theta dx is N(0, s^2), so the induced test has false-alarm rate exactly epsilon.
double np_log_threshold(const AttackSignal& reference, const GameConfig& config);

/// Most powerful test against `reference` at level epsilon.
Detector lr_detector(const AttackSignal& reference, const GameConfig& config);

/// The optimal detector of the game: x(T) > sqrt(T) Phi^-1(1 - epsilon).
Detector terminal_detector(const GameConfig& config);

/// Terminal threshold calibrated to an arbitrary level alpha in (0, 1).
Detector terminal_detector_at_level(const GameConfig& config, double alpha);

}  // namespace fdigame
