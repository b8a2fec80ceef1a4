#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fdigame/normal.hpp"
#include "fdigame/random.hpp"

namespace fdigame {

/// Invalid game or experiment parameter. The message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A policy argument violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation that needs an open-loop signal was handed a feedback policy.
class UnsupportedPolicyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The drift evaluated to a non-finite value inside the horizon.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters of the attacker/detector game.
///
/// The vehicle state follows dx = theta(t) dt + dw on [0, T] with x(0) = 0.
/// The region x(T) > T*d is unsafe; the attacker must reach it with
/// probability at least c, and the detector may raise false alarms with
/// probability at most epsilon.
class GameConfig {
public:
    /// Throws ConfigError unless T > 0, d > 0, 1/2 < c < 1 and 0 < epsilon < 1/2.
    GameConfig(double horizon, double unsafe_slope, double success_floor, double false_alarm_budget);

    double horizon() const { return horizon_; }
    double unsafe_slope() const { return unsafe_slope_; }
    Probability success_floor() const { return success_floor_; }
    Probability false_alarm_budget() const { return false_alarm_budget_; }

    /// Constant drift that makes the success-rate constraint active:
    /// Phi^-1(c)/sqrt(T) + d.
    double threshold_drift() const;

    /// Smallest admissible attack mass, sqrt(T) Phi^-1(c) + T d.
    double mass_bound() const;

    /// Terminal cutoff of the optimal detector, sqrt(T) Phi^-1(1 - epsilon).
    double detection_cutoff() const;

    /// Same game with a different horizon.
    GameConfig with_horizon(double horizon) const;

private:
    double horizon_;
    double unsafe_slope_;
    Probability success_floor_;
    Probability false_alarm_budget_;
};

// Open-loop signal families. All are bounded and piecewise polynomial of
// degree <= 1, so mass, energy and cross moments have exact closed forms.
struct ZeroSignal {};
struct ConstantBias {
    double level;
};
/// values[k] holds on [k T/K, (k+1) T/K) for K = values.size().
struct PiecewiseConstant {
    std::vector<double> values;
};
/// `height` on [start, start + width), zero elsewhere; clipped to [0, T].
struct Pulse {
    double height;
    double start;
    double width;
};
/// theta(t) = slope * t.
struct Ramp {
    double slope;
};

/// An open-loop attack signal theta(t) on [0, T].
class AttackSignal {
public:
    using Form = std::variant<ZeroSignal, ConstantBias, PiecewiseConstant, Pulse, Ramp>;

    static AttackSignal zero();
    static AttackSignal constant(double level);
    static AttackSignal piecewise(std::vector<double> values);
    static AttackSignal pulse(double height, double start, double width);
    static AttackSignal ramp(double slope);

    const Form& form() const { return form_; }

    /// theta(t) for t in [0, T].
    double value_at(double t, double horizon) const;

    /// Times in (0, T) where theta or its slope may jump.
    std::vector<double> breakpoints(double horizon) const;

    /// Constant almost everywhere on [0, T].
    bool is_constant(double horizon) const;

    std::string describe() const;

private:
    explicit AttackSignal(Form form) : form_(std::move(form)) {}

    Form form_;
};

/// Integral of theta over [0, T], exact for every built-in form.
double attack_mass(const AttackSignal& signal, double horizon);
double attack_mass(const AttackSignal& signal, const GameConfig& config);

/// Integral of theta^2 over [0, T], exact for every built-in form.
double attack_energy(const AttackSignal& signal, double horizon);
double attack_energy(const AttackSignal& signal, const GameConfig& config);

/// Integral of a(t) b(t) over [0, T]. Two-point Gauss-Legendre between the joint
/// breakpoints, which is exact for products of piecewise-linear signals.
double signal_inner_product(const AttackSignal& a, const AttackSignal& b, double horizon);

/// The saddle-point attack: constant drift at the threshold level.
/// The level is the smallest double whose mass meets mass_bound() exactly
/// in floating point, so the result is always admissible.
AttackSignal constant_bias_attack(const GameConfig& config);

struct BrownianBridge {
    double target;
};
struct CustomFeedback {
    std::function<double(double t, double x, double horizon)> drift;
    std::string label;
};

/// A state-dependent drift theta(t, x(t)).
class FeedbackPolicy {
public:
    using Form = std::variant<BrownianBridge, CustomFeedback>;

    static FeedbackPolicy bridge(double target);
    static FeedbackPolicy custom(std::function<double(double, double, double)> drift, std::string label);

    const Form& form() const { return form_; }
    double drift(double t, double x, double horizon) const;
    std::string describe() const;

private:
    explicit FeedbackPolicy(Form form) : form_(std::move(form)) {}

    Form form_;
};

/// Brownian-bridge attack steering x(T) to b. Requires T d < b < sqrt(T) Phi^-1(1 - epsilon):
/// the terminal state is unsafe yet never crosses the optimal detector's cutoff.
FeedbackPolicy bridge_attack(double target, const GameConfig& config);

using Attack = std::variant<AttackSignal, FeedbackPolicy>;

std::string describe(const Attack& attack);

/// A sample path on the uniform grid t_k = k T / N, k = 0..N, with x(0) = 0.
class Trajectory {
public:
    Trajectory(double horizon, std::vector<double> values);

    double horizon() const { return horizon_; }
    std::size_t steps() const { return values_.size() - 1; }
    double dt() const { return horizon_ / static_cast<double>(steps()); }
    double time(std::size_t k) const { return horizon_ * static_cast<double>(k) / static_cast<double>(steps()); }
    std::span<const double> values() const { return values_; }
    double terminal() const { return values_.back(); }

private:
    double horizon_;
    std::vector<double> values_;
};

/// Drives the Euler-Maruyama recursion x_{k+1} = x_k + drift(t_k, x_k) dt + sqrt(dt) Z_k
/// with drift evaluated at the left endpoint. `observer(k, x_k, x_{k+1})` sees
/// every step. Returns x_N.
template <class Observer>
double euler_walk(const Attack& attack, double horizon, std::size_t steps, RandomStream& rng, Observer&& observer);

/// Full Euler-Maruyama path. Throws PreconditionError for steps == 0 and
/// SimulationError when the drift is non-finite at some t_k, k < N.
Trajectory simulate_path(const Attack& attack, const GameConfig& config, std::size_t steps, RandomStream& rng);

/// Terminal value of an Euler-Maruyama path without storing the path.
double simulate_terminal(const Attack& attack, const GameConfig& config, std::size_t steps, RandomStream& rng);

/// Exact draw of x(T) ~ N(mass, T) for an open-loop signal.
double sample_terminal(const AttackSignal& signal, const GameConfig& config, RandomStream& rng);

/// Throws UnsupportedPolicyError for feedback policies.
double sample_terminal(const Attack& attack, const GameConfig& config, RandomStream& rng);

// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] void throw_non_finite_drift(std::size_t k, double t);
[[noreturn]] void throw_zero_steps();

template <class Drift, class Observer>
double euler_loop(Drift&& drift, double horizon, std::size_t steps, RandomStream& rng, Observer& observer) {
    if (steps == 0) throw_zero_steps();
    const double n = static_cast<double>(steps);
    const double dt = horizon / n;
    const double sqrt_dt = std::sqrt(dt);
    double x = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = horizon * static_cast<double>(k) / n;
        const double theta = drift(t, x, dt);
        if (!std::isfinite(theta)) throw_non_finite_drift(k, t);
        const double next = x + theta * dt + sqrt_dt * rng.normal();
        observer(k, x, next);
        x = next;
    }
    return x;
}

}  // namespace detail

template <class Observer>
double euler_walk(const Attack& attack, double horizon, std::size_t steps, RandomStream& rng, Observer&& observer) {
    if (const auto* signal = std::get_if<AttackSignal>(&attack)) {
        if (const auto* constant = std::get_if<ConstantBias>(&signal->form())) {
            const double level = constant->level;
            return detail::euler_loop([level](double, double, double) { return level; }, horizon, steps, rng,
                                      observer);
        }
        return detail::euler_loop(
            [signal, horizon](double t, double, double) { return signal->value_at(t, horizon); }, horizon, steps,
            rng, observer);
    }
    const auto& policy = std::get<FeedbackPolicy>(attack);
    if (const auto* bridge = std::get_if<BrownianBridge>(&policy.form())) {
        const double target = bridge->target;
        const double last_left =
            steps == 0 ? 0.0 : horizon * static_cast<double>(steps - 1) / static_cast<double>(steps);
        // The final left endpoint sits one step before T; using dt there
        // avoids dividing by a rounded T - t_{N-1}.
        return detail::euler_loop(
            [target, horizon, last_left](double t, double x, double dt) {
                const double remaining = t == last_left ? dt : horizon - t;
                return (target - x) / remaining;
            },
            horizon, steps, rng, observer);
    }
    return detail::euler_loop([&policy, horizon](double t, double x, double) { return policy.drift(t, x, horizon); },
                              horizon, steps, rng, observer);
}

}  // namespace fdigame
