#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdigame/detect.hpp"
#include "fdigame/model.hpp"

namespace fdigame {

/// A deviation handed to saddle_check is outside its player's admissible set.
class InadmissibleDeviationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Binomial Monte Carlo estimate of a probability.
struct MonteCarloEstimate {
    Probability estimate;
    double standard_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;

    static MonteCarloEstimate from_counts(std::uint64_t hits, std::uint64_t trials, std::uint64_t seed);

    double value() const { return static_cast<double>(estimate.value()); }
    std::uint64_t hits() const;
};

// Closed forms -------------------------------------------------------------

/// gamma(theta) = Phi(m / sqrt(T) - sqrt(T) d), the probability of ending in the unsafe region.
Probability success_rate(const AttackSignal& signal, const GameConfig& config);
/// Throws UnsupportedPolicyError for feedback policies; use estimate_gamma.
Probability success_rate(const Attack& attack, const GameConfig& config);

/// mass(theta) >= sqrt(T) Phi^-1(c) + T d, compared without tolerance.
bool is_admissible_attack(const AttackSignal& signal, const GameConfig& config);

/// Saddle value Phi(Phi^-1(1 - epsilon) - Phi^-1(c) - sqrt(T) d).
Probability game_value(const GameConfig& config);

/// Smallest achievable beta against a fixed open-loop signal:
/// Phi(Phi^-1(1 - epsilon) - sqrt(energy)). Throws DegenerateReferenceError for zero energy.
Probability best_response_beta(const AttackSignal& signal, const GameConfig& config);

/// beta(theta, phi*) = Phi(Phi^-1(1 - epsilon) - m / sqrt(T)); depends on the mass only.
Probability terminal_detector_beta(const AttackSignal& signal, const GameConfig& config);

/// beta of the likelihood-ratio test for `reference` when the attack is `signal`:
/// Phi(Phi^-1(1 - epsilon) - <reference, signal> / |reference|).
Probability lr_detector_beta(const AttackSignal& reference, const AttackSignal& signal, const GameConfig& config);

// Monte Carlo --------------------------------------------------------------
//
// Trial k draws from RandomStream(seed, k); `workers` = 0 uses the hardware
// concurrency. Counts are summed, so results are identical for any worker count.

/// False-alarm rate under H0. Terminal detectors use exact draws of x(T);
/// likelihood-ratio detectors use the exact N(0, energy) law of the Ito integral.
MonteCarloEstimate estimate_alpha(const Detector& detector, const GameConfig& config, std::uint64_t trials,
                                  std::uint64_t seed, unsigned workers = 0);

/// False-alarm rate from full Euler-Maruyama paths under H0.
MonteCarloEstimate estimate_alpha_paths(const Detector& detector, const GameConfig& config, std::uint64_t trials,
                                        std::size_t steps, std::uint64_t seed, unsigned workers = 0);

/// Detection-failure rate under the given attack. Open-loop attacks are
/// sampled exactly; feedback policies are simulated with `steps` Euler steps.
MonteCarloEstimate estimate_beta(const Detector& detector, const Attack& attack, const GameConfig& config,
                                 std::uint64_t trials, std::size_t steps, std::uint64_t seed, unsigned workers = 0);

/// Fraction of trials ending strictly above T d.
MonteCarloEstimate estimate_gamma(const Attack& attack, const GameConfig& config, std::uint64_t trials,
                                  std::size_t steps, std::uint64_t seed, unsigned workers = 0);

// Saddle-point verification ------------------------------------------------

/// Slack, in combined standard errors, granted to every Monte Carlo inequality.
inline constexpr double kMarginStdErrs = 4.0;

struct AttackerDeviationResult {
    std::string description;
    double mass = 0.0;
    MonteCarloEstimate beta;      ///< beta(theta, phi*)
    double closed_form_beta = 0;  ///< beta(theta, phi*) in closed form
    double best_response = 0;     ///< min over detectors of beta(theta, .) in closed form
    double difference = 0;        ///< beta(theta*, phi*) - beta(theta, phi*)
    double margin = 0;            ///< difference + slack; >= 0 means the inequality holds
    bool pass = false;
};

struct DetectorDeviationResult {
    std::string description;
    MonteCarloEstimate alpha;
    MonteCarloEstimate beta;  ///< beta(theta*, phi)
    double difference = 0;    ///< beta(theta*, phi) - beta(theta*, phi*)
    double margin = 0;
    bool pass = false;
};

struct SaddleReport {
    GameConfig config;
    Probability value_closed_form;
    MonteCarloEstimate beta_star_mc;
    double value_margin = 0;  ///< slack - |beta_star_mc - value|
    bool value_consistent = false;
    std::vector<AttackerDeviationResult> attacker_deviations{};
    std::vector<DetectorDeviationResult> detector_deviations{};
    std::vector<std::string> skipped{};  ///< inadmissible deviations left out, with the reason

    bool all_pass() const;
};

enum class OnInadmissible { Throw, Skip };

/// Checks beta(theta, phi*) <= beta(theta*, phi*) <= beta(theta*, phi) for
/// each deviation, with kMarginStdErrs combined standard errors of slack.
/// An attacker deviation with too little mass, or a detector deviation whose
/// estimated alpha exceeds epsilon by more than the slack, either raises
/// InadmissibleDeviationError naming the violated constraint or is recorded
/// in `skipped`.
SaddleReport saddle_check(const GameConfig& config, std::span<const AttackSignal> attacker_deviations,
                          std::span<const Detector> detector_deviations, std::uint64_t trials, std::uint64_t seed,
                          unsigned workers = 0, OnInadmissible on_inadmissible = OnInadmissible::Throw);

/// Why `signal` is not admissible, or an empty string.
std::string attack_admissibility_violation(const AttackSignal& signal, const GameConfig& config);

/// Non-constant attacks whose mass sits on the constraint boundary:
/// a front-loaded pulse over [0, T/2], a ramp, and a two-level step.
std::vector<AttackSignal> canonical_attacker_deviations(const GameConfig& config);

/// Terminal tests at stricter levels epsilon/5 and epsilon/2, plus likelihood-ratio
/// tests calibrated against mismatched pulse and ramp references.
std::vector<Detector> canonical_detector_deviations(const GameConfig& config);

/// Scales `signal` to the smallest amplitude whose mass meets the bound in floating point.
AttackSignal mass_matched(const AttackSignal& signal, const GameConfig& config);

// Error exponents ----------------------------------------------------------

enum class ExponentRegime {
    /// theta-bar pinned at the template horizon; horizons grow with the signal fixed.
    FixedSignal,
    /// theta-bar re-derived at every horizon, so beta is the game value at that T.
    PerHorizon,
};

struct ExponentRow {
    double horizon = 0;
    double theta_bar = 0;
    double neg_log_beta = 0;
    double relative_entropy_rate = 0;  ///< theta_bar^2 / 2
    double variance_rate = 0;          ///< theta_bar^2
    double first_order_term = 0;       ///< T * rate
    double second_order_term = 0;      ///< sqrt(T V) Phi^-1(epsilon)
    double hoeffding_bound = 0;        ///< (sqrt(T) theta_bar + Phi^-1(epsilon))_+^2 / 2
    double residual = 0;               ///< neg_log_beta - first - second
    double first_order_ratio = 0;      ///< neg_log_beta / first_order_term
};

struct ExponentCurve {
    ExponentRegime regime = ExponentRegime::FixedSignal;
    double template_horizon = 0;
    Probability false_alarm_budget;
    std::vector<ExponentRow> rows;

    bool hoeffding_holds() const;
};

/// -log beta(theta*, phi*) and its first/second-order expansion per horizon.
/// Throws ConfigError on an empty or unsorted grid or a nonpositive horizon.
ExponentCurve exponent_curve(const GameConfig& config_template, std::span<const double> horizons,
                             ExponentRegime regime = ExponentRegime::FixedSignal);

const char* to_string(ExponentRegime regime);
ExponentRegime exponent_regime_from_string(const std::string& name);

}  // namespace fdigame
