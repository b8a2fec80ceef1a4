#include "fdigame/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fdigame {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// Length of [start, start + width) intersected with [0, T].
double pulse_support(const Pulse& p, double horizon) {
    const double lo = std::max(p.start, 0.0);
    const double hi = std::min(p.start + p.width, horizon);
    return std::max(hi - lo, 0.0);
}

}  // namespace

GameConfig::GameConfig(double horizon, double unsafe_slope, double success_floor, double false_alarm_budget)
    : horizon_(horizon), unsafe_slope_(unsafe_slope) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("horizon must be positive and finite");
    if (!(std::isfinite(unsafe_slope) && unsafe_slope > 0.0)) throw ConfigError("unsafe_slope must be positive and finite");
    if (!(success_floor > 0.5)) throw ConfigError("success_floor must exceed 0.5");
    if (!(success_floor < 1.0)) throw ConfigError("success_floor must be below 1");
    if (!(false_alarm_budget > 0.0 && false_alarm_budget < 0.5)) {
        throw ConfigError("false_alarm_budget must lie in (0, 0.5)");
    }
    success_floor_ = Probability(success_floor);
    false_alarm_budget_ = Probability(false_alarm_budget);
}

double GameConfig::threshold_drift() const {
    return phi_inv(success_floor_) / std::sqrt(horizon_) + unsafe_slope_;
}

double GameConfig::mass_bound() const {
    return std::sqrt(horizon_) * phi_inv(success_floor_) + horizon_ * unsafe_slope_;
}

double GameConfig::detection_cutoff() const {
    return std::sqrt(horizon_) * phi_inv(Probability(false_alarm_budget_.complement()));
}

GameConfig GameConfig::with_horizon(double horizon) const {
    return GameConfig(horizon, unsafe_slope_, static_cast<double>(success_floor_.value()),
                      static_cast<double>(false_alarm_budget_.value()));
}

// ---------------------------------------------------------------------------

AttackSignal AttackSignal::zero() { return AttackSignal(ZeroSignal{}); }

AttackSignal AttackSignal::constant(double level) {
    require_finite(level, "constant level");
    return AttackSignal(ConstantBias{level});
}

AttackSignal AttackSignal::piecewise(std::vector<double> values) {
    if (values.empty()) throw DomainError("piecewise-constant signal needs at least one value");
    for (double v : values) require_finite(v, "piecewise-constant value");
    return AttackSignal(PiecewiseConstant{std::move(values)});
}

AttackSignal AttackSignal::pulse(double height, double start, double width) {
    require_finite(height, "pulse height");
    require_finite(start, "pulse start");
    require_finite(width, "pulse width");
    if (width < 0.0) throw DomainError("pulse width must be nonnegative");
    return AttackSignal(Pulse{height, start, width});
}

AttackSignal AttackSignal::ramp(double slope) {
    require_finite(slope, "ramp slope");
    return AttackSignal(Ramp{slope});
}

double AttackSignal::value_at(double t, double horizon) const {
    return std::visit(Overloaded{
                          [](const ZeroSignal&) { return 0.0; },
                          [](const ConstantBias& c) { return c.level; },
                          [&](const PiecewiseConstant& p) {
                              const auto cells = p.values.size();
                              const double pos = t / horizon * static_cast<double>(cells);
                              auto k = pos <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(pos);
                              return p.values[std::min(k, cells - 1)];
                          },
                          [&](const Pulse& p) {
                              const bool on = t >= p.start && t < p.start + p.width && t >= 0.0 && t <= horizon;
                              return on ? p.height : 0.0;
                          },
                          [&](const Ramp& r) { return r.slope * t; },
                      },
                      form_);
}

std::vector<double> AttackSignal::breakpoints(double horizon) const {
    std::vector<double> out;
    std::visit(Overloaded{
                   [](const ZeroSignal&) {},
                   [](const ConstantBias&) {},
                   [&](const PiecewiseConstant& p) {
                       const auto cells = p.values.size();
                       for (std::size_t k = 1; k < cells; ++k) {
                           out.push_back(horizon * static_cast<double>(k) / static_cast<double>(cells));
                       }
                   },
                   [&](const Pulse& p) {
                       for (double b : {p.start, p.start + p.width}) {
                           if (b > 0.0 && b < horizon) out.push_back(b);
                       }
                   },
                   [](const Ramp&) {},
               },
               form_);
    return out;
}

bool AttackSignal::is_constant(double horizon) const {
    return std::visit(Overloaded{
                          [](const ZeroSignal&) { return true; },
                          [](const ConstantBias&) { return true; },
                          [](const PiecewiseConstant& p) {
                              return std::all_of(p.values.begin(), p.values.end(),
                                                 [&](double v) { return v == p.values.front(); });
                          },
                          [&](const Pulse& p) {
                              const double support = pulse_support(p, horizon);
                              return p.height == 0.0 || support == 0.0 || support == horizon;
                          },
                          [](const Ramp& r) { return r.slope == 0.0; },
                      },
                      form_);
}

std::string AttackSignal::describe() const {
    return std::visit(Overloaded{
                          [](const ZeroSignal&) { return std::string("zero"); },
                          [](const ConstantBias& c) { return "constant(level=" + format_number(c.level) + ")"; },
                          [](const PiecewiseConstant& p) {
                              std::string s = "piecewise(";
                              for (std::size_t k = 0; k < p.values.size(); ++k) {
                                  if (k) s += ' ';
                                  s += format_number(p.values[k]);
                              }
                              return s + ")";
                          },
                          [](const Pulse& p) {
                              return "pulse(height=" + format_number(p.height) + " start=" + format_number(p.start) +
                                     " width=" + format_number(p.width) + ")";
                          },
                          [](const Ramp& r) { return "ramp(slope=" + format_number(r.slope) + ")"; },
                      },
                      form_);
}

double attack_mass(const AttackSignal& signal, double horizon) {
    return std::visit(Overloaded{
                          [](const ZeroSignal&) { return 0.0; },
                          [&](const ConstantBias& c) { return c.level * horizon; },
                          [&](const PiecewiseConstant& p) {
                              const double sum = std::accumulate(p.values.begin(), p.values.end(), 0.0);
                              return sum * horizon / static_cast<double>(p.values.size());
                          },
                          [&](const Pulse& p) { return p.height * pulse_support(p, horizon); },
                          [&](const Ramp& r) { return r.slope * horizon * horizon / 2.0; },
                      },
                      signal.form());
}

double attack_mass(const AttackSignal& signal, const GameConfig& config) {
    return attack_mass(signal, config.horizon());
}

double attack_energy(const AttackSignal& signal, double horizon) {
    return std::visit(Overloaded{
                          [](const ZeroSignal&) { return 0.0; },
                          [&](const ConstantBias& c) { return c.level * c.level * horizon; },
                          [&](const PiecewiseConstant& p) {
                              double sum = 0.0;
                              for (double v : p.values) sum += v * v;
                              return sum * horizon / static_cast<double>(p.values.size());
                          },
                          [&](const Pulse& p) { return p.height * p.height * pulse_support(p, horizon); },
                          [&](const Ramp& r) { return r.slope * r.slope * horizon * horizon * horizon / 3.0; },
                      },
                      signal.form());
}

double attack_energy(const AttackSignal& signal, const GameConfig& config) {
    return attack_energy(signal, config.horizon());
}

double signal_inner_product(const AttackSignal& a, const AttackSignal& b, double horizon) {
    std::vector<double> knots = a.breakpoints(horizon);
    const auto more = b.breakpoints(horizon);
    knots.insert(knots.end(), more.begin(), more.end());
    knots.push_back(0.0);
    knots.push_back(horizon);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    // Two-point Gauss-Legendre per piece: exact for the quadratic product.
    const double offset = 1.0 / std::sqrt(3.0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double mid = 0.5 * (knots[i] + knots[i + 1]);
        const double half = 0.5 * (knots[i + 1] - knots[i]);
        const double t1 = mid - half * offset;
        const double t2 = mid + half * offset;
        total += half * (a.value_at(t1, horizon) * b.value_at(t1, horizon) +
                         a.value_at(t2, horizon) * b.value_at(t2, horizon));
    }
    return total;
}

AttackSignal constant_bias_attack(const GameConfig& config) {
    const double horizon = config.horizon();
    const double bound = config.mass_bound();
    double level = config.threshold_drift();
    constexpr double inf = std::numeric_limits<double>::infinity();
    while (level * horizon < bound) level = std::nextafter(level, inf);
    while (std::nextafter(level, 0.0) * horizon >= bound) level = std::nextafter(level, 0.0);
    return AttackSignal::constant(level);
}

// ---------------------------------------------------------------------------

FeedbackPolicy FeedbackPolicy::bridge(double target) {
    require_finite(target, "bridge target");
    return FeedbackPolicy(BrownianBridge{target});
}

FeedbackPolicy FeedbackPolicy::custom(std::function<double(double, double, double)> drift, std::string label) {
    if (!drift) throw DomainError("custom feedback drift must be callable");
    return FeedbackPolicy(CustomFeedback{std::move(drift), std::move(label)});
}

double FeedbackPolicy::drift(double t, double x, double horizon) const {
    return std::visit(Overloaded{
                          [&](const BrownianBridge& b) { return (b.target - x) / (horizon - t); },
                          [&](const CustomFeedback& c) { return c.drift(t, x, horizon); },
                      },
                      form_);
}

std::string FeedbackPolicy::describe() const {
    return std::visit(Overloaded{
                          [](const BrownianBridge& b) { return "bridge(target=" + format_number(b.target) + ")"; },
                          [](const CustomFeedback& c) { return "feedback(" + c.label + ")"; },
                      },
                      form_);
}

FeedbackPolicy bridge_attack(double target, const GameConfig& config) {
    const double lower = config.horizon() * config.unsafe_slope();
    const double upper = config.detection_cutoff();
    if (!(target > lower && target < upper)) {
        throw PreconditionError("bridge target b = " + format_number(target) +
                                " must lie strictly between T*d = " + format_number(lower) +
                                " and sqrt(T)*Phi^-1(1-epsilon) = " + format_number(upper));
    }
    return FeedbackPolicy::bridge(target);
}

std::string describe(const Attack& attack) {
    return std::visit([](const auto& a) { return a.describe(); }, attack);
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(double horizon, std::vector<double> values) : horizon_(horizon), values_(std::move(values)) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw PreconditionError("trajectory horizon must be positive");
    if (values_.size() < 2) throw PreconditionError("trajectory needs at least one step");
    if (values_.front() != 0.0) throw PreconditionError("trajectory must start at x(0) = 0");
}

namespace detail {

void throw_non_finite_drift(std::size_t k, double t) {
    throw SimulationError("non-finite drift at grid point k = " + std::to_string(k) + " (t = " + format_number(t) +
                          ")");
}

void throw_zero_steps() { throw PreconditionError("simulation needs at least one step"); }

}  // namespace detail

Trajectory simulate_path(const Attack& attack, const GameConfig& config, std::size_t steps, RandomStream& rng) {
    if (steps == 0) detail::throw_zero_steps();
    std::vector<double> values;
    values.reserve(steps + 1);
    values.push_back(0.0);
    euler_walk(attack, config.horizon(), steps, rng,
               [&values](std::size_t, double, double next) { values.push_back(next); });
    return Trajectory(config.horizon(), std::move(values));
}

double simulate_terminal(const Attack& attack, const GameConfig& config, std::size_t steps, RandomStream& rng) {
    return euler_walk(attack, config.horizon(), steps, rng, [](std::size_t, double, double) {});
}

double sample_terminal(const AttackSignal& signal, const GameConfig& config, RandomStream& rng) {
    return attack_mass(signal, config) + std::sqrt(config.horizon()) * rng.normal();
}

double sample_terminal(const Attack& attack, const GameConfig& config, RandomStream& rng) {
    const auto* signal = std::get_if<AttackSignal>(&attack);
    if (signal == nullptr) {
        throw UnsupportedPolicyError("exact terminal sampling needs an open-loop signal, got " + describe(attack));
    }
    return sample_terminal(*signal, config, rng);
}

}  // namespace fdigame
