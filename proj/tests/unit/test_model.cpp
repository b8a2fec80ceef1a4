#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "fdigame/model.hpp"
#include "oracles.hpp"

using namespace fdigame;

namespace {

const GameConfig kBaseGame(1.0, 1.5, 0.95, 0.05);

// Midpoint Riemann sum, independent of the closed forms.
double riemann(const AttackSignal& s, double horizon, int power, int cells = 200000) {
    double sum = 0.0;
    const double h = horizon / cells;
    for (int i = 0; i < cells; ++i) sum += std::pow(s.value_at((i + 0.5) * h, horizon), power);
    return sum * h;
}

// Small generator of random signals for property checks.
AttackSignal random_signal(std::mt19937_64& gen, double horizon) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_int_distribution<int> pick(0, 4);
    switch (pick(gen)) {
        case 0: return AttackSignal::constant(u(gen));
        case 1: {
            std::vector<double> values(1 + gen() % 7);
            for (auto& v : values) v = u(gen);
            return AttackSignal::piecewise(values);
        }
        case 2: {
            const double start = std::abs(u(gen)) / 3.0 * horizon;
            return AttackSignal::pulse(u(gen), start, std::abs(u(gen)) / 3.0 * horizon);
        }
        case 3: return AttackSignal::ramp(u(gen));
        default: return AttackSignal::zero();
    }
}

}  // namespace

TEST_CASE("GameConfig validation names the field") {
    CHECK_THROWS_WITH_AS(GameConfig(1.0, 1.5, 0.4, 0.05), "success_floor must exceed 0.5", ConfigError);
    CHECK_THROWS_WITH_AS(GameConfig(1.0, 1.5, 0.5, 0.05), "success_floor must exceed 0.5", ConfigError);
    CHECK_THROWS_AS(GameConfig(0.0, 1.5, 0.95, 0.05), ConfigError);
    CHECK_THROWS_AS(GameConfig(-1.0, 1.5, 0.95, 0.05), ConfigError);
    CHECK_THROWS_AS(GameConfig(1.0, 0.0, 0.95, 0.05), ConfigError);
    CHECK_THROWS_AS(GameConfig(1.0, 1.5, 1.0, 0.05), ConfigError);
    CHECK_THROWS_AS(GameConfig(1.0, 1.5, 0.95, 0.5), ConfigError);
    CHECK_THROWS_AS(GameConfig(1.0, 1.5, 0.95, 0.0), ConfigError);
    CHECK_THROWS_AS(GameConfig(std::nan(""), 1.5, 0.95, 0.05), ConfigError);
    CHECK(kBaseGame.threshold_drift() > 0.0);
}

TEST_CASE("attack_mass and attack_energy closed forms") {
    CHECK(attack_mass(AttackSignal::zero(), kBaseGame) == 0.0);
    CHECK(attack_energy(AttackSignal::zero(), kBaseGame) == 0.0);
    CHECK(attack_mass(AttackSignal::constant(3.1449), kBaseGame) == doctest::Approx(3.1449).epsilon(1e-15));
    const auto pulse = AttackSignal::pulse(10.0, 0.0, 0.31449);
    CHECK(std::abs(attack_mass(pulse, kBaseGame) - 3.1449) <= 1e-12);
    CHECK(std::abs(attack_energy(pulse, kBaseGame) - 31.449) <= 1e-12);
    const double level = kBaseGame.threshold_drift();
    CHECK(attack_energy(AttackSignal::constant(level), kBaseGame) == doctest::Approx(level * level));

    // Pulses are clipped to [0, T].
    CHECK(attack_mass(AttackSignal::pulse(2.0, 0.75, 1.0), kBaseGame) == doctest::Approx(0.5));
    CHECK(attack_mass(AttackSignal::pulse(2.0, 3.0, 1.0), kBaseGame) == 0.0);
}

TEST_CASE("closed forms agree with Riemann sums") {
    std::mt19937_64 gen(2024);
    for (int i = 0; i < 40; ++i) {
        const double horizon = 0.5 + (gen() % 100) / 25.0;
        const auto s = random_signal(gen, horizon);
        CAPTURE(s.describe());
        CAPTURE(horizon);
        CHECK(attack_mass(s, horizon) == doctest::Approx(riemann(s, horizon, 1)).epsilon(1e-4).scale(1.0));
        CHECK(attack_energy(s, horizon) == doctest::Approx(riemann(s, horizon, 2)).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("signal_inner_product matches brute force") {
    std::mt19937_64 gen(77);
    for (int i = 0; i < 40; ++i) {
        const double horizon = 0.5 + (gen() % 100) / 25.0;
        const auto a = random_signal(gen, horizon);
        const auto b = random_signal(gen, horizon);
        CAPTURE(a.describe());
        CAPTURE(b.describe());
        const int cells = 200000;
        double brute = 0.0;
        const double h = horizon / cells;
        for (int k = 0; k < cells; ++k) {
            const double t = (k + 0.5) * h;
            brute += a.value_at(t, horizon) * b.value_at(t, horizon) * h;
        }
        CHECK(signal_inner_product(a, b, horizon) == doctest::Approx(brute).epsilon(1e-4).scale(1.0));
        CHECK(signal_inner_product(a, a, horizon) == doctest::Approx(attack_energy(a, horizon)).epsilon(1e-12));
    }
}

TEST_CASE("Cauchy-Schwarz: energy >= mass^2 / T, equality only for constants") {
    std::mt19937_64 gen(99);
    for (int i = 0; i < 500; ++i) {
        const double horizon = 0.1 + (gen() % 1000) / 100.0;
        const auto s = random_signal(gen, horizon);
        const double mass = attack_mass(s, horizon);
        const double energy = attack_energy(s, horizon);
        CAPTURE(s.describe());
        CHECK(energy >= mass * mass / horizon - 1e-12 * std::max(1.0, energy));
        if (s.is_constant(horizon)) {
            CHECK(std::abs(energy - mass * mass / horizon) <= 1e-12 * std::max(1.0, energy));
        } else {
            CHECK(energy > mass * mass / horizon);
        }
    }
}

TEST_CASE("piecewise-constant grid mapping") {
    const auto s = AttackSignal::piecewise({1.0, 2.0, 3.0, 4.0});
    CHECK(s.value_at(0.0, 2.0) == 1.0);
    CHECK(s.value_at(0.49, 2.0) == 1.0);
    CHECK(s.value_at(0.5, 2.0) == 2.0);
    CHECK(s.value_at(1.99, 2.0) == 4.0);
    CHECK(s.value_at(2.0, 2.0) == 4.0);
    CHECK(attack_mass(s, 2.0) == doctest::Approx(5.0));
    CHECK(attack_energy(s, 2.0) == doctest::Approx(15.0));
    CHECK_THROWS_AS(AttackSignal::piecewise({}), DomainError);
    CHECK_THROWS_AS(AttackSignal::pulse(1.0, 0.0, -1.0), DomainError);
}

TEST_CASE("constant_bias_attack sits on the constraint boundary") {
    const auto s = constant_bias_attack(kBaseGame);
    const double level = std::get<ConstantBias>(s.form()).level;
    // mpmath: Phi^-1(0.95) + 1.5 = 3.14485362695147271486...
    CHECK(std::abs(level - 3.1448536269514727) <= 2 * 4.5e-16);
    CHECK(attack_mass(s, kBaseGame) >= kBaseGame.mass_bound());
    CHECK(attack_mass(s, kBaseGame) == doctest::Approx(kBaseGame.mass_bound()).epsilon(1e-15));

    const auto near_half = constant_bias_attack(GameConfig(1.0, 1.5, 0.5001, 0.05));
    CHECK(std::get<ConstantBias>(near_half.form()).level == doctest::Approx(1.5002506628300880).epsilon(1e-14));
    const auto limit = constant_bias_attack(GameConfig(4.0, 1.0, 0.5 + 1e-12, 0.05));
    CHECK(std::get<ConstantBias>(limit.form()).level == doctest::Approx(1.0).epsilon(1e-9));

    for (double horizon : {0.01, 0.3, 1.0, 7.0, 123.0}) {
        for (double c : {0.51, 0.8, 0.999}) {
            const GameConfig g(horizon, 0.7, c, 0.1);
            CHECK(attack_mass(constant_bias_attack(g), g) >= g.mass_bound());
        }
    }
}

TEST_CASE("bridge_attack admissible interval") {
    CHECK_NOTHROW(bridge_attack(1.57, kBaseGame));
    CHECK_THROWS_AS(bridge_attack(1.5, kBaseGame), PreconditionError);
    CHECK_THROWS_AS(bridge_attack(1.70, kBaseGame), PreconditionError);
    try {
        bridge_attack(1.70, kBaseGame);
    } catch (const PreconditionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1.5") != std::string::npos);
        CHECK(msg.find("1.64485362695") != std::string::npos);
    }
    // Interval scales with T: T d < b < sqrt(T) Phi^-1(1 - eps).
    const GameConfig longer(4.0, 0.5, 0.95, 0.05);
    CHECK_NOTHROW(bridge_attack(2.5, longer));
    CHECK_THROWS_AS(bridge_attack(1.9, longer), PreconditionError);
}

TEST_CASE("simulate_path grid and reproducibility") {
    RandomStream a(7, 3), b(7, 3), c(7, 4);
    const Attack drift = AttackSignal::ramp(2.0);
    const auto pa = simulate_path(drift, kBaseGame, 100, a);
    const auto pb = simulate_path(drift, kBaseGame, 100, b);
    const auto pc = simulate_path(drift, kBaseGame, 100, c);
    CHECK(pa.steps() == 100);
    CHECK(pa.values().size() == 101);
    CHECK(pa.values()[0] == 0.0);
    CHECK(pa.time(100) == 1.0);
    CHECK(pa.dt() == doctest::Approx(0.01));
    CHECK(std::equal(pa.values().begin(), pa.values().end(), pb.values().begin()));
    CHECK_FALSE(std::equal(pa.values().begin(), pa.values().end(), pc.values().begin()));

    RandomStream z(1, 1);
    CHECK_THROWS_AS(simulate_path(drift, kBaseGame, 0, z), PreconditionError);
}

TEST_CASE("simulate_path terminal moments") {
    const int seeds = 100000;
    const std::size_t steps = 8;
    double sum0 = 0.0, sum1 = 0.0, increments = 0.0, increments_sq = 0.0;
    const double level = kBaseGame.threshold_drift();
    const Attack zero = AttackSignal::zero();
    const Attack biased = AttackSignal::constant(level);
    for (int s = 0; s < seeds; ++s) {
        RandomStream r0(11, s), r1(12, s);
        const auto path = simulate_path(zero, kBaseGame, steps, r0);
        sum0 += path.terminal();
        const double inc = path.values()[1] - path.values()[0];
        increments += inc;
        increments_sq += inc * inc;
        sum1 += simulate_path(biased, kBaseGame, steps, r1).terminal();
    }
    CHECK(std::abs(sum0 / seeds) <= 4.0 / std::sqrt(double(seeds)));
    CHECK(std::abs(sum1 / seeds - level) <= 4.0 / std::sqrt(double(seeds)));
    const double dt = 1.0 / steps;
    const double var = increments_sq / seeds - (increments / seeds) * (increments / seeds);
    CHECK(std::abs(var - dt) <= 4.0 * dt * std::sqrt(2.0 / seeds));
}

TEST_CASE("a single Euler step is exact for constant drift") {
    const auto signal = AttackSignal::constant(2.25);
    const GameConfig g(3.0, 1.0, 0.9, 0.05);
    for (std::uint64_t k = 0; k < 50; ++k) {
        RandomStream euler(5, k), exact(5, k);
        const double a = simulate_path(Attack{signal}, g, 1, euler).terminal();
        const double b = sample_terminal(signal, g, exact);
        CHECK(a == doctest::Approx(b).epsilon(1e-15));
    }
}

TEST_CASE("Brownian bridge lands on its target") {
    const Attack bridge = bridge_attack(1.57, kBaseGame);
    int close = 0;
    const int seeds = 300;
    for (int s = 0; s < seeds; ++s) {
        RandomStream rng(3, s);
        const auto path = simulate_path(bridge, kBaseGame, 10000, rng);
        close += std::abs(path.terminal() - 1.57) <= 0.05;
    }
    CHECK(close >= 0.99 * seeds);

    // Independent fine-grid simulation (std RNG, N = 1e6) supports the 0.05 tolerance.
    std::mt19937_64 gen(8);
    std::normal_distribution<double> z;
    const int fine = 1000000;
    const double dt = 1.0 / fine;
    for (int s = 0; s < 5; ++s) {
        double x = 0.0;
        for (int k = 0; k < fine; ++k) x += (1.57 - x) / (1.0 - k * dt) * dt + std::sqrt(dt) * z(gen);
        CHECK(std::abs(x - 1.57) <= 0.05);
    }
}

TEST_CASE("non-finite drift is a simulation error") {
    const Attack broken = FeedbackPolicy::custom(
        [](double t, double, double) { return t >= 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; },
        "nan after half");
    RandomStream rng(1, 0);
    CHECK_THROWS_AS(simulate_path(broken, kBaseGame, 10, rng), SimulationError);
}

TEST_CASE("sample_terminal law") {
    const int draws = 1000000;
    double sum = 0.0, sum_sq = 0.0, biased = 0.0;
    const auto constant = AttackSignal::constant(3.1449);
    for (int k = 0; k < draws; ++k) {
        RandomStream r0(21, k), r1(22, k);
        const double x = sample_terminal(AttackSignal::zero(), kBaseGame, r0);
        sum += x;
        sum_sq += x * x;
        biased += sample_terminal(constant, kBaseGame, r1);
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    CHECK(var >= 0.995);
    CHECK(var <= 1.005);
    CHECK(std::abs(biased / draws - 3.1449) <= 4e-3);

    // Terminal law depends on the mass only.
    const int n = 20000;
    std::vector<double> a(n), b(n);
    const auto pulse = AttackSignal::pulse(10.0, 0.0, 0.31449);
    for (int k = 0; k < n; ++k) {
        RandomStream ra(31, k), rb(32, k);
        a[k] = sample_terminal(pulse, kBaseGame, ra);
        b[k] = sample_terminal(constant, kBaseGame, rb);
    }
    CHECK(oracle::ks_statistic(a, b) < oracle::ks_critical_1pct(n, n));

    RandomStream rng(1, 1);
    CHECK_THROWS_AS(sample_terminal(Attack{FeedbackPolicy::bridge(1.57)}, kBaseGame, rng), UnsupportedPolicyError);
}

TEST_CASE("Trajectory invariants") {
    CHECK_THROWS_AS(Trajectory(1.0, {0.0}), PreconditionError);
    CHECK_THROWS_AS(Trajectory(1.0, {0.1, 0.2}), PreconditionError);
    CHECK_THROWS_AS(Trajectory(0.0, {0.0, 0.2}), PreconditionError);
    const Trajectory t(2.0, {0.0, 1.0, -1.0, 0.5});
    CHECK(t.steps() == 3);
    CHECK(t.terminal() == 0.5);
    CHECK(t.time(3) == 2.0);
}
