#include <cmath>
#include <limits>

#include <doctest.h>

#include "fdigame/normal.hpp"
#include "oracles.hpp"

using namespace fdigame;

namespace {
double cdf(double x) { return static_cast<double>(phi_cdf(x).value()); }
}  // namespace

TEST_CASE("phi_cdf reference values") {
    CHECK(cdf(0.0) == 0.5);
    // mpmath ncdf at 40 digits: 0.066807201268858066004...
    CHECK(std::abs(cdf(-1.5) - 0.0668072012688580660) <= 1e-12);
    CHECK(std::abs(cdf(1.644853626951) - 0.95) <= 1e-10);
}

TEST_CASE("phi_cdf agrees with the quadrature oracle") {
    for (int i = 0; i <= 160; ++i) {
        const double x = -8.0 + 0.1 * i;
        CAPTURE(x);
        CHECK(std::abs(cdf(x) - oracle::phi_cdf(x)) <= 1e-12);
    }
}

TEST_CASE("phi_cdf rejects non-finite input") {
    CHECK_THROWS_AS(phi_cdf(std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(phi_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("phi_inv reference values") {
    CHECK(phi_inv(0.5) == 0.0);
    for (double p : {0.95, 0.975, 1e-10, 0.3}) {
        CAPTURE(p);
        const double expected = oracle::phi_inv(p);
        CHECK(std::abs(phi_inv(p) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
        CHECK(std::abs(cdf(phi_inv(p)) - p) <= 1e-12);
    }
    // mpmath: sqrt(2) erfinv(2p - 1)
    CHECK(std::abs(phi_inv(0.95) - 1.6448536269514727) <= 1e-13);
    CHECK(std::abs(phi_inv(0.975) - 1.9599639845400542) <= 1e-13);
}

TEST_CASE("phi_inv domain is the open unit interval") {
    CHECK_THROWS_AS(phi_inv(0.0), DomainError);
    CHECK_THROWS_AS(phi_inv(1.0), DomainError);
    CHECK_THROWS_AS(phi_inv(-0.1), DomainError);
    CHECK_THROWS_AS(phi_inv(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(phi_inv(Probability(1.0L)), DomainError);
    CHECK_THROWS_AS(Probability(1.5L), DomainError);
}

TEST_CASE("round trip on [-6, 6]") {
    double worst = 0.0;
    for (int i = 0; i <= 12000; ++i) {
        const double x = -6.0 + 0.001 * i;
        worst = std::max(worst, std::abs(phi_inv(phi_cdf(x)) - x));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("symmetry and monotonicity") {
    double previous = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = -10.0 + 0.001 * i;
        CHECK(std::abs(cdf(-x) + cdf(x) - 1.0) <= 1e-14);
        const double now = cdf(x);
        CHECK(now >= previous);
        previous = now;
    }
    double last_q = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 1000; ++i) {
        const double p = i / 1000.0;
        CHECK(std::abs(phi_inv(1.0 - p) + phi_inv(p)) <= 1e-10);
        const double q = phi_inv(p);
        CHECK(q > last_q);
        last_q = q;
    }
}

TEST_CASE("log_phi_cdf across the tail switch") {
    // mpmath log(ncdf(x)) at 50 digits.
    CHECK(log_phi_cdf(-10.0) == doctest::Approx(-53.231285150512470578).epsilon(1e-14));
    CHECK(log_phi_cdf(-38.0) == doctest::Approx(-726.55721601882013010).epsilon(1e-14));
    CHECK(log_phi_cdf(-99.5) == doctest::Approx(-4955.6441971594259219).epsilon(1e-14));
    CHECK(log_phi_cdf(-100.5) == doctest::Approx(-5055.6541952436598870).epsilon(1e-14));
    CHECK(log_phi_cdf(-150.0) == doctest::Approx(-11255.929618266808184).epsilon(1e-14));
    CHECK(log_phi_cdf(0.0) == doctest::Approx(std::log(0.5)));
}
