#pragma once

#include <stdexcept>
#include <string>

namespace fdigame {

/// Raised when a kernel or constructor receives an argument outside its
/// mathematical domain. Nothing in the library clamps silently.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A probability in [0, 1].
///
/// Stored in extended precision: values near 1 (upper-tail CDF values such
/// as Phi(6) = 1 - 1e-9) lose too many digits in a double for the quantile
/// function to recover the argument.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(long double value);

    long double value() const { return value_; }
    /// 1 - value, exact for value >= 1/2.
    long double complement() const { return 1.0L - value_; }

    friend auto operator<=>(const Probability&, const Probability&) = default;

private:
    long double value_ = 0.0L;
};

/// Standard normal CDF. Throws DomainError for non-finite x.
Probability phi_cdf(double x);

/// Standard normal quantile, defined on the open interval (0, 1).
double phi_inv(Probability p);

/// Convenience overload, same contract as phi_inv(Probability).
double phi_inv(double p);

/// log Phi(x), finite for every finite x (asymptotic series in the far left tail).
double log_phi_cdf(double x);

/// Standard normal density.
double phi_pdf(double x);

}  // namespace fdigame
