#include "fdigame/normal.hpp"

#include <array>
#include <cmath>

namespace fdigame {

namespace {

constexpr long double kSqrt2 = 1.414213562373095048801688724209698079L;
constexpr long double kInvSqrt2Pi = 0.398942280401432677939946059934381868L;
constexpr long double kHalfLog2Pi = 0.918938533204672741780329736405617639L;

long double cdf_ext(long double x) { return 0.5L * std::erfc(-x / kSqrt2); }

long double pdf_ext(long double x) { return kInvSqrt2Pi * std::exp(-0.5L * x * x); }

template <std::size_t N>
long double horner(const std::array<long double, N>& c, long double x) {
    long double acc = 0.0L;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

// Wichura, AS241 (PPND16). Coefficients in ascending powers.
constexpr std::array<long double, 8> kCentralNum = {
    3.387132872796366608L,   133.14166789178437745L, 1971.5909503065514427L,
    13731.693765509461125L,  45921.953931549871457L, 67265.770927008700853L,
    33430.575583588128105L,  2509.0809287301226727L};
constexpr std::array<long double, 8> kCentralDen = {
    1.0L,                   42.313330701600911252L, 687.1870074920579083L,
    5394.1960214247511077L, 21213.794301586595867L, 39307.89580009271061L,
    28729.085735721942674L, 5226.495278852545925L};
constexpr std::array<long double, 8> kNearNum = {
    1.42343711074968357734L,   4.6303378461565452959L,    5.7694972214606914055L,
    3.64784832476320460504L,   1.27045825245236838258L,   0.24178072517745061177L,
    0.0227238449892691845833L, 7.7454501427834140764e-4L};
constexpr std::array<long double, 8> kNearDen = {
    1.0L,                      2.05319162663775882187L,   1.6763848301838038494L,
    0.68976733498510000455L,   0.14810397642748007459L,   0.0151986665636164571966L,
    5.475938084995344946e-4L,  1.05075007164441684324e-9L};
constexpr std::array<long double, 8> kFarNum = {
    6.6579046435011037772L,    5.4637849111641143699L,    1.7848265399172913358L,
    0.29656057182850489123L,   0.026532189526576123093L,  0.0012426609473880784386L,
    2.71155556874348757815e-5L, 2.01033439929228813265e-7L};
constexpr std::array<long double, 8> kFarDen = {
    1.0L,                      0.59983220655588793769L,   0.13692988092273580531L,
    0.0148753612908506148525L, 7.868691311456132591e-4L,  1.8463183175100546818e-5L,
    1.4215117583164458887e-7L, 2.04426310338993978564e-15L};

// Quantile for a lower-tail probability p in (0, 1/2].
long double lower_quantile(long double p) {
    const long double q = p - 0.5L;
    long double x;
    if (std::fabs(q) <= 0.425L) {
        const long double r = 0.180625L - q * q;
        x = q * horner(kCentralNum, r) / horner(kCentralDen, r);
    } else {
        long double r = std::sqrt(-std::log(p));
        if (r <= 5.0L) {
            r -= 1.6L;
            x = -horner(kNearNum, r) / horner(kNearDen, r);
        } else {
            r -= 5.0L;
            x = -horner(kFarNum, r) / horner(kFarDen, r);
        }
    }
    // Newton polish against the extended-precision CDF.
    for (int i = 0; i < 2; ++i) {
        const long double density = pdf_ext(x);
        if (density == 0.0L) break;
        x -= (cdf_ext(x) - p) / density;
    }
    return x;
}

}  // namespace

Probability::Probability(long double value) : value_(value) {
    if (!(value >= 0.0L && value <= 1.0L)) {
        throw DomainError("probability must lie in [0, 1], got " + std::to_string(static_cast<double>(value)));
    }
}

Probability phi_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("phi_cdf: argument must be finite");
    return Probability(cdf_ext(x));
}

double phi_pdf(double x) { return static_cast<double>(pdf_ext(x)); }

double phi_inv(Probability p) {
    const long double v = p.value();
    if (!(v > 0.0L && v < 1.0L)) {
        throw DomainError("phi_inv: probability must lie in (0, 1), got " + std::to_string(static_cast<double>(v)));
    }
    if (v == 0.5L) return 0.0;
    if (v < 0.5L) return static_cast<double>(lower_quantile(v));
    return static_cast<double>(-lower_quantile(p.complement()));
}

double phi_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("phi_inv: probability must lie in (0, 1), got " + std::to_string(p));
    }
    return phi_inv(Probability(p));
}

double log_phi_cdf(double x) {
    if (!std::isfinite(x)) throw DomainError("log_phi_cdf: argument must be finite");
    if (x > -100.0) return static_cast<double>(std::log(cdf_ext(x)));
    // Mills ratio: Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
    const long double z = x;
    const long double inv2 = 1.0L / (z * z);
    const long double series = 1.0L - inv2 * (1.0L - 3.0L * inv2 * (1.0L - 5.0L * inv2));
    return static_cast<double>(-0.5L * z * z - kHalfLog2Pi - std::log(-z) + std::log(series));
}

}  // namespace fdigame
