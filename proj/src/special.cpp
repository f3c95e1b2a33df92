#include "riskprec/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskprec/errors.hpp"

namespace riskprec::special {

namespace {

constexpr double kSqrt2 = 1.414213562373095048801688724209698079;

// Acklam's coefficients.
constexpr std::array<double, 6> kA{-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB{-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
constexpr std::array<double, 6> kC{-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD{7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

double acklam(double p) {
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
           (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    std::ostringstream msg;
    msg << "incomplete beta continued fraction did not converge (a=" << a << ", b=" << b
        << ", x=" << x << ")";
    throw NumericalError(msg.str());
}

}  // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "normal quantile requires p in (0,1), got " << p;
        throw DomainError(msg.str());
    }
    double x = acklam(p);
    // Halley refinement; the residual is taken on the tail nearer to p so the
    // subtraction does not cancel.
    const double e = (x <= 0.0) ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double incomplete_beta(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_fraction(b, a, y) / b;
}

double student_t_pdf(double t, double nu) noexcept {
    const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                            0.5 * std::log(nu * kPi);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double student_t_sf(double t, double nu) {
    const double t2 = t * t;
    const double x = nu / (nu + t2);
    const double y = t2 / (nu + t2);
    const double half_tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x, y);
    return (t >= 0.0) ? half_tail : 1.0 - half_tail;
}

double student_t_cdf(double t, double nu) { return student_t_sf(-t, nu); }

double student_t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "t quantile requires p in (0,1), got " << p;
        throw DomainError(msg.str());
    }
    if (p == 0.5) return 0.0;
    // Solve in the upper half using the survival function: sf(t) = tail.
    const bool upper = p > 0.5;
    const double tail = upper ? 1.0 - p : p;

    double lo = 0.0;
    double hi = 1.0;
    while (student_t_sf(hi, nu) > tail) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericalError("t quantile bracket overflow");
    }
    double t = std::clamp(-normal_quantile(tail), lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = student_t_sf(t, nu) - tail;  // decreasing in t
        if (f > 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        double next = t + f / student_t_pdf(t, nu);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - t) <= 1e-15 * (1.0 + std::fabs(t)) || hi - lo <= 1e-15 * hi) {
            t = next;
            break;
        }
        t = next;
    }
    return upper ? t : -t;
}

}  // namespace riskprec::special
