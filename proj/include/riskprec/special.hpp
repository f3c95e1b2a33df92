#pragma once

// Scalar special functions needed by the distribution families.

namespace riskprec::special {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;
inline constexpr double kSqrt2OverPi = 0.797884560802865355879892119868763737;

[[nodiscard]] double normal_pdf(double x) noexcept;
[[nodiscard]] double normal_cdf(double x) noexcept;
/// Upper tail 1 - Phi(x), accurate for large x.
[[nodiscard]] double normal_sf(double x) noexcept;

/// Inverse standard-normal CDF. Acklam's rational approximation followed by
/// one Halley step against erfc; |error| well below 1e-12 on (0, 1).
[[nodiscard]] double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
[[nodiscard]] double incomplete_beta(double a, double b, double x, double y);

[[nodiscard]] double student_t_pdf(double t, double nu) noexcept;
[[nodiscard]] double student_t_cdf(double t, double nu);
[[nodiscard]] double student_t_sf(double t, double nu);
[[nodiscard]] double student_t_quantile(double p, double nu);

}  // namespace riskprec::special
