#pragma once

// Scalar special functions used by the error models. All functions are pure.

namespace robreg::special {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736405617640;

/// Standard normal density exp(-z^2/2)/sqrt(2*pi).
double normal_pdf(double z);

/// log of normal_pdf, exact for large |z| where normal_pdf underflows.
double normal_log_pdf(double z);

/// Standard normal distribution function, accurate to ~1e-16 absolute.
double normal_cdf(double z);

/// Inverse of normal_cdf. Throws DomainError unless 0 < p < 1.
///
/// Rational starting approximation (Acklam) followed by Halley refinement
/// against normal_cdf; |normal_cdf(normal_quantile(p)) - p| <= 1e-10 on the
/// whole open interval.
double normal_quantile(double p);

/// log Gamma(x) for x > 0 (Lanczos, g = 7). Throws DomainError for x <= 0.
double log_gamma(double x);

}  // namespace robreg::special
