#pragma once

#include <span>

namespace cmdp {

/// sum_{k>=1} k^degree * ratio^k for 0 <= ratio < 1 (negative-order polylogarithm).
double polylog_negative(int degree, double ratio);

/// Value of the polynomial sum_j coeffs[j] * x^j.
double polynomial_value(std::span<const double> coeffs, double x);

/**
 * Closed form of sum_{k>=1} ratio^k * P(offset + k) for the polynomial P with
 * the given coefficients. Used as a certified remainder whenever a geometric
 * majorant ratio^k dominates a probability tail and P dominates a cost.
 */
double geometric_polynomial_tail(double ratio, std::span<const double> coeffs, double offset);

} // namespace cmdp
