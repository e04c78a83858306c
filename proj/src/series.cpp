#include "cmdp/series.hpp"

#include "cmdp/error.hpp"

#include <cmath>
#include <vector>

namespace cmdp {

double polylog_negative(int degree, double ratio) {
    if (degree < 0) throw ModelError("polylog degree must be nonnegative");
    if (!(ratio >= 0.0 && ratio < 1.0)) throw ModelError("geometric ratio must lie in [0, 1)");
    if (ratio == 0.0) return 0.0;
    if (degree == 0) return ratio / (1.0 - ratio);

    // Eulerian numbers A(n, m): sum_k k^n x^k = x * sum_m A(n, m) x^m / (1 - x)^(n+1).
    std::vector<double> row{1.0};
    for (int n = 2; n <= degree; ++n) {
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        for (int m = 0; m < n; ++m) {
            const double keep = m < n - 1 ? (m + 1) * row[static_cast<std::size_t>(m)] : 0.0;
            const double shift = m > 0 ? (n - m) * row[static_cast<std::size_t>(m - 1)] : 0.0;
            next[static_cast<std::size_t>(m)] = keep + shift;
        }
        row = std::move(next);
    }
    double poly = 0.0;
    for (auto it = row.rbegin(); it != row.rend(); ++it) poly = poly * ratio + *it;
    return ratio * poly / std::pow(1.0 - ratio, degree + 1);
}

double polynomial_value(std::span<const double> coeffs, double x) {
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
    return v;
}

double geometric_polynomial_tail(double ratio, std::span<const double> coeffs, double offset) {
    // P(offset + k) = sum_i b_i k^i with b_i = sum_{j>=i} c_j C(j, i) offset^(j-i).
    const int degree = static_cast<int>(coeffs.size()) - 1;
    double total = 0.0;
    for (int i = 0; i <= degree; ++i) {
        double b = 0.0;
        double binom = 1.0; // C(j, i), starting at j = i
        for (int j = i; j <= degree; ++j) {
            if (j > i) binom = binom * j / (j - i);
            b += coeffs[static_cast<std::size_t>(j)] * binom * std::pow(offset, j - i);
        }
        total += b * polylog_negative(i, ratio);
    }
    return total;
}

} // namespace cmdp
