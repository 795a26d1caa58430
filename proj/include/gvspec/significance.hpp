#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "gvspec/detail/numfmt.hpp"
#include "gvspec/error.hpp"

namespace gvspec {

/// Degrees-of-freedom parameter for a variance spectrum of `n` samples after
/// `u` constituents were removed and the two trigonometric columns fitted.
inline std::size_t degrees_of_freedom(std::size_t n, std::size_t u) {
    if (n < u + 3)
        throw DegreesOfFreedomError("n - u - 2 must be at least 1 (n=" + std::to_string(n) +
                                    ", u=" + std::to_string(u) + ")");
    return n - u - 2;
}

/// Variance fraction exceeded by white noise with probability `alpha` at a
/// single frequency: 1 - alpha^(2/nu), nu = n - u - 2.
inline double critical_var(double alpha, std::size_t n, std::size_t u) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie in (0, 1), got " + detail::format_double(alpha));
    const double nu = static_cast<double>(degrees_of_freedom(n, u));
    return -std::expm1(2.0 / nu * std::log(alpha));
}

/// Probability that white noise reaches variance fraction `s`:
/// (1 - s)^(nu/2). Inverse of critical_var.
inline double pvalue(double s, std::size_t nu) {
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("variance fraction must lie in [0, 1), got " + detail::format_double(s));
    if (nu < 1) throw DegreesOfFreedomError("nu must be at least 1");
    return std::exp(0.5 * static_cast<double>(nu) * std::log1p(-s));
}

} // namespace gvspec
