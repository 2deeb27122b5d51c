#ifndef MZS_COMPLEXVAL_HPP
#define MZS_COMPLEXVAL_HPP

#include <cmath>
#include <complex>
#include <string>

#include "mzs/errors.hpp"

namespace mzs {

using Complex = std::complex<double>;

inline bool isFinite(const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void ensureFinite(const Complex& z, const char* what) {
    if (!isFinite(z)) throw Error(std::string("non-finite value in ") + what);
}

// Proximity test against the nearest integer, both components.
inline bool nearInteger(const Complex& z, double tol, long long* which = nullptr) {
    const double r = std::round(z.real());
    if (std::abs(z.real() - r) <= tol && std::abs(z.imag()) <= tol) {
        if (which) *which = static_cast<long long>(r);
        return true;
    }
    return false;
}

inline bool nearNonpositiveInteger(const Complex& z, double tol) {
    long long n = 0;
    return nearInteger(z, tol, &n) && n <= 0;
}

inline bool nearNonnegativeInteger(const Complex& z, double tol, long long* which = nullptr) {
    long long n = 0;
    if (nearInteger(z, tol, &n) && n >= 0) {
        if (which) *which = n;
        return true;
    }
    return false;
}

std::string formatComplex(const Complex& z);

// Parses "2", "2.5", "-1.5", "2+1i", "1.5-0.5i", "3i".  Throws ParseError.
Complex parseComplex(const std::string& text);

}  // namespace mzs

#endif
