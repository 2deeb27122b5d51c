#ifndef MZS_SPECFUN_HPP
#define MZS_SPECFUN_HPP

#include "mzs/complexval.hpp"

namespace mzs {

struct EvalOptions {
    int series_cutoff = 32;      // minimum direct-summation length before switchover
    double tol = 1e-13;          // absolute accuracy target
    long max_terms = 200000;     // hard cap on summed terms

    void validate() const;
};

// Proximity tolerance used for "is this exponent an integer" decisions in
// binomial limit handling.  Far below every sampling grid used in tests.
inline constexpr double kIntegerTol = 1e-9;

namespace specfun {

// Bernoulli number B_n (B_1 = -1/2 convention); exact table up to n = 30.
double bernoulli(int n);

// Principal-branch log Gamma.  exp(logGamma(z)) == Gamma(z); throws
// PoleOfGamma when z is within kIntegerTol of a nonpositive integer.
Complex logGamma(const Complex& z);

// Gamma(z) = exp(logGamma(z)); overflow yields Inf components (caller beware).
Complex gamma(const Complex& z);

// Pochhammer symbol (x)_n = x(x+1)...(x+n-1), (x)_0 = 1.
Complex pochhammer(const Complex& x, long long n);

// Generalized binomial coefficient Gamma(s+1)/(Gamma(t+1) Gamma(s-t+1)),
// extended to a total function by its limit values at gamma poles:
//   - t near a nonnegative integer j:          pochhammer(s-j+1, j)/j!
//   - s-t near a nonnegative integer (by symmetry, same rule)
//   - exactly one denominator pole, finite numerator:  0
//   - otherwise the gamma-ratio formula.
Complex genBinomial(const Complex& s, const Complex& t);

// Gauss hypergeometric series sum_{n>=0} (a)_n (b)_n / ((c)_n n!) z^n for
// |z| <= 0.99.  Throws GammaPoleInC / NoConvergence.
Complex hyp2f1(const Complex& a, const Complex& b, const Complex& c, const Complex& z,
               const EvalOptions& opts = {});

// |LHS - RHS| of the two-sided power/hypergeometric connection identity
//   (x+y)^(s+t) / (x^s y^t) =
//     Gamma(s+t)/(Gamma(s)Gamma(t)) [ 1/s 2F1(s+t,1;s+1; x/(x+y))
//                                   + 1/t 2F1(s+t,1;t+1; y/(x+y)) ],
// both sides evaluated independently.
double connectionResidual(const Complex& s, const Complex& t, const Complex& x,
                          const Complex& y, const EvalOptions& opts = {});

// Hurwitz zeta sum_{n>=0} (n+a)^{-s} for Re(s) > 1, a > 0: direct partial sum
// plus Euler-Maclaurin correction through B_10, remainder bounded by the
// first omitted term and checked against opts.tol.
Complex hurwitzZeta(const Complex& s, double a, const EvalOptions& opts = {});

// Scaled form: returns M with hurwitzZeta(s, a) = M * a^{-s}.  |M| stays
// moderate for any Re(s) > 1, so huge exponents never under/overflow; callers
// fold the a^{-s} factor into their own exponent bookkeeping.
Complex hurwitzZetaScaled(const Complex& s, double a, const EvalOptions& opts = {});

// Regularized upper incomplete gamma Q(R, x) = Gamma(R,x)/Gamma(R) in [0, 1],
// by composite Gauss-Legendre quadrature of the normalized tail integrand.
double upperGammaRatio(double R, double x);

}  // namespace specfun

}  // namespace mzs

#endif
