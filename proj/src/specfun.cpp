#include "mzs/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mzs {

void EvalOptions::validate() const {
    if (series_cutoff < 1) throw Error("EvalOptions.series_cutoff must be >= 1");
    if (!(tol > 0.0)) throw Error("EvalOptions.tol must be > 0");
    if (max_terms < 1) throw Error("EvalOptions.max_terms must be >= 1");
}

namespace specfun {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2Pi = 1.83787706640934548356;  // log(2*pi)

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's table).
constexpr double kLanczosG = 4.7421875;
constexpr std::array<double, 15> kLanczos = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3, 0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4, 0.36899182659531622704e-5,
};

Complex lanczosLogGamma(const Complex& z) {
    // valid for Re(z) >= 0.5
    Complex acc(kLanczos[0], 0.0);
    for (int k = 1; k < 15; ++k) acc += kLanczos[k] / (z + Complex(k - 1, 0.0));
    const Complex base = z + Complex(kLanczosG - 0.5, 0.0);
    return 0.5 * kLn2Pi + (z - Complex(0.5, 0.0)) * std::log(base) - base + std::log(acc);
}

// log(sin(pi z)) with the argument reduced to the strip Re in [0,1), where
// the principal log is continuous; the reduction contributes i*pi*n.
Complex logSinPi(const Complex& z) {
    const double n = std::floor(z.real());
    const Complex zr = z - Complex(n, 0.0);
    const Complex w = kPi * zr;
    Complex ls;
    if (std::abs(w.imag()) < 30.0) {
        ls = std::log(std::sin(w));
    } else if (w.imag() > 0.0) {
        // sin w = -e^{-iw} (1 - e^{2iw}) / (2i)
        ls = Complex(0.0, -1.0) * w + std::log1p(-std::exp(Complex(0.0, 2.0) * w).real()) -
             Complex(std::log(2.0), kPi / 2) + Complex(0.0, kPi);
    } else {
        ls = Complex(0.0, 1.0) * w + std::log1p(-std::exp(Complex(0.0, -2.0) * w).real()) -
             Complex(std::log(2.0), kPi / 2);
    }
    return ls + Complex(0.0, kPi * n);
}

}  // namespace

double bernoulli(int n) {
    if (n < 0) throw Error("bernoulli: negative index");
    if (n == 0) return 1.0;
    if (n == 1) return -0.5;
    if (n % 2 == 1) return 0.0;
    static const std::array<double, 16> even = {
        1.0,
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
        854513.0 / 138.0,
        -236364091.0 / 2730.0,
        8553103.0 / 6.0,
        -23749461029.0 / 870.0,
        8615841276005.0 / 14322.0,
    };
    if (n / 2 >= static_cast<int>(even.size()))
        throw Error("bernoulli: index beyond table");
    return even[n / 2];
}

Complex logGamma(const Complex& z) {
    ensureFinite(z, "logGamma");
    if (nearNonpositiveInteger(z, kIntegerTol))
        throw PoleOfGamma("logGamma at pole z=" + formatComplex(z));
    if (z.real() >= 0.5) return lanczosLogGamma(z);
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return std::log(kPi) - logSinPi(z) - lanczosLogGamma(Complex(1.0, 0.0) - z);
}

Complex gamma(const Complex& z) { return std::exp(logGamma(z)); }

Complex pochhammer(const Complex& x, long long n) {
    if (n < 0) throw Error("pochhammer: negative n");
    Complex acc(1.0, 0.0);
    for (long long i = 0; i < n; ++i) acc *= x + Complex(static_cast<double>(i), 0.0);
    return acc;
}

Complex genBinomial(const Complex& s, const Complex& t) {
    ensureFinite(s, "genBinomial");
    ensureFinite(t, "genBinomial");
    long long j = 0;
    if (nearNonnegativeInteger(t, kIntegerTol, &j)) {
        // (s-j+1)_j / j!, evaluated as a running ratio so large j stays bounded
        Complex acc(1.0, 0.0);
        for (long long i = 0; i < j; ++i)
            acc *= (s - Complex(static_cast<double>(j - 1 - i), 0.0)) /
                   Complex(static_cast<double>(i + 1), 0.0);
        return acc;
    }
    if (nearNonnegativeInteger(s - t, kIntegerTol, &j)) {
        Complex acc(1.0, 0.0);
        for (long long i = 0; i < j; ++i)
            acc *= (s - Complex(static_cast<double>(j - 1 - i), 0.0)) /
                   Complex(static_cast<double>(i + 1), 0.0);
        return acc;
    }
    const bool poleNum = nearNonpositiveInteger(s + Complex(1.0, 0.0), kIntegerTol);
    const bool poleT = nearNonpositiveInteger(t + Complex(1.0, 0.0), kIntegerTol);
    const bool poleST = nearNonpositiveInteger(s - t + Complex(1.0, 0.0), kIntegerTol);
    if (!poleNum && (poleT || poleST)) return Complex(0.0, 0.0);
    if (poleNum && (poleT || poleST)) return Complex(0.0, 0.0);  // joint limit, see tests
    return std::exp(logGamma(s + 1.0) - logGamma(t + 1.0) - logGamma(s - t + 1.0));
}

Complex hyp2f1(const Complex& a, const Complex& b, const Complex& c, const Complex& z,
               const EvalOptions& opts) {
    opts.validate();
    if (nearNonpositiveInteger(c, kIntegerTol))
        throw GammaPoleInC("hyp2f1: c=" + formatComplex(c) + " is a nonpositive integer");
    const double az = std::abs(z);
    if (az > 0.99)
        throw OutOfDomain("hyp2f1: |z| = " + std::to_string(az) + " > 0.99");
    if (az == 0.0) return Complex(1.0, 0.0);
    Complex acc(1.0, 0.0);
    Complex term(1.0, 0.0);
    const double q0 = 0.5 * (1.0 + az);
    for (long n = 0; n < opts.max_terms; ++n) {
        const double dn = static_cast<double>(n);
        term *= (a + dn) * (b + dn) / ((c + dn) * (dn + 1.0)) * z;
        acc += term;
        const double ratio =
            az * std::abs((a + dn + 1.0) * (b + dn + 1.0) / ((c + dn + 1.0) * (dn + 2.0)));
        if (ratio < q0 && std::abs(term) * q0 / (1.0 - q0) < opts.tol * std::max(1.0, std::abs(acc)))
            return acc;
    }
    throw NoConvergence("hyp2f1: series did not converge within max_terms");
}

double connectionResidual(const Complex& s, const Complex& t, const Complex& x,
                          const Complex& y, const EvalOptions& opts) {
    if (s.real() <= 0 || t.real() <= 0 || x.real() <= 0 || y.real() <= 0)
        throw OutOfDomain("connectionResidual needs Re(s),Re(t),Re(x),Re(y) > 0");
    const Complex xy = x + y;
    const Complex lhs = std::exp((s + t) * std::log(xy) - s * std::log(x) - t * std::log(y));
    const Complex pref = std::exp(logGamma(s + t) - logGamma(s) - logGamma(t));
    const Complex f1 = hyp2f1(s + t, Complex(1.0, 0.0), s + 1.0, x / xy, opts);
    const Complex f2 = hyp2f1(s + t, Complex(1.0, 0.0), t + 1.0, y / xy, opts);
    const Complex rhs = pref * (f1 / s + f2 / t);
    return std::abs(lhs - rhs);
}

namespace {

// Scaled Euler-Maclaurin core: returns M with zetaH(s, a) = M a^{-s}.
Complex hurwitzScaledCore(const Complex& s, double a, const EvalOptions& opts) {
    const double sigma = s.real();
    Complex acc(0.0, 0.0);
    const double la = std::log(a);
    long long n = 0;
    const double nSwitch = std::max({10.0, std::abs(s), static_cast<double>(opts.series_cutoff)});
    while (true) {
        const double t = a + static_cast<double>(n);
        // integral bound on the remaining direct tail, scaled by a^{sigma}
        const double tailBound =
            std::exp(-sigma * (std::log(t) - la)) + std::exp((1.0 - sigma) * std::log(t) + sigma * la) / (sigma - 1.0);
        if (n >= 1 && tailBound < 0.25 * opts.tol * std::max(1.0, std::abs(acc))) return acc;
        if (t >= nSwitch && n >= 1) break;
        acc += std::exp(-s * (std::log(t) - la));
        ++n;
        if (n > opts.max_terms)
            throw NoConvergence("hurwitzZeta: direct stage exceeded max_terms");
    }
    // Euler-Maclaurin correction at T = a + n, through B_10, remainder bounded
    // by the first omitted term; grow the switchover until the bound closes.
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double T = a + static_cast<double>(n);
        const Complex scale = std::exp(-s * (std::log(T) - la));  // (T/a)^{-s}
        Complex em = Complex(T, 0.0) / (s - 1.0) + Complex(0.5, 0.0);
        Complex poch = s;  // (s)_{2j-1} running product
        double Tpow = T;   // T^{2j-1}
        for (int jj = 1; jj <= 5; ++jj) {
            em += bernoulli(2 * jj) / std::tgamma(2.0 * jj + 1.0) * poch / Tpow;
            if (jj < 5) {
                poch *= (s + Complex(2.0 * jj - 1.0, 0.0)) * (s + Complex(2.0 * jj, 0.0));
                Tpow *= T * T;
            }
        }
        poch *= (s + Complex(9.0, 0.0)) * (s + Complex(10.0, 0.0));
        Tpow *= T * T;
        const double remainder = std::abs(bernoulli(12) / std::tgamma(13.0)) * std::abs(poch) /
                                 Tpow * std::abs(scale);
        Complex result = acc + scale * em;
        if (remainder < opts.tol * std::max(1.0, std::abs(result))) return result;
        // extend the direct part and retry
        const long long extra = std::max<long long>(n, 16);
        for (long long i = 0; i < extra; ++i) {
            const double t = a + static_cast<double>(n);
            acc += std::exp(-s * (std::log(t) - la));
            ++n;
            if (n > opts.max_terms)
                throw NoConvergence("hurwitzZeta: switchover growth exceeded max_terms");
        }
    }
    throw NoConvergence("hurwitzZeta: remainder bound failed to close");
}

}  // namespace

Complex hurwitzZetaScaled(const Complex& s, double a, const EvalOptions& opts) {
    opts.validate();
    if (!(a > 0.0)) throw OutOfDomain("hurwitzZeta: a must be > 0");
    if (!(s.real() > 1.0)) throw OutOfDomain("hurwitzZeta: Re(s) must be > 1");
    return hurwitzScaledCore(s, a, opts);
}

Complex hurwitzZeta(const Complex& s, double a, const EvalOptions& opts) {
    return hurwitzZetaScaled(s, a, opts) * std::exp(-s * std::log(a));
}

namespace {

// 20-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 10> kGLNode = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949,
};
constexpr std::array<double, 10> kGLWeight = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521,
};

}  // namespace

double upperGammaRatio(double R, double x) {
    if (!(R > 0.0)) throw OutOfDomain("upperGammaRatio: R must be > 0");
    if (x < 0.0) throw OutOfDomain("upperGammaRatio: x must be >= 0");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(R);
    auto f = [&](double t) { return std::exp((R - 1.0) * std::log(t) - t - lg); };
    // integrate from x to where the integrand is negligible past the mode
    const double mode = std::max(R - 1.0, 0.0);
    double tEnd = std::max(x, mode) + 12.0 * std::sqrt(std::max(R, 1.0)) + 40.0;
    double acc = 0.0;
    const double panel = std::max(0.5, std::sqrt(std::max(R, 1.0)) / 2.0);
    double lo = x;
    while (lo < tEnd) {
        const double hi = std::min(lo + panel, tEnd);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double sum = 0.0;
        for (int i = 0; i < 10; ++i)
            sum += kGLWeight[i] * (f(mid - half * kGLNode[i]) + f(mid + half * kGLNode[i]));
        acc += half * sum;
        lo = hi;
    }
    return std::clamp(acc, 0.0, 1.0);
}

}  // namespace specfun

}  // namespace mzs
