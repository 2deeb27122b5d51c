#include "mzs/mzf.hpp"

#include <algorithm>
#include <cmath>

namespace mzs {

long long LatticePlan::cutoffFor(int depth) const {
    if (!outer_cutoffs.empty()) return outer_cutoffs[0];
    if (depth <= 2) return 2000;
    if (depth == 3) return 400;
    return 120;
}

double LatticePlan::tolFor(int depth) const {
    if (tol > 0.0) return tol;
    if (depth <= 2) return 1e-8;
    if (depth == 3) return 1e-6;
    return 1e-5;
}

void LatticePlan::validate() const {
    for (long long c : outer_cutoffs)
        if (c < 8) throw Error("LatticePlan cutoffs must be >= 8");
    if (tol < 0.0) throw Error("LatticePlan.tol must be >= 0");
    if (richardson_levels < 0 || richardson_levels > 8)
        throw Error("LatticePlan.richardson_levels out of range");
}

bool inDomain(const MzfIndex& idx) {
    const int r = idx.depth();
    if (r < 1) return false;
    Complex suffix(0.0, 0.0);
    for (int j = r; j >= 1; --j) {
        suffix += idx.s[j - 1];
        if (!(suffix.real() > static_cast<double>(r - j + 1))) return false;
    }
    return true;
}

namespace {

// One term's scaled prefix-chain state.  Level l accumulates
//   P_l(u) = sum_{n <= u} n^{-a_l} P_{l-1}(n-1),      P_0 == 1,
// stored as m_l(u) = P_l(u) u^{-g_l} with integer g_l chosen so the stored
// mantissa stays representable even when Re(a_l) is hugely negative.
struct ChainState {
    Complex coeff;
    std::vector<Complex> a;   // exponents, size r
    std::vector<int> g;       // scale per prefix level, size r-2
    std::vector<Complex> m;   // current mantissas, size r-2
    EvalOptions hur;

    void init(const WeightedIndex& w, double tol) {
        coeff = w.coeff;
        a = w.expo;
        const int r = static_cast<int>(a.size());
        g.assign(std::max(0, r - 2), 0);
        m.assign(std::max(0, r - 2), Complex(0.0, 0.0));
        int carry = 0;
        for (int l = 0; l + 2 < r; ++l) {
            const int own = std::max(0, static_cast<int>(std::ceil(-a[l].real())) + 1);
            g[l] = carry + own;
            carry = g[l];
        }
        hur.tol = std::max(1e-15, tol * 1e-3);
    }

    // Advances prefixes to include n_l = u (call once per u, ascending from 1).
    // Levels update top-down: level l must read P_{l-1}(u-1), i.e. the value
    // from before this call touches level l-1.
    void pushPrefix(long long u) {
        const double lu = std::log(static_cast<double>(u));
        const double lprev = u > 1 ? std::log(static_cast<double>(u - 1)) : 0.0;
        for (int l = static_cast<int>(m.size()) - 1; l >= 0; --l) {
            Complex add;
            if (l == 0) {
                add = std::exp(-(a[0] + static_cast<double>(g[0])) * lu);
            } else if (m[l - 1] == Complex(0.0, 0.0)) {
                add = Complex(0.0, 0.0);
            } else {
                add = std::exp(-(a[l] + static_cast<double>(g[l])) * lu +
                               static_cast<double>(g[l - 1]) * lprev) *
                      m[l - 1];
            }
            if (u > 1 && g[l] != 0)
                m[l] = m[l] * std::exp(static_cast<double>(g[l]) * (lprev - lu)) + add;
            else
                m[l] = m[l] + add;
        }
    }

    Complex outerSummand(long long v) {
        const int r = static_cast<int>(a.size());
        const double lv = std::log(static_cast<double>(v));
        const double lv1 = std::log(static_cast<double>(v + 1));
        Complex expo = -a[r - 2] * lv - a[r - 1] * lv1;
        Complex lead(1.0, 0.0);
        if (r >= 3) {
            if (m[r - 3] == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
            lead = m[r - 3];
            if (v > 1)
                expo += static_cast<double>(g[r - 3]) * std::log(static_cast<double>(v - 1));
            else
                return Complex(0.0, 0.0);
        }
        const Complex mant =
            specfun::hurwitzZetaScaled(a[r - 1], static_cast<double>(v + 1), hur);
        return coeff * lead * std::exp(expo) * mant;
    }
};

EvalResult chainEvaluate(const std::vector<WeightedIndex>& terms, int r, const LatticePlan& plan) {
    plan.validate();
    // exponents shifted far negative (e.g. s-k at k in the hundreds) put the
    // lattice mass near n ~ shift; grow the range and start the tail-fit
    // windows past that turnover
    double shift = 0.0;
    for (const auto& t : terms)
        for (const Complex& a : t.expo) shift = std::max(shift, -a.real());
    const long long cutoff = std::max(
        plan.cutoffFor(r), static_cast<long long>(plan.shift_cutoff_factor * shift) + 256);
    const long long minBase = std::max<long long>(8, static_cast<long long>(shift));
    const double tol = plan.tolFor(r);

    std::vector<ChainState> states(terms.size());
    for (size_t t = 0; t < terms.size(); ++t) states[t].init(terms[t], tol);

    // dyadic snapshot layout (see truncatedSeries)
    int c = plan.richardson_levels + 4;
    while (c > 3 && (cutoff >> (c - 1)) < minBase) --c;
    const long long n0 = cutoff >> (c - 1);
    const long long nEff = n0 >= 4 ? (n0 << (c - 1)) : cutoff;

    KahanSum acc;
    std::vector<Complex> snaps;
    long long nextSnap = n0 >= 4 ? n0 : nEff + 1;
    for (long long v = 1; v <= nEff; ++v) {
        Complex summand(0.0, 0.0);
        for (auto& st : states) summand += st.outerSummand(v);
        acc.add(summand);
        // prefixes for the next outer value now absorb n = v
        if (r >= 3)
            for (auto& st : states) st.pushPrefix(v);
        if (v == nextSnap) {
            snaps.push_back(acc.value());
            nextSnap *= 2;
        }
    }
    if (plan.tail_mode == TailMode::None || snaps.size() < 3) {
        double err = snaps.size() >= 2 ? std::abs(snaps.back() - snaps[snaps.size() - 2]) : 0.0;
        return {acc.value(), err};
    }
    TailEstimate tail = dyadicRichardson(snaps, plan.richardson_levels);
    return {tail.limit, tail.err_est + 1e-14 * (1.0 + std::abs(tail.limit))};
}

}  // namespace

EvalResult jointPathEval(const std::vector<WeightedIndex>& terms, const LatticePlan& plan) {
    if (terms.empty()) return {Complex(0.0, 0.0), 0.0};
    const int r = static_cast<int>(terms[0].expo.size());
    if (r < 2 || r > 4) throw Error("jointPathEval supports depths 2..4");
    for (const auto& t : terms) {
        if (static_cast<int>(t.expo.size()) != r)
            throw Error("jointPathEval: mixed depths in one family");
        if (!inDomain(MzfIndex(t.expo)))
            throw OutOfDomain("jointPathEval: index outside the convergence domain");
    }
    return chainEvaluate(terms, r, plan);
}

EvalResult mzfEval(const MzfIndex& idx, const LatticePlan& plan) {
    const int r = idx.depth();
    if (r < 1 || r > 4) throw OutOfDomain("mzfEval supports depths 1..4");
    if (!inDomain(idx)) throw OutOfDomain("mzfEval: index outside the convergence domain");
    plan.validate();
    if (r == 1) {
        EvalOptions opts;
        opts.tol = std::max(1e-15, plan.tolFor(1) * 1e-3);
        const Complex v = specfun::hurwitzZeta(idx.s[0], 1.0, opts);
        return {v, opts.tol * (1.0 + std::abs(v))};
    }
    WeightedIndex w;
    w.coeff = Complex(1.0, 0.0);
    w.expo = idx.s;
    return chainEvaluate({w}, r, plan);
}

EvalResult mtDoubleZeta(const Complex& r, const Complex& s, const Complex& t,
                        const LatticePlan& plan) {
    if (!(r.real() + t.real() > 1.0) || !(s.real() + t.real() > 1.0) ||
        !(r.real() + s.real() + t.real() > 2.0))
        throw OutOfDomain("mtDoubleZeta: convergence conditions violated");
    plan.validate();
    // single truncation variable: sum over u = m+n with the inner
    // convolution C(u) = sum_{m<u} m^{-r} (u-m)^{-s} exact per u
    long long U = 2 * plan.cutoffFor(2);
    int c = plan.richardson_levels + 4;
    while (c > 3 && (U >> (c - 1)) < 8) --c;
    const long long n0 = U >> (c - 1);
    if (n0 >= 4) U = n0 << (c - 1);

    std::vector<Complex> powR(U + 1), powS(U + 1);
    for (long long n = 1; n <= U; ++n) {
        const double ln = std::log(static_cast<double>(n));
        powR[n] = std::exp(-r * ln);
        powS[n] = std::exp(-s * ln);
    }
    KahanSum acc;
    std::vector<Complex> snaps;
    long long nextSnap = n0 >= 4 ? n0 : U + 1;
    for (long long u = 2; u <= U; ++u) {
        Complex conv(0.0, 0.0);
        for (long long m = 1; m < u; ++m) conv += powR[m] * powS[u - m];
        acc.add(conv * std::exp(-t * std::log(static_cast<double>(u))));
        if (u == nextSnap) {
            snaps.push_back(acc.value());
            nextSnap *= 2;
        }
    }
    if (plan.tail_mode == TailMode::None || snaps.size() < 3) {
        double err = snaps.size() >= 2 ? std::abs(snaps.back() - snaps[snaps.size() - 2]) : 0.0;
        return {acc.value(), err};
    }
    TailEstimate tail = dyadicRichardson(snaps, plan.richardson_levels);
    return {tail.limit, tail.err_est + 1e-14 * (1.0 + std::abs(tail.limit))};
}

}  // namespace mzs
