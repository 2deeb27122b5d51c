#include "mzs/series.hpp"

#include <cmath>

namespace mzs {

TailEstimate dyadicRichardson(const std::vector<Complex>& snapshots, int levels) {
    // Model: S - S(N_i) = w_i * (k0 + k1 x_i + k2 x_i^2 + ...) with
    // x_i = 2^{-i} and w_i the window sum ending at snapshot i.  The unknown
    // algebraic decay order is absorbed into w_i, so only the polynomial
    // correction in 1/N remains; divided differences of
    //   R_i = S_i / w_i   and   U_i = 1 / w_i
    // against the nodes x_i then give S = DD(R)/DD(U) at each order, exact
    // once the polynomial degree is covered.
    TailEstimate out;
    if (snapshots.empty()) return out;
    out.limit = snapshots.back();
    if (snapshots.size() < 3) {
        out.err_est = snapshots.size() == 2 ? std::abs(snapshots[1] - snapshots[0]) : 0.0;
        return out;
    }
    const size_t n = snapshots.size();
    const double lastWindow = std::abs(snapshots[n - 1] - snapshots[n - 2]);
    if (lastWindow == 0.0) {
        // converged exactly (finite support)
        out.err_est = 0.0;
        return out;
    }
    std::vector<double> x;
    std::vector<Complex> R, U;
    for (size_t i = 1; i < n; ++i) {
        const Complex w = snapshots[i] - snapshots[i - 1];
        if (std::abs(w) == 0.0) break;
        x.push_back(std::ldexp(1.0, -static_cast<int>(i)));
        R.push_back(snapshots[i] / w);
        U.push_back(1.0 / w);
    }
    const int m = static_cast<int>(x.size());
    if (m < 2) {
        out.err_est = lastWindow;
        return out;
    }
    Complex best = snapshots.back();
    double bestErr = lastWindow;
    Complex prev = snapshots.back();
    const int maxOrder = std::min(m - 1, levels + 1);
    for (int order = 1; order <= maxOrder; ++order) {
        // one more divided-difference level, in place
        for (int i = 0; i + order < m; ++i) {
            const double dx = x[i + order] - x[i];
            R[i] = (R[i + 1] - R[i]) / dx;
            U[i] = (U[i + 1] - U[i]) / dx;
        }
        const int top = m - order - 1;  // entry using the highest-index nodes
        if (std::abs(U[top]) == 0.0) break;
        const Complex est = R[top] / U[top];
        const double change = std::abs(est - prev);
        if (order >= 1) {
            if (order == maxOrder || change < bestErr) {
                best = est;
                bestErr = change;
            }
        }
        prev = est;
        out.extrapolated = true;
    }
    out.limit = best;
    out.err_est = bestErr + 1e-15 * (1.0 + std::abs(best));
    return out;
}

TailEstimate truncatedSeries(const std::function<Complex(long long)>& term, long long K,
                             int levels) {
    KahanSum acc;
    int c = levels + 4;
    while (c > 3 && (K >> (c - 1)) < 8) --c;
    const long long n0 = K >> (c - 1);
    if (n0 < 4) {
        Complex last(0.0, 0.0);
        for (long long k = 0; k < K; ++k) {
            last = term(k);
            acc.add(last);
        }
        return {acc.value(), std::abs(last), false};
    }
    std::vector<Complex> snaps;
    long long next = n0;
    const long long kEff = n0 << (c - 1);
    for (long long k = 0; k < kEff; ++k) {
        acc.add(term(k));
        if (k + 1 == next) {
            snaps.push_back(acc.value());
            next *= 2;
        }
    }
    return dyadicRichardson(snaps, levels);
}

}  // namespace mzs
