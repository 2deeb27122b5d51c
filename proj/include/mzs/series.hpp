#ifndef MZS_SERIES_HPP
#define MZS_SERIES_HPP

#include <functional>
#include <vector>

#include "mzs/complexval.hpp"

namespace mzs {

// Kahan-style compensated accumulator over complex values.  The summation
// order is whatever the caller feeds; evaluators keep that order fixed per
// plan so results are reproducible.
class KahanSum {
  public:
    void add(const Complex& v) {
        const Complex y = v - comp_;
        const Complex t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    const Complex& value() const { return sum_; }

  private:
    Complex sum_{0.0, 0.0};
    Complex comp_{0.0, 0.0};
};

struct TailEstimate {
    Complex limit{0.0, 0.0};  // extrapolated series value
    double err_est = 0.0;     // heuristic bound on |limit - true|
    bool extrapolated = false;
};

// Extrapolates the limit of a series from partial sums taken at dyadically
// spaced cutoffs S(N0), S(2 N0), ..., S(N): assumes an algebraic remainder
// c1 N^-p (1 + c2/N + ...), estimates p from successive window ratios and
// eliminates up to `levels` remainder orders.  Falls back to the last
// partial sum (err_est = last window magnitude) when the ratios are not
// usable, e.g. for finitely supported or geometrically convergent series.
TailEstimate dyadicRichardson(const std::vector<Complex>& snapshots, int levels = 3);

// Convenience driver: sums term(k) for k = 0..K-1 recording snapshots at
// K/2^m and extrapolates the tail.  `levels` as above.
TailEstimate truncatedSeries(const std::function<Complex(long long)>& term, long long K,
                             int levels = 3);

}  // namespace mzs

#endif
