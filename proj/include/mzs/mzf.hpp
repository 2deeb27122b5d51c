#ifndef MZS_MZF_HPP
#define MZS_MZF_HPP

#include <vector>

#include "mzs/complexval.hpp"
#include "mzs/series.hpp"
#include "mzs/specfun.hpp"

namespace mzs {

// Euler-Zagier index (s_1, ..., s_r), innermost-last convention:
// zeta_r(s) = sum over 0 < n_1 < ... < n_r of prod n_j^{-s_j}.
struct MzfIndex {
    std::vector<Complex> s;

    MzfIndex() = default;
    MzfIndex(std::initializer_list<Complex> v) : s(v) {}
    explicit MzfIndex(std::vector<Complex> v) : s(std::move(v)) {}
    int depth() const { return static_cast<int>(s.size()); }
};

enum class TailMode { None, AlgebraicFit };

struct LatticePlan {
    // Cutoff for the outermost lattice variable; empty means depth default
    // (2000 / 400 / 120 for depths 2 / 3 / 4).  Additional entries cap inner
    // variables (rarely needed; they are bounded by the outer one anyway).
    std::vector<long long> outer_cutoffs;
    TailMode tail_mode = TailMode::AlgebraicFit;
    int richardson_levels = 3;
    double tol = 0.0;  // 0 means depth default (1e-8 / 1e-6 / 1e-5)
    // lattice range per unit of integer exponent shift; identities whose
    // summands decay slowly in the outer variable need more room per k
    double shift_cutoff_factor = 8.0;

    long long cutoffFor(int depth) const;
    double tolFor(int depth) const;
    void validate() const;
};

struct EvalResult {
    Complex value{0.0, 0.0};
    double err_est = 0.0;
};

// Absolute-convergence test: Re(s_j + ... + s_r) > r - j + 1 for all j.
bool inDomain(const MzfIndex& idx);

// Numerical MZF value for depth <= 4, innermost variable summed exactly via
// the Hurwitz zeta accelerator, outer variables truncated with an algebraic
// tail fit.  Throws OutOfDomain / NoConvergence.
EvalResult mzfEval(const MzfIndex& idx, const LatticePlan& plan = {});

// Mordell-Tornheim double sum  sum_{m,n} m^{-r} n^{-s} (m+n)^{-t}.
EvalResult mtDoubleZeta(const Complex& r, const Complex& s, const Complex& t,
                        const LatticePlan& plan = {});

// --- joint evaluation of weighted MZF families (engine support) -----------
//
// Evaluates sum_t coeff_t * zeta_r(expo_t) with every term summed on the
// same lattice grid, combining the terms' summands per outer value before
// accumulation.  Exponents may carry large integer shifts of either sign
// (e.g. s-k and t+k for k in the hundreds); the evaluator keeps every stored
// intermediate scaled so nothing over- or underflows.
struct WeightedIndex {
    Complex coeff{1.0, 0.0};
    std::vector<Complex> expo;
};

EvalResult jointPathEval(const std::vector<WeightedIndex>& terms, const LatticePlan& plan = {});

}  // namespace mzs

#endif
