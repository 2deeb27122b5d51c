#ifndef MZS_ROOTZETA_HPP
#define MZS_ROOTZETA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mzs/affine.hpp"
#include "mzs/mzf.hpp"

namespace mzs {

// Upper-triangular exponent array for nested-interval lattice sums:
//   value = sum over m in N^r of prod_{(i,j)} (m_i + ... + m_j)^{-e_{ij}}.
// Entries are affine expressions; absent positions mean exponent 0.
class RootZetaMatrix {
  public:
    RootZetaMatrix() = default;
    explicit RootZetaMatrix(int r) : r_(r) {}

    int depth() const { return r_; }
    const std::map<std::pair<int, int>, AffineExpr>& entries() const { return entries_; }

    AffineExpr at(int i, int j) const;
    void set(int i, int j, const AffineExpr& e);     // erases when e == 0
    void add(int i, int j, const AffineExpr& e);     // adds into the slot

    bool isConcrete() const;  // every entry a constant
    RootZetaMatrix substitute(const std::map<std::string, Complex>& bindings) const;
    RootZetaMatrix renamed(const std::map<std::string, std::string>& names) const;

    bool operator==(const RootZetaMatrix& o) const {
        return r_ == o.r_ && entries_ == o.entries_;
    }

    // row-major upper-triangular text form, e.g. [[s1,s2,0],[0,0],[t1]]
    std::string str() const;
    static RootZetaMatrix parse(const std::string& text);

  private:
    int r_ = 0;
    std::map<std::pair<int, int>, AffineExpr> entries_;
};

// Path detection: the nonzero entries must sit on one staircase path that
// starts on the diagonal, moves up or right one cell at a time, and ends at
// (1, r) (which must be nonzero).  Interior path cells may hold exponent 0.
// Returns the depth-r index read along the path, position = interval length.
std::optional<std::vector<AffineExpr>> isEZPath(const RootZetaMatrix& m);

// True when some relabeling permutation of the summation variables maps
// every entry interval of m1 onto an interval and transports m1's entries
// exactly onto m2's.  Exhaustive search; requires equal depth <= 6.
bool relabelEquivalent(const RootZetaMatrix& m1, const RootZetaMatrix& m2);

// Block embedding of a product of two nested sums: a's exponents along row 1
// (columns 1..p), b's along row p+1 (columns p+1..p+q).
RootZetaMatrix embedProduct(const std::vector<AffineExpr>& a, const std::vector<AffineExpr>& b);

// Numerical evaluation of a concrete matrix, depth <= 4.  Uses the path form
// when available, a two-chain junction scheme for the shapes produced by the
// rewrite engine, and plain nested loops otherwise.
// Throws ConvergenceCheckFailed when the coverage guard rejects the matrix.
EvalResult rootZetaEval(const RootZetaMatrix& m, const LatticePlan& plan = {});

}  // namespace mzs

#endif
