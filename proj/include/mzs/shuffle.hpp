#ifndef MZS_SHUFFLE_HPP
#define MZS_SHUFFLE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mzs/rootzeta.hpp"

namespace mzs {

struct SumIndex {
    std::string name;
    bool infinite = true;
    AffineExpr upper;  // inclusive upper bound when finite (e.g. "k1" or "a-k1-1")

    bool operator==(const SumIndex& o) const {
        return name == o.name && infinite == o.infinite && upper == o.upper;
    }
};

struct CoeffFactor {
    enum class Kind { GenBinomial, SignedIntBinomial };
    Kind kind = Kind::GenBinomial;
    AffineExpr top, bottom;              // GenBinomial(top, bottom)
    std::string top_index, bottom_index; // SignedIntBinomial: (-1)^j C(k, j)

    static CoeffFactor genBinom(const AffineExpr& top, const AffineExpr& bottom);
    static CoeffFactor signedIntBinom(const std::string& k, const std::string& j);
    bool operator==(const CoeffFactor& o) const;
};

// One summand family: sign * prod(coeffs) * rootzeta(matrix), summed over the
// index stack (outermost first).
struct ShuffleTerm {
    int sign = 1;
    std::vector<CoeffFactor> coeffs;
    std::vector<SumIndex> indices;
    RootZetaMatrix matrix;

    // engine bookkeeping: row-1 prefix chain length, B-chain row and length
    int chainA = 0;
    int chainBRow = 0;
    int chainB = 0;
};

// Expansion tree node.  Inner nodes hold the (normalized) pre-split term so
// realization can evaluate whole subtrees through their matrix when honest
// nested summation of huge alternating coefficients would destroy precision.
struct ExpNode {
    enum class Kind { Leaf, Split, Collapse };
    Kind kind = Kind::Leaf;
    ShuffleTerm term;            // leaf: the family itself; inner: pre-split state
    std::string indexName;       // fresh index introduced below this node
    std::pair<int, int> targetX{0, 0}, targetY{0, 0};
    std::vector<std::unique_ptr<ExpNode>> children;

    std::unique_ptr<ExpNode> clone() const;
};

struct Expansion {
    struct Param {
        std::string name;
        bool lastEntry = false;  // needs Re > 1; others need Re >= 1
    };
    std::vector<Param> params;
    std::vector<ShuffleTerm> terms;  // leaves in creation order
    std::unique_ptr<ExpNode> root;
    int depth = 0;
    int freshCount = 0;

    Expansion() = default;
    Expansion(Expansion&&) = default;
    Expansion& operator=(Expansion&&) = default;
    Expansion copy() const;
};

// --- engine steps ----------------------------------------------------------

// Applies the infinite partial-fraction split to the two adjacent entries at
// x=(ax,bx), y=(ay,by) (bx+1 == ay).  Returns the four signed families with
// one fresh infinite index, or the single finite alternating family when the
// exponent at x or y is exactly a negated index symbol.  freshCount numbers
// the new index (k<freshCount+1>).  Throws InvalidTarget.
std::vector<ShuffleTerm> ipfdStep(const ShuffleTerm& term, std::pair<int, int> x,
                                  std::pair<int, int> y, int& freshCount);

// Moves the B chain next to the row-1 prefix by a relabeling certified by
// relabelEquivalent; returns the input unchanged when already in place.
// Throws NoCertifiedMove if certification fails.
ShuffleTerm normalizeMove(const ShuffleTerm& term);

// Full rewrite: starting from the product embedding of the two symbolic
// indices, splits until every family matrix is an MZF path.
// Parameter names are the entries of `left` and `right`.
Expansion expandShuffle(const std::vector<std::string>& left,
                        const std::vector<std::string>& right);

// --- realization -----------------------------------------------------------

// Realization strategy: leaf families are always summed directly on shared
// lattices; non-leaf subtrees are evaluated through their intermediate
// matrices (the series terms of the top-level relation), which stays accurate
// and finite even at parameter points where the deeper family coefficients
// have gamma poles.  The honest_* cutoffs optionally force genuine nested
// summation of subtrees below small index values; that route converges
// slowly and exists for cross-validation, not production accuracy.
struct TruncationPlan {
    std::vector<long long> index_cutoffs = {400, 240, 160};  // per nesting level
    long long honest_split_cutoff = 0;     // below: recurse into subtrees
    long long honest_collapse_cutoff = 0;  // below: sum collapse families directly
    int richardson_levels = 3;
    LatticePlan lattice;
    double tol = 1e-6;

    long long cutoffAt(size_t level) const {
        if (index_cutoffs.empty()) return 400;
        return index_cutoffs[std::min(level, index_cutoffs.size() - 1)];
    }
};

// Numeric value of the expansion at the given parameter bindings.
// Throws OutOfDomain when bindings violate the domain constraints.
EvalResult realize(const Expansion& e, const std::map<std::string, Complex>& bindings,
                   const TruncationPlan& plan = {});

// Specializes parameters to integers (last entries >= 2, inner >= 1): the
// paired +/- families telescope, every infinite index collapses to a finite
// range, and the bound parameters are substituted away.
Expansion integerSpecialize(const Expansion& e, const std::map<std::string, long long>& bindings);

// --- serialization / rendering ---------------------------------------------

std::string expansionToJson(const Expansion& e);
Expansion expansionFromJson(const std::string& text);

// canonical per-term key: indices renamed k1,k2,... in stack order
std::string canonicalTermKey(const ShuffleTerm& t);

// human-readable multi-line rendering
std::string renderExpansion(const Expansion& e);

// the rewrite tree with each intermediate in the triangular matrix layout
std::string renderTree(const Expansion& e);

}  // namespace mzs

#endif
