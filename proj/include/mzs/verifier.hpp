#ifndef MZS_VERIFIER_HPP
#define MZS_VERIFIER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mzs/shuffle.hpp"

namespace mzs {

// --- quasi-shuffle (stuffle) expansion -------------------------------------

// Product of two nested-sum indices as a sum of interleave-or-merge words:
//   (u*, x) . (v*, y) = ((u*,x).v*, y) + (u*.(v*,y), x) + (u*.v*, x+y).
// Entries are affine so merged slots keep symbolic sums like a+b.
std::vector<std::vector<AffineExpr>> stuffleExpand(const std::vector<AffineExpr>& a,
                                                   const std::vector<AffineExpr>& b);

// number of words the quasi-shuffle of depths (p, q) produces
long long stuffleWordCount(int p, int q);

// --- binomial inversion ------------------------------------------------------

// Values of a two-argument map on the triangle shift + level <= L:
// key (d, l) holds the value at argument (s - d; -l).
struct BinomialTable {
    long long L = 0;
    std::map<std::pair<long long, long long>, Complex> values;

    Complex at(long long d, long long l) const;
    void set(long long d, long long l, const Complex& v) { values[{d, l}] = v; }
};

// g(s; -l) = sum_k C(l,k) f(s-k; -l+k)
BinomialTable binomialForward(const BinomialTable& f);
// f(s; -l) = sum_k (-1)^k C(l,k) g(s-k; -l+k)
BinomialTable binomialInvert(const BinomialTable& g);

// --- identity catalog + verification ----------------------------------------

struct IdentitySpec {
    std::string id;
    std::vector<std::map<std::string, Complex>> points;
    TruncationPlan plan;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;  // drives random catalogs (rational samples etc.)
};

struct PointResult {
    std::map<std::string, Complex> point;
    Complex lhs{0.0, 0.0}, rhs{0.0, 0.0};
    double residual = 0.0;
    double err_est = 0.0;
    bool pass = false;
    bool error = false;
    std::string message;   // error text or extra notes
    std::string cutoffs;   // effective truncation summary
    double wall_ms = 0.0;
};

struct VerificationReport {
    std::string id;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::vector<PointResult> points;
    bool pass = false;
    bool evalError = false;  // any point failed to evaluate
    double total_ms = 0.0;
};

// all identity ids, in catalog order
const std::vector<std::string>& identityIds();

// the shipped default catalog for one identity
IdentitySpec defaultSpec(const std::string& id);

// runs every catalog point; pass iff residual <= max(tol, 3 * err_est)
// at each point.  Evaluation errors are recorded per point, never thrown.
VerificationReport checkIdentity(const IdentitySpec& spec);

// exact-rational classical PFD check over 1 <= a,b <= aMax/bMax with
// `samples` random rational (x, y) per pair; zero tolerance.
VerificationReport checkClassicalPFD(int aMax, int bMax, int samples, std::uint64_t seed);

// --- report serialization ----------------------------------------------------

// JSON document with a deterministic "payload" section (identical across
// worker counts for a fixed seed/config) and a separate "timing" section.
std::string reportToJson(const VerificationReport& rep, const std::string& configJson);
std::string reportToCsv(const VerificationReport& rep);

// catalog (de)serialization for point files
std::string specToJson(const IdentitySpec& spec);
IdentitySpec specFromJson(const std::string& text);

}  // namespace mzs

#endif
