#include "mzs/verifier.hpp"

namespace mzs {

std::vector<std::vector<AffineExpr>> stuffleExpand(const std::vector<AffineExpr>& a,
                                                   const std::vector<AffineExpr>& b) {
    if (static_cast<int>(a.size() + b.size()) > 4 + 4)
        throw DepthCapExceeded("stuffleExpand: combined depth too large");
    if (a.empty()) return {b};
    if (b.empty()) return {a};
    std::vector<AffineExpr> aHead(a.begin(), a.end() - 1);
    std::vector<AffineExpr> bHead(b.begin(), b.end() - 1);
    const AffineExpr x = a.back();
    const AffineExpr y = b.back();
    std::vector<std::vector<AffineExpr>> out;
    for (auto w : stuffleExpand(a, bHead)) {
        w.push_back(y);
        out.push_back(std::move(w));
    }
    for (auto w : stuffleExpand(aHead, b)) {
        w.push_back(x);
        out.push_back(std::move(w));
    }
    for (auto w : stuffleExpand(aHead, bHead)) {
        w.push_back(x + y);
        out.push_back(std::move(w));
    }
    return out;
}

long long stuffleWordCount(int p, int q) {
    if (p == 0 || q == 0) return 1;
    return stuffleWordCount(p - 1, q) + stuffleWordCount(p, q - 1) +
           stuffleWordCount(p - 1, q - 1);
}

Complex BinomialTable::at(long long d, long long l) const {
    auto it = values.find({d, l});
    if (it == values.end())
        throw MissingTableEntry("binomial table missing entry (shift " + std::to_string(d) +
                                ", level " + std::to_string(l) + ")");
    return it->second;
}

namespace {

double intBinom(long long n, long long k) {
    if (k < 0 || k > n) return 0.0;
    double acc = 1.0;
    for (long long i = 0; i < k; ++i)
        acc = acc * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return acc;
}

}  // namespace

BinomialTable binomialForward(const BinomialTable& f) {
    BinomialTable g;
    g.L = f.L;
    for (long long l = 0; l <= f.L; ++l)
        for (long long d = 0; d + l <= f.L; ++d) {
            Complex acc(0.0, 0.0);
            for (long long k = 0; k <= l; ++k) acc += intBinom(l, k) * f.at(d + k, l - k);
            g.set(d, l, acc);
        }
    return g;
}

BinomialTable binomialInvert(const BinomialTable& g) {
    BinomialTable f;
    f.L = g.L;
    for (long long l = 0; l <= g.L; ++l)
        for (long long d = 0; d + l <= g.L; ++d) {
            Complex acc(0.0, 0.0);
            for (long long k = 0; k <= l; ++k) {
                const double sign = (k % 2 == 0) ? 1.0 : -1.0;
                acc += sign * intBinom(l, k) * g.at(d + k, l - k);
            }
            f.set(d, l, acc);
        }
    return f;
}

}  // namespace mzs
