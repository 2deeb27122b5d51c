#include "mzs/rootzeta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mzs {

AffineExpr RootZetaMatrix::at(int i, int j) const {
    auto it = entries_.find({i, j});
    return it == entries_.end() ? AffineExpr() : it->second;
}

void RootZetaMatrix::set(int i, int j, const AffineExpr& e) {
    if (i < 1 || j < i || j > r_) throw Error("RootZetaMatrix::set: bad position");
    if (e.isZero())
        entries_.erase({i, j});
    else
        entries_[{i, j}] = e;
}

void RootZetaMatrix::add(int i, int j, const AffineExpr& e) { set(i, j, at(i, j) + e); }

bool RootZetaMatrix::isConcrete() const {
    for (const auto& [pos, e] : entries_)
        if (!e.isConstant()) return false;
    return true;
}

RootZetaMatrix RootZetaMatrix::substitute(const std::map<std::string, Complex>& bindings) const {
    RootZetaMatrix out(r_);
    for (const auto& [pos, e] : entries_) out.set(pos.first, pos.second, e.substitute(bindings));
    return out;
}

RootZetaMatrix RootZetaMatrix::renamed(const std::map<std::string, std::string>& names) const {
    RootZetaMatrix out(r_);
    for (const auto& [pos, e] : entries_) out.set(pos.first, pos.second, e.renamed(names));
    return out;
}

std::string RootZetaMatrix::str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 1; i <= r_; ++i) {
        if (i > 1) os << ",";
        os << "[";
        for (int j = i; j <= r_; ++j) {
            if (j > i) os << ",";
            os << at(i, j).str();
        }
        os << "]";
    }
    os << "]";
    return os.str();
}

RootZetaMatrix RootZetaMatrix::parse(const std::string& text) {
    // split into bracketed rows
    std::vector<std::vector<std::string>> rows;
    size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])))) ++i;
    };
    skip();
    if (i >= text.size() || text[i] != '[') throw ParseError("matrix must start with '['");
    ++i;
    while (true) {
        skip();
        if (i < text.size() && text[i] == ']') {
            ++i;
            break;
        }
        if (i >= text.size() || text[i] != '[') throw ParseError("expected '[' to open a row");
        size_t close = text.find(']', i);
        if (close == std::string::npos) throw ParseError("unterminated row");
        std::string row = text.substr(i + 1, close - i - 1);
        std::vector<std::string> cells;
        size_t start = 0;
        while (start <= row.size()) {
            size_t comma = row.find(',', start);
            if (comma == std::string::npos) comma = row.size();
            cells.push_back(row.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(cells);
        i = close + 1;
        skip();
        if (i < text.size() && text[i] == ',') ++i;
    }
    const int r = static_cast<int>(rows.size());
    RootZetaMatrix m(r);
    for (int ri = 0; ri < r; ++ri) {
        if (static_cast<int>(rows[ri].size()) != r - ri)
            throw ParseError("row " + std::to_string(ri + 1) + " must have " +
                             std::to_string(r - ri) + " entries");
        for (int ci = 0; ci < static_cast<int>(rows[ri].size()); ++ci) {
            std::string cell = rows[ri][ci];
            // trim
            size_t a = cell.find_first_not_of(" \t");
            size_t b = cell.find_last_not_of(" \t");
            cell = a == std::string::npos ? "" : cell.substr(a, b - a + 1);
            if (cell.empty() || cell == "_" || cell == "0") continue;
            m.set(ri + 1, ri + 1 + ci, AffineExpr::parse(cell));
        }
    }
    return m;
}

std::optional<std::vector<AffineExpr>> isEZPath(const RootZetaMatrix& m) {
    const int r = m.depth();
    if (r < 1) return std::nullopt;
    const auto& supp = m.entries();
    if (supp.empty()) return std::nullopt;
    if (!supp.count({1, r})) return std::nullopt;  // must end at the top-right cell
    // nonzero cells must be pairwise nested; lengths then are distinct and
    // each cell sits at path position (length) counted from the diagonal
    std::vector<AffineExpr> index(r);
    std::vector<int> seen(r + 1, 0);
    std::vector<std::pair<int, int>> cells;
    for (const auto& [pos, e] : supp) {
        cells.push_back(pos);
        const int len = pos.second - pos.first + 1;
        if (seen[len]) return std::nullopt;
        seen[len] = 1;
        index[len - 1] = e;
    }
    for (size_t a = 0; a < cells.size(); ++a)
        for (size_t b = a + 1; b < cells.size(); ++b) {
            const auto& ca = cells[a];
            const auto& cb = cells[b];
            const bool aInB = cb.first <= ca.first && ca.second <= cb.second;
            const bool bInA = ca.first <= cb.first && cb.second <= ca.second;
            if (!aInB && !bInA) return std::nullopt;
        }
    return index;
}

bool relabelEquivalent(const RootZetaMatrix& m1, const RootZetaMatrix& m2) {
    const int r = m1.depth();
    if (r != m2.depth()) return false;
    if (r > 6) throw Error("relabelEquivalent: depth cap is 6");
    if (m1.entries().size() != m2.entries().size()) return false;
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 1);
    do {
        bool ok = true;
        std::map<std::pair<int, int>, AffineExpr> moved;
        for (const auto& [pos, e] : m1.entries()) {
            int lo = r + 1, hi = 0;
            for (int v = pos.first; v <= pos.second; ++v) {
                lo = std::min(lo, perm[v - 1]);
                hi = std::max(hi, perm[v - 1]);
            }
            if (hi - lo != pos.second - pos.first) {  // image is not an interval
                ok = false;
                break;
            }
            moved[{lo, hi}] = e;
        }
        if (ok && moved == m2.entries()) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

RootZetaMatrix embedProduct(const std::vector<AffineExpr>& a, const std::vector<AffineExpr>& b) {
    const int p = static_cast<int>(a.size());
    const int q = static_cast<int>(b.size());
    if (p < 1 || q < 1) throw Error("embedProduct: factors must have depth >= 1");
    if (p + q > 6) throw DepthCapExceeded("embedProduct: depth " + std::to_string(p + q) + " > 6");
    RootZetaMatrix m(p + q);
    for (int j = 1; j <= p; ++j) m.set(1, j, a[j - 1]);
    for (int j = 1; j <= q; ++j) m.set(p + 1, p + j, b[j - 1]);
    return m;
}

// ---------------------------------------------------------------------------
// numerical evaluation
// ---------------------------------------------------------------------------

namespace {

double coverage(const RootZetaMatrix& m, int var) {
    double acc = 0.0;
    for (const auto& [pos, e] : m.entries())
        if (pos.first <= var && var <= pos.second) acc += e.constant().real();
    return acc;
}

void runGuard(const RootZetaMatrix& m) {
    for (int v = 1; v <= m.depth(); ++v)
        if (!(coverage(m, v) > 1.0))
            throw ConvergenceCheckFailed("coverage sum at variable " + std::to_string(v) +
                                         " is not > 1 for " + m.str());
}

struct TwoChain {
    std::vector<Complex> aExp;  // row-1 prefix, may be empty
    int bRow = 0;
    std::vector<Complex> bExp;  // single off-row chain starting on the diagonal
    struct Level {
        Complex sigma;
        int frees = 0;  // free variables joining at this level
    };
    std::vector<Level> levels;  // inert cells (1, L), ascending L
};

std::optional<TwoChain> detectTwoChain(const RootZetaMatrix& m) {
    const int r = m.depth();
    TwoChain tc;
    std::vector<int> row1Cols;
    std::map<int, std::vector<int>> lowRows;  // row -> cols
    for (const auto& [pos, e] : m.entries()) {
        (void)e;
        if (pos.first == 1)
            row1Cols.push_back(pos.second);
        else
            lowRows[pos.first].push_back(pos.second);
    }
    if (lowRows.size() != 1) return std::nullopt;  // need exactly one B row
    const int h = lowRows.begin()->first;
    std::vector<int> bc = lowRows.begin()->second;
    std::sort(bc.begin(), bc.end());
    if (bc.front() != h) return std::nullopt;  // B must start on the diagonal
    for (size_t i = 0; i < bc.size(); ++i)
        if (bc[i] != h + static_cast<int>(i)) return std::nullopt;
    const int q = static_cast<int>(bc.size());
    std::sort(row1Cols.begin(), row1Cols.end());
    int p = 0;
    size_t idx = 0;
    while (idx < row1Cols.size() && row1Cols[idx] == p + 1) {
        ++p;
        ++idx;
    }
    if (h <= p) return std::nullopt;  // chains must not overlap
    const int chainEnd = std::max(p, h + q - 1);
    std::vector<int> inertL(row1Cols.begin() + idx, row1Cols.end());
    for (int L : inertL)
        if (L < chainEnd) return std::nullopt;  // inert must contain both chains
    // free variables: outside [1..p] and [h..h+q-1]; each must lie inside the
    // largest inert interval, otherwise the sum diverges (guard rejects it)
    std::vector<int> frees;
    for (int v = 1; v <= r; ++v)
        if (v > p && (v < h || v >= h + q)) frees.push_back(v);
    if (!frees.empty() && (inertL.empty() || frees.back() > inertL.back())) return std::nullopt;
    for (int j = 1; j <= p; ++j) tc.aExp.push_back(m.at(1, j).constant());
    tc.bRow = h;
    for (int j = 0; j < q; ++j) tc.bExp.push_back(m.at(h, h + j).constant());
    int prevL = 0;
    for (int L : inertL) {
        TwoChain::Level lv;
        lv.sigma = m.at(1, L).constant();
        for (int v : frees)
            if (v > prevL && v <= L) ++lv.frees;
        // frees below the first inert level are also "inside every inert";
        // counting them at the first level is exactly that
        tc.levels.push_back(lv);
        prevL = L;
    }
    return tc;
}

int upShift(const Complex& e) { return std::max(0, static_cast<int>(std::ceil(-e.real()))); }

// chain weight table W(v) = s[v] * exp(+g * ln v) for the nested prefix sums
// of one chain, v in [1..V]
struct ChainTable {
    std::vector<Complex> s;
    int g = 0;
};

ChainTable buildChainTable(const std::vector<Complex>& exps, long long V) {
    const int p = static_cast<int>(exps.size());
    ChainTable out;
    out.s.assign(V + 1, Complex(0.0, 0.0));
    std::vector<int> g(p, 0);
    int carry = 0;
    for (int l = 0; l + 1 < p; ++l) {
        g[l] = carry + upShift(exps[l]) + 1;
        carry = g[l];
    }
    out.g = (p >= 2 ? g[p - 2] : 0) + upShift(exps[p - 1]);
    std::vector<Complex> mant(std::max(0, p - 1), Complex(0.0, 0.0));
    for (long long v = 1; v <= V; ++v) {
        const double lv = std::log(static_cast<double>(v));
        const double lprev = v > 1 ? std::log(static_cast<double>(v - 1)) : 0.0;
        // weight uses prefixes up to v-1
        Complex lead(1.0, 0.0);
        bool dead = false;
        if (p >= 2) {
            if (mant[p - 2] == Complex(0.0, 0.0))
                dead = true;
            else
                lead = mant[p - 2] * std::exp(static_cast<double>(g[p - 2]) * lprev -
                                              (exps[p - 1] + static_cast<double>(out.g)) * lv);
        } else {
            lead = std::exp(-(exps[0] + static_cast<double>(out.g)) * lv);
        }
        out.s[v] = dead ? Complex(0.0, 0.0) : lead;
        // absorb n = v into the prefixes (top-down so level l sees l-1 at v-1)
        for (int l = p - 2; l >= 0; --l) {
            Complex add;
            if (l == 0) {
                add = std::exp(-(exps[0] + static_cast<double>(g[0])) * lv);
            } else if (mant[l - 1] == Complex(0.0, 0.0)) {
                add = Complex(0.0, 0.0);
            } else {
                add = std::exp(-(exps[l] + static_cast<double>(g[l])) * lv +
                               static_cast<double>(g[l - 1]) * lprev) *
                      mant[l - 1];
            }
            if (v > 1 && g[l] != 0)
                mant[l] = mant[l] * std::exp(static_cast<double>(g[l]) * (lprev - lv)) + add;
            else
                mant[l] = mant[l] + add;
        }
    }
    return out;
}

// inert stack table H(u) = s[u] * exp(-g * ln u), u in [1..U]
struct InertTable {
    std::vector<Complex> s;
    int g = 0;
    double err = 0.0;  // absolute error scalar carried by suffix closures
};

// one plain suffix pass S(u) = sum_{a>u} T(a) on a scaled table
void suffixPass(InertTable& t, const EvalOptions& hurOpts) {
    (void)hurOpts;
    const long long U = static_cast<long long>(t.s.size()) - 1;
    const int gs = t.g - 1;
    if (t.g <= 30) {
        // modest scale: work unscaled and close the tail by extrapolation
        std::vector<Complex> un(U + 1);
        for (long long a = 1; a <= U; ++a)
            un[a] = t.s[a] * std::exp(-static_cast<double>(t.g) * std::log((double)a));
        // dyadic snapshots of the prefix sums to estimate the full series
        std::vector<Complex> snaps;
        KahanSum total;
        long long next = std::max<long long>(8, U >> 6);
        for (long long a = 1; a <= U; ++a) {
            total.add(un[a]);
            if (a == next) {
                snaps.push_back(total.value());
                next *= 2;
            }
        }
        TailEstimate fit = dyadicRichardson(snaps, 3);
        const Complex tailConst = fit.limit - total.value();
        t.err += fit.err_est;
        // S(u) = total - prefix(u) + tailConst
        std::vector<Complex> suf(U + 1, Complex(0.0, 0.0));
        Complex run(0.0, 0.0);
        for (long long a = U; a >= 1; --a) {
            suf[a] = run + tailConst;
            run += un[a];
        }
        // suf[a] currently holds sum_{x>a}; rescale to gs
        for (long long a = 1; a <= U; ++a)
            t.s[a] = suf[a] * std::exp(static_cast<double>(gs) * std::log((double)a));
        t.g = gs;
        return;
    }
    // heavy scale: descending recurrence, tail beyond U negligible relative
    // to every used entry (decay order >= 30)
    std::vector<Complex> out(U + 1, Complex(0.0, 0.0));
    Complex ssNext(0.0, 0.0);  // ss at index a (S(a) scaled by a^{gs})
    for (long long a = U; a >= 2; --a) {
        const double rho = static_cast<double>(a - 1) / static_cast<double>(a);
        const double f = std::exp(static_cast<double>(gs) * std::log(rho));
        const Complex ssPrev = ssNext * f + t.s[a] * (f / static_cast<double>(a));
        out[a - 1] = ssPrev;
        ssNext = ssPrev;
    }
    t.s = std::move(out);
    t.g = gs;
}

InertTable buildInertTable(const TwoChain& tc, long long U, const EvalOptions& hurOpts) {
    InertTable t;
    t.s.assign(U + 1, Complex(1.0, 0.0));
    t.g = 0;
    bool identity = true;
    for (int i = static_cast<int>(tc.levels.size()) - 1; i >= 0; --i) {
        const Complex sigma = tc.levels[i].sigma;
        int frees = tc.levels[i].frees;
        if (identity && frees >= 1) {
            // innermost free variable folds into an exact Hurwitz tail
            const int gNew = static_cast<int>(std::floor(sigma.real()));
            for (long long u = 1; u <= U; ++u) {
                const double lu = std::log(static_cast<double>(u));
                const double lu1 = std::log(static_cast<double>(u + 1));
                t.s[u] = specfun::hurwitzZetaScaled(sigma, static_cast<double>(u + 1), hurOpts) *
                         std::exp(-sigma * lu1 + static_cast<double>(gNew) * lu);
            }
            t.g = gNew;
            --frees;
        } else {
            // apply the power factor pointwise; sigma may have a hugely
            // negative real part, only the cumulative scale stays positive
            const int gNew = t.g + static_cast<int>(std::floor(sigma.real()));
            for (long long u = 1; u <= U; ++u)
                t.s[u] *= std::exp((static_cast<double>(gNew - t.g) - sigma) *
                                   std::log(static_cast<double>(u)));
            t.g = gNew;
        }
        identity = false;
        for (int f = 0; f < frees; ++f) suffixPass(t, hurOpts);
    }
    return t;
}

EvalResult evalTwoChain(const TwoChain& tc, const LatticePlan& plan) {
    int negShift = 0;
    for (const Complex& e : tc.aExp) negShift = std::max(negShift, upShift(e));
    for (const Complex& e : tc.bExp) negShift = std::max(negShift, upShift(e));
    // shifted chains put the junction mass near w ~ shift: extend the range
    // and keep the tail-fit windows past the turnover
    long long W = std::max<long long>(
        512, static_cast<long long>(plan.shift_cutoff_factor * negShift) + 256);
    const long long minBase = std::max<long long>(8, negShift);
    int c = plan.richardson_levels + 4;
    while (c > 3 && (W >> (c - 1)) < minBase) --c;
    const long long w0 = W >> (c - 1);
    W = w0 << (c - 1);
    const long long U = W + std::max<long long>(256, W / 2);

    EvalOptions hurOpts;
    hurOpts.tol = std::max(1e-15, plan.tolFor(2) * 1e-4);

    const bool hasA = !tc.aExp.empty();
    ChainTable wa, wb;
    if (hasA) wa = buildChainTable(tc.aExp, W);
    wb = buildChainTable(tc.bExp, W);

    if (tc.levels.empty()) {
        // no interval couples the chains: the double sum factorizes
        auto sumChain = [&](const ChainTable& ct) {
            KahanSum s;
            std::vector<Complex> sn;
            long long next = w0;
            for (long long v = 1; v <= W; ++v) {
                s.add(ct.s[v] * std::exp(static_cast<double>(ct.g) *
                                         std::log(static_cast<double>(v))));
                if (v == next) {
                    sn.push_back(s.value());
                    next *= 2;
                }
            }
            return dyadicRichardson(sn, plan.richardson_levels);
        };
        const TailEstimate ta = hasA ? sumChain(wa) : TailEstimate{Complex(1.0, 0.0), 0.0, false};
        const TailEstimate tb = sumChain(wb);
        const Complex v = ta.limit * tb.limit;
        return {v, std::abs(ta.limit) * tb.err_est + std::abs(tb.limit) * ta.err_est +
                       1e-14 * (1.0 + std::abs(v))};
    }

    InertTable inert = buildInertTable(tc, U, hurOpts);

    std::vector<double> lnv(W + 2);
    for (long long v = 1; v <= W + 1; ++v) lnv[v] = std::log(static_cast<double>(v));

    KahanSum acc;
    std::vector<Complex> snaps;
    long long nextSnap = w0;
    for (long long w = 1; w <= W; ++w) {
        Complex cell(0.0, 0.0);
        if (!hasA) {
            if (wb.s[w] != Complex(0.0, 0.0) && inert.s[w] != Complex(0.0, 0.0))
                cell = wb.s[w] * inert.s[w] *
                       std::exp((wb.g - static_cast<double>(inert.g)) * lnv[w]);
        } else {
            for (long long va = 1; va < w; ++va) {
                const long long vb = w - va;
                const Complex pa = wa.s[va];
                const Complex pb = wb.s[vb];
                if (pa == Complex(0.0, 0.0) || pb == Complex(0.0, 0.0)) continue;
                const double lg = wa.g * lnv[va] + wb.g * lnv[vb] -
                                  static_cast<double>(inert.g) * lnv[w];
                cell += pa * pb * std::exp(lg);
            }
            cell *= inert.s[w];
        }
        acc.add(cell);
        if (w == nextSnap) {
            snaps.push_back(acc.value());
            nextSnap *= 2;
        }
    }
    if (plan.tail_mode == TailMode::None || snaps.size() < 3) {
        double err = snaps.size() >= 2 ? std::abs(snaps.back() - snaps[snaps.size() - 2]) : 0.0;
        return {acc.value(), err + inert.err};
    }
    TailEstimate fit = dyadicRichardson(snaps, plan.richardson_levels);
    return {fit.limit, fit.err_est + inert.err + 1e-14 * (1.0 + std::abs(fit.limit))};
}

// plain nested-loop fallback for small depths / odd shapes
EvalResult evalGeneric(const RootZetaMatrix& m, const LatticePlan& plan) {
    const int r = m.depth();
    long long N = plan.outer_cutoffs.empty()
                      ? (r <= 2 ? 600 : (r == 3 ? 150 : 60))
                      : plan.outer_cutoffs[0];
    struct Factor {
        int lo, hi;
        std::vector<Complex> pow;  // pow[u] = u^{-e}
    };
    std::vector<Factor> factors;
    for (const auto& [pos, e] : m.entries()) {
        Factor f;
        f.lo = pos.first;
        f.hi = pos.second;
        f.pow.assign(r * N + 1, Complex(0.0, 0.0));
        for (long long u = 1; u <= r * N; ++u)
            f.pow[u] = std::exp(-e.constant() * std::log(static_cast<double>(u)));
        factors.push_back(std::move(f));
    }
    auto boxSum = [&](long long box) {
        std::vector<long long> mv(r + 1, 1);
        KahanSum total;
        std::vector<long long> psum(r + 1, 0);
        while (true) {
            for (int v = 1; v <= r; ++v) psum[v] = psum[v - 1] + mv[v];
            Complex term(1.0, 0.0);
            for (const auto& f : factors) term *= f.pow[psum[f.hi] - psum[f.lo - 1]];
            total.add(term);
            int v = r;
            while (v >= 1) {
                if (++mv[v] <= box) break;
                mv[v] = 1;
                --v;
            }
            if (v < 1) break;
        }
        return total.value();
    };
    const Complex full = boxSum(N);
    const Complex half = boxSum(N / 2);
    return {full, std::abs(full - half)};
}

}  // namespace

EvalResult rootZetaEval(const RootZetaMatrix& m, const LatticePlan& plan) {
    const int r = m.depth();
    if (r < 1 || r > 4) throw Error("rootZetaEval supports depths 1..4");
    if (!m.isConcrete()) throw Error("rootZetaEval needs concrete entries: " + m.str());
    plan.validate();
    runGuard(m);
    if (auto path = isEZPath(m)) {
        std::vector<Complex> idx;
        for (const auto& e : *path) idx.push_back(e.constant());
        if (!inDomain(MzfIndex(idx)))
            throw ConvergenceCheckFailed("path index outside the convergence domain: " + m.str());
        if (r == 1) {
            EvalOptions opts;
            opts.tol = std::max(1e-15, plan.tolFor(1) * 1e-3);
            const Complex v = specfun::hurwitzZeta(idx[0], 1.0, opts);
            return {v, opts.tol * (1.0 + std::abs(v))};
        }
        WeightedIndex w;
        w.expo = idx;
        return jointPathEval({w}, plan);
    }
    if (auto tc = detectTwoChain(m)) return evalTwoChain(*tc, plan);
    return evalGeneric(m, plan);
}

}  // namespace mzs
