#include "mzs/shuffle.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace mzs {

using Json = nlohmann::ordered_json;

CoeffFactor CoeffFactor::genBinom(const AffineExpr& top, const AffineExpr& bottom) {
    CoeffFactor f;
    f.kind = Kind::GenBinomial;
    f.top = top;
    f.bottom = bottom;
    return f;
}

CoeffFactor CoeffFactor::signedIntBinom(const std::string& k, const std::string& j) {
    CoeffFactor f;
    f.kind = Kind::SignedIntBinomial;
    f.top_index = k;
    f.bottom_index = j;
    return f;
}

bool CoeffFactor::operator==(const CoeffFactor& o) const {
    return kind == o.kind && top == o.top && bottom == o.bottom && top_index == o.top_index &&
           bottom_index == o.bottom_index;
}

std::unique_ptr<ExpNode> ExpNode::clone() const {
    auto n = std::make_unique<ExpNode>();
    n->kind = kind;
    n->term = term;
    n->indexName = indexName;
    n->targetX = targetX;
    n->targetY = targetY;
    for (const auto& c : children) n->children.push_back(c->clone());
    return n;
}

namespace {

void collectLeaves(const ExpNode* node, std::vector<ShuffleTerm>& out) {
    if (node->kind == ExpNode::Kind::Leaf) {
        out.push_back(node->term);
        return;
    }
    for (const auto& c : node->children) collectLeaves(c.get(), out);
}

}  // namespace

Expansion Expansion::copy() const {
    Expansion e;
    e.params = params;
    e.terms = terms;
    e.depth = depth;
    e.freshCount = freshCount;
    if (root) e.root = root->clone();
    return e;
}

// ---------------------------------------------------------------------------
// engine steps
// ---------------------------------------------------------------------------

std::vector<ShuffleTerm> ipfdStep(const ShuffleTerm& term, std::pair<int, int> x,
                                  std::pair<int, int> y, int& freshCount) {
    const AffineExpr Ex = term.matrix.at(x.first, x.second);
    const AffineExpr Ey = term.matrix.at(y.first, y.second);
    if (Ex.isZero() || Ey.isZero())
        throw InvalidTarget("split target exponents must be nonzero in " + term.matrix.str());
    if (x.second + 1 != y.first)
        throw InvalidTarget("split targets must cover adjacent intervals");
    const std::pair<int, int> merged{x.first, y.second};

    const bool engineShaped = term.chainA > 0 && x == std::make_pair(1, term.chainA) &&
                              term.chainB > 0 &&
                              y == std::make_pair(term.chainBRow,
                                                  term.chainBRow + term.chainB - 1);
    auto child = [&](bool removeX) {
        ShuffleTerm t = term;
        if (!engineShaped) {
            t.chainA = t.chainB = t.chainBRow = 0;
        } else if (removeX) {
            t.chainA -= 1;
        } else {
            t.chainB -= 1;
            if (t.chainB == 0) t.chainBRow = 0;
        }
        return t;
    };
    auto setCell = [&](ShuffleTerm& t, std::pair<int, int> pos, const AffineExpr& e) {
        t.matrix.set(pos.first, pos.second, e);
    };

    std::string neg;
    if (Ey.isNegatedSymbol(&neg) || Ex.isNegatedSymbol(&neg)) {
        const bool ySide = Ey.isNegatedSymbol();
        const std::string j = "k" + std::to_string(++freshCount);
        const AffineExpr J = AffineExpr::symbol(j);
        ShuffleTerm t = child(!ySide);
        t.indices.push_back({j, false, AffineExpr::symbol(neg)});
        t.coeffs.push_back(CoeffFactor::signedIntBinom(neg, j));
        if (ySide) {
            setCell(t, x, Ex - J);
            setCell(t, y, AffineExpr());
            t.matrix.add(merged.first, merged.second, Ey + J);
        } else {
            setCell(t, x, AffineExpr());
            setCell(t, y, Ey - J);
            t.matrix.add(merged.first, merged.second, Ex + J);
        }
        std::vector<ShuffleTerm> out;
        out.push_back(std::move(t));
        return out;
    }

    const std::string k = "k" + std::to_string(++freshCount);
    const AffineExpr K = AffineExpr::symbol(k);
    const AffineExpr one(Complex(1.0, 0.0));
    std::vector<ShuffleTerm> out;

    {  // x keeps Ex - k, y merges as Ey + k
        ShuffleTerm t = child(false);
        t.indices.push_back({k, true, AffineExpr()});
        t.coeffs.push_back(CoeffFactor::genBinom(Ey + K - one, K));
        setCell(t, x, Ex - K);
        setCell(t, y, AffineExpr());
        t.matrix.add(merged.first, merged.second, Ey + K);
        out.push_back(std::move(t));
    }
    {  // x flips to -k, everything else merges
        ShuffleTerm t = child(false);
        t.sign = -t.sign;
        t.indices.push_back({k, true, AffineExpr()});
        t.coeffs.push_back(CoeffFactor::genBinom(Ex + Ey + K - one, Ex + K));
        setCell(t, x, -K);
        setCell(t, y, AffineExpr());
        t.matrix.add(merged.first, merged.second, Ex + Ey + K);
        out.push_back(std::move(t));
    }
    {  // mirror family: y keeps Ey - k
        ShuffleTerm t = child(true);
        t.indices.push_back({k, true, AffineExpr()});
        t.coeffs.push_back(CoeffFactor::genBinom(Ex + K - one, K));
        setCell(t, x, AffineExpr());
        setCell(t, y, Ey - K);
        t.matrix.add(merged.first, merged.second, Ex + K);
        out.push_back(std::move(t));
    }
    {  // mirror: y flips to -k
        ShuffleTerm t = child(true);
        t.sign = -t.sign;
        t.indices.push_back({k, true, AffineExpr()});
        t.coeffs.push_back(CoeffFactor::genBinom(Ex + Ey + K - one, Ey + K));
        setCell(t, x, AffineExpr());
        setCell(t, y, -K);
        t.matrix.add(merged.first, merged.second, Ex + Ey + K);
        out.push_back(std::move(t));
    }
    return out;
}

ShuffleTerm normalizeMove(const ShuffleTerm& term) {
    const int p = term.chainA, h = term.chainBRow, q = term.chainB;
    if (q == 0 || h == 0 || h == p + 1) return term;
    // relabel variables so the B chain starts right after the prefix:
    // [h..h+q-1] -> [p+1..p+q], displaced gap [p+1..h-1] -> shifted up by q
    const int r = term.matrix.depth();
    std::vector<int> perm(r + 1);
    for (int v = 1; v <= r; ++v) {
        if (v >= h && v <= h + q - 1)
            perm[v] = v - (h - p - 1);
        else if (v >= p + 1 && v <= h - 1)
            perm[v] = v + q;
        else
            perm[v] = v;
    }
    RootZetaMatrix moved(r);
    for (const auto& [pos, e] : term.matrix.entries()) {
        int lo = r + 1, hi = 0;
        for (int v = pos.first; v <= pos.second; ++v) {
            lo = std::min(lo, perm[v]);
            hi = std::max(hi, perm[v]);
        }
        if (hi - lo != pos.second - pos.first)
            throw NoCertifiedMove("relabeling breaks interval " + term.matrix.str());
        moved.set(lo, hi, e);
    }
    if (!relabelEquivalent(term.matrix, moved))
        throw NoCertifiedMove("move not certified for " + term.matrix.str());
    ShuffleTerm out = term;
    out.matrix = moved;
    out.chainBRow = p + 1;
    return out;
}

namespace {

std::unique_ptr<ExpNode> buildNode(ShuffleTerm t, Expansion& e) {
    auto node = std::make_unique<ExpNode>();
    if (isEZPath(t.matrix)) {
        node->kind = ExpNode::Kind::Leaf;
        node->term = std::move(t);
        e.terms.push_back(node->term);
        return node;
    }
    if (t.chainA <= 0 || t.chainB <= 0)
        throw NoCertifiedMove("non-path term with an exhausted chain: " + t.matrix.str());
    ShuffleTerm norm = normalizeMove(t);
    node->term = norm;
    node->targetX = {1, norm.chainA};
    node->targetY = {norm.chainBRow, norm.chainBRow + norm.chainB - 1};
    auto kids = ipfdStep(norm, node->targetX, node->targetY, e.freshCount);
    node->indexName = kids.front().indices.back().name;
    node->kind = kids.size() == 1 ? ExpNode::Kind::Collapse : ExpNode::Kind::Split;
    for (auto& kid : kids) node->children.push_back(buildNode(std::move(kid), e));
    return node;
}

}  // namespace

Expansion expandShuffle(const std::vector<std::string>& left,
                        const std::vector<std::string>& right) {
    const int p = static_cast<int>(left.size());
    const int q = static_cast<int>(right.size());
    if (p < 1 || q < 1) throw Error("expandShuffle: factors must have depth >= 1");
    if (p + q > 4)
        throw DepthCapExceeded("expandShuffle: depth " + std::to_string(p + q) + " > 4");
    Expansion e;
    e.depth = p + q;
    std::vector<AffineExpr> ae, be;
    for (int i = 0; i < p; ++i) {
        e.params.push_back({left[i], i == p - 1});
        ae.push_back(AffineExpr::symbol(left[i]));
    }
    for (int i = 0; i < q; ++i) {
        e.params.push_back({right[i], i == q - 1});
        be.push_back(AffineExpr::symbol(right[i]));
    }
    for (size_t i = 0; i < e.params.size(); ++i)
        for (size_t j = i + 1; j < e.params.size(); ++j)
            if (e.params[i].name == e.params[j].name)
                throw Error("expandShuffle: duplicate parameter name " + e.params[i].name);
    ShuffleTerm rootTerm;
    rootTerm.matrix = embedProduct(ae, be);
    rootTerm.chainA = p;
    rootTerm.chainBRow = p + 1;
    rootTerm.chainB = q;
    e.root = buildNode(std::move(rootTerm), e);
    return e;
}

// ---------------------------------------------------------------------------
// integer specialization
// ---------------------------------------------------------------------------

namespace {

struct IntSpecCtx {
    std::map<std::string, Complex> subst;
    // conservative inclusive bounds for already-finite outer indices
    std::map<std::string, long long> maxBound;
};

bool integerAffine(const AffineExpr& e, long long* constPart) {
    const Complex c = e.constant();
    if (std::abs(c.imag()) > 1e-9) return false;
    const double r = std::round(c.real());
    if (std::abs(c.real() - r) > 1e-9) return false;
    if (constPart) *constPart = static_cast<long long>(r);
    return true;
}

// smallest value of e over 0 <= idx <= maxBound[idx]; false when unbounded
bool minOverRanges(const AffineExpr& e, const IntSpecCtx& ctx, long long* out) {
    long long c0 = 0;
    if (!integerAffine(e, &c0)) return false;
    long long acc = c0;
    for (const auto& [sym, coef] : e.terms()) {
        if (coef >= 0) continue;  // minimum at idx = 0
        auto it = ctx.maxBound.find(sym);
        if (it == ctx.maxBound.end()) return false;
        acc += coef * it->second;
    }
    *out = acc;
    return true;
}

bool maxOverRanges(const AffineExpr& e, const IntSpecCtx& ctx, long long* out) {
    long long c0 = 0;
    if (!integerAffine(e, &c0)) return false;
    long long acc = c0;
    for (const auto& [sym, coef] : e.terms()) {
        if (coef <= 0) continue;
        auto it = ctx.maxBound.find(sym);
        if (it == ctx.maxBound.end()) return false;
        acc += coef * it->second;
    }
    *out = acc;
    return true;
}

ShuffleTerm substTerm(const ShuffleTerm& t, const std::map<std::string, Complex>& subst) {
    ShuffleTerm out = t;
    out.matrix = t.matrix.substitute(subst);
    for (auto& c : out.coeffs) {
        c.top = c.top.substitute(subst);
        c.bottom = c.bottom.substitute(subst);
    }
    for (auto& ix : out.indices)
        if (!ix.infinite) ix.upper = ix.upper.substitute(subst);
    return out;
}

void overrideIndexRange(ExpNode* node, const std::string& name, const AffineExpr& upper) {
    for (auto& ix : node->term.indices)
        if (ix.name == name) {
            ix.infinite = false;
            ix.upper = upper;
        }
    for (auto& c : node->children) overrideIndexRange(c.get(), name, upper);
}

std::unique_ptr<ExpNode> specializeNode(const ExpNode* node, IntSpecCtx& ctx);

std::unique_ptr<ExpNode> cloneSubstNode(const ExpNode* node, const IntSpecCtx& ctx) {
    auto n = std::make_unique<ExpNode>();
    n->kind = node->kind;
    n->term = substTerm(node->term, ctx.subst);
    n->indexName = node->indexName;
    n->targetX = node->targetX;
    n->targetY = node->targetY;
    for (const auto& c : node->children) n->children.push_back(cloneSubstNode(c.get(), ctx));
    return n;
}

std::unique_ptr<ExpNode> specializeNode(const ExpNode* node, IntSpecCtx& ctx) {
    if (node->kind != ExpNode::Kind::Split) return cloneSubstNode(node, ctx);
    const AffineExpr Ex =
        node->term.matrix.at(node->targetX.first, node->targetX.second).substitute(ctx.subst);
    const AffineExpr Ey =
        node->term.matrix.at(node->targetY.first, node->targetY.second).substitute(ctx.subst);

    auto n = std::make_unique<ExpNode>();
    n->kind = ExpNode::Kind::Split;
    n->term = substTerm(node->term, ctx.subst);
    n->indexName = node->indexName;
    n->targetX = node->targetX;
    n->targetY = node->targetY;

    auto handlePair = [&](const AffineExpr& driver, const ExpNode* keep, const ExpNode* drop) {
        long long lo = 0, hi = 0;
        const bool usable = minOverRanges(driver, ctx, &lo) && lo >= 1 &&
                            maxOverRanges(driver, ctx, &hi);
        if (usable) {
            // the kept family truncates at driver-1 and the partner cancels
            // against its tail shift by the classical telescoping
            ctx.maxBound[node->indexName] = hi - 1;
            auto kept = specializeNode(keep, ctx);
            ctx.maxBound.erase(node->indexName);
            overrideIndexRange(kept.get(), node->indexName,
                               driver - AffineExpr(Complex(1.0, 0.0)));
            n->children.push_back(std::move(kept));
        } else {
            n->children.push_back(specializeNode(keep, ctx));
            n->children.push_back(specializeNode(drop, ctx));
        }
    };
    handlePair(Ex, node->children[0].get(), node->children[1].get());
    handlePair(Ey, node->children[2].get(), node->children[3].get());
    return n;
}

}  // namespace

Expansion integerSpecialize(const Expansion& e,
                            const std::map<std::string, long long>& bindings) {
    IntSpecCtx ctx;
    for (const auto& prm : e.params) {
        auto it = bindings.find(prm.name);
        if (it == bindings.end())
            throw NotAnInteger("integerSpecialize: parameter '" + prm.name + "' unbound");
        const long long v = it->second;
        if (prm.lastEntry && v < 2)
            throw NotAnInteger("integerSpecialize: last-entry parameter " + prm.name +
                               " must be >= 2");
        if (!prm.lastEntry && v < 1)
            throw NotAnInteger("integerSpecialize: parameter " + prm.name + " must be >= 1");
        ctx.subst[prm.name] = Complex(static_cast<double>(v), 0.0);
    }
    Expansion out;
    out.depth = e.depth;
    out.freshCount = e.freshCount;
    out.root = specializeNode(e.root.get(), ctx);
    collectLeaves(out.root.get(), out.terms);
    return out;
}

// ---------------------------------------------------------------------------
// canonical keys, serialization, rendering
// ---------------------------------------------------------------------------

std::string canonicalTermKey(const ShuffleTerm& t) {
    std::map<std::string, std::string> ren;
    for (size_t i = 0; i < t.indices.size(); ++i)
        ren[t.indices[i].name] = "k" + std::to_string(i + 1);
    std::ostringstream os;
    os << (t.sign >= 0 ? "+" : "-") << "|";
    for (const auto& c : t.coeffs) {
        if (c.kind == CoeffFactor::Kind::GenBinomial)
            os << "B(" << c.top.renamed(ren).str() << ";" << c.bottom.renamed(ren).str() << ")";
        else
            os << "S(" << (ren.count(c.top_index) ? ren.at(c.top_index) : c.top_index) << ";"
               << (ren.count(c.bottom_index) ? ren.at(c.bottom_index) : c.bottom_index) << ")";
    }
    os << "|";
    for (const auto& ix : t.indices) {
        os << (ren.count(ix.name) ? ren.at(ix.name) : ix.name);
        if (ix.infinite)
            os << ":inf";
        else
            os << ":0.." << ix.upper.renamed(ren).str();
        os << ";";
    }
    os << "|" << t.matrix.renamed(ren).str();
    return os.str();
}

namespace {

Json affineJson(const AffineExpr& e) { return Json(e.str()); }
AffineExpr affineFrom(const Json& j) { return AffineExpr::parse(j.get<std::string>()); }

Json termToJson(const ShuffleTerm& t) {
    Json j;
    j["sign"] = t.sign;
    j["coeffs"] = Json::array();
    for (const auto& c : t.coeffs) {
        Json cj;
        if (c.kind == CoeffFactor::Kind::GenBinomial) {
            cj["kind"] = "genBinomial";
            cj["top"] = affineJson(c.top);
            cj["bottom"] = affineJson(c.bottom);
        } else {
            cj["kind"] = "signedIntBinomial";
            cj["top_index"] = c.top_index;
            cj["bottom_index"] = c.bottom_index;
        }
        j["coeffs"].push_back(cj);
    }
    j["indices"] = Json::array();
    for (const auto& ix : t.indices) {
        Json xj;
        xj["name"] = ix.name;
        if (ix.infinite)
            xj["range"] = "inf";
        else
            xj["upto"] = affineJson(ix.upper);
        j["indices"].push_back(xj);
    }
    Json entries = Json::array();
    for (const auto& [pos, e] : t.matrix.entries()) {
        Json ej;
        ej["i"] = pos.first;
        ej["j"] = pos.second;
        ej["e"] = affineJson(e);
        entries.push_back(ej);
    }
    j["matrix"] = Json{{"r", t.matrix.depth()}, {"entries", entries}};
    j["chainA"] = t.chainA;
    j["chainBRow"] = t.chainBRow;
    j["chainB"] = t.chainB;
    return j;
}

ShuffleTerm termFromJson(const Json& j) {
    ShuffleTerm t;
    t.sign = j.at("sign").get<int>();
    for (const auto& cj : j.at("coeffs")) {
        if (cj.at("kind") == "genBinomial")
            t.coeffs.push_back(
                CoeffFactor::genBinom(affineFrom(cj.at("top")), affineFrom(cj.at("bottom"))));
        else
            t.coeffs.push_back(CoeffFactor::signedIntBinom(cj.at("top_index").get<std::string>(),
                                                           cj.at("bottom_index").get<std::string>()));
    }
    for (const auto& xj : j.at("indices")) {
        SumIndex ix;
        ix.name = xj.at("name").get<std::string>();
        if (xj.contains("upto")) {
            ix.infinite = false;
            ix.upper = affineFrom(xj.at("upto"));
        }
        t.indices.push_back(ix);
    }
    const auto& mj = j.at("matrix");
    RootZetaMatrix m(mj.at("r").get<int>());
    for (const auto& ej : mj.at("entries"))
        m.set(ej.at("i").get<int>(), ej.at("j").get<int>(), affineFrom(ej.at("e")));
    t.matrix = m;
    t.chainA = j.value("chainA", 0);
    t.chainBRow = j.value("chainBRow", 0);
    t.chainB = j.value("chainB", 0);
    return t;
}

Json nodeToJson(const ExpNode* n) {
    Json j;
    j["kind"] = n->kind == ExpNode::Kind::Leaf     ? "leaf"
                : n->kind == ExpNode::Kind::Split ? "split"
                                                  : "collapse";
    j["term"] = termToJson(n->term);
    if (n->kind != ExpNode::Kind::Leaf) {
        j["index"] = n->indexName;
        j["targetX"] = Json::array({n->targetX.first, n->targetX.second});
        j["targetY"] = Json::array({n->targetY.first, n->targetY.second});
        j["children"] = Json::array();
        for (const auto& c : n->children) j["children"].push_back(nodeToJson(c.get()));
    }
    return j;
}

std::unique_ptr<ExpNode> nodeFromJson(const Json& j) {
    auto n = std::make_unique<ExpNode>();
    const std::string kind = j.at("kind").get<std::string>();
    n->kind = kind == "leaf"    ? ExpNode::Kind::Leaf
              : kind == "split" ? ExpNode::Kind::Split
                                : ExpNode::Kind::Collapse;
    n->term = termFromJson(j.at("term"));
    if (n->kind != ExpNode::Kind::Leaf) {
        n->indexName = j.at("index").get<std::string>();
        n->targetX = {j.at("targetX")[0].get<int>(), j.at("targetX")[1].get<int>()};
        n->targetY = {j.at("targetY")[0].get<int>(), j.at("targetY")[1].get<int>()};
        for (const auto& cj : j.at("children")) n->children.push_back(nodeFromJson(cj));
    }
    return n;
}

}  // namespace

std::string expansionToJson(const Expansion& e) {
    Json j;
    j["format"] = "mzs-expansion-v1";
    j["depth"] = e.depth;
    j["params"] = Json::array();
    for (const auto& p : e.params)
        j["params"].push_back(Json{{"name", p.name}, {"last", p.lastEntry}});
    j["terms"] = Json::array();
    for (const auto& t : e.terms) j["terms"].push_back(termToJson(t));
    j["freshCount"] = e.freshCount;
    if (e.root) j["tree"] = nodeToJson(e.root.get());
    return j.dump(1);
}

Expansion expansionFromJson(const std::string& text) {
    Json j = Json::parse(text);
    if (j.value("format", "") != "mzs-expansion-v1") throw ParseError("unknown expansion format");
    Expansion e;
    e.depth = j.at("depth").get<int>();
    for (const auto& pj : j.at("params"))
        e.params.push_back({pj.at("name").get<std::string>(), pj.at("last").get<bool>()});
    for (const auto& tj : j.at("terms")) e.terms.push_back(termFromJson(tj));
    e.freshCount = j.value("freshCount", 0);
    if (j.contains("tree")) e.root = nodeFromJson(j.at("tree"));
    return e;
}

namespace {

void renderNode(const ExpNode* n, int depth, std::ostringstream& os) {
    os << std::string(2 * depth + 2, ' ');
    if (n->kind == ExpNode::Kind::Leaf) {
        os << "leaf  " << n->term.matrix.str() << "\n";
        return;
    }
    os << (n->kind == ExpNode::Kind::Split ? "split " : "collapse ") << n->term.matrix.str()
       << "  at (" << n->targetX.first << "," << n->targetX.second << ")x("
       << n->targetY.first << "," << n->targetY.second << ")  sum over " << n->indexName
       << "\n";
    for (const auto& c : n->children) renderNode(c.get(), depth + 1, os);
}

}  // namespace

std::string renderTree(const Expansion& e) {
    std::ostringstream os;
    if (e.root) renderNode(e.root.get(), 0, os);
    return os.str();
}

std::string renderExpansion(const Expansion& e) {
    std::ostringstream os;
    for (const auto& t : e.terms) {
        os << "  ";
        for (const auto& ix : t.indices) {
            os << "sum_{" << ix.name << "=0.."
               << (ix.infinite ? std::string("inf") : ix.upper.str()) << "} ";
        }
        os << (t.sign >= 0 ? "+ " : "- ");
        for (const auto& c : t.coeffs) {
            if (c.kind == CoeffFactor::Kind::GenBinomial)
                os << "binom(" << c.top.str() << ", " << c.bottom.str() << ") ";
            else
                os << "(-1)^" << c.bottom_index << " binom(" << c.top_index << ", "
                   << c.bottom_index << ") ";
        }
        if (auto path = isEZPath(t.matrix)) {
            os << "Z" << t.matrix.depth() << "(";
            for (size_t i = 0; i < path->size(); ++i) {
                if (i) os << ", ";
                os << (*path)[i].str();
            }
            os << ")";
        } else {
            os << "Zr" << t.matrix.str();
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace mzs
