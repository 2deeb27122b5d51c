#include <cmath>

#include "mzs/parallel.hpp"
#include "mzs/shuffle.hpp"

namespace mzs {

namespace {

struct Ctx {
    const TruncationPlan& plan;
};

using Env = std::map<std::string, Complex>;

double maxNegShift(const RootZetaMatrix& m) {
    double s = 0.0;
    for (const auto& [pos, e] : m.entries()) {
        (void)pos;
        s = std::max(s, -e.constant().real());
    }
    return s;
}

Complex signedIntBinomValue(long long k, long long j) {
    if (j < 0 || j > k) return Complex(0.0, 0.0);
    double acc = 1.0;
    for (long long i = 0; i < j; ++i)
        acc = acc * static_cast<double>(k - i) / static_cast<double>(i + 1);
    return Complex((j % 2 == 0) ? acc : -acc, 0.0);
}

Complex coeffProduct(const ShuffleTerm& t, const Env& env) {
    Complex acc(static_cast<double>(t.sign), 0.0);
    for (const auto& c : t.coeffs) {
        if (c.kind == CoeffFactor::Kind::GenBinomial) {
            acc *= specfun::genBinomial(c.top.eval(env), c.bottom.eval(env));
        } else {
            const Complex kv = env.count(c.top_index)
                                   ? env.at(c.top_index)
                                   : throw MissingTableEntry("unbound " + c.top_index);
            const Complex jv = env.at(c.bottom_index);
            acc *= signedIntBinomValue(std::llround(kv.real()), std::llround(jv.real()));
        }
        if (acc == Complex(0.0, 0.0)) return acc;
    }
    return acc;
}

EvalResult realizeNode(const ExpNode* node, const Env& env, size_t level, const Ctx& ctx);

// whole subtree evaluated through its pre-split matrix
EvalResult subtreeViaMatrix(const ExpNode* node, const Env& env, const Ctx& ctx) {
    const Complex c = coeffProduct(node->term, env);
    if (c == Complex(0.0, 0.0)) return {Complex(0.0, 0.0), 0.0};
    const RootZetaMatrix m = node->term.matrix.substitute(env);
    EvalResult rz = rootZetaEval(m, ctx.plan.lattice);
    return {c * rz.value, std::abs(c) * rz.err_est};
}

EvalResult evalLeaf(const ExpNode* node, const Env& env, const Ctx& ctx) {
    const Complex c = coeffProduct(node->term, env);
    if (c == Complex(0.0, 0.0)) return {Complex(0.0, 0.0), 0.0};
    const RootZetaMatrix m = node->term.matrix.substitute(env);
    auto path = isEZPath(m);
    if (!path) throw Error("leaf matrix lost its path shape: " + m.str());
    if (m.depth() == 1) {
        EvalOptions opts;
        opts.tol = std::max(1e-15, ctx.plan.lattice.tolFor(1) * 1e-3);
        const Complex v = specfun::hurwitzZeta((*path)[0].constant(), 1.0, opts);
        return {c * v, std::abs(c) * opts.tol * (1.0 + std::abs(v))};
    }
    WeightedIndex w;
    w.coeff = c;
    for (const auto& e : *path) w.expo.push_back(e.constant());
    return jointPathEval({w}, ctx.plan.lattice);
}

// one summand of a split node: all children combined at a fixed index value
EvalResult splitCombo(const ExpNode* node, const Env& env, size_t level, const Ctx& ctx,
                      long long k) {
    Env sub = env;
    sub[node->indexName] = Complex(static_cast<double>(k), 0.0);
    Complex val(0.0, 0.0);
    double err = 0.0;
    // group leaf children on one lattice so partnered families cancel per
    // outer lattice value, not only per k
    std::vector<WeightedIndex> leaves;
    int leafDepth = 0;
    for (const auto& ch : node->children) {
        const ExpNode* c = ch.get();
        if (c->kind == ExpNode::Kind::Leaf) {
            const Complex w = coeffProduct(c->term, sub);
            if (w == Complex(0.0, 0.0)) continue;
            const RootZetaMatrix m = c->term.matrix.substitute(sub);
            auto path = isEZPath(m);
            if (!path) throw Error("leaf matrix lost its path shape: " + m.str());
            if (m.depth() == 1) {
                EvalResult one = evalLeaf(c, sub, ctx);
                val += one.value;
                err += one.err_est;
                continue;
            }
            WeightedIndex wi;
            wi.coeff = w;
            for (const auto& e : *path) wi.expo.push_back(e.constant());
            leafDepth = m.depth();
            leaves.push_back(std::move(wi));
            continue;
        }
        const double shift = maxNegShift(c->term.matrix.substitute(sub));
        const long long lim = c->kind == ExpNode::Kind::Collapse
                                  ? ctx.plan.honest_collapse_cutoff
                                  : ctx.plan.honest_split_cutoff;
        const bool honest = lim > 0 && shift <= static_cast<double>(lim);
        EvalResult r = honest ? realizeNode(c, sub, level + 1, ctx) : subtreeViaMatrix(c, sub, ctx);
        val += r.value;
        err += r.err_est;
    }
    if (!leaves.empty()) {
        (void)leafDepth;
        EvalResult r = jointPathEval(leaves, ctx.plan.lattice);
        val += r.value;
        err += r.err_est;
    }
    return {val, err};
}

EvalResult realizeNodeInner(const ExpNode* node, const Env& env, size_t level, const Ctx& ctx);

EvalResult realizeNode(const ExpNode* node, const Env& env, size_t level, const Ctx& ctx) {
    if (node->kind == ExpNode::Kind::Leaf) return evalLeaf(node, env, ctx);
    try {
        return realizeNodeInner(node, env, level, ctx);
    } catch (const PoleOfGamma&) {
        // at parameter points where interior exponent sums are integers the
        // family coefficients below this split hit gamma poles (the rewrite
        // is singular there term-by-term); the subtree value itself is finite
        // and comes from its matrix instead
        return subtreeViaMatrix(node, env, ctx);
    }
}

EvalResult realizeNodeInner(const ExpNode* node, const Env& env, size_t level, const Ctx& ctx) {

    // index range: every child carries the index as its innermost stack entry;
    // after integer specialization the children truncate at their own bounds
    const SumIndex& ix = node->children.front()->term.indices.back();
    if (!ix.infinite) {
        Complex val(0.0, 0.0);
        double err = 0.0;
        for (const auto& ch : node->children) {
            const SumIndex& cix = ch->term.indices.back();
            const long long bound =
                cix.infinite ? -1 : std::llround(cix.upper.eval(env).real());
            for (long long k = 0; k <= bound; ++k) {
                Env sub = env;
                sub[node->indexName] = Complex(static_cast<double>(k), 0.0);
                EvalResult r = realizeNode(ch.get(), sub, level + 1, ctx);
                val += r.value;
                err += r.err_est;
            }
            if (cix.infinite)
                throw Error("realize: mixed finite/infinite ranges under one split");
        }
        return {val, err};
    }

    // infinite index: truncate at the plan cutoff with dyadic tail fit
    long long K = ctx.plan.cutoffAt(level);
    int c = ctx.plan.richardson_levels + 4;
    while (c > 3 && (K >> (c - 1)) < 8) --c;
    const long long n0 = K >> (c - 1);
    const long long kEff = n0 >= 4 ? (n0 << (c - 1)) : K;

    std::vector<Complex> vals(static_cast<size_t>(kEff));
    std::vector<double> errs(static_cast<size_t>(kEff));
    auto evalOne = [&](long long k) {
        EvalResult r;
        if (node->kind == ExpNode::Kind::Split) {
            r = splitCombo(node, env, level, ctx, k);
        } else {
            Env sub = env;
            sub[node->indexName] = Complex(static_cast<double>(k), 0.0);
            r = realizeNode(node->children.front().get(), sub, level + 1, ctx);
        }
        vals[static_cast<size_t>(k)] = r.value;
        errs[static_cast<size_t>(k)] = r.err_est;
    };
    if (level == 0)
        parallelFor(kEff, evalOne);
    else
        for (long long k = 0; k < kEff; ++k) evalOne(k);

    KahanSum acc;
    std::vector<Complex> snaps;
    long long nextSnap = n0 >= 4 ? n0 : kEff + 1;
    double errSum = 0.0;
    for (long long k = 0; k < kEff; ++k) {
        acc.add(vals[static_cast<size_t>(k)]);
        errSum += errs[static_cast<size_t>(k)];
        if (k + 1 == nextSnap) {
            snaps.push_back(acc.value());
            nextSnap *= 2;
        }
    }
    if (snaps.size() < 3) return {acc.value(), errSum};
    TailEstimate fit = dyadicRichardson(snaps, ctx.plan.richardson_levels);
    return {fit.limit, fit.err_est + errSum};
}

}  // namespace

EvalResult realize(const Expansion& e, const std::map<std::string, Complex>& bindings,
                   const TruncationPlan& plan) {
    if (!e.root) throw Error("realize: expansion carries no tree");
    for (const auto& p : e.params) {
        auto it = bindings.find(p.name);
        if (it == bindings.end()) throw OutOfDomain("realize: parameter " + p.name + " unbound");
        const double re = it->second.real();
        if (p.lastEntry && !(re > 1.0))
            throw OutOfDomain("realize: Re(" + p.name + ") must be > 1");
        if (!p.lastEntry && !(re >= 1.0))
            throw OutOfDomain("realize: Re(" + p.name + ") must be >= 1");
    }
    Ctx ctx{plan};
    return realizeNode(e.root.get(), bindings, 0, ctx);
}

}  // namespace mzs
