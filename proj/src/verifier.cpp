#include "mzs/verifier.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mzs/parallel.hpp"

namespace mzs {

using Json = nlohmann::ordered_json;
namespace mp = boost::multiprecision;

namespace {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        std::uint64_t x = state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        return state = x;
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * ((next() >> 11) * 0x1.0p-53);
    }
    long long integer(long long lo, long long hi) {
        return lo + static_cast<long long>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

Complex cpow(const Complex& base, const Complex& expo) {
    return std::exp(expo * std::log(base));
}

long long intOf(const Complex& z, const char* what) {
    if (std::abs(z.imag()) > 1e-9 || std::abs(z.real() - std::round(z.real())) > 1e-9)
        throw NotAnInteger(std::string(what) + " must be an integer, got " + formatComplex(z));
    return std::llround(z.real());
}

Complex need(const std::map<std::string, Complex>& pt, const std::string& k) {
    auto it = pt.find(k);
    if (it == pt.end()) throw OutOfDomain("point is missing variable '" + k + "'");
    return it->second;
}

struct EvalOut {
    Complex lhs{0.0, 0.0}, rhs{0.0, 0.0};
    double err = 0.0;
    std::string cutoffs;
};

// ---- individual identity evaluators ----------------------------------------

EvalOut evalConnection(const std::map<std::string, Complex>& pt, const TruncationPlan&) {
    const Complex s = need(pt, "s"), t = need(pt, "t"), x = need(pt, "x"), y = need(pt, "y");
    if (s.real() <= 0 || t.real() <= 0 || x.real() <= 0 || y.real() <= 0)
        throw OutOfDomain("connection formula needs positive real parts");
    const Complex xy = x + y;
    EvalOut out;
    out.lhs = cpow(xy, s + t) / (cpow(x, s) * cpow(y, t));
    EvalOptions opts;
    const Complex pref = std::exp(specfun::logGamma(s + t) - specfun::logGamma(s) -
                                  specfun::logGamma(t));
    out.rhs = pref * (specfun::hyp2f1(s + t, Complex(1, 0), s + 1.0, x / xy, opts) / s +
                      specfun::hyp2f1(s + t, Complex(1, 0), t + 1.0, y / xy, opts) / t);
    out.err = 1e-12 * (std::abs(out.lhs) + std::abs(out.rhs));
    out.cutoffs = "series tol 1e-13";
    return out;
}

EvalOut evalIpfdPointwise(const std::map<std::string, Complex>& pt, const TruncationPlan& plan) {
    const Complex s = need(pt, "s"), t = need(pt, "t"), x = need(pt, "x"), y = need(pt, "y");
    if (s.real() <= 0 || t.real() <= 0 || x.real() <= 0 || y.real() <= 0)
        throw OutOfDomain("the decomposition needs positive real parts");
    const Complex xy = x + y;
    EvalOut out;
    out.lhs = cpow(x, -s) * cpow(y, -t);
    const long long K = plan.cutoffAt(0);
    const Complex lx = std::log(x), ly = std::log(y), lxy = std::log(xy);
    // each family is one exp of a combined exponent so the growing power of
    // x or y never overflows against the shrinking power of x+y
    auto summand = [&](long long kk) {
        const Complex k(static_cast<double>(kk), 0.0);
        const Complex f1 =
            specfun::genBinomial(t + k - 1.0, k) * std::exp((k - s) * lx - (t + k) * lxy);
        const Complex f2 = specfun::genBinomial(s + t + k - 1.0, s + k) *
                           std::exp(k * lx - (s + t + k) * lxy);
        const Complex f3 =
            specfun::genBinomial(s + k - 1.0, k) * std::exp((k - t) * ly - (s + k) * lxy);
        const Complex f4 = specfun::genBinomial(s + t + k - 1.0, t + k) *
                           std::exp(k * ly - (s + t + k) * lxy);
        return f1 - f2 + f3 - f4;
    };
    TailEstimate tail = truncatedSeries(summand, K, plan.richardson_levels);
    out.rhs = tail.limit;
    out.err = tail.err_est;
    out.cutoffs = "K=" + std::to_string(K);
    return out;
}

// infer the split of point variables into the two shuffle factors
void factorNames(const std::map<std::string, Complex>& pt, std::vector<std::string>& left,
                 std::vector<std::string>& right) {
    left.clear();
    right.clear();
    if (pt.count("s") && pt.count("t")) {
        left = {"s"};
        right = {"t"};
        return;
    }
    for (int i = 1; i <= 4 && pt.count("s" + std::to_string(i)); ++i)
        left.push_back("s" + std::to_string(i));
    if (pt.count("t"))
        right = {"t"};
    else
        for (int i = 1; i <= 4 && pt.count("t" + std::to_string(i)); ++i)
            right.push_back("t" + std::to_string(i));
    if (left.empty() || right.empty())
        throw OutOfDomain("cannot infer factor depths from point variables");
}

EvalOut productSides(const std::map<std::string, Complex>& pt, const TruncationPlan& plan,
                     bool stuffleLhs) {
    std::vector<std::string> left, right;
    factorNames(pt, left, right);
    std::vector<Complex> lv, rv;
    for (const auto& n : left) lv.push_back(need(pt, n));
    for (const auto& n : right) rv.push_back(need(pt, n));
    EvalOut out;
    double lerr = 0.0;
    if (stuffleLhs) {
        std::vector<AffineExpr> la, ra;
        for (const Complex& v : lv) la.push_back(AffineExpr(v));
        for (const Complex& v : rv) ra.push_back(AffineExpr(v));
        Complex acc(0.0, 0.0);
        for (const auto& word : stuffleExpand(la, ra)) {
            std::vector<Complex> idx;
            for (const auto& e : word) idx.push_back(e.constant());
            EvalResult r = mzfEval(MzfIndex(idx), plan.lattice);
            acc += r.value;
            lerr += r.err_est;
        }
        out.lhs = acc;
    } else {
        EvalResult a = mzfEval(MzfIndex(lv), plan.lattice);
        EvalResult b = mzfEval(MzfIndex(rv), plan.lattice);
        out.lhs = a.value * b.value;
        lerr = a.err_est * std::abs(b.value) + b.err_est * std::abs(a.value);
    }
    auto e = expandShuffle(left, right);
    EvalResult r = realize(e, pt, plan);
    out.rhs = r.value;
    out.err = lerr + r.err_est;
    std::ostringstream cs;
    cs << "K=";
    for (size_t i = 0; i < plan.index_cutoffs.size(); ++i)
        cs << (i ? "/" : "") << plan.index_cutoffs[i];
    cs << " N=" << plan.lattice.cutoffFor(static_cast<int>(left.size() + right.size()));
    out.cutoffs = cs.str();
    return out;
}

EvalOut evalStuffleGeneral(const std::map<std::string, Complex>& pt, const TruncationPlan& plan) {
    std::vector<std::string> left, right;
    factorNames(pt, left, right);
    std::vector<Complex> lv, rv;
    for (const auto& n : left) lv.push_back(need(pt, n));
    for (const auto& n : right) rv.push_back(need(pt, n));
    EvalOut out;
    EvalResult a = mzfEval(MzfIndex(lv), plan.lattice);
    EvalResult b = mzfEval(MzfIndex(rv), plan.lattice);
    out.lhs = a.value * b.value;
    double err = a.err_est * std::abs(b.value) + b.err_est * std::abs(a.value);
    std::vector<AffineExpr> la, ra;
    for (const Complex& v : lv) la.push_back(AffineExpr(v));
    for (const Complex& v : rv) ra.push_back(AffineExpr(v));
    Complex acc(0.0, 0.0);
    for (const auto& word : stuffleExpand(la, ra)) {
        std::vector<Complex> idx;
        for (const auto& e : word) idx.push_back(e.constant());
        EvalResult r = mzfEval(MzfIndex(idx), plan.lattice);
        acc += r.value;
        err += r.err_est;
    }
    out.rhs = acc;
    out.err = err;
    out.cutoffs = "N=" + std::to_string(plan.lattice.cutoffFor(2));
    return out;
}

EvalOut evalKmt21(const std::map<std::string, Complex>& pt, const TruncationPlan& plan) {
    const Complex s = need(pt, "s");
    const long long b = intOf(need(pt, "b"), "b");
    const long long c = intOf(need(pt, "c"), "c");
    if (b < 2 || c < 2) throw OutOfDomain("b, c must be integers >= 2");
    EvalOut out;
    EvalResult l1 = mzfEval(MzfIndex{s, Complex(static_cast<double>(b), 0.0)}, plan.lattice);
    EvalResult l2 = mzfEval(MzfIndex{Complex(static_cast<double>(c), 0.0)}, plan.lattice);
    out.lhs = l1.value * l2.value;
    double err = l1.err_est * std::abs(l2.value) + l2.err_est * std::abs(l1.value);
    Complex acc(0.0, 0.0);
    for (long long k = 0; k < b; ++k) {
        const Complex coeff = specfun::genBinomial(
            Complex(static_cast<double>(c + k - 1), 0.0), Complex(static_cast<double>(k), 0.0));
        EvalResult r = mzfEval(MzfIndex{s, Complex(static_cast<double>(b - k), 0.0),
                                        Complex(static_cast<double>(c + k), 0.0)},
                               plan.lattice);
        acc += coeff * r.value;
        err += std::abs(coeff) * r.err_est;
    }
    for (long long k = 0; k < c; ++k) {
        const Complex coeff = specfun::genBinomial(
            Complex(static_cast<double>(b + k - 1), 0.0), Complex(static_cast<double>(k), 0.0));
        RootZetaMatrix m(3);
        m.set(1, 1, AffineExpr(s));
        m.set(1, 3, AffineExpr(Complex(static_cast<double>(b + k), 0.0)));
        m.set(3, 3, AffineExpr(Complex(static_cast<double>(c - k), 0.0)));
        EvalResult r = rootZetaEval(m, plan.lattice);
        acc += coeff * r.value;
        err += std::abs(coeff) * r.err_est;
    }
    out.rhs = acc;
    out.err = err;
    out.cutoffs = "N=" + std::to_string(plan.lattice.cutoffFor(3));
    return out;
}

EvalOut evalKmt31(const std::map<std::string, Complex>& pt, const TruncationPlan& plan) {
    const Complex s1 = need(pt, "s1"), s2 = need(pt, "s2");
    const long long c = intOf(need(pt, "c"), "c");
    const long long d = intOf(need(pt, "d"), "d");
    if (c < 2 || d < 2) throw OutOfDomain("c, d must be integers >= 2");
    EvalOut out;
    EvalResult l1 =
        mzfEval(MzfIndex{s1, s2, Complex(static_cast<double>(c), 0.0)}, plan.lattice);
    EvalResult l2 = mzfEval(MzfIndex{Complex(static_cast<double>(d), 0.0)}, plan.lattice);
    out.lhs = l1.value * l2.value;
    double err = l1.err_est * std::abs(l2.value) + l2.err_est * std::abs(l1.value);
    Complex acc(0.0, 0.0);
    for (long long k = 0; k < c; ++k) {
        const Complex coeff = specfun::genBinomial(
            Complex(static_cast<double>(d + k - 1), 0.0), Complex(static_cast<double>(k), 0.0));
        EvalResult r = mzfEval(MzfIndex{s1, s2, Complex(static_cast<double>(c - k), 0.0),
                                        Complex(static_cast<double>(d + k), 0.0)},
                               plan.lattice);
        acc += coeff * r.value;
        err += std::abs(coeff) * r.err_est;
    }
    for (long long k = 0; k < d; ++k) {
        const Complex coeff = specfun::genBinomial(
            Complex(static_cast<double>(c + k - 1), 0.0), Complex(static_cast<double>(k), 0.0));
        RootZetaMatrix m(4);
        m.set(1, 1, AffineExpr(s1));
        m.set(1, 2, AffineExpr(s2));
        m.set(1, 4, AffineExpr(Complex(static_cast<double>(c + k), 0.0)));
        m.set(4, 4, AffineExpr(Complex(static_cast<double>(d - k), 0.0)));
        EvalResult r = rootZetaEval(m, plan.lattice);
        acc += coeff * r.value;
        err += std::abs(coeff) * r.err_est;
    }
    out.rhs = acc;
    out.err = err;
    out.cutoffs = "N=" + std::to_string(plan.lattice.cutoffFor(4));
    return out;
}

EvalOut evalSumFormula(const std::map<std::string, Complex>& pt, const TruncationPlan& plan) {
    const Complex s = need(pt, "s");
    if (!(s.real() > 1.0) || std::abs(s - Complex(2.0, 0.0)) < 0.25)
        throw OutOfDomain("sum formula needs Re(s) > 1 and |s-2| >= 0.25");
    EvalOut out;
    EvalResult l = mzfEval(MzfIndex{s}, plan.lattice);
    out.lhs = l.value;
    double err = l.err_est;
    const long long K = plan.cutoffAt(0);
    auto summand = [&](long long kk) {
        const double k = static_cast<double>(kk);
        std::vector<WeightedIndex> pair;
        pair.push_back({Complex(1.0, 0.0), {s - (k + 2.0), Complex(k + 2.0, 0.0)}});
        pair.push_back({Complex(-1.0, 0.0), {Complex(-k, 0.0), s + k}});
        EvalResult r = jointPathEval(pair, plan.lattice);
        return r.value;
    };
    TailEstimate tail = truncatedSeries(summand, K, plan.richardson_levels);
    out.rhs = tail.limit;
    out.err = err + tail.err_est;
    out.cutoffs = "K=" + std::to_string(K) +
                  " N=" + std::to_string(plan.lattice.cutoffFor(2));
    return out;
}

EvalOut evalBinomialInversion(std::uint64_t seed) {
    // 100 random integer tables, levels up to 8: forward then invert must be
    // the identity exactly
    Rng rng(seed ^ 0xb1001ull);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        BinomialTable f;
        f.L = 8;
        for (long long l = 0; l <= f.L; ++l)
            for (long long d = 0; d + l <= f.L; ++d)
                f.set(d, l, Complex(static_cast<double>(rng.integer(-50, 50)),
                                    static_cast<double>(rng.integer(-50, 50))));
        BinomialTable g = binomialForward(f);
        BinomialTable back = binomialInvert(g);
        for (const auto& [key, v] : f.values)
            worst = std::max(worst, std::abs(v - back.at(key.first, key.second)));
    }
    EvalOut out;
    out.lhs = Complex(worst, 0.0);
    out.rhs = Complex(0.0, 0.0);
    out.cutoffs = "trials=100 L=8";
    return out;
}

EvalOut evalPoint(const std::string& id, const std::map<std::string, Complex>& pt,
                  const TruncationPlan& plan, std::uint64_t seed) {
    if (id == "connection-formula") return evalConnection(pt, plan);
    if (id == "ipfd-pointwise") return evalIpfdPointwise(pt, plan);
    if (id == "shuffle-double" || id == "shuffle-general") return productSides(pt, plan, false);
    if (id == "double-shuffle-double" || id == "double-shuffle-general")
        return productSides(pt, plan, true);
    if (id == "stuffle-general") return evalStuffleGeneral(pt, plan);
    if (id == "kmt-21") return evalKmt21(pt, plan);
    if (id == "kmt-31") return evalKmt31(pt, plan);
    if (id == "sum-formula") return evalSumFormula(pt, plan);
    if (id == "binomial-inversion") return evalBinomialInversion(seed);
    throw Error("unknown identity id: " + id);
}

}  // namespace

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

const std::vector<std::string>& identityIds() {
    static const std::vector<std::string> ids = {
        "pfd-classical",        "connection-formula",    "ipfd-pointwise",
        "shuffle-double",       "double-shuffle-double", "shuffle-general",
        "stuffle-general",      "double-shuffle-general", "kmt-21",
        "kmt-31",               "sum-formula",           "binomial-inversion",
    };
    return ids;
}

IdentitySpec defaultSpec(const std::string& id) {
    IdentitySpec spec;
    spec.id = id;
    spec.seed = 20240927;
    auto C = [](double re, double im = 0.0) { return Complex(re, im); };
    if (id == "pfd-classical") {
        spec.tolerance = 0.0;
        return spec;  // pairs and samples are synthesized from the seed
    }
    if (id == "connection-formula") {
        spec.tolerance = 1e-10;
        for (double s : {0.5, 1.5, 2.5})
            for (double t : {0.5, 1.5, 2.5})
                for (double x : {0.5, 1.5, 2.5})
                    for (double y : {0.5, 1.5, 2.5})
                        spec.points.push_back(
                            {{"s", C(s)}, {"t", C(t)}, {"x", C(x)}, {"y", C(y)}});
        return spec;
    }
    if (id == "ipfd-pointwise") {
        spec.tolerance = 1e-8;
        spec.plan.index_cutoffs = {400};
        Rng rng(spec.seed);
        for (int i = 0; i < 10; ++i) {
            spec.points.push_back({{"s", C(rng.uniform(1.05, 3.0), rng.uniform(-1.0, 1.0))},
                                   {"t", C(rng.uniform(1.05, 3.0), rng.uniform(-1.0, 1.0))},
                                   {"x", C(static_cast<double>(rng.integer(1, 5)))},
                                   {"y", C(static_cast<double>(rng.integer(1, 5)))}});
        }
        return spec;
    }
    if (id == "shuffle-double" || id == "double-shuffle-double") {
        spec.tolerance = 1e-6;
        spec.plan.index_cutoffs = {768};
        spec.plan.richardson_levels = 4;
        spec.plan.lattice.shift_cutoff_factor = 24.0;
        spec.points.push_back({{"s", C(2.0)}, {"t", C(2.0)}});
        spec.points.push_back({{"s", C(2.5)}, {"t", C(3.5)}});
        spec.points.push_back({{"s", C(3.0)}, {"t", C(2.0, 1.0)}});
        return spec;
    }
    if (id == "shuffle-general" || id == "double-shuffle-general") {
        spec.tolerance = 1e-5;
        spec.plan.index_cutoffs = {256, 192, 128};
        spec.points.push_back({{"s1", C(1.5)}, {"s2", C(2.5)}, {"t", C(2.25)}});
        if (id == "shuffle-general")
            spec.points.push_back(
                {{"s1", C(1.5)}, {"s2", C(2.5)}, {"t1", C(1.5)}, {"t2", C(2.5)}});
        return spec;
    }
    if (id == "stuffle-general") {
        spec.tolerance = 1e-7;
        Rng rng(spec.seed ^ 0x5fu);
        for (int i = 0; i < 4; ++i)
            spec.points.push_back({{"s", C(rng.uniform(2.05, 3.2), rng.uniform(-0.8, 0.8))},
                                   {"t", C(rng.uniform(2.05, 3.2), rng.uniform(-0.8, 0.8))}});
        for (int i = 0; i < 3; ++i)
            spec.points.push_back({{"s1", C(rng.uniform(1.2, 2.0), rng.uniform(-0.5, 0.5))},
                                   {"s2", C(rng.uniform(2.05, 3.0), rng.uniform(-0.5, 0.5))},
                                   {"t", C(rng.uniform(2.05, 3.0), rng.uniform(-0.5, 0.5))}});
        return spec;
    }
    if (id == "kmt-21") {
        spec.tolerance = 1e-5;
        spec.points.push_back({{"s", C(1.5, 0.5)}, {"b", C(2.0)}, {"c", C(2.0)}});
        return spec;
    }
    if (id == "kmt-31") {
        spec.tolerance = 1e-5;
        spec.points.push_back({{"s1", C(1.5)}, {"s2", C(2.5)}, {"c", C(2.0)}, {"d", C(2.0)}});
        return spec;
    }
    if (id == "sum-formula") {
        spec.tolerance = 1e-6;
        spec.plan.index_cutoffs = {768};
        spec.plan.lattice.shift_cutoff_factor = 24.0;
        spec.points.push_back({{"s", C(3.0)}});
        spec.points.push_back({{"s", C(2.5)}});
        spec.points.push_back({{"s", C(2.5, 1.0)}});
        return spec;
    }
    if (id == "binomial-inversion") {
        spec.tolerance = 0.0;
        spec.points.push_back({});  // one synthetic batch point
        return spec;
    }
    throw Error("unknown identity id: " + id);
}

// ---------------------------------------------------------------------------
// runners
// ---------------------------------------------------------------------------

VerificationReport checkIdentity(const IdentitySpec& spec) {
    if (spec.id == "pfd-classical") return checkClassicalPFD(8, 8, 50, spec.seed);
    VerificationReport rep;
    rep.id = spec.id;
    rep.seed = spec.seed;
    rep.tolerance = spec.tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    rep.points.resize(spec.points.size());
    parallelFor(static_cast<long long>(spec.points.size()), [&](long long i) {
        PointResult& pr = rep.points[static_cast<size_t>(i)];
        pr.point = spec.points[static_cast<size_t>(i)];
        const auto p0 = std::chrono::steady_clock::now();
        try {
            EvalOut out = evalPoint(spec.id, pr.point, spec.plan, spec.seed);
            pr.lhs = out.lhs;
            pr.rhs = out.rhs;
            pr.residual = std::abs(out.lhs - out.rhs);
            pr.err_est = out.err;
            pr.cutoffs = out.cutoffs;
            pr.pass = pr.residual <= std::max(spec.tolerance, 3.0 * pr.err_est);
        } catch (const Error& e) {
            pr.error = true;
            pr.pass = false;
            pr.message = e.what();
        }
        pr.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               p0)
                         .count();
    });
    rep.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.pass = !rep.points.empty();
    for (const auto& p : rep.points) {
        rep.pass = rep.pass && p.pass;
        rep.evalError = rep.evalError || p.error;
    }
    return rep;
}

namespace {

using Rat = mp::cpp_rational;
using Int = mp::cpp_int;

Rat rpow(const Rat& base, long long e) {
    Rat acc = 1;
    for (long long i = 0; i < e; ++i) acc *= base;
    return acc;
}

Int ibinom(long long n, long long k) {
    if (k < 0 || k > n) return 0;
    Int acc = 1;
    for (long long i = 0; i < k; ++i) {
        acc *= (n - i);
        acc /= (i + 1);
    }
    return acc;
}

}  // namespace

VerificationReport checkClassicalPFD(int aMax, int bMax, int samples, std::uint64_t seed) {
    VerificationReport rep;
    rep.id = "pfd-classical";
    rep.seed = seed;
    rep.tolerance = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed ^ 0x9fd7u);
    for (int a = 1; a <= aMax; ++a) {
        for (int b = 1; b <= bMax; ++b) {
            PointResult pr;
            pr.point = {{"a", Complex(a, 0)}, {"b", Complex(b, 0)}};
            const auto p0 = std::chrono::steady_clock::now();
            bool allExact = true;
            for (int trial = 0; trial < samples && allExact; ++trial) {
                const Rat x(rng.integer(1, 12), rng.integer(1, 12));
                const Rat y(rng.integer(1, 12), rng.integer(1, 12));
                const Rat lhs = Rat(1) / (rpow(x, a) * rpow(y, b));
                Rat rhs = 0;
                for (long long k = 0; k < a; ++k)
                    rhs += Rat(ibinom(b + k - 1, k)) / (rpow(x, a - k) * rpow(x + y, b + k));
                for (long long k = 0; k < b; ++k)
                    rhs += Rat(ibinom(a + k - 1, k)) / (rpow(y, b - k) * rpow(x + y, a + k));
                allExact = allExact && (lhs == rhs);
            }
            pr.lhs = Complex(0, 0);
            pr.rhs = Complex(0, 0);
            pr.residual = allExact ? 0.0 : 1.0;
            pr.err_est = 0.0;
            pr.pass = allExact;
            pr.cutoffs = "exact rational, " + std::to_string(samples) + " samples";
            pr.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - p0)
                             .count();
            rep.points.push_back(std::move(pr));
        }
    }
    rep.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.pass = true;
    for (const auto& p : rep.points) rep.pass = rep.pass && p.pass;
    return rep;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

Json complexJson(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Json pointJson(const std::map<std::string, Complex>& pt) {
    Json j = Json::object();
    for (const auto& [k, v] : pt) j[k] = formatComplex(v);
    return j;
}

std::string pointStr(const std::map<std::string, Complex>& pt) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : pt) {
        if (!first) os << ";";
        os << k << "=" << formatComplex(v);
        first = false;
    }
    return os.str();
}

}  // namespace

std::string reportToJson(const VerificationReport& rep, const std::string& configJson) {
    Json payload;
    payload["identity"] = rep.id;
    payload["seed"] = rep.seed;
    payload["tolerance"] = rep.tolerance;
    payload["config"] = configJson.empty() ? Json::object() : Json::parse(configJson);
    payload["points"] = Json::array();
    for (const auto& p : rep.points) {
        Json pj;
        pj["point"] = pointJson(p.point);
        pj["lhs"] = complexJson(p.lhs);
        pj["rhs"] = complexJson(p.rhs);
        pj["residual"] = p.residual;
        pj["err_est"] = p.err_est;
        pj["pass"] = p.pass;
        if (p.error) pj["error"] = p.message;
        pj["cutoffs"] = p.cutoffs;
        payload["points"].push_back(pj);
    }
    payload["verdict"] = rep.evalError ? "error" : (rep.pass ? "pass" : "fail");
    Json doc;
    doc["format"] = "mzs-report-v1";
    doc["payload"] = payload;
    Json timing;
    timing["total_ms"] = rep.total_ms;
    timing["per_point_ms"] = Json::array();
    for (const auto& p : rep.points) timing["per_point_ms"].push_back(p.wall_ms);
    doc["timing"] = timing;
    return doc.dump(1);
}

std::string reportToCsv(const VerificationReport& rep) {
    std::ostringstream os;
    os << "identity,point,lhs_re,lhs_im,rhs_re,rhs_im,residual,err_est,pass,cutoffs\n";
    os.precision(17);
    for (const auto& p : rep.points) {
        os << rep.id << ",\"" << pointStr(p.point) << "\"," << p.lhs.real() << ","
           << p.lhs.imag() << "," << p.rhs.real() << "," << p.rhs.imag() << "," << p.residual
           << "," << p.err_est << "," << (p.pass ? 1 : 0) << ",\"" << p.cutoffs << "\"\n";
    }
    return os.str();
}

std::string specToJson(const IdentitySpec& spec) {
    Json j;
    j["id"] = spec.id;
    j["tolerance"] = spec.tolerance;
    j["seed"] = spec.seed;
    Json plan;
    plan["index_cutoffs"] = spec.plan.index_cutoffs;
    plan["honest_split_cutoff"] = spec.plan.honest_split_cutoff;
    plan["honest_collapse_cutoff"] = spec.plan.honest_collapse_cutoff;
    plan["richardson_levels"] = spec.plan.richardson_levels;
    Json lat;
    lat["outer_cutoffs"] = spec.plan.lattice.outer_cutoffs;
    lat["tol"] = spec.plan.lattice.tol;
    lat["tail_mode"] =
        spec.plan.lattice.tail_mode == TailMode::AlgebraicFit ? "algebraic-fit" : "none";
    lat["richardson_levels"] = spec.plan.lattice.richardson_levels;
    lat["shift_cutoff_factor"] = spec.plan.lattice.shift_cutoff_factor;
    plan["lattice"] = lat;
    j["plan"] = plan;
    j["points"] = Json::array();
    for (const auto& pt : spec.points) j["points"].push_back(pointJson(pt));
    return j.dump(1);
}

IdentitySpec specFromJson(const std::string& text) {
    Json j = Json::parse(text);
    IdentitySpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.tolerance = j.value("tolerance", 1e-6);
    spec.seed = j.value("seed", 20240927ull);
    if (j.contains("plan")) {
        const Json& plan = j["plan"];
        if (plan.contains("index_cutoffs"))
            spec.plan.index_cutoffs = plan["index_cutoffs"].get<std::vector<long long>>();
        spec.plan.honest_split_cutoff =
            plan.value("honest_split_cutoff", spec.plan.honest_split_cutoff);
        spec.plan.honest_collapse_cutoff =
            plan.value("honest_collapse_cutoff", spec.plan.honest_collapse_cutoff);
        spec.plan.richardson_levels = plan.value("richardson_levels", spec.plan.richardson_levels);
        if (plan.contains("lattice")) {
            const Json& lat = plan["lattice"];
            if (lat.contains("outer_cutoffs"))
                spec.plan.lattice.outer_cutoffs =
                    lat["outer_cutoffs"].get<std::vector<long long>>();
            spec.plan.lattice.tol = lat.value("tol", spec.plan.lattice.tol);
            if (lat.value("tail_mode", "algebraic-fit") == std::string("none"))
                spec.plan.lattice.tail_mode = TailMode::None;
            spec.plan.lattice.richardson_levels =
                lat.value("richardson_levels", spec.plan.lattice.richardson_levels);
            spec.plan.lattice.shift_cutoff_factor =
                lat.value("shift_cutoff_factor", spec.plan.lattice.shift_cutoff_factor);
        }
    }
    for (const auto& pj : j.at("points")) {
        std::map<std::string, Complex> pt;
        for (auto it = pj.begin(); it != pj.end(); ++it)
            pt[it.key()] = it.value().is_string() ? parseComplex(it.value().get<std::string>())
                                                  : Complex(it.value().get<double>(), 0.0);
        spec.points.push_back(std::move(pt));
    }
    return spec;
}

}  // namespace mzs
