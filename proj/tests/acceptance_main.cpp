// Acceptance battery: runs every gate criterion at its stated tolerance and
// time budget, one pass/fail line each.  Exits nonzero when anything fails.
//
// usage: mzs_acceptance [path-to-mzshuffle-cli]
// (the CLI path is needed only for the determinism criterion; it is skipped
// with a FAIL if absent)
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mzs/shuffle.hpp"
#include "mzs/verifier.hpp"

using namespace mzs;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int criterion, const std::string& what, bool pass, double seconds, double budget,
            const std::string& detail) {
    const bool inTime = seconds < budget;
    if (!pass || !inTime) ++g_failures;
    std::printf("[%s] criterion %2d: %s (%s; %.1f s of %.0f s budget)\n",
                (pass && inTime) ? "PASS" : "FAIL", criterion, what.c_str(), detail.c_str(),
                seconds, budget);
    std::fflush(stdout);
}

double worstResidual(const VerificationReport& rep) {
    double w = 0.0;
    for (const auto& p : rep.points) w = std::max(w, p.residual);
    return w;
}

std::string fmtRes(double worst, double tol) {
    std::ostringstream os;
    os << "worst residual " << worst << ", limit " << tol;
    return os.str();
}

void criterion1() {
    Timer t;
    auto rep = checkClassicalPFD(8, 8, 50, 20240927);
    report(1, "classical partial fractions exact over 1<=a,b<=8, 50 rational samples each",
           rep.pass && worstResidual(rep) == 0.0, t.seconds(), 5.0,
           rep.pass ? "all 64 pairs exact" : "rational mismatch");
}

void criterion2() {
    Timer t;
    auto rep = checkIdentity(defaultSpec("connection-formula"));
    const double worst = worstResidual(rep);
    report(2, "hypergeometric connection identity on the 81-point grid",
           !rep.evalError && worst < 1e-10, t.seconds(), 10.0, fmtRes(worst, 1e-10));
}

void criterion3() {
    Timer t;
    auto rep = checkIdentity(defaultSpec("ipfd-pointwise"));
    const double worst = worstResidual(rep);
    report(3, "pointwise infinite partial fraction decomposition, 10 complex samples",
           !rep.evalError && worst < 1e-8, t.seconds(), 60.0, fmtRes(worst, 1e-8));
}

void criterion4() {
    Timer t;
    bool pass = true;
    std::ostringstream detail;
    // integer point: the finite collapse against the direct-evaluation oracle
    auto fin = integerSpecialize(expandShuffle({"s"}, {"t"}), {{"s", 2}, {"t", 2}});
    auto v = realize(fin, {}, {});
    auto z2 = mzfEval(MzfIndex{Complex(2, 0)});
    auto z22 = mzfEval(MzfIndex{Complex(2, 0), Complex(2, 0)});
    auto z13 = mzfEval(MzfIndex{Complex(1, 0), Complex(3, 0)});
    const double rColl = std::abs(v.value - z2.value * z2.value);
    const double rOracle = std::abs(v.value - (2.0 * z22.value + 4.0 * z13.value));
    pass = pass && rColl < 1e-10 && rOracle < 1e-10;
    detail << "collapse vs product " << rColl << ", vs 2z(2,2)+4z(1,3) " << rOracle;
    // the two generic points of the catalog
    IdentitySpec spec = defaultSpec("shuffle-double");
    spec.points.erase(spec.points.begin());  // (2,2) handled above
    auto rep = checkIdentity(spec);
    const double worst = worstResidual(rep);
    pass = pass && !rep.evalError && worst < 1e-6;
    detail << "; generic worst " << worst << " (limit 1e-6)";
    report(4, "double-zeta shuffle relation (integer collapse + two generic points)", pass,
           t.seconds(), 180.0, detail.str());
}

void criterion5() {
    Timer t;
    auto rep = checkIdentity(defaultSpec("double-shuffle-double"));
    const double worst = worstResidual(rep);
    report(5, "functional double shuffle for double zetas at the catalog points",
           !rep.evalError && worst < 1e-6, t.seconds(), 180.0, fmtRes(worst, 1e-6));
}

void criterion6() {
    Timer t;
    auto rep = checkIdentity(defaultSpec("shuffle-general"));
    const double worst = worstResidual(rep);
    report(6, "general shuffle relation: depth (2,1) and (2,2) against the product oracle",
           !rep.evalError && worst < 1e-5, t.seconds(), 900.0, fmtRes(worst, 1e-5));
}

void criterion7() {
    Timer t;
    auto e = expandShuffle({"s1", "s2"}, {"t"});
    auto key = [](const ShuffleTerm& term) { return canonicalTermKey(term); };
    std::multiset<std::string> got;
    for (const auto& term : e.terms) got.insert(key(term));
    // transcription of the depth (2,1) worked expansion: 2 top families,
    // 4 nested, 1 finite alternating family
    std::vector<ShuffleTerm> fixture;
    auto mk = [&](int sign, std::vector<CoeffFactor> cf, std::vector<SumIndex> ix,
                  std::vector<std::tuple<int, int, const char*>> cells) {
        ShuffleTerm term;
        term.sign = sign;
        term.coeffs = std::move(cf);
        term.indices = std::move(ix);
        term.matrix = RootZetaMatrix(3);
        for (auto& [i, j, s] : cells) term.matrix.set(i, j, AffineExpr::parse(s));
        fixture.push_back(term);
    };
    SumIndex k1{"k1", true, {}}, k2{"k2", true, {}};
    SumIndex k2f{"k2", false, AffineExpr::symbol("k1")};
    auto B = [](const char* a, const char* b) {
        return CoeffFactor::genBinom(AffineExpr::parse(a), AffineExpr::parse(b));
    };
    mk(+1, {B("t+k1-1", "k1")}, {k1}, {{1, 1, "s1"}, {1, 2, "s2-k1"}, {1, 3, "t+k1"}});
    mk(-1, {B("s2+t+k1-1", "s2+k1")}, {k1}, {{1, 1, "s1"}, {1, 2, "-k1"}, {1, 3, "s2+t+k1"}});
    mk(+1, {B("s2+k1-1", "k1"), B("t-k1+k2-1", "k2")}, {k1, k2},
       {{1, 1, "s1-k2"}, {1, 2, "t-k1+k2"}, {1, 3, "s2+k1"}});
    mk(-1, {B("s2+k1-1", "k1"), B("s1+t-k1+k2-1", "s1+k2")}, {k1, k2},
       {{1, 1, "-k2"}, {1, 2, "s1+t-k1+k2"}, {1, 3, "s2+k1"}});
    mk(+1, {B("s2+k1-1", "k1"), B("s1+k2-1", "k2")}, {k1, k2},
       {{2, 2, "t-k1-k2"}, {1, 2, "s1+k2"}, {1, 3, "s2+k1"}});
    mk(-1, {B("s2+k1-1", "k1"), B("s1+t-k1+k2-1", "t-k1+k2")}, {k1, k2},
       {{2, 2, "-k2"}, {1, 2, "s1+t-k1+k2"}, {1, 3, "s2+k1"}});
    mk(-1, {B("s2+t+k1-1", "t+k1"), CoeffFactor::signedIntBinom("k1", "k2")}, {k1, k2f},
       {{1, 1, "s1-k2"}, {1, 2, "-k1+k2"}, {1, 3, "s2+t+k1"}});
    std::multiset<std::string> want;
    for (const auto& term : fixture) want.insert(key(term));
    const bool pass = got == want && e.terms.size() == 7;
    report(7, "depth (2,1) expansion matches the transcribed family fixture exactly", pass,
           t.seconds(), 5.0, pass ? "7 families, canonical keys equal" : "structure differs");
}

void criterion8() {
    Timer t;
    auto r21 = checkIdentity(defaultSpec("kmt-21"));
    auto r31 = checkIdentity(defaultSpec("kmt-31"));
    const double worst = std::max(worstResidual(r21), worstResidual(r31));
    std::ostringstream detail;
    detail << fmtRes(worst, 1e-5) << "; cutoffs " << r21.points[0].cutoffs << " and "
           << r31.points[0].cutoffs;
    report(8, "finite mixed relations with root-system zeta terms (2x1 and 3x1)",
           !r21.evalError && !r31.evalError && worst < 1e-5, t.seconds(), 600.0, detail.str());
}

void criterion9() {
    Timer t;
    auto rep = checkIdentity(defaultSpec("sum-formula"));
    const double worst = worstResidual(rep);
    auto z12 = mzfEval(MzfIndex{Complex(1, 0), Complex(2, 0)});
    auto z3 = mzfEval(MzfIndex{Complex(3, 0)});
    const double euler = std::abs(z12.value - z3.value);
    const bool pass = !rep.evalError && worst < 1e-6 && euler < 1e-10;
    std::ostringstream detail;
    detail << fmtRes(worst, 1e-6) << "; z(1,2) vs z(3) " << euler;
    report(9, "depth-two sum formula at s in {3, 2.5, 2.5+i} plus the Euler identity", pass,
           t.seconds(), 300.0, detail.str());
}

void criterion10() {
    Timer t;
    double worst = 0.0;
    for (const auto& [a, b] : std::vector<std::pair<long long, long long>>{{2, 2}, {2, 3}, {3, 4}}) {
        auto fin = integerSpecialize(expandShuffle({"s"}, {"t"}), {{"s", a}, {"t", b}});
        auto shuffleSide = realize(fin, {}, {});
        const Complex ca(static_cast<double>(a), 0.0), cb(static_cast<double>(b), 0.0);
        const Complex stuffleSide = mzfEval(MzfIndex{ca, cb}).value +
                                    mzfEval(MzfIndex{cb, ca}).value +
                                    mzfEval(MzfIndex{ca + cb}).value;
        worst = std::max(worst, std::abs(shuffleSide.value - stuffleSide));
    }
    report(10, "integer double shuffle: finite expansions agree at (2,2), (2,3), (3,4)",
           worst < 1e-9, t.seconds(), 60.0, fmtRes(worst, 1e-9));
}

void criterion11() {
    Timer t;
    IdentitySpec spec = defaultSpec("binomial-inversion");
    auto rep = checkIdentity(spec);
    const double worst = worstResidual(rep);
    report(11, "binomial inversion round-trips 100 random integer tables exactly",
           !rep.evalError && worst == 0.0, t.seconds(), 1.0, fmtRes(worst, 0.0));
}

void criterion12(const std::string& cli) {
    Timer t;
    if (cli.empty()) {
        report(12, "determinism across worker counts", false, t.seconds(), 120.0,
               "CLI path not supplied");
        return;
    }
    auto runOnce = [&](int workers, const std::string& out) {
        const std::string cmd = cli + " selftest --seed 777 --workers " +
                                std::to_string(workers) + " --out " + out + " >/dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const std::string o1 = "/tmp/mzs-accept-st1.json", o2 = "/tmp/mzs-accept-st2.json";
    const int rc1 = runOnce(1, o1);
    const int rc2 = runOnce(4, o2);
    bool pass = rc1 == 0 && rc2 == 0;
    std::string detail = "selftest exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2);
    if (pass) {
        auto payload = [](const std::string& path) {
            std::ifstream f(path);
            std::ostringstream os;
            os << f.rdbuf();
            return nlohmann::ordered_json::parse(os.str())["payload"].dump();
        };
        const std::string p1 = payload(o1), p2 = payload(o2);
        pass = !p1.empty() && p1 == p2;
        detail = pass ? "payloads byte-identical for workers 1 and 4"
                      : "payloads differ between worker counts";
    }
    report(12, "fixed-seed selftest payloads identical across worker counts", pass, t.seconds(),
           120.0, detail);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::printf("acceptance battery\n==================\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    criterion12(cli);
    std::printf("==================\n%s (%d failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILED",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
