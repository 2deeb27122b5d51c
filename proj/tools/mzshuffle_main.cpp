// mzshuffle: verify functional relations for multiple zeta functions, expand
// shuffle products symbolically, and emit convergence data.
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mzs/parallel.hpp"
#include "mzs/verifier.hpp"

using namespace mzs;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitResidual = 2;
constexpr int kExitEvalError = 3;

std::map<std::string, Complex> parseBindings(const std::string& text) {
    std::map<std::string, Complex> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const size_t eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("binding needs name=value: " + item);
        out[item.substr(0, eq)] = parseComplex(item.substr(eq + 1));
    }
    return out;
}

std::map<std::string, long long> parseIntBindings(const std::string& text) {
    std::map<std::string, long long> out;
    for (const auto& [k, v] : parseBindings(text)) {
        if (std::abs(v.imag()) > 1e-12 || std::abs(v.real() - std::round(v.real())) > 1e-12)
            throw ParseError("integer binding expected for " + k);
        out[k] = std::llround(v.real());
    }
    return out;
}

std::vector<std::string> splitNames(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void writeFile(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << content;
}

std::string readFile(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// flat key=value config file; CLI flags win over file values
std::map<std::string, std::string> loadConfigFile(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::istringstream in(readFile(path));
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const size_t a = s.find_first_not_of(" \t\r");
            const size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

struct CommonOpts {
    std::string configFile;
    int workers = 1;
    std::uint64_t seed = 20240927;
    double tol = 0.0;        // 0: keep catalog default
    long long cutoff = 0;    // 0: keep catalog default
    std::string out, csv, pointsFile;
    bool seedSet = false, workersSet = false;
};

void applyConfigFile(CommonOpts& o, const CLI::App& app) {
    if (o.configFile.empty()) return;
    auto kv = loadConfigFile(o.configFile);
    auto notOnCli = [&](const std::string& flag) { return app.count("--" + flag) == 0; };
    if (kv.count("workers") && notOnCli("workers")) o.workers = std::stoi(kv["workers"]);
    if (kv.count("seed") && notOnCli("seed")) o.seed = std::stoull(kv["seed"]);
    if (kv.count("tol") && notOnCli("tol")) o.tol = std::stod(kv["tol"]);
    if (kv.count("cutoff") && notOnCli("cutoff")) o.cutoff = std::stoll(kv["cutoff"]);
    if (kv.count("out") && notOnCli("out")) o.out = kv["out"];
    if (kv.count("csv") && notOnCli("csv")) o.csv = kv["csv"];
    if (kv.count("points") && notOnCli("points")) o.pointsFile = kv["points"];
}

Json effectiveConfig(const std::string& command, const IdentitySpec& spec,
                     const CommonOpts& opts) {
    Json cfg;
    cfg["command"] = command;
    cfg["identity"] = spec.id;
    cfg["seed"] = spec.seed;
    cfg["tolerance"] = spec.tolerance;
    cfg["index_cutoffs"] = spec.plan.index_cutoffs;
    cfg["lattice_cutoff"] = spec.plan.lattice.cutoffFor(2);
    cfg["points_file"] = opts.pointsFile;
    cfg["n_points"] = spec.points.size();
    return cfg;
}

int reportExit(const VerificationReport& rep) {
    if (rep.evalError) return kExitEvalError;
    return rep.pass ? kExitOk : kExitResidual;
}

void printReportSummary(const VerificationReport& rep) {
    int passCount = 0;
    for (const auto& p : rep.points) passCount += p.pass ? 1 : 0;
    std::cout << rep.id << ": " << passCount << "/" << rep.points.size() << " points pass";
    double worst = 0.0;
    for (const auto& p : rep.points) worst = std::max(worst, p.residual);
    std::cout << ", worst residual " << worst << " (tol " << rep.tolerance << ", "
              << static_cast<long>(rep.total_ms) << " ms)\n";
    for (const auto& p : rep.points)
        if (p.error) {
            std::cout << "  [error] ";
            for (const auto& [k, v] : p.point) std::cout << k << "=" << formatComplex(v) << " ";
            std::cout << ": " << p.message << "\n";
        }
}

IdentitySpec buildSpec(const std::string& id, const CommonOpts& opts,
                       const std::map<std::string, Complex>& inlinePoint) {
    IdentitySpec spec;
    if (!opts.pointsFile.empty()) {
        spec = specFromJson(readFile(opts.pointsFile));
        if (!id.empty() && spec.id != id)
            throw Error("points file is for '" + spec.id + "', not '" + id + "'");
    } else {
        spec = defaultSpec(id);
    }
    if (!inlinePoint.empty()) spec.points = {inlinePoint};
    if (opts.seedSet) spec.seed = opts.seed;
    if (opts.tol > 0.0) spec.tolerance = opts.tol;
    if (opts.cutoff > 0) {
        if (spec.plan.index_cutoffs.empty())
            spec.plan.index_cutoffs = {opts.cutoff};
        else
            spec.plan.index_cutoffs[0] = opts.cutoff;
    }
    return spec;
}

int cmdVerify(const std::string& id, const CommonOpts& opts,
              const std::map<std::string, Complex>& inlinePoint) {
    std::vector<std::string> ids;
    if (id == "all")
        ids = identityIds();
    else
        ids = {id};
    bool anyFail = false, anyError = false;
    Json combined = Json::array();
    std::string csvAll;
    for (const auto& one : ids) {
        IdentitySpec spec = buildSpec(one, opts, inlinePoint);
        VerificationReport rep = checkIdentity(spec);
        printReportSummary(rep);
        anyFail = anyFail || !rep.pass;
        anyError = anyError || rep.evalError;
        combined.push_back(
            Json::parse(reportToJson(rep, effectiveConfig("verify", spec, opts).dump())));
        if (!opts.csv.empty()) csvAll += reportToCsv(rep);
    }
    if (!opts.out.empty()) {
        if (combined.size() == 1)
            writeFile(opts.out, combined[0].dump(1) + "\n");
        else
            writeFile(opts.out, combined.dump(1) + "\n");
        std::cout << "report written to " << opts.out << "\n";
    }
    if (!opts.csv.empty()) {
        writeFile(opts.csv, csvAll);
        std::cout << "csv written to " << opts.csv << "\n";
    }
    if (anyError) return kExitEvalError;
    return anyFail ? kExitResidual : kExitOk;
}

int cmdExpand(const std::string& left, const std::string& right, const std::string& integer,
              const std::string& realizeAt, const CommonOpts& opts) {
    auto leftNames = splitNames(left);
    auto rightNames = splitNames(right);
    Expansion e = expandShuffle(leftNames, rightNames);
    std::cout << "product ";
    std::cout << "Z" << leftNames.size() << "(";
    for (size_t i = 0; i < leftNames.size(); ++i) std::cout << (i ? "," : "") << leftNames[i];
    std::cout << ") * Z" << rightNames.size() << "(";
    for (size_t i = 0; i < rightNames.size(); ++i) std::cout << (i ? "," : "") << rightNames[i];
    std::cout << ") expands into " << e.terms.size() << " families:\n";
    std::cout << renderExpansion(e);
    if (!integer.empty()) {
        auto fin = integerSpecialize(e, parseIntBindings(integer));
        std::cout << "\ninteger specialization (" << integer << "), all ranges finite:\n";
        std::cout << renderExpansion(fin);
        TruncationPlan plan;
        if (opts.cutoff > 0) plan.lattice.outer_cutoffs = {opts.cutoff};
        if (opts.tol > 0) plan.lattice.tol = opts.tol;
        auto v = realize(fin, {}, plan);
        std::cout << "value = " << formatComplex(v.value) << "  (err_est " << v.err_est << ")\n";
        if (!opts.out.empty()) writeFile(opts.out, expansionToJson(fin) + "\n");
    } else if (!opts.out.empty()) {
        writeFile(opts.out, expansionToJson(e) + "\n");
        std::cout << "expansion written to " << opts.out << "\n";
    }
    if (!realizeAt.empty()) {
        auto bindings = parseBindings(realizeAt);
        TruncationPlan plan;
        if (opts.cutoff > 0) plan.index_cutoffs = {opts.cutoff};
        if (opts.tol > 0) plan.tol = opts.tol;
        auto v = realize(e, bindings, plan);
        std::cout << "\nrealized value at " << realizeAt << " = " << formatComplex(v.value)
                  << "  (err_est " << v.err_est << ")\n";
        std::vector<Complex> lv, rv;
        for (const auto& n : leftNames) lv.push_back(bindings.at(n));
        for (const auto& n : rightNames) rv.push_back(bindings.at(n));
        const Complex prod = mzfEval(MzfIndex(lv)).value * mzfEval(MzfIndex(rv)).value;
        std::cout << "product of factors      = " << formatComplex(prod) << "\n";
        std::cout << "difference              = " << std::abs(v.value - prod) << "\n";
    }
    return kExitOk;
}

int cmdPlotData(const std::string& id, const std::string& cutoffList, const CommonOpts& opts,
                const std::map<std::string, Complex>& inlinePoint) {
    IdentitySpec spec = buildSpec(id, opts, inlinePoint);
    if (spec.points.empty()) throw Error("plot-data needs at least one point");
    spec.points.resize(1);
    std::vector<long long> cutoffs;
    for (const auto& c : splitNames(cutoffList)) cutoffs.push_back(std::stoll(c));
    std::ostringstream csv;
    csv << "identity,point,K,residual,err_est,wall_ms\n";
    csv.precision(17);
    bool anyError = false;
    for (long long K : cutoffs) {
        IdentitySpec one = spec;
        if (one.plan.index_cutoffs.empty())
            one.plan.index_cutoffs = {K};
        else
            one.plan.index_cutoffs[0] = K;
        VerificationReport rep = checkIdentity(one);
        const auto& p = rep.points[0];
        anyError = anyError || p.error;
        std::string ptxt;
        for (const auto& [k, v] : p.point) ptxt += k + "=" + formatComplex(v) + ";";
        csv << rep.id << ",\"" << ptxt << "\"," << K << "," << p.residual << "," << p.err_est
            << "," << p.wall_ms << "\n";
        std::cout << "K=" << K << "  residual=" << p.residual << "\n";
    }
    if (!opts.out.empty()) {
        writeFile(opts.out, csv.str());
        std::cout << "curve written to " << opts.out << "\n";
    }
    return anyError ? kExitEvalError : kExitOk;
}

// reduced catalogs so the whole battery runs in seconds
IdentitySpec selftestSpec(const std::string& id, std::uint64_t seed) {
    IdentitySpec spec = defaultSpec(id);
    spec.seed = seed;
    if (id == "connection-formula") {
        spec.points.resize(12);
    } else if (id == "ipfd-pointwise") {
        spec.points.resize(3);
        spec.plan.index_cutoffs = {200};
        spec.tolerance = 1e-7;
    } else if (id == "shuffle-double" || id == "double-shuffle-double") {
        spec.points = {{{"s", Complex(2.5, 0)}, {"t", Complex(3.5, 0)}}};
        spec.plan.index_cutoffs = {192};
        spec.plan.lattice.outer_cutoffs = {512};
        spec.tolerance = 1e-5;
    } else if (id == "shuffle-general" || id == "double-shuffle-general") {
        spec.points = {{{"s1", Complex(1.5, 0)}, {"s2", Complex(2.5, 0)}, {"t", Complex(2.25, 0)}}};
        spec.plan.index_cutoffs = {96, 64};
        spec.plan.lattice.outer_cutoffs = {200};
        spec.tolerance = 1e-4;
    } else if (id == "stuffle-general") {
        spec.points.resize(3);
    } else if (id == "kmt-21") {
        spec.plan.lattice.outer_cutoffs = {200};
        spec.tolerance = 1e-4;
    } else if (id == "kmt-31") {
        spec.plan.lattice.outer_cutoffs = {64};
        spec.tolerance = 1e-3;
    } else if (id == "sum-formula") {
        spec.points = {{{"s", Complex(2.5, 0)}}};
        spec.plan.index_cutoffs = {384};
        spec.plan.lattice.outer_cutoffs = {768};
        spec.tolerance = 1e-5;
    }
    return spec;
}

int cmdSelftest(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    Json payload;
    payload["seed"] = opts.seed;
    payload["reports"] = Json::array();
    bool allPass = true, anyError = false;
    std::cout << "self test (seed " << opts.seed << ", workers " << workerCount() << ")\n";
    std::cout << "-------------------------------------------------------------\n";
    for (const auto& id : identityIds()) {
        IdentitySpec spec = selftestSpec(id, opts.seed);
        VerificationReport rep;
        if (id == "pfd-classical")
            rep = checkClassicalPFD(5, 5, 10, opts.seed);
        else
            rep = checkIdentity(spec);
        double worst = 0.0;
        for (const auto& p : rep.points) worst = std::max(worst, p.residual);
        std::printf("  %-24s %4zu pts  worst %.3e  %s (%ld ms)\n", id.c_str(),
                    rep.points.size(), worst, rep.pass ? "pass" : "FAIL",
                    static_cast<long>(rep.total_ms));
        allPass = allPass && rep.pass;
        anyError = anyError || rep.evalError;
        Json rj = Json::parse(reportToJson(rep, "{}"));
        payload["reports"].push_back(rj["payload"]);
    }
    payload["verdict"] = anyError ? "error" : (allPass ? "pass" : "fail");
    std::cout << "-------------------------------------------------------------\n";
    std::cout << "verdict: " << payload["verdict"].get<std::string>() << "\n";
    if (!opts.out.empty()) {
        Json doc;
        doc["format"] = "mzs-selftest-v1";
        doc["payload"] = payload;
        Json timing;
        timing["total_ms"] = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
        timing["workers"] = workerCount();
        doc["timing"] = timing;
        writeFile(opts.out, doc.dump(1) + "\n");
        std::cout << "report written to " << opts.out << "\n";
    }
    if (anyError) return kExitEvalError;
    return allPass ? kExitOk : kExitResidual;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional relations for multiple zeta functions: verification and expansion"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string id, left, right, integer, realizeAt, cutoffList = "25,50,100,200,400";
    std::map<std::string, std::string> varFlags;
    const std::vector<std::string> varNames = {"s",  "t",  "x",  "y",  "s1", "s2",
                                               "s3", "t1", "t2", "b",  "c",  "d"};

    auto addCommon = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.configFile, "flat key=value config file");
        cmd->add_option("--workers", opts.workers, "worker count (>=1)");
        cmd->add_option("--seed", opts.seed, "seed for random catalogs");
        cmd->add_option("--tol", opts.tol, "tolerance override");
        cmd->add_option("--cutoff", opts.cutoff, "outer index cutoff override");
        cmd->add_option("--out", opts.out, "output file (JSON report / expansion)");
    };

    CLI::App* verify = app.add_subcommand("verify", "check one identity (or 'all')");
    verify->add_option("--id", id, "identity id")->required();
    verify->add_option("--points", opts.pointsFile, "points catalog JSON");
    verify->add_option("--csv", opts.csv, "also write a flat CSV");
    for (const auto& v : varNames)
        verify->add_option("--" + v, varFlags[v], "inline value for variable " + v);
    addCommon(verify);

    CLI::App* expand = app.add_subcommand("expand", "symbolic shuffle expansion");
    expand->add_option("--left", left, "left index names, comma separated")->required();
    expand->add_option("--right", right, "right index names")->required();
    expand->add_option("--integer", integer, "integer bindings a=2,b=3 for specialization");
    expand->add_option("--realize", realizeAt, "complex bindings for numeric realization");
    addCommon(expand);

    CLI::App* plot = app.add_subcommand("plot-data", "residual vs truncation curves");
    plot->add_option("--id", id, "identity id")->required();
    plot->add_option("--points", opts.pointsFile, "points catalog JSON");
    plot->add_option("--cutoffs", cutoffList, "comma separated K values");
    for (const auto& v : varNames)
        plot->add_option("--" + v, varFlags[v], "inline value for variable " + v);
    addCommon(plot);

    CLI::App* selftest = app.add_subcommand("selftest", "run the reduced verification battery");
    addCommon(selftest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        applyConfigFile(opts, *active);
        opts.seedSet = active->count("--seed") > 0;
        setWorkerCount(opts.workers);
        std::map<std::string, Complex> inlinePoint;
        for (const auto& [k, v] : varFlags)
            if (!v.empty()) inlinePoint[k] = parseComplex(v);
        if (verify->parsed()) return cmdVerify(id, opts, inlinePoint);
        if (expand->parsed()) return cmdExpand(left, right, integer, realizeAt, opts);
        if (plot->parsed()) return cmdPlotData(id, cutoffList, opts, inlinePoint);
        if (selftest->parsed()) return cmdSelftest(opts);
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DepthCapExceeded& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEvalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
