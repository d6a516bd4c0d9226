#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "crp/cli.hpp"

using namespace crp;
using namespace crp::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kBase = fs::temp_directory_path() / "crp_test_cli";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::map<std::string, std::string> dirContents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            out[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    return out;
}

struct Workspace {
    Workspace() {
        fs::remove_all(kBase);
        fs::create_directories(kBase);
    }
    ~Workspace() { fs::remove_all(kBase); }
};

} // namespace

TEST_CASE("rule files round-trip through their text form") {
    schemes::RelocationRule rule;
    rule.scheme = schemes::Scheme::UNT;
    rule.expressions = {rules::parseRule("(add SH EMP)"), rules::parseRule("(div RI MIN)")};
    const std::string text = ruleFileText(rule);
    CHECK(text == "# scheme=UNT pfs=2\n(add SH EMP)\n(div RI MIN)\n");
    const auto back = parseRuleFileText(text);
    CHECK(back.scheme == rule.scheme);
    CHECK(back.expressions == rule.expressions);

    CHECK_THROWS_AS(parseRuleFileText("(add SH EMP)\n"), Error);                     // missing header
    CHECK_THROWS_AS(parseRuleFileText("# scheme=RE pfs=2\n(add SH EMP)\n"), Error);  // pfs mismatch
    CHECK_THROWS_AS(parseRuleFileText("# scheme=XX pfs=1\nSH\n"), Error);            // unknown scheme
    CHECK_THROWS_AS(parseRuleFileText("# scheme=UNT pfs=1\nSH\n"), Error);           // UNT needs 2
}

TEST_CASE("generate is byte-identical per seed and differs across seeds") {
    Workspace ws;
    GenerateOptions options;
    options.count = 10;
    options.seed = 9;
    options.outDir = kBase / "g1";
    cmdGenerate(options);
    options.outDir = kBase / "g2";
    cmdGenerate(options);
    CHECK(dirContents(kBase / "g1") == dirContents(kBase / "g2"));

    options.seed = 10;
    options.outDir = kBase / "g3";
    cmdGenerate(options);
    CHECK_FALSE(dirContents(kBase / "g1") == dirContents(kBase / "g3"));
}

TEST_CASE("evaluate totals, determinism and the empty dataset") {
    Workspace ws;
    GenerateOptions gen;
    gen.count = 8;
    gen.seed = 3;
    gen.outDir = kBase / "data";
    cmdGenerate(gen);

    EvaluateOptions eval;
    eval.baseline = schemes::Baseline::TLP;
    eval.datasetDir = kBase / "data";
    eval.outCsv = kBase / "a.csv";
    const EvalRow rowA = cmdEvaluate(eval);
    eval.outCsv = kBase / "b.csv";
    const EvalRow rowB = cmdEvaluate(eval);
    CHECK(rowA.relocations == rowB.relocations);
    CHECK(rowA.failures == 0);
    CHECK(slurp(kBase / "a.csv") == slurp(kBase / "b.csv"));
    CHECK(slurp(kBase / "a.csv").rfind("rule,scheme,dataset,relocations,craneSeconds,failures\n", 0) == 0);

    // empty dataset: zero totals
    fs::create_directories(kBase / "none");
    eval.datasetDir = kBase / "none";
    eval.outCsv.reset();
    const EvalRow empty = cmdEvaluate(eval);
    CHECK(empty.relocations == 0);
    CHECK(empty.craneSeconds == 0.0);

    // needs exactly one of --rule/--baseline
    EvaluateOptions bad;
    bad.datasetDir = kBase / "data";
    CHECK_THROWS_AS(cmdEvaluate(bad), Error);
}

TEST_CASE("evaluate writes move logs on request") {
    Workspace ws;
    GenerateOptions gen;
    gen.count = 2;
    gen.seed = 4;
    gen.outDir = kBase / "data";
    cmdGenerate(gen);

    EvaluateOptions eval;
    eval.baseline = schemes::Baseline::RI;
    eval.datasetDir = kBase / "data";
    eval.outCsv = kBase / "out.csv";
    eval.moveLogDir = kBase / "logs";
    cmdEvaluate(eval);
    CHECK(fs::exists(kBase / "logs" / "caserta_0.crp.moves.csv"));
    const std::string log = slurp(kBase / "logs" / "caserta_0.crp.moves.csv");
    CHECK(log.rfind("step,kind,origin,destination,container,seconds\n", 0) == 0);
}

TEST_CASE("compare covers many rules in one CSV") {
    Workspace ws;
    GenerateOptions gen;
    gen.count = 6;
    gen.seed = 5;
    gen.outDir = kBase / "data";
    cmdGenerate(gen);

    schemes::RelocationRule rule;
    rule.scheme = schemes::Scheme::RE;
    rule.expressions.push_back(rules::parseRule("RI"));
    saveRuleFile(kBase / "ri.rule", rule);

    CompareOptions compare;
    compare.baselines = {schemes::Baseline::TLP, schemes::Baseline::MinMax};
    compare.ruleFiles = {kBase / "ri.rule"};
    compare.datasetDir = kBase / "data";
    compare.outCsv = kBase / "cmp.csv";
    const auto rows = cmdCompare(compare);
    CHECK(rows.size() == 3);
    CHECK(rows[0].rule == "TLP");
    CHECK(rows[2].rule == "ri");
    const std::string csv = slurp(kBase / "cmp.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4); // header + 3 rows
}

TEST_CASE("evolve writes rule, convergence and metadata artefacts") {
    Workspace ws;
    GenerateOptions gen;
    gen.count = 6;
    gen.seed = 6;
    gen.stacks = 3;
    gen.initialHeight = 3;
    gen.outDir = kBase / "train";
    cmdGenerate(gen);

    EvolveOptions evolve;
    evolve.trainDir = kBase / "train";
    evolve.outDir = kBase / "run";
    evolve.config.populationSize = 20;
    evolve.config.maxEvaluations = 100;
    evolve.config.checkpointInterval = 20;
    evolve.config.seed = 12;
    cmdEvolve(evolve);

    CHECK(fs::exists(kBase / "run" / "best.rule"));
    const auto rule = loadRuleFile(kBase / "run" / "best.rule");
    CHECK(rule.scheme == schemes::Scheme::RE);
    CHECK(rule.expressions.size() == 1);

    const std::string convergence = slurp(kBase / "run" / "convergence.csv");
    CHECK(convergence.rfind("evaluations,bestTrain,validation\n", 0) == 0);
    CHECK(convergence.find("\n100,") != std::string::npos);
    CHECK(fs::exists(kBase / "run" / "meta.jsonl"));

    // reruns agree byte for byte on rule and convergence outputs
    evolve.outDir = kBase / "run2";
    cmdEvolve(evolve);
    CHECK(slurp(kBase / "run" / "best.rule") == slurp(kBase / "run2" / "best.rule"));
    CHECK(slurp(kBase / "run" / "convergence.csv") == slurp(kBase / "run2" / "convergence.csv"));
}

TEST_CASE("evolve repeats derive seeds and summarise") {
    Workspace ws;
    GenerateOptions gen;
    gen.count = 4;
    gen.seed = 66;
    gen.stacks = 3;
    gen.initialHeight = 2;
    gen.outDir = kBase / "train";
    cmdGenerate(gen);

    EvolveOptions evolve;
    evolve.trainDir = kBase / "train";
    evolve.testDir = kBase / "train"; // smoke: reuse as test set
    evolve.outDir = kBase / "multi";
    evolve.repeats = 3;
    evolve.config.populationSize = 10;
    evolve.config.maxEvaluations = 30;
    evolve.config.seed = 100;
    cmdEvolve(evolve);

    for (int r = 0; r < 3; ++r)
        CHECK(fs::exists(kBase / "multi" / ("run_" + std::to_string(r)) / "best.rule"));
    const std::string summary = slurp(kBase / "multi" / "summary.csv");
    CHECK(summary.rfind("run,seed,bestTrain,bestValidation,testRelocations,testCraneSeconds\n", 0) == 0);
    CHECK(summary.find("\n0,100,") != std::string::npos);
    CHECK(summary.find("\n2,102,") != std::string::npos);
    CHECK(fs::exists(kBase / "multi" / "summary_stats.csv"));
}

TEST_CASE("nsga2 mode emits a deduplicated front") {
    Workspace ws;
    GenerateOptions gen;
    gen.count = 4;
    gen.seed = 8;
    gen.stacks = 3;
    gen.initialHeight = 2;
    gen.outDir = kBase / "train";
    cmdGenerate(gen);

    EvolveOptions evolve;
    evolve.trainDir = kBase / "train";
    evolve.outDir = kBase / "pareto";
    evolve.useNsga2 = true;
    evolve.config.populationSize = 12;
    evolve.config.maxEvaluations = 60;
    evolve.config.seed = 5;
    cmdEvolve(evolve);

    CHECK(fs::exists(kBase / "pareto" / "front.csv"));
    CHECK(fs::exists(kBase / "pareto" / "front_0.rule"));
    const std::string front = slurp(kBase / "pareto" / "front.csv");
    CHECK(front.rfind("member,relocations,craneSeconds\n", 0) == 0);
}

TEST_CASE("stats command reads CSV columns and reports") {
    Workspace ws;
    {
        std::ofstream a(kBase / "a.csv", std::ios::binary), b(kBase / "b.csv", std::ios::binary);
        a << "relocations,other\n1,x\n2,x\n3,x\n";
        b << "relocations,other\n4,y\n5,y\n6,y\n";
    }
    StatsOptions options;
    options.csvA = kBase / "a.csv";
    options.csvB = kBase / "b.csv";
    options.outCsv = kBase / "mw.csv";
    const auto result = cmdStats(options);
    CHECK(result.u == 0.0);
    CHECK(std::abs(result.pValue - 0.1) < 1e-12);
    const std::string report = slurp(kBase / "mw.csv");
    CHECK(report.rfind("column,nA,nB,medianA,medianB,U,p,method\n", 0) == 0);
    CHECK(report.find("exact") != std::string::npos);

    options.column = "missing";
    CHECK_THROWS_AS(cmdStats(options), Error);

    // too few samples
    {
        std::ofstream a(kBase / "a.csv", std::ios::binary);
        a << "relocations\n1\n2\n";
    }
    options.column = "relocations";
    CHECK_THROWS_AS(cmdStats(options), Error);
}

TEST_CASE("readCsvColumn handles CRLF and rejects junk") {
    Workspace ws;
    {
        std::ofstream f(kBase / "x.csv", std::ios::binary);
        f << "a,b\r\n1,2\r\n3,4\r\n";
    }
    CHECK(readCsvColumn(kBase / "x.csv", "b") == std::vector<double>{2, 4});
    {
        std::ofstream f(kBase / "y.csv", std::ios::binary);
        f << "a\nnot_a_number\n";
    }
    CHECK_THROWS_AS(readCsvColumn(kBase / "y.csv", "a"), Error);
}
