#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "crp/cli.hpp"

namespace {

int exitCodeFor(const crp::Error& error) {
    return error.kind() == crp::ErrorKind::IoError ? 2 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Container relocation workbench: instance generation, rule evolution and evaluation"};
    app.require_subcommand(1);

    // generate
    crp::cli::GenerateOptions generate;
    std::string generateFamily = "caserta", generatePlan = "canonical", generateOut;
    auto* genCmd = app.add_subcommand("generate", "Write a dataset of .crp instances plus manifest");
    genCmd->add_option("--family", generateFamily, "caserta|zhu")->capture_default_str();
    genCmd->add_option("--count", generate.count, "instance count (default 840 caserta, 1000 zhu)");
    genCmd->add_option("--seed", generate.seed, "base seed")->capture_default_str();
    genCmd->add_option("--out", generateOut, "output directory")->required();
    genCmd->add_option("--plan", generatePlan, "canonical|uniform class mix (caserta)")->capture_default_str();
    genCmd->add_option("--stacks", generate.stacks, "fixed stack count (overrides the plan)");
    genCmd->add_option("--height", generate.initialHeight, "fixed initial height (caserta)");
    genCmd->add_option("--containers", generate.containers, "fixed container count (zhu)");
    genCmd->add_option("--tiers", generate.maxHeight, "fixed max height");

    // evolve
    crp::cli::EvolveOptions evolve;
    std::string evolveTrain, evolveValidation, evolveTest, evolveOut;
    std::string evolveScheme = "RE", evolveObjective = "relocations", evolveTerminals = "all";
    int evolvePfs = 1;
    auto* evoCmd = app.add_subcommand("evolve", "Evolve priority functions with GP");
    evoCmd->add_option("--train", evolveTrain, "training dataset directory")->required();
    evoCmd->add_option("--validation", evolveValidation, "validation dataset directory");
    evoCmd->add_option("--test", evolveTest, "test dataset directory (scored into summary.csv)");
    evoCmd->add_option("--out", evolveOut, "output directory")->required();
    evoCmd->add_option("--scheme", evolveScheme, "RE|REN|UN|UNC|UNT|UNP")->capture_default_str();
    evoCmd->add_option("--objective", evolveObjective, "relocations|craneSeconds")->capture_default_str();
    evoCmd->add_option("--pop", evolve.config.populationSize, "population size")->capture_default_str();
    evoCmd->add_option("--evals", evolve.config.maxEvaluations, "fitness evaluation budget")->capture_default_str();
    evoCmd->add_option("--depth", evolve.config.maxDepth, "tree depth cap")->capture_default_str();
    evoCmd->add_option("--mut-prob", evolve.config.mutationProbability,
                       "mutation probability (default 0.3 restricted, 0.1 unrestricted)");
    evoCmd->add_option("--tournament", evolve.config.tournamentSize, "tournament size")->capture_default_str();
    evoCmd->add_option("--seed", evolve.config.seed, "seed (repeats use seed+i)")->capture_default_str();
    evoCmd->add_option("--pfs", evolvePfs, "expressions per individual (UNT/UNP need 2)")->capture_default_str();
    evoCmd->add_option("--terminals", evolveTerminals, "all|RE-R|UN-R|comma list")->capture_default_str();
    evoCmd->add_option("--pair-cap", evolve.config.pairMoveCap, "UNC/UNT unrestricted moves per retrieval (-1 = S)");
    evoCmd->add_option("--checkpoint", evolve.config.checkpointInterval, "convergence log interval")
        ->capture_default_str();
    evoCmd->add_option("--jobs", evolve.config.jobs, "parallel fitness workers")->capture_default_str();
    evoCmd->add_option("--repeats", evolve.repeats, "independent runs, seeds seed..seed+R-1")->capture_default_str();
    evoCmd->add_flag("--nsga2", evolve.useNsga2, "bi-objective NSGA-II mode");
    evoCmd->add_flag("--generational", evolve.config.generational, "generational loop instead of steady state");

    // evaluate
    crp::cli::EvaluateOptions evaluate;
    std::string evalRule, evalBaseline, evalDataset, evalOut, evalMoveLogs;
    bool evalAppend = false;
    auto* evalCmd = app.add_subcommand("evaluate", "Score one rule file or baseline on a dataset");
    evalCmd->add_option("--rule", evalRule, "rule file");
    evalCmd->add_option("--baseline", evalBaseline, "TLP|RI|MinMax");
    evalCmd->add_option("--dataset", evalDataset, "dataset directory")->required();
    evalCmd->add_option("--out", evalOut, "output CSV (stdout when omitted)");
    evalCmd->add_flag("--append", evalAppend, "append to the output CSV");
    evalCmd->add_option("--jobs", evaluate.jobs, "parallel workers")->capture_default_str();
    evalCmd->add_option("--move-logs", evalMoveLogs, "directory for per-instance move logs");
    evalCmd->add_option("--pair-cap", evaluate.pairMoveCap, "override UNC/UNT pair move cap");

    // compare
    crp::cli::CompareOptions compare;
    std::vector<std::string> compareRules, compareBaselines;
    std::string compareDataset, compareOut;
    auto* cmpCmd = app.add_subcommand("compare", "Score many rules and baselines on one dataset");
    cmpCmd->add_option("--rules", compareRules, "rule files");
    cmpCmd->add_option("--baselines", compareBaselines, "baseline names");
    cmpCmd->add_option("--dataset", compareDataset, "dataset directory")->required();
    cmpCmd->add_option("--out", compareOut, "output CSV (stdout when omitted)");
    cmpCmd->add_option("--jobs", compare.jobs, "parallel workers")->capture_default_str();

    // stats
    crp::cli::StatsOptions statsOptions;
    std::string statsA, statsB, statsOut;
    auto* statsCmd = app.add_subcommand("stats", "Mann-Whitney U comparison of two result CSVs");
    statsCmd->add_option("a", statsA, "first results CSV")->required();
    statsCmd->add_option("b", statsB, "second results CSV")->required();
    statsCmd->add_option("--column", statsOptions.column, "numeric column to compare")->capture_default_str();
    statsCmd->add_option("--out", statsOut, "output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (genCmd->parsed()) {
            generate.family = crp::instances::familyFromName(generateFamily);
            if (generatePlan == "canonical")
                generate.plan = crp::instances::CasertaPlan::Canonical;
            else if (generatePlan == "uniform")
                generate.plan = crp::instances::CasertaPlan::Uniform;
            else
                throw crp::Error(crp::ErrorKind::ConfigError, "unknown plan '" + generatePlan + "'");
            generate.outDir = generateOut;
            crp::cli::cmdGenerate(generate);
        } else if (evoCmd->parsed()) {
            evolve.config.scheme = crp::schemes::schemeFromName(evolveScheme);
            evolve.config.objective = crp::schemes::objectiveFromName(evolveObjective);
            evolve.config.terminalSet = crp::rules::terminalSetFromName(evolveTerminals);
            evolve.config.expressionsPerIndividual = evolvePfs;
            evolve.trainDir = evolveTrain;
            if (!evolveValidation.empty())
                evolve.validationDir = evolveValidation;
            if (!evolveTest.empty())
                evolve.testDir = evolveTest;
            evolve.outDir = evolveOut;
            crp::cli::cmdEvolve(evolve);
        } else if (evalCmd->parsed()) {
            if (!evalRule.empty())
                evaluate.ruleFile = evalRule;
            if (!evalBaseline.empty()) {
                const auto baseline = crp::schemes::baselineFromName(evalBaseline);
                if (!baseline)
                    throw crp::Error(crp::ErrorKind::ConfigError, "unknown baseline '" + evalBaseline + "'");
                evaluate.baseline = baseline;
            }
            evaluate.datasetDir = evalDataset;
            if (!evalOut.empty())
                evaluate.outCsv = evalOut;
            evaluate.append = evalAppend;
            if (!evalMoveLogs.empty())
                evaluate.moveLogDir = evalMoveLogs;
            crp::cli::cmdEvaluate(evaluate);
        } else if (cmpCmd->parsed()) {
            for (const auto& r : compareRules)
                compare.ruleFiles.emplace_back(r);
            for (const auto& b : compareBaselines) {
                const auto baseline = crp::schemes::baselineFromName(b);
                if (!baseline)
                    throw crp::Error(crp::ErrorKind::ConfigError, "unknown baseline '" + b + "'");
                compare.baselines.push_back(*baseline);
            }
            compare.datasetDir = compareDataset;
            if (!compareOut.empty())
                compare.outCsv = compareOut;
            crp::cli::cmdCompare(compare);
        } else if (statsCmd->parsed()) {
            statsOptions.csvA = statsA;
            statsOptions.csvB = statsB;
            if (!statsOut.empty())
                statsOptions.outCsv = statsOut;
            crp::cli::cmdStats(statsOptions);
        }
    } catch (const crp::Error& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return exitCodeFor(error);
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 1;
    }
    return 0;
}
