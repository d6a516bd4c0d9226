#include "crp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace crp::cli {

namespace fs = std::filesystem;

std::string formatDouble(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string ruleFileText(const schemes::RelocationRule& rule) {
    std::string out = "# scheme=";
    out += schemes::schemeName(rule.scheme);
    out += " pfs=";
    out += std::to_string(rule.expressions.size());
    out += '\n';
    for (const auto& expr : rule.expressions) {
        out += rules::printRule(expr);
        out += '\n';
    }
    return out;
}

schemes::RelocationRule parseRuleFileText(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw Error(ErrorKind::ParseError, "rule file must start with '# scheme=<name> pfs=<n>'");

    schemes::RelocationRule rule;
    std::optional<int> pfs;
    std::istringstream header(line.substr(2));
    std::string token;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, "malformed rule header token '" + token + "'");
        const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "scheme")
            rule.scheme = schemes::schemeFromName(value);
        else if (key == "pfs")
            pfs = std::stoi(value);
        else
            throw Error(ErrorKind::ParseError, "unknown rule header key '" + key + "'");
    }
    if (!pfs || (*pfs != 1 && *pfs != 2))
        throw Error(ErrorKind::ParseError, "rule header needs pfs=1 or pfs=2");

    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        rule.expressions.push_back(rules::parseRule(line));
    }
    if (static_cast<int>(rule.expressions.size()) != *pfs)
        throw Error(ErrorKind::ParseError, "rule file declares pfs=" + std::to_string(*pfs) + " but lists " +
                                               std::to_string(rule.expressions.size()) + " expressions");
    rule.validate();
    return rule;
}

schemes::RelocationRule loadRuleFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open rule file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseRuleFileText(buf.str());
}

void saveRuleFile(const fs::path& path, const schemes::RelocationRule& rule) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write rule file " + path.string());
    out << ruleFileText(rule);
}

void cmdGenerate(const GenerateOptions& options) {
    instances::DatasetOptions data;
    data.family = options.family;
    data.count = options.count > 0 ? options.count : (options.family == instances::Family::Caserta ? 840 : 1000);
    data.seed = options.seed;
    data.plan = options.plan;
    data.stacks = options.stacks;
    data.initialHeight = options.initialHeight;
    data.containers = options.containers;
    data.maxHeight = options.maxHeight;
    instances::generateDataset(data, options.outDir);
}

namespace {

std::vector<Yard> yardsOf(const std::vector<instances::LoadedInstance>& dataset) {
    std::vector<Yard> yards;
    yards.reserve(dataset.size());
    for (const auto& instance : dataset)
        yards.push_back(instance.yard);
    return yards;
}

nlohmann::json configJson(const gp::GpConfig& config) {
    nlohmann::json terminals = nlohmann::json::array();
    for (auto t : config.terminalSet)
        terminals.push_back(std::string(rules::terminalName(t)));
    nlohmann::json crossovers = nlohmann::json::array();
    for (auto op : config.crossoverOperators)
        crossovers.push_back(gp::crossoverName(op));
    nlohmann::json mutations = nlohmann::json::array();
    for (auto op : config.mutationOperators)
        mutations.push_back(gp::mutationName(op));
    return {{"populationSize", config.populationSize},
            {"maxDepth", config.maxDepth},
            {"mutationProbability", config.resolvedMutationProbability()},
            {"maxEvaluations", config.maxEvaluations},
            {"scheme", schemes::schemeName(config.scheme)},
            {"objective", schemes::objectiveName(config.objective)},
            {"terminals", terminals},
            {"crossoverOperators", crossovers},
            {"mutationOperators", mutations},
            {"tournamentSize", config.tournamentSize},
            {"seed", config.seed},
            {"expressionsPerIndividual", config.expressionsPerIndividual},
            {"pairMoveCap", config.pairMoveCap},
            {"checkpointInterval", config.checkpointInterval},
            {"jobs", config.jobs},
            {"generational", config.generational},
            {"rng", "splitmix64+mt19937_64"}};
}

void writeConvergenceCsv(const fs::path& path, const std::vector<gp::CheckpointRow>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << "evaluations,bestTrain,validation\n";
    for (const auto& row : log) {
        out << row.evaluations << ',' << formatDouble(row.bestTrain) << ',';
        if (row.validation)
            out << formatDouble(*row.validation);
        out << '\n';
    }
}

struct RunArtifacts {
    double bestTrain = 0.0;
    std::optional<double> bestValidation;
    std::optional<std::pair<double, double>> testTotals; // (relocations, craneSeconds)
};

RunArtifacts runSingleEvolve(const EvolveOptions& options, const gp::GpConfig& config, const fs::path& outDir,
                             const std::vector<Yard>& train, const std::vector<Yard>* validation,
                             const std::vector<Yard>* test) {
    fs::create_directories(outDir);
    const auto started = std::chrono::steady_clock::now();
    RunArtifacts artifacts;
    nlohmann::json meta{{"config", configJson(config)}, {"seed", config.seed}};

    if (options.useNsga2) {
        auto front = gp::nsga2(config, train);
        std::vector<std::pair<std::pair<double, double>, std::string>> members;
        members.reserve(front.size());
        for (const auto& individual : front)
            members.emplace_back(individual.objectives, ruleFileText(config.ruleFor(individual)));
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());

        std::ofstream frontCsv(outDir / "front.csv", std::ios::binary);
        if (!frontCsv)
            throw Error(ErrorKind::IoError, "cannot write front.csv");
        frontCsv << "member,relocations,craneSeconds\n";
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::ofstream ruleOut(outDir / ("front_" + std::to_string(i) + ".rule"), std::ios::binary);
            ruleOut << members[i].second;
            frontCsv << i << ',' << formatDouble(members[i].first.first) << ','
                     << formatDouble(members[i].first.second) << '\n';
        }
        artifacts.bestTrain = members.empty() ? 0.0 : members.front().first.first;
        meta["frontSize"] = members.size();
    } else {
        auto result = gp::evolve(config, train, validation);
        saveRuleFile(outDir / "best.rule", config.ruleFor(result.bestTrain));
        if (result.bestValidation)
            saveRuleFile(outDir / "best_validation.rule", config.ruleFor(*result.bestValidation));
        writeConvergenceCsv(outDir / "convergence.csv", result.log);
        artifacts.bestTrain = result.bestTrain.fitness;
        if (result.bestValidation)
            artifacts.bestValidation = result.bestValidation->fitness;
        meta["evaluations"] = result.evaluations;
        meta["bestTrainFitness"] = result.bestTrain.fitness;

        if (test) {
            const auto totals = gp::evaluateRule(config.ruleFor(result.bestTrain), *test, config.jobs, config.time);
            artifacts.testTotals = totals;
        }
    }

    meta["wallSeconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream metaOut(outDir / "meta.jsonl", std::ios::binary);
    metaOut << meta.dump() << '\n';
    return artifacts;
}

} // namespace

void cmdEvolve(const EvolveOptions& options) {
    gp::GpConfig config = options.config;
    config.validate();
    if (options.repeats < 1)
        throw Error(ErrorKind::ConfigError, "repeats must be positive");

    const auto train = yardsOf(instances::loadDataset(options.trainDir));
    if (train.empty())
        throw Error(ErrorKind::ConfigError, "training dataset is empty");
    std::vector<Yard> validation, test;
    if (options.validationDir)
        validation = yardsOf(instances::loadDataset(*options.validationDir));
    if (options.testDir)
        test = yardsOf(instances::loadDataset(*options.testDir));

    fs::create_directories(options.outDir);
    if (options.repeats == 1) {
        runSingleEvolve(options, config, options.outDir, train,
                        validation.empty() ? nullptr : &validation, test.empty() ? nullptr : &test);
        return;
    }

    std::vector<RunArtifacts> runs;
    for (int r = 0; r < options.repeats; ++r) {
        gp::GpConfig runConfig = config;
        runConfig.seed = config.seed + static_cast<std::uint64_t>(r);
        runs.push_back(runSingleEvolve(options, runConfig, options.outDir / ("run_" + std::to_string(r)), train,
                                       validation.empty() ? nullptr : &validation,
                                       test.empty() ? nullptr : &test));
    }

    std::ofstream summary(options.outDir / "summary.csv", std::ios::binary);
    if (!summary)
        throw Error(ErrorKind::IoError, "cannot write summary.csv");
    summary << "run,seed,bestTrain,bestValidation,testRelocations,testCraneSeconds\n";
    std::vector<double> trainScores;
    for (int r = 0; r < options.repeats; ++r) {
        const auto& run = runs[r];
        summary << r << ',' << (config.seed + static_cast<std::uint64_t>(r)) << ','
                << formatDouble(run.bestTrain) << ',';
        if (run.bestValidation)
            summary << formatDouble(*run.bestValidation);
        summary << ',';
        if (run.testTotals)
            summary << formatDouble(run.testTotals->first) << ',' << formatDouble(run.testTotals->second);
        else
            summary << ',';
        summary << '\n';
        trainScores.push_back(run.bestTrain);
    }

    std::sort(trainScores.begin(), trainScores.end());
    std::ofstream statsOut(options.outDir / "summary_stats.csv", std::ios::binary);
    statsOut << "metric,min,median,max\n";
    statsOut << "bestTrain," << formatDouble(trainScores.front()) << ','
             << formatDouble(stats::median(trainScores)) << ',' << formatDouble(trainScores.back()) << '\n';
}

EvalRow evaluateOnDataset(const schemes::RelocationRule& rule, const std::string& ruleName,
                          const std::vector<instances::LoadedInstance>& dataset, const std::string& datasetName,
                          int jobs, const std::optional<fs::path>& moveLogDir, const TimeModel& time) {
    rule.validate();
    const std::size_t n = dataset.size();
    std::vector<std::pair<long long, double>> results(n, {0, 0.0});
    std::vector<char> failed(n, 0);
    const bool recordMoves = moveLogDir.has_value();

    auto runRange = [&](std::size_t begin, std::size_t end) {
        schemes::SolveOptions solveOptions;
        solveOptions.time = time;
        solveOptions.recordMoves = recordMoves;
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const SolutionStats stats = schemes::solve(dataset[i].yard, rule, solveOptions);
                results[i] = {stats.relocations, stats.craneSeconds};
                if (recordMoves) {
                    const fs::path logPath = *moveLogDir / (dataset[i].name + ".moves.csv");
                    std::ofstream log(logPath, std::ios::binary);
                    log << schemes::moveLogCsv(stats);
                }
            } catch (const Error&) {
                failed[i] = 1;
            }
        }
    };

    if (recordMoves)
        fs::create_directories(*moveLogDir);
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (workers == 1 || n == 0) {
        runRange(0, n);
    } else {
        std::vector<std::thread> threads;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (int w = 1; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            threads.emplace_back(runRange, begin, std::min(n, begin + chunk));
        }
        runRange(0, std::min(n, chunk));
        for (auto& t : threads)
            t.join();
    }

    EvalRow row;
    row.rule = ruleName;
    row.scheme = rule.baseline ? "RE" : schemes::schemeName(rule.scheme);
    row.dataset = datasetName;
    for (std::size_t i = 0; i < n; ++i) { // file-order reduction, deterministic
        if (failed[i]) {
            ++row.failures;
            continue;
        }
        row.relocations += results[i].first;
        row.craneSeconds += results[i].second;
    }
    return row;
}

std::string evalCsvHeader() { return "rule,scheme,dataset,relocations,craneSeconds,failures\n"; }

std::string evalCsvRow(const EvalRow& row) {
    std::ostringstream out;
    out << row.rule << ',' << row.scheme << ',' << row.dataset << ',' << row.relocations << ','
        << formatDouble(row.craneSeconds) << ',' << row.failures << '\n';
    return out.str();
}

namespace {

void writeRows(const std::optional<fs::path>& outCsv, bool append, const std::vector<EvalRow>& rows) {
    std::string text;
    for (const auto& row : rows)
        text += evalCsvRow(row);
    if (!outCsv) {
        std::fputs(evalCsvHeader().c_str(), stdout);
        std::fputs(text.c_str(), stdout);
        return;
    }
    const bool exists = fs::exists(*outCsv);
    std::ofstream out(*outCsv, append ? std::ios::binary | std::ios::app : std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + outCsv->string());
    if (!append || !exists)
        out << evalCsvHeader();
    out << text;
}

} // namespace

EvalRow cmdEvaluate(const EvaluateOptions& options) {
    if (options.ruleFile.has_value() == options.baseline.has_value())
        throw Error(ErrorKind::ConfigError, "evaluate needs exactly one of a rule file or a baseline name");
    schemes::RelocationRule rule;
    std::string name;
    if (options.baseline) {
        rule = schemes::RelocationRule::fromBaseline(*options.baseline);
        name = schemes::baselineName(*options.baseline);
    } else {
        rule = loadRuleFile(*options.ruleFile);
        name = options.ruleFile->stem().string();
    }
    if (options.pairMoveCap >= 0)
        rule.pairMoveCap = options.pairMoveCap;

    const auto dataset = instances::loadDataset(options.datasetDir);
    const EvalRow row = evaluateOnDataset(rule, name, dataset, options.datasetDir.filename().string(),
                                          options.jobs, options.moveLogDir);
    writeRows(options.outCsv, options.append, {row});
    return row;
}

std::vector<EvalRow> cmdCompare(const CompareOptions& options) {
    const auto dataset = instances::loadDataset(options.datasetDir);
    const std::string datasetName = options.datasetDir.filename().string();
    std::vector<EvalRow> rows;
    for (auto baseline : options.baselines)
        rows.push_back(evaluateOnDataset(schemes::RelocationRule::fromBaseline(baseline),
                                         schemes::baselineName(baseline), dataset, datasetName, options.jobs));
    for (const auto& path : options.ruleFiles)
        rows.push_back(
            evaluateOnDataset(loadRuleFile(path), path.stem().string(), dataset, datasetName, options.jobs));
    writeRows(options.outCsv, false, rows);
    return rows;
}

std::vector<double> readCsvColumn(const fs::path& path, const std::string& column) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::ParseError, path.string() + " is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();

    std::vector<std::string> header;
    std::istringstream headerIn(line);
    std::string cell;
    while (std::getline(headerIn, cell, ','))
        header.push_back(cell);
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end())
        throw Error(ErrorKind::ConfigError, "column '" + column + "' not found in " + path.string());
    const std::size_t index = static_cast<std::size_t>(it - header.begin());

    std::vector<double> values;
    int lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream rowIn(line);
        std::vector<std::string> cells;
        while (std::getline(rowIn, cell, ','))
            cells.push_back(cell);
        if (index >= cells.size())
            throw Error(ErrorKind::ParseError,
                        path.string() + ":" + std::to_string(lineNo) + " has too few columns");
        try {
            values.push_back(std::stod(cells[index]));
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(lineNo) +
                                                   " column '" + column + "' is not numeric");
        }
    }
    return values;
}

stats::MannWhitneyResult cmdStats(const StatsOptions& options) {
    const auto a = readCsvColumn(options.csvA, options.column);
    const auto b = readCsvColumn(options.csvB, options.column);
    const auto result = stats::mannWhitney(a, b);

    std::ostringstream out;
    out << "column,nA,nB,medianA,medianB,U,p,method\n";
    out << options.column << ',' << a.size() << ',' << b.size() << ',' << formatDouble(result.medianA) << ','
        << formatDouble(result.medianB) << ',' << formatDouble(result.u) << ',' << formatDouble(result.pValue)
        << ',' << (result.exact ? "exact" : "normal") << '\n';
    if (options.outCsv) {
        std::ofstream file(*options.outCsv, std::ios::binary);
        if (!file)
            throw Error(ErrorKind::IoError, "cannot write " + options.outCsv->string());
        file << out.str();
    } else {
        std::fputs(out.str().c_str(), stdout);
    }
    return result;
}

} // namespace crp::cli
