#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crp/gp.hpp"
#include "crp/instances.hpp"
#include "crp/schemes.hpp"
#include "crp/stats.hpp"

namespace crp::cli {

/// Rule files: a "# scheme=<name> pfs=<1|2>" header line followed by one
/// prefix expression per line.
schemes::RelocationRule loadRuleFile(const std::filesystem::path& path);
void saveRuleFile(const std::filesystem::path& path, const schemes::RelocationRule& rule);
std::string ruleFileText(const schemes::RelocationRule& rule);
schemes::RelocationRule parseRuleFileText(const std::string& text);

struct GenerateOptions {
    instances::Family family = instances::Family::Caserta;
    int count = -1; // -1 = family default (840 Caserta, 1000 Zhu)
    std::uint64_t seed = 1;
    std::filesystem::path outDir;
    instances::CasertaPlan plan = instances::CasertaPlan::Canonical;
    int stacks = 0;
    int initialHeight = 0;
    int containers = 0;
    int maxHeight = 0;
};
void cmdGenerate(const GenerateOptions& options);

struct EvolveOptions {
    std::filesystem::path trainDir;
    std::optional<std::filesystem::path> validationDir;
    std::optional<std::filesystem::path> testDir; // scored into summary.csv
    std::filesystem::path outDir;
    gp::GpConfig config;
    bool useNsga2 = false;
    int repeats = 1;
};
void cmdEvolve(const EvolveOptions& options);

struct EvalRow {
    std::string rule;
    std::string scheme;
    std::string dataset;
    long long relocations = 0;
    double craneSeconds = 0.0;
    int failures = 0;
};

/// Per-instance accounting: deadlocked instances are excluded from the totals
/// and counted in `failures`.
EvalRow evaluateOnDataset(const schemes::RelocationRule& rule, const std::string& ruleName,
                          const std::vector<instances::LoadedInstance>& dataset, const std::string& datasetName,
                          int jobs = 1, const std::optional<std::filesystem::path>& moveLogDir = std::nullopt,
                          const TimeModel& time = {});

std::string evalCsvHeader();
std::string evalCsvRow(const EvalRow& row);

struct EvaluateOptions {
    std::optional<std::filesystem::path> ruleFile; // exactly one of ruleFile/baseline
    std::optional<schemes::Baseline> baseline;
    std::filesystem::path datasetDir;
    std::optional<std::filesystem::path> outCsv;
    bool append = false;
    int jobs = 1;
    std::optional<std::filesystem::path> moveLogDir;
    int pairMoveCap = -1;
};
EvalRow cmdEvaluate(const EvaluateOptions& options);

struct CompareOptions {
    std::vector<std::filesystem::path> ruleFiles;
    std::vector<schemes::Baseline> baselines;
    std::filesystem::path datasetDir;
    std::optional<std::filesystem::path> outCsv;
    int jobs = 1;
};
std::vector<EvalRow> cmdCompare(const CompareOptions& options);

struct StatsOptions {
    std::filesystem::path csvA;
    std::filesystem::path csvB;
    std::string column = "relocations";
    std::optional<std::filesystem::path> outCsv;
};
stats::MannWhitneyResult cmdStats(const StatsOptions& options);

/// Numeric column from a headered CSV file.
std::vector<double> readCsvColumn(const std::filesystem::path& path, const std::string& column);

std::string formatDouble(double value);

} // namespace crp::cli
