#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crp/core.hpp"

namespace crp::instances {

enum class Family { Caserta, Zhu };

const char* familyName(Family family);
Family familyFromName(const std::string& name);

/// One dataset entry as recorded in the manifest.
struct InstanceSpec {
    std::string fileName;
    Family family = Family::Caserta;
    int stacks = 0;
    int containers = 0;
    int maxHeight = 0;
    std::uint64_t seed = 0;
};

/// Text format, bit-exact:
///   line 1: "S N T"
///   lines 2..S+1: "k id1 ... idk" bottom to top, "0" for an empty stack
Yard parseInstance(const std::string& text);
std::string writeInstance(const Yard& yard);

Yard readInstanceFile(const std::filesystem::path& path);

/// Caserta layout: IDs 1..S*h shuffled, h per stack, T = h + S unless
/// overridden (tiersOverride > 0).
Yard generateCaserta(int stacks, int initialHeight, std::uint64_t seed, int tiersOverride = 0);

/// Zhu layout: IDs 1..N shuffled, dealt to uniformly random stacks that still
/// have a free slot below tier T-1 (one tier stays free at creation).
/// Throws Infeasible when N > S*(T-1).
Yard generateZhu(int stacks, int containers, int maxHeight, std::uint64_t seed);

/// Dataset generation plans. Canonical reproduces the published Caserta class
/// mix (21 height/stack classes, round-robin); Uniform cycles the full
/// S,h in 3..10 grid.
enum class CasertaPlan { Canonical, Uniform };

struct DatasetOptions {
    Family family = Family::Caserta;
    int count = 840;
    std::uint64_t seed = 1;
    CasertaPlan plan = CasertaPlan::Canonical;
    // fixed-class generation when > 0 (otherwise the plan decides per index)
    int stacks = 0;
    int initialHeight = 0; // Caserta
    int containers = 0;    // Zhu
    int maxHeight = 0;     // Zhu override / Caserta tiers override
};

/// The 21 (initialHeight, stacks) classes of the published Caserta set.
std::vector<std::pair<int, int>> casertaCanonicalClasses();

/// Writes `count` .crp files plus manifest.jsonl into outDir.
std::vector<InstanceSpec> generateDataset(const DatasetOptions& options,
                                          const std::filesystem::path& outDir);

/// Loads every *.crp file of a dataset directory in lexicographic name order.
struct LoadedInstance {
    std::string name;
    Yard yard;
};
std::vector<LoadedInstance> loadDataset(const std::filesystem::path& dir);

} // namespace crp::instances
