#include "crp/instances.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crp/rng.hpp"

namespace crp::instances {

const char* familyName(Family family) { return family == Family::Caserta ? "caserta" : "zhu"; }

Family familyFromName(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "caserta")
        return Family::Caserta;
    if (lower == "zhu")
        return Family::Zhu;
    throw Error(ErrorKind::ConfigError, "unknown instance family '" + name + "'");
}

namespace {

long parseInt(const std::string& token, const char* what, int line) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(token, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError,
                    std::string("expected integer for ") + what + " on line " + std::to_string(line));
    }
    if (used != token.size())
        throw Error(ErrorKind::ParseError,
                    std::string("trailing junk after ") + what + " on line " + std::to_string(line));
    return value;
}

std::vector<std::string> splitWs(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

constexpr int kMaxContainerId = 10'000'000;

} // namespace

Yard parseInstance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::ParseError, "empty instance text");
    auto header = splitWs(line);
    if (header.size() != 3)
        throw Error(ErrorKind::ParseError, "header must be 'S N T' on line 1");
    const long stackCount = parseInt(header[0], "S", 1);
    const long total = parseInt(header[1], "N", 1);
    const long tiers = parseInt(header[2], "T", 1);
    if (stackCount < 1 || tiers < 1 || total < 0)
        throw Error(ErrorKind::ParseError, "header values out of range");

    std::vector<std::vector<int>> stacks;
    stacks.reserve(stackCount);
    long listed = 0;
    for (long s = 1; s <= stackCount; ++s) {
        if (!std::getline(in, line))
            throw Error(ErrorKind::ParseError, "missing stack line " + std::to_string(s + 1));
        auto tokens = splitWs(line);
        if (tokens.empty())
            throw Error(ErrorKind::ParseError, "blank stack line " + std::to_string(s + 1));
        const long k = parseInt(tokens[0], "stack height", static_cast<int>(s + 1));
        if (k < 0 || k > tiers)
            throw Error(ErrorKind::ParseError, "stack " + std::to_string(s) + " height " + std::to_string(k) +
                                                   " exceeds T=" + std::to_string(tiers));
        if (static_cast<long>(tokens.size()) != k + 1)
            throw Error(ErrorKind::ParseError,
                        "stack " + std::to_string(s) + " lists " + std::to_string(tokens.size() - 1) +
                            " IDs but declares " + std::to_string(k));
        std::vector<int> stack;
        stack.reserve(k);
        for (long i = 1; i <= k; ++i) {
            const long id = parseInt(tokens[i], "container ID", static_cast<int>(s + 1));
            if (id < 1 || id > kMaxContainerId)
                throw Error(ErrorKind::ParseError, "container ID " + std::to_string(id) + " out of range");
            stack.push_back(static_cast<int>(id));
        }
        listed += k;
        stacks.push_back(std::move(stack));
    }
    std::string rest;
    while (std::getline(in, rest))
        if (!splitWs(rest).empty())
            throw Error(ErrorKind::ParseError, "unexpected content after stack lines");
    if (listed != total)
        throw Error(ErrorKind::ParseError, "header declares N=" + std::to_string(total) + " but " +
                                               std::to_string(listed) + " IDs are listed");
    return Yard(stacks, static_cast<int>(tiers)); // Yard rejects duplicates
}

std::string writeInstance(const Yard& yard) {
    std::ostringstream out;
    out << yard.stackCount() << ' ' << yard.remaining() << ' ' << yard.maxHeight() << '\n';
    for (int s = 1; s <= yard.stackCount(); ++s) {
        out << yard.height(s);
        for (int id : yard.stack(s))
            out << ' ' << id;
        out << '\n';
    }
    return out.str();
}

Yard readInstanceFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parseInstance(buf.str());
}

Yard generateCaserta(int stacks, int initialHeight, std::uint64_t seed, int tiersOverride) {
    if (stacks < 2 || initialHeight < 1)
        throw Error(ErrorKind::ConfigError, "Caserta generation needs S >= 2, h >= 1");
    const int total = stacks * initialHeight;
    const int tiers = tiersOverride > 0 ? tiersOverride : initialHeight + stacks;
    if (tiers < initialHeight)
        throw Error(ErrorKind::ConfigError, "tiers override below initial height");

    std::vector<int> ids(total);
    std::iota(ids.begin(), ids.end(), 1);
    Rng rng(seed);
    rng.shuffle(std::span<int>(ids));

    std::vector<std::vector<int>> layout(stacks);
    for (int s = 0; s < stacks; ++s)
        layout[s].assign(ids.begin() + static_cast<std::ptrdiff_t>(s) * initialHeight,
                         ids.begin() + static_cast<std::ptrdiff_t>(s + 1) * initialHeight);
    return Yard(layout, tiers);
}

Yard generateZhu(int stacks, int containers, int maxHeight, std::uint64_t seed) {
    if (stacks < 2 || maxHeight < 2 || containers < 1)
        throw Error(ErrorKind::ConfigError, "Zhu generation needs S >= 2, T >= 2, N >= 1");
    if (containers > stacks * (maxHeight - 1))
        throw Error(ErrorKind::Infeasible, "N=" + std::to_string(containers) + " exceeds S*(T-1)=" +
                                               std::to_string(stacks * (maxHeight - 1)));

    std::vector<int> ids(containers);
    std::iota(ids.begin(), ids.end(), 1);
    Rng rng(seed);
    rng.shuffle(std::span<int>(ids));

    std::vector<std::vector<int>> layout(stacks);
    for (int id : ids) {
        int s;
        do {
            s = static_cast<int>(rng.index(stacks));
        } while (static_cast<int>(layout[s].size()) >= maxHeight - 1);
        layout[s].push_back(id);
    }
    return Yard(layout, maxHeight);
}

std::vector<std::pair<int, int>> casertaCanonicalClasses() {
    // (initial height h, stacks S), the published 21-class mix
    return {{3, 3}, {3, 4}, {3, 5}, {3, 6}, {3, 7},  {3, 8},  {4, 4},
            {4, 5}, {4, 6}, {4, 7}, {5, 4}, {5, 5},  {5, 6},  {5, 7},
            {5, 8}, {5, 9}, {5, 10}, {6, 6}, {6, 10}, {10, 6}, {10, 10}};
}

namespace {

struct PlannedInstance {
    int stacks;
    int heightOrContainers;
    int tiers; // 0 = family default
};

PlannedInstance planFor(const DatasetOptions& options, int index, Rng& planRng) {
    if (options.family == Family::Caserta) {
        if (options.stacks > 0 && options.initialHeight > 0)
            return {options.stacks, options.initialHeight, options.maxHeight};
        if (options.plan == CasertaPlan::Canonical) {
            const auto classes = casertaCanonicalClasses();
            const auto [h, s] = classes[index % classes.size()];
            return {s, h, options.maxHeight};
        }
        // uniform grid: S,h in 3..10, round-robin
        const int combos = 8 * 8;
        const int c = index % combos;
        return {3 + c / 8, 3 + c % 8, options.maxHeight};
    }
    if (options.stacks > 0 && options.containers > 0 && options.maxHeight > 0)
        return {options.stacks, options.containers, options.maxHeight};
    // Zhu plan: cycle (S,T) over {6..10} x {3..6} keeping S*(T-1) >= 15, draw N
    static const std::vector<std::pair<int, int>> zhuClasses = [] {
        std::vector<std::pair<int, int>> cs;
        for (int s = 6; s <= 10; ++s)
            for (int t = 3; t <= 6; ++t)
                if (s * (t - 1) >= 15)
                    cs.emplace_back(s, t);
        return cs;
    }();
    const auto [s, t] = zhuClasses[index % zhuClasses.size()];
    const int cap = std::min(69, s * (t - 1));
    const int n = static_cast<int>(planRng.uniformInt(15, cap));
    return {s, n, t};
}

} // namespace

std::vector<InstanceSpec> generateDataset(const DatasetOptions& options, const std::filesystem::path& outDir) {
    if (options.count < 1)
        throw Error(ErrorKind::ConfigError, "dataset count must be positive");
    std::error_code ec;
    std::filesystem::create_directories(outDir, ec);
    if (ec)
        throw Error(ErrorKind::IoError, "cannot create " + outDir.string() + ": " + ec.message());

    Rng planRng(mixSeed(options.seed, 0xda7a5e7));
    std::vector<InstanceSpec> specs;
    specs.reserve(options.count);

    int digits = 1;
    for (int v = options.count - 1; v >= 10; v /= 10)
        ++digits;

    std::ofstream manifest(outDir / "manifest.jsonl", std::ios::binary);
    if (!manifest)
        throw Error(ErrorKind::IoError, "cannot write manifest in " + outDir.string());

    for (int i = 0; i < options.count; ++i) {
        const PlannedInstance plan = planFor(options, i, planRng);
        const std::uint64_t instanceSeed = mixSeed(options.seed, static_cast<std::uint64_t>(i) + 1);
        Yard yard = options.family == Family::Caserta
                        ? generateCaserta(plan.stacks, plan.heightOrContainers, instanceSeed, plan.tiers)
                        : generateZhu(plan.stacks, plan.heightOrContainers, plan.tiers, instanceSeed);

        std::string number = std::to_string(i);
        number.insert(number.begin(), digits - static_cast<int>(number.size()), '0');
        InstanceSpec spec;
        spec.fileName = std::string(familyName(options.family)) + "_" + number + ".crp";
        spec.family = options.family;
        spec.stacks = yard.stackCount();
        spec.containers = yard.totalContainers();
        spec.maxHeight = yard.maxHeight();
        spec.seed = instanceSeed;

        std::ofstream file(outDir / spec.fileName, std::ios::binary);
        if (!file)
            throw Error(ErrorKind::IoError, "cannot write " + (outDir / spec.fileName).string());
        file << writeInstance(yard);

        nlohmann::json row{{"fileName", spec.fileName}, {"family", familyName(spec.family)},
                           {"S", spec.stacks},          {"N", spec.containers},
                           {"T", spec.maxHeight},       {"seed", spec.seed},
                           {"rng", "splitmix64+mt19937_64"}};
        manifest << row.dump() << '\n';
        specs.push_back(std::move(spec));
    }
    return specs;
}

std::vector<LoadedInstance> loadDataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error(ErrorKind::IoError, dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".crp")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

    std::vector<LoadedInstance> out;
    out.reserve(files.size());
    for (const auto& path : files)
        out.push_back({path.filename().string(), readInstanceFile(path)});
    return out;
}

} // namespace crp::instances
