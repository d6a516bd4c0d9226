#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crp/core.hpp"
#include "crp/rules.hpp"

namespace crp::schemes {

enum class Scheme { RE, REN, UN, UNC, UNT, UNP };
enum class Baseline { TLP, RI, MinMax };
enum class Objective { Relocations, CraneSeconds };

const char* schemeName(Scheme scheme);
Scheme schemeFromName(const std::string& name);
const char* baselineName(Baseline baseline);
std::optional<Baseline> baselineFromName(const std::string& name);
const char* objectiveName(Objective objective);
Objective objectiveFromName(const std::string& name);
bool isRestricted(Scheme scheme);

/// A runnable relocation rule: a scheme plus one or two priority expressions,
/// or a named baseline (baselines run restricted). RE/REN/UN/UNC accept two
/// expressions in min-of-two mode; UNT and UNP require exactly two with
/// distinct roles (UNT: origin then destination, UNP: main then cleanup).
struct RelocationRule {
    Scheme scheme = Scheme::RE;
    std::vector<rules::ExprTree> expressions;
    int pairMoveCap = -1; // UNC/UNT unrestricted moves per retrieval; -1 = S
    std::optional<Baseline> baseline;

    void validate() const;

    static RelocationRule fromBaseline(Baseline b) {
        RelocationRule rule;
        rule.baseline = b;
        return rule;
    }
};

struct SolveOptions {
    TimeModel time{};
    bool recordMoves = false;
};

/// Thrown when no candidate stack exists; carries the partial move log.
class SolveError : public Error {
public:
    SolveError(ErrorKind kind, const std::string& message, SolutionStats partial)
        : Error(kind, message), partial_(std::move(partial)) {}
    const SolutionStats& partial() const { return partial_; }

private:
    SolutionStats partial_;
};

/// Restricted destination choice: argmin of the rule's priority over stacks
/// != origin with free space (REN additionally shuns the next target's stack
/// unless it is the only option). Ties and all-overflow fall back to the
/// lowest index. Throws Deadlock when no candidate exists.
int chooseDestination(const Yard& yard, const RelocationRule& rule, int origin, int currentContainer,
                      const TimeModel& time = {});

int baselineChoose(Baseline variant, const Yard& yard, int origin, int currentContainer);

/// All (origin, destination) pairs the UNC pair phase may score.
std::vector<std::pair<int, int>> legalPairs(const Yard& yard);

SolutionStats solveRE(const Yard& yard, const RelocationRule& rule, const SolveOptions& options = {});
SolutionStats solveUN(const Yard& yard, const RelocationRule& rule, const SolveOptions& options = {});
SolutionStats solveUNC(const Yard& yard, const RelocationRule& rule, const SolveOptions& options = {});
SolutionStats solveUNP(const Yard& yard, const RelocationRule& rule, const SolveOptions& options = {});

/// Dispatches on rule.scheme (baselines run as RE).
SolutionStats solve(const Yard& yard, const RelocationRule& rule, const SolveOptions& options = {});

double objectiveValue(const SolutionStats& stats, Objective objective);

/// Exact minimum relocation count of the restricted CRP via depth-first
/// branch-and-bound (lower bound: badly placed containers). Node-budgeted;
/// throws BudgetExceeded past the budget and Deadlock when infeasible.
long bnbOptimalRelocations(const Yard& yard, long long nodeBudget = 2'000'000);

/// Containers sitting above at least one smaller ID in their stack.
int badlyPlacedCount(const Yard& yard);

/// CSV export: step,kind,origin,destination,container,seconds
std::string moveLogCsv(const SolutionStats& stats);

} // namespace crp::schemes
