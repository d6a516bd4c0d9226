#include "crp/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

namespace crp::schemes {

const char* schemeName(Scheme scheme) {
    switch (scheme) {
    case Scheme::RE: return "RE";
    case Scheme::REN: return "REN";
    case Scheme::UN: return "UN";
    case Scheme::UNC: return "UNC";
    case Scheme::UNT: return "UNT";
    case Scheme::UNP: return "UNP";
    }
    return "?";
}

Scheme schemeFromName(const std::string& name) {
    std::string u(name);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "RE") return Scheme::RE;
    if (u == "REN") return Scheme::REN;
    if (u == "UN") return Scheme::UN;
    if (u == "UNC") return Scheme::UNC;
    if (u == "UNT" || u == "UNC2") return Scheme::UNT;
    if (u == "UNP") return Scheme::UNP;
    throw Error(ErrorKind::ConfigError, "unknown scheme '" + name + "'");
}

const char* baselineName(Baseline baseline) {
    switch (baseline) {
    case Baseline::TLP: return "TLP";
    case Baseline::RI: return "RI";
    case Baseline::MinMax: return "MinMax";
    }
    return "?";
}

std::optional<Baseline> baselineFromName(const std::string& name) {
    std::string u(name);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "TLP") return Baseline::TLP;
    if (u == "RI") return Baseline::RI;
    if (u == "MINMAX" || u == "MM" || u == "MIN-MAX") return Baseline::MinMax;
    return std::nullopt;
}

const char* objectiveName(Objective objective) {
    return objective == Objective::Relocations ? "relocations" : "craneSeconds";
}

Objective objectiveFromName(const std::string& name) {
    std::string u(name);
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::tolower(c); });
    if (u == "relocations") return Objective::Relocations;
    if (u == "craneseconds" || u == "time") return Objective::CraneSeconds;
    throw Error(ErrorKind::ConfigError, "unknown objective '" + name + "'");
}

bool isRestricted(Scheme scheme) { return scheme == Scheme::RE || scheme == Scheme::REN; }

void RelocationRule::validate() const {
    if (baseline) {
        if (!expressions.empty())
            throw Error(ErrorKind::ConfigError, "baseline rules carry no expressions");
        return;
    }
    const std::size_t n = expressions.size();
    switch (scheme) {
    case Scheme::RE:
    case Scheme::REN:
    case Scheme::UN:
    case Scheme::UNC:
        if (n != 1 && n != 2)
            throw Error(ErrorKind::ConfigError,
                        std::string(schemeName(scheme)) + " needs 1 expression (or 2 in min-of-two mode)");
        break;
    case Scheme::UNT:
    case Scheme::UNP:
        if (n != 2)
            throw Error(ErrorKind::ConfigError, std::string(schemeName(scheme)) + " needs exactly 2 expressions");
        break;
    }
    if (pairMoveCap < -1)
        throw Error(ErrorKind::ConfigError, "pairMoveCap must be >= 0 (or -1 for the default)");
}

double objectiveValue(const SolutionStats& stats, Objective objective) {
    return objective == Objective::Relocations ? static_cast<double>(stats.relocations) : stats.craneSeconds;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// min over the rule's expressions; +inf when the value overflows.
double priorityOf(std::span<const rules::ExprTree> exprs, const rules::EvalContext& ctx) {
    double best = kInf;
    for (const auto& e : exprs) {
        const double v = rules::evalExpr(e, ctx);
        if (std::isfinite(v) && v < best)
            best = v;
    }
    return best;
}

struct ArgMin {
    int index = 0;   // 1-based stack; 0 = none seen
    double value = kInf;
    int fallback = 0; // lowest-index candidate, for the all-overflow case

    void offer(int stack, double v) {
        if (fallback == 0)
            fallback = stack;
        if (v < value) { // strict: ties keep the lowest index
            value = v;
            index = stack;
        }
    }
    int result() const { return index != 0 ? index : fallback; }
    bool emptyCandidates() const { return fallback == 0; }
};

int destinationByExpressions(const Yard& yard, std::span<const rules::ExprTree> exprs, int origin,
                             int currentContainer, const TimeModel& time, int excludedStack) {
    ArgMin pick;
    for (int s = 1; s <= yard.stackCount(); ++s) {
        if (s == origin || s == excludedStack || yard.full(s))
            continue;
        rules::EvalContext ctx(yard, s, origin, currentContainer, time);
        pick.offer(s, priorityOf(exprs, ctx));
    }
    return pick.emptyCandidates() ? 0 : pick.result();
}

} // namespace

int baselineChoose(Baseline variant, const Yard& yard, int origin, int currentContainer) {
    ArgMin pick;
    for (int s = 1; s <= yard.stackCount(); ++s) {
        if (s == origin || yard.full(s))
            continue;
        double score = 0.0;
        switch (variant) {
        case Baseline::TLP:
            score = yard.height(s);
            break;
        case Baseline::RI: {
            int count = 0;
            for (int id : yard.stack(s))
                count += id < currentContainer;
            score = count;
            break;
        }
        case Baseline::MinMax: {
            const int minId = yard.minIdOn(s);
            // prefer the smallest min above CUR; otherwise the largest min,
            // encoded so both branches fit one argmin pass
            score = minId > currentContainer ? static_cast<double>(minId)
                                             : 2.0 * yard.idSentinel() - static_cast<double>(minId);
            break;
        }
        }
        pick.offer(s, score);
    }
    if (pick.emptyCandidates())
        throw Error(ErrorKind::Deadlock, "no candidate stack for baseline move");
    return pick.result();
}

int chooseDestination(const Yard& yard, const RelocationRule& rule, int origin, int currentContainer,
                      const TimeModel& time) {
    if (rule.baseline)
        return baselineChoose(*rule.baseline, yard, origin, currentContainer);

    int excluded = 0;
    if (rule.scheme == Scheme::REN) {
        const int next = yard.nextTarget();
        if (next != 0)
            excluded = yard.stackOf(next);
    }
    int choice = destinationByExpressions(yard, rule.expressions, origin, currentContainer, time, excluded);
    if (choice == 0 && excluded != 0) // re-admit the shunned stack rather than deadlock
        choice = destinationByExpressions(yard, rule.expressions, origin, currentContainer, time, 0);
    if (choice == 0)
        throw Error(ErrorKind::Deadlock, "no candidate stack for relocation");
    return choice;
}

std::vector<std::pair<int, int>> legalPairs(const Yard& yard) {
    std::vector<std::pair<int, int>> pairs;
    for (int o = 1; o <= yard.stackCount(); ++o) {
        if (yard.height(o) == 0)
            continue;
        for (int d = 1; d <= yard.stackCount(); ++d)
            if (d != o && !yard.full(d))
                pairs.emplace_back(o, d);
    }
    return pairs;
}

namespace {

class Driver {
public:
    Driver(const Yard& start, const RelocationRule& rule, const SolveOptions& options)
        : yard_(start), rule_(rule), options_(options) {
        rule.validate();
    }

    SolutionStats run() {
        while (!yard_.empty()) {
            perRetrievalMoves_ = 0;
            pairMoves_ = 0;
            while (blocked())
                step();
            apply(yard_.retrieve(options_.time));
        }
        return std::move(stats_);
    }

private:
    bool blocked() const { return yard_.topOf(yard_.targetStack()) != yard_.targetContainer(); }

    void step() {
        switch (rule_.scheme) {
        case Scheme::RE:
        case Scheme::REN:
            restrictedStep();
            break;
        case Scheme::UN:
        case Scheme::UNP:
            cleanupStep();
            break;
        case Scheme::UNC:
        case Scheme::UNT:
            pairStep();
            break;
        }
    }

    void restrictedStep() {
        const int origin = yard_.targetStack();
        const int current = yard_.topOf(origin);
        const int destination = wrapDeadlock([&] { return chooseDestination(yard_, rule_, origin, current, options_.time); });
        relocate(origin, destination);
    }

    void cleanupStep() {
        const int origin = yard_.targetStack();
        const int current = yard_.topOf(origin);
        const auto mainExprs = rule_.scheme == Scheme::UNP
                                   ? std::span<const rules::ExprTree>(rule_.expressions.data(), 1)
                                   : std::span<const rules::ExprTree>(rule_.expressions);
        const int destination = destinationByExpressions(yard_, mainExprs, origin, current, options_.time, 0);
        if (destination == 0)
            throwDeadlock("no candidate stack for relocation");

        // relocate smaller-ID containers off the destination while some stack
        // can take them without creating a new blocker
        while (yard_.minIdOn(destination) < current) {
            const int moving = yard_.topOf(destination);
            ArgMin pick;
            for (int s = 1; s <= yard_.stackCount(); ++s) {
                if (s == destination || s == origin || yard_.full(s))
                    continue;
                if (yard_.minIdOn(s) <= moving)
                    continue;
                double score;
                if (rule_.scheme == Scheme::UNP) {
                    rules::EvalContext ctx(yard_, s, destination, moving, options_.time);
                    score = rules::evalExpr(rule_.expressions[1], ctx);
                    if (!std::isfinite(score))
                        score = kInf;
                } else {
                    score = yard_.minIdOn(s);
                }
                pick.offer(s, score);
            }
            if (pick.emptyCandidates())
                break;
            relocate(destination, pick.result());
        }
        relocate(origin, destination);
    }

    void pairStep() {
        const int cap = rule_.pairMoveCap >= 0 ? rule_.pairMoveCap : yard_.stackCount();
        if (pairMoves_ < cap) {
            auto [o, d] = pickPair();
            ++pairMoves_;
            relocate(o, d);
            return;
        }
        // cap reached: behave restrictedly with the destination expression
        const int origin = yard_.targetStack();
        const int current = yard_.topOf(origin);
        const auto destExpr = rule_.scheme == Scheme::UNT
                                  ? std::span<const rules::ExprTree>(rule_.expressions.data() + 1, 1)
                                  : std::span<const rules::ExprTree>(rule_.expressions);
        const int destination = destinationByExpressions(yard_, destExpr, origin, current, options_.time, 0);
        if (destination == 0)
            throwDeadlock("no candidate stack for relocation");
        relocate(origin, destination);
    }

    std::pair<int, int> pickPair() {
        if (rule_.scheme == Scheme::UNC) {
            double bestValue = kInf;
            std::pair<int, int> best{0, 0}, fallback{0, 0};
            for (int o = 1; o <= yard_.stackCount(); ++o) {
                if (yard_.height(o) == 0)
                    continue;
                const int current = yard_.topOf(o);
                for (int d = 1; d <= yard_.stackCount(); ++d) {
                    if (d == o || yard_.full(d))
                        continue;
                    if (fallback.first == 0)
                        fallback = {o, d};
                    rules::EvalContext ctx(yard_, d, o, current, options_.time);
                    const double v = priorityOf(rule_.expressions, ctx);
                    if (v < bestValue) { // strict: ties keep the lexicographically first pair
                        bestValue = v;
                        best = {o, d};
                    }
                }
            }
            if (fallback.first == 0)
                throwDeadlock("no legal stack pair");
            return best.first != 0 ? best : fallback;
        }
        // UNT: expression 1 ranks origins, expression 2 ranks destinations
        ArgMin originPick;
        for (int o = 1; o <= yard_.stackCount(); ++o) {
            if (yard_.height(o) == 0)
                continue;
            bool hasDestination = false;
            for (int d = 1; d <= yard_.stackCount() && !hasDestination; ++d)
                hasDestination = d != o && !yard_.full(d);
            if (!hasDestination)
                continue;
            rules::EvalContext ctx(yard_, o, o, yard_.topOf(o), options_.time);
            const double v = rules::evalExpr(rule_.expressions[0], ctx);
            originPick.offer(o, std::isfinite(v) ? v : kInf);
        }
        if (originPick.emptyCandidates())
            throwDeadlock("no legal stack pair");
        const int o = originPick.result();
        const auto destExpr = std::span<const rules::ExprTree>(rule_.expressions.data() + 1, 1);
        const int d = destinationByExpressions(yard_, destExpr, o, yard_.topOf(o), options_.time, 0);
        if (d == 0)
            throwDeadlock("no legal stack pair");
        return {o, d};
    }

    template <typename F>
    int wrapDeadlock(F&& f) {
        try {
            return f();
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Deadlock)
                throw SolveError(ErrorKind::Deadlock, e.what(), std::move(stats_));
            throw;
        }
    }

    [[noreturn]] void throwDeadlock(const std::string& message) {
        throw SolveError(ErrorKind::Deadlock, message, std::move(stats_));
    }

    void relocate(int origin, int destination) {
        apply(yard_.relocate(origin, destination, options_.time));
        if (++perRetrievalMoves_ > 2 * yard_.totalContainers())
            throw SolveError(ErrorKind::InternalLoop,
                             "relocation count exceeded 2N within one retrieval", std::move(stats_));
    }

    void apply(const Move& move) {
        stats_.craneSeconds += move.seconds;
        if (move.kind == MoveKind::Relocate)
            ++stats_.relocations;
        else
            ++stats_.retrievals;
        if (options_.recordMoves)
            stats_.moves.push_back(move);
    }

    Yard yard_;
    const RelocationRule& rule_;
    const SolveOptions& options_;
    SolutionStats stats_;
    int perRetrievalMoves_ = 0;
    int pairMoves_ = 0;
};

} // namespace

SolutionStats solveRE(const Yard& yard, const RelocationRule& rule, const SolveOptions& options) {
    if (!rule.baseline && rule.scheme != Scheme::RE && rule.scheme != Scheme::REN)
        throw Error(ErrorKind::ConfigError, "solveRE drives RE/REN rules");
    return Driver(yard, rule, options).run();
}

SolutionStats solveUN(const Yard& yard, const RelocationRule& rule, const SolveOptions& options) {
    if (rule.scheme != Scheme::UN)
        throw Error(ErrorKind::ConfigError, "solveUN drives UN rules");
    return Driver(yard, rule, options).run();
}

SolutionStats solveUNC(const Yard& yard, const RelocationRule& rule, const SolveOptions& options) {
    if (rule.scheme != Scheme::UNC && rule.scheme != Scheme::UNT)
        throw Error(ErrorKind::ConfigError, "solveUNC drives UNC/UNT rules");
    return Driver(yard, rule, options).run();
}

SolutionStats solveUNP(const Yard& yard, const RelocationRule& rule, const SolveOptions& options) {
    if (rule.scheme != Scheme::UNP)
        throw Error(ErrorKind::ConfigError, "solveUNP drives UNP rules");
    return Driver(yard, rule, options).run();
}

SolutionStats solve(const Yard& yard, const RelocationRule& rule, const SolveOptions& options) {
    return Driver(yard, rule, options).run();
}

int badlyPlacedCount(const Yard& yard) {
    int badly = 0;
    for (int s = 1; s <= yard.stackCount(); ++s) {
        int minBelow = yard.idSentinel();
        for (int id : yard.stack(s)) {
            badly += id > minBelow;
            minBelow = std::min(minBelow, id);
        }
    }
    return badly;
}

namespace {

std::string stateKey(const Yard& yard) {
    std::string k;
    k.reserve(static_cast<std::size_t>(yard.stackCount()) * (yard.maxHeight() + 1) * 4);
    for (int s = 1; s <= yard.stackCount(); ++s) {
        for (int id : yard.stack(s)) {
            k += std::to_string(id);
            k += ',';
        }
        k += '|';
    }
    return k;
}

void drainRetrievals(Yard& yard) {
    while (!yard.empty() && yard.topOf(yard.targetStack()) == yard.targetContainer())
        yard.retrieve();
}

/// Deterministic lowest-stack greedy; gives the initial incumbent without
/// touching any rule machinery.
std::optional<long> greedyUpperBound(Yard yard) {
    long moves = 0;
    while (!yard.empty()) {
        drainRetrievals(yard);
        if (yard.empty())
            break;
        const int ts = yard.targetStack();
        int best = 0;
        for (int s = 1; s <= yard.stackCount(); ++s) {
            if (s == ts || yard.full(s))
                continue;
            if (best == 0 || yard.height(s) < yard.height(best))
                best = s;
        }
        if (best == 0)
            return std::nullopt;
        yard.relocate(ts, best);
        ++moves;
    }
    return moves;
}

class BnbSolver {
public:
    BnbSolver(long long budget) : budget_(budget) {}

    long solve(Yard yard) {
        drainRetrievals(yard);
        if (yard.empty())
            return 0;
        // any feasible strategy needs at most N*(T-1) relocations, so this cap
        // only survives when no solution exists at all
        const long cap = static_cast<long>(yard.totalContainers()) * yard.maxHeight() + 1;
        best_ = greedyUpperBound(yard).value_or(cap);
        dfs(yard, 0);
        if (best_ >= cap)
            throw Error(ErrorKind::Deadlock, "restricted instance is infeasible");
        return best_;
    }

private:
    void dfs(const Yard& yard, long g) {
        if (++nodes_ > budget_)
            throw Error(ErrorKind::BudgetExceeded, "branch-and-bound node budget exhausted");
        if (g + badlyPlacedCount(yard) >= best_)
            return;
        auto [it, fresh] = seen_.try_emplace(stateKey(yard), g);
        if (!fresh) {
            if (it->second <= g)
                return;
            it->second = g;
        }
        const int ts = yard.targetStack();
        for (int d = 1; d <= yard.stackCount(); ++d) {
            if (d == ts || yard.full(d))
                continue;
            Yard child = yard;
            child.relocate(ts, d);
            drainRetrievals(child);
            if (child.empty())
                best_ = std::min(best_, g + 1);
            else
                dfs(child, g + 1);
        }
    }

    long long budget_;
    long long nodes_ = 0;
    long best_ = 0;
    std::unordered_map<std::string, long> seen_;
};

} // namespace

long bnbOptimalRelocations(const Yard& yard, long long nodeBudget) {
    return BnbSolver(nodeBudget).solve(yard);
}

std::string moveLogCsv(const SolutionStats& stats) {
    std::string out = "step,kind,origin,destination,container,seconds\n";
    char line[128];
    int step = 1;
    for (const Move& m : stats.moves) {
        std::snprintf(line, sizeof line, "%d,%s,%d,%d,%d,%.9g\n", step++,
                      m.kind == MoveKind::Relocate ? "relocate" : "retrieve", m.origin, m.destination,
                      m.containerId, m.seconds);
        out += line;
    }
    return out;
}

} // namespace crp::schemes
