#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "crp/gp.hpp"
#include "crp/instances.hpp"
#include "crp/rng.hpp"
#include "crp/schemes.hpp"

using namespace crp;
using namespace crp::schemes;
using rules::ExprTree;
using rules::parseRule;

namespace {

RelocationRule ruleOf(Scheme scheme, const std::string& expr, int pairCap = -1) {
    RelocationRule rule;
    rule.scheme = scheme;
    rule.expressions.push_back(parseRule(expr));
    rule.pairMoveCap = pairCap;
    return rule;
}

RelocationRule ruleOf2(Scheme scheme, const std::string& e1, const std::string& e2, int pairCap = -1) {
    RelocationRule rule = ruleOf(scheme, e1, pairCap);
    rule.expressions.push_back(parseRule(e2));
    return rule;
}

bool sameMoves(const SolutionStats& a, const SolutionStats& b) {
    if (a.moves.size() != b.moves.size())
        return false;
    for (std::size_t i = 0; i < a.moves.size(); ++i) {
        const Move &x = a.moves[i], &y = b.moves[i];
        if (x.kind != y.kind || x.origin != y.origin || x.destination != y.destination ||
            x.containerId != y.containerId)
            return false;
    }
    return true;
}

SolutionStats solveLogged(const Yard& yard, const RelocationRule& rule) {
    SolveOptions options;
    options.recordMoves = true;
    return solve(yard, rule, options);
}

ExprTree randomPf(Rng& rng) {
    return gp::randomTree(rng, rules::allTerminals(), 0, 2 + static_cast<int>(rng.index(4)), false);
}

} // namespace

TEST_CASE("chooseDestination minimises the priority with index tie-breaks") {
    const Yard yard({{2, 4}, {1, 3}, {}}, 4); // origin s2, current container 3
    CHECK(chooseDestination(yard, ruleOf(Scheme::RE, "SH"), 2, 3) == 3);       // lowest stack
    CHECK(chooseDestination(yard, ruleOf(Scheme::RE, "(div SH (sub SH SH))"), 2, 3) == 1); // ties -> s1
    // min-of-two with duplicated expressions behaves like the single one
    CHECK(chooseDestination(yard, ruleOf2(Scheme::RE, "SH", "SH"), 2, 3) == 3);
}

TEST_CASE("REN shuns the next target's stack unless it is the only option") {
    // target 1 in s1 under 3; next target 2 sits in s2; s3 open.
    // A constant priority ties everything, so RE takes s2 and REN must not.
    const Yard yard({{1, 3}, {2}, {}}, 3);
    const std::string constantPf = "(sub SH SH)";
    CHECK(chooseDestination(yard, ruleOf(Scheme::RE, constantPf), 1, 3) == 2);
    CHECK(chooseDestination(yard, ruleOf(Scheme::REN, constantPf), 1, 3) == 3);

    // the next-target stack is the only candidate: re-admitted
    const Yard cramped({{1, 3}, {2}}, 3);
    CHECK(chooseDestination(cramped, ruleOf(Scheme::REN, constantPf), 1, 3) == 2);
}

TEST_CASE("solveRE handles the documented traces") {
    CHECK(solve(Yard({{2, 1}}, 2), ruleOf(Scheme::RE, "SH")).relocations == 0);
    CHECK(solve(Yard({{2, 1}}, 2), ruleOf(Scheme::RE, "SH")).retrievals == 2);

    const SolutionStats stats = solveLogged(Yard({{1, 2}, {}}, 2), ruleOf(Scheme::RE, "DIFF"));
    CHECK(stats.relocations == 1);
    CHECK(stats.retrievals == 2);
    CHECK(std::abs(stats.craneSeconds - 99.6) < 1e-9);
    double sum = 0;
    for (const Move& m : stats.moves)
        sum += m.seconds;
    CHECK(std::abs(stats.craneSeconds - sum) < 1e-9);

    try {
        solve(Yard({{1, 2}}, 2), ruleOf(Scheme::RE, "SH"));
        CHECK(false);
    } catch (const SolveError& e) {
        CHECK(e.kind() == ErrorKind::Deadlock);
        CHECK(e.partial().moves.empty());
    }
}

TEST_CASE("solveUN performs the cleanup trace") {
    // PF = SH picks D = s2 for blocker 3; 2 must first flee to s3
    const Yard yard({{1, 3}, {2}, {9}}, 3);
    const SolutionStats stats = solveLogged(yard, ruleOf(Scheme::UN, "SH"));
    CHECK(stats.relocations == 2);
    CHECK(stats.moves.size() >= 2);
    CHECK(stats.moves[0].kind == MoveKind::Relocate); // cleanup: 2 -> s3
    CHECK(stats.moves[0].containerId == 2);
    CHECK(stats.moves[0].origin == 2);
    CHECK(stats.moves[0].destination == 3);
    CHECK(stats.moves[1].containerId == 3); // blocker onto the cleaned stack
    CHECK(stats.moves[1].destination == 2);
    CHECK(stats.retrievals == 4);

    // guard false: chosen destination has no smaller IDs, identical to RE
    const Yard clean({{1, 2}, {5}, {}}, 3);
    const auto un = solveLogged(clean, ruleOf(Scheme::UN, "SH"));
    const auto re = solveLogged(clean, ruleOf(Scheme::RE, "SH"));
    CHECK(sameMoves(un, re));
}

TEST_CASE("UN cleanup terminates within the hard cap on random instances") {
    Rng rng(555);
    for (int i = 0; i < 100; ++i) {
        const Yard yard = instances::generateCaserta(3 + static_cast<int>(rng.index(3)),
                                                     2 + static_cast<int>(rng.index(3)), rng.nextU64());
        RelocationRule rule;
        rule.scheme = Scheme::UN;
        rule.expressions.push_back(randomPf(rng));
        const SolutionStats stats = solve(yard, rule); // InternalLoop would throw
        CHECK(stats.retrievals == yard.totalContainers());
    }
}

TEST_CASE("UNC pair scoring and cap semantics") {
    // S*(S-1) legal pairs when nothing is empty or full
    const Yard yard({{1, 9}, {2}, {3}, {4}}, 3);
    CHECK(legalPairs(yard).size() == 12);

    // a 2-stack yard admits one legal relocation per step; equals RE
    const auto unc = solveLogged(Yard({{1, 2}, {}}, 2), ruleOf(Scheme::UNC, "SH", 3));
    const auto re = solveLogged(Yard({{1, 2}, {}}, 2), ruleOf(Scheme::RE, "SH"));
    CHECK(unc.relocations == 1);
    CHECK(sameMoves(unc, re));

    // K = 0 disables the pair phase entirely
    Rng rng(808);
    for (int i = 0; i < 100; ++i) {
        const Yard instance = instances::generateCaserta(3 + static_cast<int>(rng.index(3)),
                                                         2 + static_cast<int>(rng.index(3)), rng.nextU64());
        const ExprTree pf = randomPf(rng);
        RelocationRule uncRule{Scheme::UNC, {pf}, 0, std::nullopt};
        RelocationRule reRule{Scheme::RE, {pf}, -1, std::nullopt};
        CHECK(sameMoves(solveLogged(instance, uncRule), solveLogged(instance, reRule)));
    }
}

TEST_CASE("UNT uses one expression per decision role") {
    Rng rng(909);
    for (int i = 0; i < 30; ++i) {
        const Yard instance = instances::generateCaserta(3, 3, rng.nextU64());
        RelocationRule rule;
        rule.scheme = Scheme::UNT;
        rule.expressions = {randomPf(rng), randomPf(rng)};
        const SolutionStats stats = solve(instance, rule);
        CHECK(stats.retrievals == instance.totalContainers());
    }
}

TEST_CASE("UNP cleanup destination expression MIN replays UN exactly") {
    Rng rng(777);
    for (int i = 0; i < 100; ++i) {
        const Yard instance = instances::generateCaserta(3 + static_cast<int>(rng.index(3)),
                                                         2 + static_cast<int>(rng.index(3)), rng.nextU64());
        const ExprTree pf = randomPf(rng);
        RelocationRule un{Scheme::UN, {pf}, -1, std::nullopt};
        RelocationRule unp{Scheme::UNP, {pf, parseRule("MIN")}, -1, std::nullopt};
        CHECK(sameMoves(solveLogged(instance, un), solveLogged(instance, unp)));
    }

    // exactly one eligible stack: UNP and UN agree regardless of expression 2
    const Yard yard({{1, 3}, {2}, {9}}, 3);
    RelocationRule unp{Scheme::UNP, {parseRule("SH"), parseRule("(sub SH DUR)")}, -1, std::nullopt};
    RelocationRule un{Scheme::UN, {parseRule("SH")}, -1, std::nullopt};
    CHECK(sameMoves(solveLogged(yard, unp), solveLogged(yard, un)));
}

TEST_CASE("baseline destinations") {
    const Yard yard({{2, 4}, {1, 3}, {}}, 4); // origin s2, CUR=3
    CHECK(baselineChoose(Baseline::TLP, yard, 2, 3) == 3);
    CHECK(baselineChoose(Baseline::RI, yard, 2, 3) == 3); // s1 has one smaller ID, s3 none

    // MinMax branch 1: smallest MIN above CUR
    const Yard spread({{2}, {5}, {9}, {1, 3}}, 2);
    CHECK(baselineChoose(Baseline::MinMax, spread, 4, 3) == 2);
    // MinMax fallback: no MIN above CUR, take the largest
    const Yard low({{1}, {2}, {5, 3}}, 2);
    CHECK(baselineChoose(Baseline::MinMax, low, 3, 3) == 2);
    // empty stacks count as clean placements and win over the fallback
    const Yard withEmpty({{1}, {2}, {}, {5, 3}}, 2);
    CHECK(baselineChoose(Baseline::MinMax, withEmpty, 4, 3) == 3);
}

TEST_CASE("branch-and-bound oracle on tiny yards") {
    CHECK(bnbOptimalRelocations(Yard({{2, 1}}, 2)) == 0);
    CHECK(bnbOptimalRelocations(Yard({{1, 2}, {}}, 2)) == 1);
    CHECK(bnbOptimalRelocations(Yard({{3, 2, 1}, {}, {}}, 3)) == 0);
    CHECK(bnbOptimalRelocations(Yard({{3, 1, 2}, {}, {}}, 3)) == 1);
    CHECK(badlyPlacedCount(Yard({{3, 1, 2}, {}, {}}, 3)) == 1);
    CHECK(badlyPlacedCount(Yard({{1, 3, 2}, {4}}, 4)) == 2);

    // infeasible: single stack, blocked target
    CHECK_THROWS_AS(bnbOptimalRelocations(Yard({{1, 2}}, 2)), Error);
    // budget exhaustion reports instead of spinning
    try {
        bnbOptimalRelocations(instances::generateCaserta(3, 3, 1), 5);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BudgetExceeded);
    }
}

TEST_CASE("scheme relocations never beat the exact optimum") {
    Rng rng(31337);
    int tested = 0;
    while (tested < 60) {
        const int stacks = 2 + static_cast<int>(rng.index(2));
        const int tiers = 2 + static_cast<int>(rng.index(3));
        const int cap = std::min(8, stacks * (tiers - 1));
        if (cap < 1)
            continue;
        const int n = 1 + static_cast<int>(rng.index(cap));
        const Yard yard = instances::generateZhu(stacks, n, tiers, rng.nextU64());
        long optimum;
        try {
            optimum = bnbOptimalRelocations(yard);
        } catch (const Error&) {
            continue; // infeasible under restricted moves
        }
        const ExprTree pf = randomPf(rng);
        for (Scheme scheme : {Scheme::RE, Scheme::REN, Scheme::UN}) {
            RelocationRule rule{scheme, {pf}, -1, std::nullopt};
            try {
                const auto stats = solve(yard, rule);
                CHECK(stats.relocations >= optimum);
                if (optimum == 0)
                    CHECK(stats.relocations == 0);
            } catch (const SolveError&) {
                // heuristic deadlock counts as unbounded cost
            }
        }
        ++tested;
    }
}

TEST_CASE("solve dispatcher basics") {
    const Yard empty({{}, {}}, 2);
    const auto stats = solve(empty, ruleOf(Scheme::RE, "SH"));
    CHECK(stats.relocations == 0);
    CHECK(stats.retrievals == 0);
    CHECK(stats.craneSeconds == 0.0);

    // determinism: identical stats across repeated calls
    const Yard yard = instances::generateCaserta(4, 3, 99);
    const auto a = solveLogged(yard, ruleOf(Scheme::UN, "(add RI DIFF)"));
    const auto b = solveLogged(yard, ruleOf(Scheme::UN, "(add RI DIFF)"));
    CHECK(a.relocations == b.relocations);
    CHECK(a.craneSeconds == b.craneSeconds);
    CHECK(sameMoves(a, b));

    CHECK(objectiveValue(a, Objective::Relocations) == static_cast<double>(a.relocations));
    CHECK(objectiveValue(a, Objective::CraneSeconds) == a.craneSeconds);
}

TEST_CASE("affine rescaling of a priority function never changes the play") {
    // 2*PF + CUR is a positive affine map of PF within every decision
    Rng rng(2718);
    for (int i = 0; i < 100; ++i) {
        const Yard yard = instances::generateCaserta(3 + static_cast<int>(rng.index(3)),
                                                     2 + static_cast<int>(rng.index(3)), rng.nextU64());
        const ExprTree pf = randomPf(rng);
        const std::string text = rules::printRule(pf);
        const ExprTree scaled = parseRule("(add (add " + text + " " + text + ") CUR)");
        for (Scheme scheme : {Scheme::RE, Scheme::REN}) {
            RelocationRule plain{scheme, {pf}, -1, std::nullopt};
            RelocationRule affine{scheme, {scaled}, -1, std::nullopt};
            CHECK(sameMoves(solveLogged(yard, plain), solveLogged(yard, affine)));
        }
    }
}

TEST_CASE("duplicated two-expression rules equal their single-expression form") {
    Rng rng(161803);
    for (int i = 0; i < 100; ++i) {
        const Yard yard = instances::generateCaserta(3 + static_cast<int>(rng.index(3)),
                                                     2 + static_cast<int>(rng.index(3)), rng.nextU64());
        const ExprTree pf = randomPf(rng);
        for (Scheme scheme : {Scheme::RE, Scheme::REN, Scheme::UN, Scheme::UNC}) {
            RelocationRule one{scheme, {pf}, -1, std::nullopt};
            RelocationRule two{scheme, {pf, pf}, -1, std::nullopt};
            CHECK(sameMoves(solveLogged(yard, one), solveLogged(yard, two)));
        }
    }
}

TEST_CASE("rule validation") {
    RelocationRule unt;
    unt.scheme = Scheme::UNT;
    unt.expressions.push_back(parseRule("SH"));
    CHECK_THROWS_AS(unt.validate(), Error);

    RelocationRule crowded = RelocationRule::fromBaseline(Baseline::TLP);
    crowded.expressions.push_back(parseRule("SH"));
    CHECK_THROWS_AS(crowded.validate(), Error);

    RelocationRule bulky;
    bulky.scheme = Scheme::RE;
    bulky.expressions = {parseRule("SH"), parseRule("SH"), parseRule("SH")};
    CHECK_THROWS_AS(bulky.validate(), Error);
}

TEST_CASE("move log export") {
    const SolutionStats stats = solveLogged(Yard({{1, 2}, {}}, 2), ruleOf(Scheme::RE, "SH"));
    const std::string csv = moveLogCsv(stats);
    CHECK(csv.rfind("step,kind,origin,destination,container,seconds\n", 0) == 0);
    CHECK(csv.find("1,relocate,1,2,2,32.4") != std::string::npos);
    CHECK(csv.find("2,retrieve,1,0,1,32.4") != std::string::npos);
    CHECK(csv.find("3,retrieve,2,0,2,34.8") != std::string::npos);
}
