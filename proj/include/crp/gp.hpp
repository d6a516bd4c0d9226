#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "crp/rng.hpp"
#include "crp/rules.hpp"
#include "crp/schemes.hpp"

namespace crp::gp {

enum class CrossoverOp { Subtree, Uniform, ContextPreserving, SizeFair, OnePoint };
enum class MutationOp { Subtree, Hoist, NodeComplement, NodeReplacement, Permutation, Shrink };

const char* crossoverName(CrossoverOp op);
const char* mutationName(MutationOp op);

struct Individual {
    std::vector<rules::ExprTree> trees; // 1 or 2
    double fitness = 0.0;
    std::pair<double, double> objectives{0.0, 0.0}; // (relocations, craneSeconds)
    bool evaluated = false;
};

struct GpConfig {
    int populationSize = 1000;
    int maxDepth = 5;
    double mutationProbability = -1.0; // -1 = scheme default (0.3 restricted, 0.1 unrestricted)
    long maxEvaluations = 50000;
    schemes::Scheme scheme = schemes::Scheme::RE;
    schemes::Objective objective = schemes::Objective::Relocations;
    std::vector<rules::Terminal> terminalSet = rules::allTerminals();
    std::vector<CrossoverOp> crossoverOperators{CrossoverOp::Subtree, CrossoverOp::Uniform,
                                                CrossoverOp::ContextPreserving, CrossoverOp::SizeFair,
                                                CrossoverOp::OnePoint};
    std::vector<MutationOp> mutationOperators{MutationOp::Subtree,        MutationOp::Hoist,
                                              MutationOp::NodeComplement, MutationOp::NodeReplacement,
                                              MutationOp::Permutation,    MutationOp::Shrink};
    int tournamentSize = 3;
    std::uint64_t seed = 1;
    int expressionsPerIndividual = 1; // 2 for UNT/UNP and min-of-two rules
    int pairMoveCap = -1;
    long checkpointInterval = 1000;
    int jobs = 1;
    bool generational = false;
    TimeModel time{};

    double resolvedMutationProbability() const;
    void validate() const;
    schemes::RelocationRule ruleFor(const Individual& individual) const;
};

/// Deadlock on any training instance buys this instead of a real score.
inline constexpr double kDeadlockPenalty = 1e15;

/// Depth-capped random tree. Nodes above minDepth are forced to functions,
/// nodes at maxDepth to terminals; `full` keeps functions until maxDepth.
rules::ExprTree randomTree(Rng& rng, const std::vector<rules::Terminal>& terminals, int minDepth, int maxDepth,
                           bool full);

/// Ramped half-and-half over depths 2..maxDepth; duplicates permitted.
std::vector<Individual> initPopulation(const GpConfig& config, Rng& rng);

/// (total relocations, total crane seconds) of one rule across a set,
/// 1e15 pair when any instance deadlocks. Parallel over instances when
/// jobs > 1; per-instance results reduce in instance order either way.
std::pair<double, double> evaluateRule(const schemes::RelocationRule& rule, const std::vector<Yard>& instances,
                                       int jobs = 1, const TimeModel& time = {});

/// Evaluates and stamps fitness (and the objective pair) on the individual.
double fitness(Individual& individual, const std::vector<Yard>& trainSet, const GpConfig& config);

rules::ExprTree crossover(const rules::ExprTree& a, const rules::ExprTree& b, CrossoverOp op, Rng& rng,
                          const GpConfig& config);
rules::ExprTree mutate(const rules::ExprTree& tree, MutationOp op, Rng& rng, const GpConfig& config);

struct CheckpointRow {
    long evaluations;
    double bestTrain;
    std::optional<double> validation;
};

struct EvolveResult {
    Individual bestTrain;
    std::optional<Individual> bestValidation;
    std::vector<CheckpointRow> log;
    long evaluations = 0;
};

/// Steady-state GP: each step draws tournamentSize distinct individuals, mates
/// the two best with a uniformly chosen crossover, mutates with the configured
/// probability, and the child replaces the tournament's worst. Validation, if
/// given, is used for checkpoint model selection only.
EvolveResult evolve(const GpConfig& config, const std::vector<Yard>& trainSet,
                    const std::vector<Yard>* validationSet = nullptr);

/// Generational NSGA-II over (relocations, craneSeconds); returns the final
/// rank-0 front.
std::vector<Individual> nsga2(const GpConfig& config, const std::vector<Yard>& trainSet);

/// 0-based Pareto ranks (rank 0 = non-dominated), minimisation on both axes.
std::vector<int> nondominatedRanks(const std::vector<std::pair<double, double>>& points);
/// Crowding distances within one front (indices into `points`).
std::vector<double> crowdingDistances(const std::vector<std::pair<double, double>>& points,
                                      const std::vector<int>& front);

} // namespace crp::gp
