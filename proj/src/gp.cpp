#include "crp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace crp::gp {

using rules::ExprTree;
using rules::Func;
using rules::Node;
using rules::Terminal;

const char* crossoverName(CrossoverOp op) {
    switch (op) {
    case CrossoverOp::Subtree: return "subtree";
    case CrossoverOp::Uniform: return "uniform";
    case CrossoverOp::ContextPreserving: return "contextPreserving";
    case CrossoverOp::SizeFair: return "sizeFair";
    case CrossoverOp::OnePoint: return "onePoint";
    }
    return "?";
}

const char* mutationName(MutationOp op) {
    switch (op) {
    case MutationOp::Subtree: return "subtree";
    case MutationOp::Hoist: return "hoist";
    case MutationOp::NodeComplement: return "nodeComplement";
    case MutationOp::NodeReplacement: return "nodeReplacement";
    case MutationOp::Permutation: return "permutation";
    case MutationOp::Shrink: return "shrink";
    }
    return "?";
}

double GpConfig::resolvedMutationProbability() const {
    if (mutationProbability >= 0.0)
        return mutationProbability;
    return schemes::isRestricted(scheme) ? 0.3 : 0.1;
}

void GpConfig::validate() const {
    if (tournamentSize < 2)
        throw Error(ErrorKind::ConfigError, "tournamentSize must be at least 2");
    if (populationSize < tournamentSize)
        throw Error(ErrorKind::ConfigError, "populationSize must be >= tournamentSize");
    if (maxEvaluations < populationSize)
        throw Error(ErrorKind::ConfigError, "maxEvaluations must cover the initial population");
    if (maxDepth < 2)
        throw Error(ErrorKind::ConfigError, "maxDepth must be at least 2");
    const double p = resolvedMutationProbability();
    if (p < 0.0 || p > 1.0)
        throw Error(ErrorKind::ConfigError, "mutationProbability must lie in [0, 1]");
    if (terminalSet.empty())
        throw Error(ErrorKind::ConfigError, "terminal set is empty");
    if (crossoverOperators.empty() || mutationOperators.empty())
        throw Error(ErrorKind::ConfigError, "operator lists must not be empty");
    if (expressionsPerIndividual != 1 && expressionsPerIndividual != 2)
        throw Error(ErrorKind::ConfigError, "individuals carry 1 or 2 expressions");
    if ((scheme == schemes::Scheme::UNT || scheme == schemes::Scheme::UNP) && expressionsPerIndividual != 2)
        throw Error(ErrorKind::ConfigError,
                    std::string(schemes::schemeName(scheme)) + " needs two expressions per individual");
    if (checkpointInterval < 1)
        throw Error(ErrorKind::ConfigError, "checkpointInterval must be positive");
    if (jobs < 1)
        throw Error(ErrorKind::ConfigError, "jobs must be positive");
}

schemes::RelocationRule GpConfig::ruleFor(const Individual& individual) const {
    schemes::RelocationRule rule;
    rule.scheme = scheme;
    rule.expressions = individual.trees;
    rule.pairMoveCap = pairMoveCap;
    return rule;
}

ExprTree randomTree(Rng& rng, const std::vector<Terminal>& terminals, int minDepth, int maxDepth, bool full) {
    std::vector<Node> nodes;
    // explicit work stack of remaining depths, preorder
    struct Pending {
        int depth;
    };
    std::vector<Pending> work{{0}};
    while (!work.empty()) {
        const int depth = work.back().depth;
        work.pop_back();
        bool function;
        if (depth >= maxDepth)
            function = false;
        else if (depth < minDepth)
            function = true;
        else if (full)
            function = true;
        else
            function = rng.index(rules::kFuncCount + terminals.size()) < rules::kFuncCount;
        if (function) {
            nodes.push_back(Node::function(static_cast<Func>(rng.index(rules::kFuncCount))));
            work.push_back({depth + 1});
            work.push_back({depth + 1});
        } else {
            nodes.push_back(Node::terminal(terminals[rng.index(terminals.size())]));
        }
    }
    return ExprTree(std::move(nodes));
}

std::vector<Individual> initPopulation(const GpConfig& config, Rng& rng) {
    std::vector<Individual> population;
    population.reserve(config.populationSize);
    const int minInit = 2;
    for (int i = 0; i < config.populationSize; ++i) {
        const int depth = minInit + static_cast<int>(i % (config.maxDepth - minInit + 1));
        const bool full = (i / (config.maxDepth - minInit + 1)) % 2 == 0;
        Individual individual;
        for (int t = 0; t < config.expressionsPerIndividual; ++t)
            individual.trees.push_back(randomTree(rng, config.terminalSet, minInit, depth, full));
        population.push_back(std::move(individual));
    }
    return population;
}

std::pair<double, double> evaluateRule(const schemes::RelocationRule& rule, const std::vector<Yard>& instances,
                                       int jobs, const TimeModel& time) {
    const std::size_t n = instances.size();
    std::vector<std::pair<double, double>> results(n);
    std::vector<char> failed(n, 0);

    auto runRange = [&](std::size_t begin, std::size_t end) {
        schemes::SolveOptions options;
        options.time = time;
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const SolutionStats stats = schemes::solve(instances[i], rule, options);
                results[i] = {static_cast<double>(stats.relocations), stats.craneSeconds};
            } catch (const Error&) {
                failed[i] = 1;
            }
        }
    };

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
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

    for (std::size_t i = 0; i < n; ++i)
        if (failed[i])
            return {kDeadlockPenalty, kDeadlockPenalty};
    std::pair<double, double> totals{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) { // fixed-order reduction keeps parallel runs bit-identical
        totals.first += results[i].first;
        totals.second += results[i].second;
    }
    return totals;
}

double fitness(Individual& individual, const std::vector<Yard>& trainSet, const GpConfig& config) {
    if (trainSet.empty())
        throw Error(ErrorKind::ConfigError, "training set is empty");
    individual.objectives = evaluateRule(config.ruleFor(individual), trainSet, config.jobs, config.time);
    individual.fitness = config.objective == schemes::Objective::Relocations ? individual.objectives.first
                                                                             : individual.objectives.second;
    individual.evaluated = true;
    return individual.fitness;
}

namespace {

/// Child coordinate path (0/1 per level) of node `at`.
std::vector<int> pathOf(const ExprTree& tree, int at) {
    std::vector<int> path;
    int i = 0;
    while (i != at) {
        const int left = i + 1;
        const int leftLen = tree.subtreeLength(left);
        if (at < left + leftLen) {
            path.push_back(0);
            i = left;
        } else {
            path.push_back(1);
            i = left + leftLen;
        }
    }
    return path;
}

/// Node index at `path`, or -1 when the tree has no node there.
int resolvePath(const ExprTree& tree, const std::vector<int>& path) {
    int i = 0;
    for (int dir : path) {
        if (!tree.nodes()[i].isFunction())
            return -1;
        const int left = i + 1;
        i = dir == 0 ? left : left + tree.subtreeLength(left);
    }
    return i;
}

std::span<const Node> subtreeSpan(const ExprTree& tree, int at) {
    return {tree.nodes().data() + at, static_cast<std::size_t>(tree.subtreeLength(at))};
}

/// Pairs of node indices forming the common region of two trees.
void commonRegion(const ExprTree& a, int ai, const ExprTree& b, int bi, std::vector<std::pair<int, int>>& out) {
    out.emplace_back(ai, bi);
    if (a.nodes()[ai].isFunction() && b.nodes()[bi].isFunction()) {
        const int aLeft = ai + 1, bLeft = bi + 1;
        commonRegion(a, aLeft, b, bLeft, out);
        commonRegion(a, aLeft + a.subtreeLength(aLeft), b, bLeft + b.subtreeLength(bLeft), out);
    }
}

void uniformMerge(const ExprTree& a, int ai, const ExprTree& b, int bi, Rng& rng, std::vector<Node>& out) {
    const Node na = a.nodes()[ai], nb = b.nodes()[bi];
    if (na.arity() == nb.arity()) {
        if (!na.isFunction()) {
            out.push_back(rng.chance(0.5) ? na : nb);
            return;
        }
        out.push_back(rng.chance(0.5) ? na : nb);
        const int aLeft = ai + 1, bLeft = bi + 1;
        uniformMerge(a, aLeft, b, bLeft, rng, out);
        uniformMerge(a, aLeft + a.subtreeLength(aLeft), b, bLeft + b.subtreeLength(bLeft), rng, out);
        return;
    }
    // boundary: arities differ, take one whole subtree
    const auto span = rng.chance(0.5) ? subtreeSpan(a, ai) : subtreeSpan(b, bi);
    out.insert(out.end(), span.begin(), span.end());
}

ExprTree crossoverOnce(const ExprTree& a, const ExprTree& b, CrossoverOp op, Rng& rng) {
    switch (op) {
    case CrossoverOp::Subtree: {
        ExprTree child = a;
        const int at = static_cast<int>(rng.index(a.size()));
        const int from = static_cast<int>(rng.index(b.size()));
        child.replaceSubtree(at, subtreeSpan(b, from));
        return child;
    }
    case CrossoverOp::Uniform: {
        std::vector<Node> nodes;
        nodes.reserve(std::max(a.size(), b.size()));
        uniformMerge(a, 0, b, 0, rng, nodes);
        return ExprTree(std::move(nodes));
    }
    case CrossoverOp::ContextPreserving: {
        // point drawn in the first parent; succeeds when the second parent
        // has a node at the same coordinates
        const int at = static_cast<int>(rng.index(a.size()));
        const int bAt = resolvePath(b, pathOf(a, at));
        if (bAt < 0)
            return a;
        ExprTree child = a;
        child.replaceSubtree(at, subtreeSpan(b, bAt));
        return child;
    }
    case CrossoverOp::SizeFair: {
        const int at = static_cast<int>(rng.index(a.size()));
        const int removed = a.subtreeLength(at);
        std::vector<int> candidates;
        for (int i = 0; i < b.size(); ++i)
            if (b.subtreeLength(i) <= 2 * removed + 1)
                candidates.push_back(i);
        if (candidates.empty())
            return a;
        ExprTree child = a;
        child.replaceSubtree(at, subtreeSpan(b, candidates[rng.index(candidates.size())]));
        return child;
    }
    case CrossoverOp::OnePoint: {
        std::vector<std::pair<int, int>> region;
        commonRegion(a, 0, b, 0, region);
        const auto [ai, bi] = region[rng.index(region.size())];
        ExprTree child = a;
        child.replaceSubtree(ai, subtreeSpan(b, bi));
        return child;
    }
    }
    return a;
}

} // namespace

ExprTree crossover(const ExprTree& a, const ExprTree& b, CrossoverOp op, Rng& rng, const GpConfig& config) {
    for (int attempt = 0; attempt < 5; ++attempt) {
        ExprTree child = crossoverOnce(a, b, op, rng);
        if (child.depth() <= config.maxDepth)
            return child;
    }
    return a; // depth-legal fallback: copy of the first (better) parent
}

ExprTree mutate(const ExprTree& tree, MutationOp op, Rng& rng, const GpConfig& config) {
    ExprTree out = tree;
    switch (op) {
    case MutationOp::Subtree: {
        const int at = static_cast<int>(rng.index(out.size()));
        const int room = config.maxDepth - out.nodeDepth(at);
        const ExprTree replacement = randomTree(rng, config.terminalSet, 0, std::max(0, room), false);
        out.replaceSubtree(at, replacement.nodes());
        break;
    }
    case MutationOp::Hoist:
        out.hoistSubtree(static_cast<int>(rng.index(out.size())));
        break;
    case MutationOp::NodeComplement: {
        std::vector<int> functions;
        for (int i = 0; i < out.size(); ++i)
            if (out.nodes()[i].isFunction())
                functions.push_back(i);
        if (functions.empty())
            break;
        const int at = functions[rng.index(functions.size())];
        static constexpr Func complement[] = {Func::Sub, Func::Add, Func::ProtDiv, Func::Mul};
        out.setNode(at, Node::function(complement[static_cast<int>(out.nodes()[at].func())]));
        break;
    }
    case MutationOp::NodeReplacement: {
        const int at = static_cast<int>(rng.index(out.size()));
        if (out.nodes()[at].isFunction())
            out.setNode(at, Node::function(static_cast<Func>(rng.index(rules::kFuncCount))));
        else
            out.setNode(at, Node::terminal(config.terminalSet[rng.index(config.terminalSet.size())]));
        break;
    }
    case MutationOp::Permutation: {
        std::vector<int> functions;
        for (int i = 0; i < out.size(); ++i)
            if (out.nodes()[i].isFunction())
                functions.push_back(i);
        if (functions.empty())
            break;
        out.swapChildren(functions[rng.index(functions.size())]);
        break;
    }
    case MutationOp::Shrink: {
        std::vector<int> functions;
        for (int i = 0; i < out.size(); ++i)
            if (out.nodes()[i].isFunction())
                functions.push_back(i);
        const Node leaf = Node::terminal(config.terminalSet[rng.index(config.terminalSet.size())]);
        const int at = functions.empty() ? 0 : functions[rng.index(functions.size())];
        out.replaceSubtree(at, std::span<const Node>(&leaf, 1));
        break;
    }
    }
    return out;
}

namespace {

Individual makeChild(const Individual& bestParent, const Individual& otherParent, Rng& rng, const GpConfig& config) {
    const CrossoverOp cx = config.crossoverOperators[rng.index(config.crossoverOperators.size())];
    Individual child;
    for (std::size_t t = 0; t < bestParent.trees.size(); ++t)
        child.trees.push_back(crossover(bestParent.trees[t], otherParent.trees[t], cx, rng, config));
    if (rng.chance(config.resolvedMutationProbability())) {
        const MutationOp mu = config.mutationOperators[rng.index(config.mutationOperators.size())];
        for (auto& tree : child.trees)
            tree = mutate(tree, mu, rng, config);
    }
    return child;
}

/// Winner (best fitness, ties to the lower index) of a drawn tournament.
std::size_t tournamentWinner(const std::vector<Individual>& population, int size, Rng& rng) {
    std::size_t best = rng.index(population.size());
    for (int i = 1; i < size; ++i) {
        const std::size_t other = rng.index(population.size());
        if (population[other].fitness < population[best].fitness ||
            (population[other].fitness == population[best].fitness && other < best))
            best = other;
    }
    return best;
}

} // namespace

EvolveResult evolve(const GpConfig& config, const std::vector<Yard>& trainSet,
                    const std::vector<Yard>* validationSet) {
    config.validate();
    Rng rng(config.seed);
    std::vector<Individual> population = initPopulation(config, rng);

    EvolveResult result;
    long evals = 0;
    std::size_t bestIdx = 0;
    for (std::size_t i = 0; i < population.size(); ++i) {
        fitness(population[i], trainSet, config);
        ++evals;
        if (population[i].fitness < population[bestIdx].fitness)
            bestIdx = i;
    }
    result.bestTrain = population[bestIdx];
    double bestValidationFitness = std::numeric_limits<double>::infinity();

    auto checkpoint = [&](long atEvals) {
        CheckpointRow row{atEvals, result.bestTrain.fitness, std::nullopt};
        if (validationSet) {
            Individual probe = result.bestTrain;
            const auto totals = evaluateRule(config.ruleFor(probe), *validationSet, config.jobs, config.time);
            const double v = config.objective == schemes::Objective::Relocations ? totals.first : totals.second;
            row.validation = v;
            if (v < bestValidationFitness) {
                bestValidationFitness = v;
                probe.fitness = v;
                probe.objectives = totals;
                result.bestValidation = std::move(probe);
            }
        }
        result.log.push_back(row);
    };
    checkpoint(evals);

    if (config.generational) {
        while (evals < config.maxEvaluations) {
            std::vector<Individual> next;
            next.reserve(config.populationSize);
            next.push_back(result.bestTrain); // elitism
            while (static_cast<int>(next.size()) < config.populationSize && evals < config.maxEvaluations) {
                const std::size_t pa = tournamentWinner(population, config.tournamentSize, rng);
                const std::size_t pb = tournamentWinner(population, config.tournamentSize, rng);
                Individual child = makeChild(population[pa], population[pb], rng, config);
                fitness(child, trainSet, config);
                ++evals;
                if (child.fitness < result.bestTrain.fitness)
                    result.bestTrain = child;
                next.push_back(std::move(child));
                if (evals % config.checkpointInterval == 0)
                    checkpoint(evals);
            }
            while (static_cast<int>(next.size()) < config.populationSize)
                next.push_back(result.bestTrain);
            population = std::move(next);
        }
    } else {
        std::vector<std::size_t> drawn;
        while (evals < config.maxEvaluations) {
            // tournamentSize distinct individuals, uniformly
            drawn.clear();
            while (drawn.size() < static_cast<std::size_t>(config.tournamentSize)) {
                const std::size_t pick = rng.index(population.size());
                if (std::find(drawn.begin(), drawn.end(), pick) == drawn.end())
                    drawn.push_back(pick);
            }
            std::sort(drawn.begin(), drawn.end(), [&](std::size_t x, std::size_t y) {
                if (population[x].fitness != population[y].fitness)
                    return population[x].fitness < population[y].fitness;
                return x < y;
            });
            const std::size_t victim = drawn.back();
            Individual child = makeChild(population[drawn[0]], population[drawn[1]], rng, config);
            fitness(child, trainSet, config);
            ++evals;
            if (child.fitness < result.bestTrain.fitness)
                result.bestTrain = child;
            population[victim] = std::move(child);
            if (evals % config.checkpointInterval == 0 || evals == config.maxEvaluations)
                checkpoint(evals);
        }
    }

    if (result.log.empty() || result.log.back().evaluations != evals)
        checkpoint(evals);
    result.evaluations = evals;
    return result;
}

std::vector<int> nondominatedRanks(const std::vector<std::pair<double, double>>& points) {
    const std::size_t n = points.size();
    auto dominates = [&](std::size_t i, std::size_t j) {
        return points[i].first <= points[j].first && points[i].second <= points[j].second &&
               (points[i].first < points[j].first || points[i].second < points[j].second);
    };
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> dominatorCount(n, 0), rank(n, 0);
    std::vector<int> front;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            if (dominates(i, j))
                dominated[i].push_back(static_cast<int>(j));
            else if (dominates(j, i))
                ++dominatorCount[i];
        }
        if (dominatorCount[i] == 0)
            front.push_back(static_cast<int>(i));
    }
    int level = 0;
    while (!front.empty()) {
        std::vector<int> next;
        for (int i : front) {
            rank[i] = level;
            for (int j : dominated[i])
                if (--dominatorCount[j] == 0)
                    next.push_back(j);
        }
        front = std::move(next);
        ++level;
    }
    return rank;
}

std::vector<double> crowdingDistances(const std::vector<std::pair<double, double>>& points,
                                      const std::vector<int>& front) {
    std::vector<double> distance(points.size(), 0.0);
    if (front.empty())
        return distance;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 2; ++axis) {
        auto value = [&](int i) { return axis == 0 ? points[i].first : points[i].second; };
        std::vector<int> order = front;
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            if (value(x) != value(y))
                return value(x) < value(y);
            return x < y;
        });
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        const double span = value(order.back()) - value(order.front());
        if (span <= 0.0)
            continue;
        for (std::size_t k = 1; k + 1 < order.size(); ++k)
            if (distance[order[k]] != inf)
                distance[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / span;
    }
    return distance;
}

std::vector<Individual> nsga2(const GpConfig& config, const std::vector<Yard>& trainSet) {
    config.validate();
    Rng rng(config.seed);
    std::vector<Individual> population = initPopulation(config, rng);
    long evals = 0;
    for (auto& individual : population) {
        fitness(individual, trainSet, config);
        ++evals;
    }

    auto pointsOf = [](const std::vector<Individual>& pop) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(pop.size());
        for (const auto& ind : pop)
            pts.push_back(ind.objectives);
        return pts;
    };

    std::vector<int> ranks = nondominatedRanks(pointsOf(population));
    std::vector<double> crowding(population.size(), 0.0);
    {
        const auto pts = pointsOf(population);
        std::vector<std::vector<int>> fronts;
        for (std::size_t i = 0; i < population.size(); ++i) {
            if (static_cast<std::size_t>(ranks[i]) >= fronts.size())
                fronts.resize(ranks[i] + 1);
            fronts[ranks[i]].push_back(static_cast<int>(i));
        }
        for (const auto& front : fronts) {
            const auto d = crowdingDistances(pts, front);
            for (int i : front)
                crowding[i] = d[i];
        }
    }

    auto binaryTournament = [&]() {
        const std::size_t a = rng.index(population.size());
        const std::size_t b = rng.index(population.size());
        if (ranks[a] != ranks[b])
            return ranks[a] < ranks[b] ? a : b;
        if (crowding[a] != crowding[b])
            return crowding[a] > crowding[b] ? a : b;
        return std::min(a, b);
    };

    while (evals < config.maxEvaluations) {
        const long budget = std::min<long>(config.populationSize, config.maxEvaluations - evals);
        std::vector<Individual> offspring;
        offspring.reserve(budget);
        for (long i = 0; i < budget; ++i) {
            const std::size_t pa = binaryTournament();
            const std::size_t pb = binaryTournament();
            const std::size_t first = population[pa].fitness <= population[pb].fitness ? pa : pb;
            const std::size_t second = first == pa ? pb : pa;
            Individual child = makeChild(population[first], population[second], rng, config);
            fitness(child, trainSet, config);
            ++evals;
            offspring.push_back(std::move(child));
        }

        std::vector<Individual> combined = std::move(population);
        combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                        std::make_move_iterator(offspring.end()));
        const auto pts = pointsOf(combined);
        const auto combinedRanks = nondominatedRanks(pts);
        std::vector<std::vector<int>> fronts;
        for (std::size_t i = 0; i < combined.size(); ++i) {
            if (static_cast<std::size_t>(combinedRanks[i]) >= fronts.size())
                fronts.resize(combinedRanks[i] + 1);
            fronts[combinedRanks[i]].push_back(static_cast<int>(i));
        }

        population.clear();
        ranks.clear();
        crowding.assign(combined.size(), 0.0);
        std::vector<int> chosen;
        for (const auto& front : fronts) {
            const auto d = crowdingDistances(pts, front);
            if (chosen.size() + front.size() <= static_cast<std::size_t>(config.populationSize)) {
                for (int i : front) {
                    chosen.push_back(i);
                    crowding[i] = d[i];
                }
            } else {
                std::vector<int> order = front;
                std::sort(order.begin(), order.end(), [&](int x, int y) {
                    if (d[x] != d[y])
                        return d[x] > d[y];
                    return x < y;
                });
                for (int i : order) {
                    if (chosen.size() == static_cast<std::size_t>(config.populationSize))
                        break;
                    chosen.push_back(i);
                    crowding[i] = d[i];
                }
            }
            if (chosen.size() == static_cast<std::size_t>(config.populationSize))
                break;
        }
        std::vector<double> newCrowding;
        for (int i : chosen) {
            population.push_back(std::move(combined[i]));
            ranks.push_back(combinedRanks[i]);
            newCrowding.push_back(crowding[i]);
        }
        crowding = std::move(newCrowding);
    }

    const auto finalRanks = nondominatedRanks(pointsOf(population));
    std::vector<Individual> frontier;
    for (std::size_t i = 0; i < population.size(); ++i)
        if (finalRanks[i] == 0)
            frontier.push_back(population[i]);
    return frontier;
}

} // namespace crp::gp
