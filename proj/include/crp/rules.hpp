#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crp/core.hpp"

namespace crp::rules {

enum class Func : std::uint8_t { Add, Sub, Mul, ProtDiv };

enum class Terminal : std::uint8_t {
    SH,    // candidate stack height
    EMP,   // free slots on the candidate stack
    CUR,   // ID of the container being relocated
    DUR,   // crane time of the considered move
    RI,    // containers on the candidate with a smaller ID than CUR
    MIN,   // smallest ID on the candidate (sentinel when empty)
    AVG,   // mean ID on the candidate (0 when empty)
    REM,   // containers above the target in its stack
    NEXT,  // candidate holds the next target container
    DIFF,  // MIN - CUR
    EMPTY, // candidate is empty
    WL,    // containers with no larger ID above them
    NL,    // containers with a larger ID above them
    DSM,   // bottom-based tier of the topmost container with ID < CUR
};

inline constexpr int kTerminalCount = 14;
inline constexpr int kFuncCount = 4;
inline constexpr double kProtectedDivEpsilon = 1e-9;

std::string_view funcName(Func f);
std::string_view terminalName(Terminal t);

/// All 14 terminals in Table-order.
const std::vector<Terminal>& allTerminals();
/// Named subsets: "all", "RE-R" (SH,RI,EMP,DIFF,AVG,CUR), "UN-R"
/// (SH,EMP,DIFF,RI), or a comma-separated terminal list.
std::vector<Terminal> terminalSetFromName(const std::string& name);

/// One expression node in prefix order. Functions are binary, terminals leaves.
struct Node {
    std::uint8_t code;

    static Node function(Func f) { return Node{static_cast<std::uint8_t>(f)}; }
    static Node terminal(Terminal t) { return Node{static_cast<std::uint8_t>(kFuncCount + static_cast<int>(t))}; }
    bool isFunction() const { return code < kFuncCount; }
    Func func() const { return static_cast<Func>(code); }
    Terminal terminal() const { return static_cast<Terminal>(code - kFuncCount); }
    int arity() const { return isFunction() ? 2 : 0; }
    bool operator==(const Node&) const = default;
};

/// Priority function stored as a prefix-ordered node vector. A subtree is a
/// contiguous range, which keeps genetic surgery and evaluation cheap. The
/// depth cache is maintained by every mutating helper.
class ExprTree {
public:
    ExprTree() : nodes_{Node::terminal(Terminal::SH)}, depth_(0) {}
    explicit ExprTree(std::vector<Node> prefixNodes);

    static ExprTree leaf(Terminal t) { return ExprTree({Node::terminal(t)}); }

    const std::vector<Node>& nodes() const { return nodes_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    int depth() const { return depth_; }

    /// Length of the subtree rooted at node index `at`.
    int subtreeLength(int at) const;
    /// Depth of node `at` below the root.
    int nodeDepth(int at) const;
    /// Depth of the subtree rooted at `at` (single node = 0).
    int subtreeDepth(int at) const;

    /// Replaces the subtree rooted at `at` with `replacement` (prefix nodes).
    void replaceSubtree(int at, std::span<const Node> replacement);
    /// Makes the subtree rooted at `at` the whole tree.
    void hoistSubtree(int at);
    void setNode(int at, Node node);
    /// Swaps the two children of the function node at `at`.
    void swapChildren(int at);

    bool operator==(const ExprTree&) const = default;

private:
    void recompute();
    std::vector<Node> nodes_;
    int depth_ = 0;
};

/// Everything a terminal may look at while one candidate stack is scored.
/// Values are memoised per context; contexts are throwaway per decision.
struct EvalContext {
    const Yard* yard = nullptr;
    int candidateStack = 0;
    int originStack = 0;
    int currentContainer = 0;
    int targetContainer = 0;
    int nextTarget = 0; // 0 when absent
    TimeModel time{};

    mutable std::array<double, kTerminalCount> cache{};
    mutable std::uint16_t cachedMask = 0;

    EvalContext(const Yard& y, int candidate, int origin, int current, const TimeModel& tm);
};

/// Table-I semantics; total over valid contexts.
double evalTerminal(Terminal t, const EvalContext& ctx);

/// Recursive evaluation with protected division. Any non-finite intermediate
/// turns the whole value into +infinity so ranking can discard the stack.
double evalExpr(const ExprTree& tree, const EvalContext& ctx);

inline double protectedDiv(double a, double b) {
    return (b <= kProtectedDivEpsilon && b >= -kProtectedDivEpsilon) ? 1.0 : a / b;
}

/// Parenthesised prefix text, e.g. "(add SH (mul EMP RI))". Case-insensitive
/// on input; canonical output is lowercase functions, uppercase terminals.
ExprTree parseRule(const std::string& text);
std::string printRule(const ExprTree& tree);

} // namespace crp::rules
