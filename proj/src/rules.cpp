#include "crp/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace crp::rules {

std::string_view funcName(Func f) {
    switch (f) {
    case Func::Add: return "add";
    case Func::Sub: return "sub";
    case Func::Mul: return "mul";
    case Func::ProtDiv: return "div";
    }
    return "?";
}

std::string_view terminalName(Terminal t) {
    static constexpr std::string_view names[kTerminalCount] = {
        "SH", "EMP", "CUR", "DUR", "RI", "MIN", "AVG", "REM", "NEXT", "DIFF", "EMPTY", "WL", "NL", "DSM"};
    return names[static_cast<int>(t)];
}

const std::vector<Terminal>& allTerminals() {
    static const std::vector<Terminal> all = [] {
        std::vector<Terminal> v;
        for (int i = 0; i < kTerminalCount; ++i)
            v.push_back(static_cast<Terminal>(i));
        return v;
    }();
    return all;
}

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

bool lookupTerminal(const std::string& name, Terminal& out) {
    const std::string u = upper(name);
    for (Terminal t : allTerminals())
        if (terminalName(t) == u) {
            out = t;
            return true;
        }
    return false;
}

} // namespace

std::vector<Terminal> terminalSetFromName(const std::string& name) {
    const std::string u = upper(name);
    if (u.empty() || u == "ALL")
        return allTerminals();
    if (u == "RE-R")
        return {Terminal::SH, Terminal::RI, Terminal::EMP, Terminal::DIFF, Terminal::AVG, Terminal::CUR};
    if (u == "UN-R")
        return {Terminal::SH, Terminal::EMP, Terminal::DIFF, Terminal::RI};

    std::vector<Terminal> set;
    std::istringstream in(name);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        Terminal t;
        if (!lookupTerminal(tok, t))
            throw Error(ErrorKind::UnknownTerminal, "'" + tok + "' in terminal set '" + name + "'");
        if (std::find(set.begin(), set.end(), t) == set.end())
            set.push_back(t);
    }
    if (set.empty())
        throw Error(ErrorKind::ConfigError, "terminal set '" + name + "' is empty");
    return set;
}

ExprTree::ExprTree(std::vector<Node> prefixNodes) : nodes_(std::move(prefixNodes)) {
    if (nodes_.empty())
        throw Error(ErrorKind::ParseError, "expression needs at least one node");
    recompute();
}

int ExprTree::subtreeLength(int at) const {
    int need = 1, i = at;
    while (need > 0) {
        need += nodes_[i].arity() - 1;
        ++i;
    }
    return i - at;
}

int ExprTree::nodeDepth(int at) const {
    // walk from the root, descending into whichever child range contains `at`
    int depth = 0, i = 0;
    while (i != at) {
        // i is an ancestor function node; find the child covering `at`
        int child = i + 1;
        while (child + subtreeLength(child) <= at)
            child += subtreeLength(child);
        i = child;
        ++depth;
    }
    return depth;
}

int ExprTree::subtreeDepth(int at) const {
    const int end = at + subtreeLength(at);
    int depth = 0;
    // relative depth via a small explicit stack of pending child counts
    int level = 0;
    std::vector<int> pending;
    for (int i = at; i < end; ++i) {
        depth = std::max(depth, level);
        if (nodes_[i].isFunction()) {
            pending.push_back(2);
            ++level;
        } else {
            while (!pending.empty() && --pending.back() == 0) {
                pending.pop_back();
                --level;
            }
        }
    }
    return depth;
}

void ExprTree::recompute() {
    // strict prefix well-formedness: exactly one tree, no trailing nodes
    int need = 1;
    for (const Node& n : nodes_) {
        if (need == 0)
            throw Error(ErrorKind::ParseError, "trailing nodes after complete expression");
        need += n.arity() - 1;
    }
    if (need != 0)
        throw Error(ErrorKind::ParseError, "truncated expression");
    depth_ = subtreeDepth(0);
}

void ExprTree::replaceSubtree(int at, std::span<const Node> replacement) {
    const int len = subtreeLength(at);
    std::vector<Node> next;
    next.reserve(nodes_.size() - len + replacement.size());
    next.insert(next.end(), nodes_.begin(), nodes_.begin() + at);
    next.insert(next.end(), replacement.begin(), replacement.end());
    next.insert(next.end(), nodes_.begin() + at + len, nodes_.end());
    nodes_ = std::move(next);
    recompute();
}

void ExprTree::hoistSubtree(int at) {
    const int len = subtreeLength(at);
    std::vector<Node> next(nodes_.begin() + at, nodes_.begin() + at + len);
    nodes_ = std::move(next);
    recompute();
}

void ExprTree::setNode(int at, Node node) {
    if (nodes_[at].arity() != node.arity())
        throw Error(ErrorKind::ConfigError, "node replacement must preserve arity");
    nodes_[at] = node;
}

void ExprTree::swapChildren(int at) {
    if (!nodes_[at].isFunction())
        throw Error(ErrorKind::ConfigError, "cannot swap children of a terminal");
    const int left = at + 1;
    const int leftLen = subtreeLength(left);
    const int right = left + leftLen;
    const int rightLen = subtreeLength(right);
    std::vector<Node> next;
    next.reserve(nodes_.size());
    next.insert(next.end(), nodes_.begin(), nodes_.begin() + left);
    next.insert(next.end(), nodes_.begin() + right, nodes_.begin() + right + rightLen);
    next.insert(next.end(), nodes_.begin() + left, nodes_.begin() + left + leftLen);
    next.insert(next.end(), nodes_.begin() + right + rightLen, nodes_.end());
    nodes_ = std::move(next);
}

EvalContext::EvalContext(const Yard& y, int candidate, int origin, int current, const TimeModel& tm)
    : yard(&y), candidateStack(candidate), originStack(origin), currentContainer(current),
      targetContainer(y.targetContainer()), nextTarget(y.nextTarget()), time(tm) {}

double evalTerminal(Terminal t, const EvalContext& ctx) {
    const std::uint16_t bit = static_cast<std::uint16_t>(1u << static_cast<int>(t));
    if (ctx.cachedMask & bit)
        return ctx.cache[static_cast<int>(t)];

    const Yard& yard = *ctx.yard;
    const int cs = ctx.candidateStack;
    const auto stack = yard.stack(cs);
    double value = 0.0;
    switch (t) {
    case Terminal::SH:
        value = static_cast<double>(stack.size());
        break;
    case Terminal::EMP:
        value = static_cast<double>(yard.maxHeight() - static_cast<int>(stack.size()));
        break;
    case Terminal::CUR:
        value = ctx.currentContainer;
        break;
    case Terminal::DUR:
        value = ctx.time.moveTime(yard.cranePosition(), ctx.originStack, cs);
        break;
    case Terminal::RI: {
        int count = 0;
        for (int id : stack)
            count += id < ctx.currentContainer;
        value = count;
        break;
    }
    case Terminal::MIN:
        value = yard.minIdOn(cs);
        break;
    case Terminal::AVG: {
        if (!stack.empty()) {
            long long sum = 0;
            for (int id : stack)
                sum += id;
            value = static_cast<double>(sum) / static_cast<double>(stack.size());
        }
        break;
    }
    case Terminal::REM: {
        const int ts = yard.targetStack();
        const auto targetPile = yard.stack(ts);
        int above = 0;
        for (int i = static_cast<int>(targetPile.size()) - 1; i >= 0; --i) {
            if (targetPile[i] == ctx.targetContainer)
                break;
            ++above;
        }
        value = above;
        break;
    }
    case Terminal::NEXT:
        value = (ctx.nextTarget != 0 && yard.stackOf(ctx.nextTarget) == cs) ? 1.0 : 0.0;
        break;
    case Terminal::DIFF:
        value = static_cast<double>(yard.minIdOn(cs)) - ctx.currentContainer;
        break;
    case Terminal::EMPTY:
        value = stack.empty() ? 1.0 : 0.0;
        break;
    case Terminal::WL:
    case Terminal::NL: {
        int well = 0, maxAbove = 0;
        for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i) {
            if (stack[i] > maxAbove) {
                ++well;
                maxAbove = stack[i];
            }
        }
        value = t == Terminal::WL ? well : static_cast<double>(stack.size()) - well;
        break;
    }
    case Terminal::DSM: {
        value = 0.0;
        for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i)
            if (stack[i] < ctx.currentContainer) {
                value = i + 1; // 1-based tier from the bottom
                break;
            }
        break;
    }
    }
    ctx.cache[static_cast<int>(t)] = value;
    ctx.cachedMask |= bit;
    return value;
}

namespace {

double evalAt(const std::vector<Node>& nodes, int& i, const EvalContext& ctx, bool& sane) {
    const Node node = nodes[i++];
    if (!node.isFunction())
        return evalTerminal(node.terminal(), ctx);
    const double a = evalAt(nodes, i, ctx, sane);
    const double b = evalAt(nodes, i, ctx, sane);
    double v = 0.0;
    switch (node.func()) {
    case Func::Add: v = a + b; break;
    case Func::Sub: v = a - b; break;
    case Func::Mul: v = a * b; break;
    case Func::ProtDiv: v = protectedDiv(a, b); break;
    }
    if (!std::isfinite(v))
        sane = false;
    return v;
}

} // namespace

double evalExpr(const ExprTree& tree, const EvalContext& ctx) {
    int i = 0;
    bool sane = true;
    const double v = evalAt(tree.nodes(), i, ctx, sane);
    return sane ? v : std::numeric_limits<double>::infinity();
}

namespace {

struct Token {
    enum Kind { Open, Close, Word, End } kind;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ >= text_.size())
            return {Token::End, "", pos_};
        const std::size_t start = pos_;
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            return {Token::Open, "(", start};
        }
        if (c == ')') {
            ++pos_;
            return {Token::Close, ")", start};
        }
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')')
            ++pos_;
        return {Token::Word, text_.substr(start, pos_ - start), start};
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
};

[[noreturn]] void parseFail(const std::string& message, std::size_t pos) {
    throw Error(ErrorKind::ParseError, message + " at position " + std::to_string(pos));
}

void parseExpr(Lexer& lexer, std::vector<Node>& out) {
    Token tok = lexer.next();
    if (tok.kind == Token::Word) {
        Terminal t;
        if (!lookupTerminal(tok.text, t))
            throw Error(ErrorKind::UnknownTerminal, "'" + tok.text + "' at position " + std::to_string(tok.pos));
        out.push_back(Node::terminal(t));
        return;
    }
    if (tok.kind != Token::Open)
        parseFail("expected '(' or terminal", tok.pos);

    Token head = lexer.next();
    if (head.kind != Token::Word)
        parseFail("expected function name after '('", head.pos);
    std::string name = head.text;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    Func f;
    if (name == "add")
        f = Func::Add;
    else if (name == "sub")
        f = Func::Sub;
    else if (name == "mul")
        f = Func::Mul;
    else if (name == "div")
        f = Func::ProtDiv;
    else
        parseFail("unknown function '" + head.text + "'", head.pos);
    out.push_back(Node::function(f));
    parseExpr(lexer, out);
    parseExpr(lexer, out);
    Token close = lexer.next();
    if (close.kind != Token::Close)
        parseFail("expected ')'", close.pos);
}

} // namespace

ExprTree parseRule(const std::string& text) {
    Lexer lexer(text);
    std::vector<Node> nodes;
    parseExpr(lexer, nodes);
    Token rest = lexer.next();
    if (rest.kind != Token::End)
        parseFail("unexpected trailing content", rest.pos);
    return ExprTree(std::move(nodes));
}

namespace {

void printAt(const std::vector<Node>& nodes, int& i, std::string& out) {
    const Node node = nodes[i++];
    if (!node.isFunction()) {
        out += terminalName(node.terminal());
        return;
    }
    out += '(';
    out += funcName(node.func());
    out += ' ';
    printAt(nodes, i, out);
    out += ' ';
    printAt(nodes, i, out);
    out += ')';
}

} // namespace

std::string printRule(const ExprTree& tree) {
    std::string out;
    int i = 0;
    printAt(tree.nodes(), i, out);
    return out;
}

} // namespace crp::rules
