#include "crp/core.hpp"

#include <algorithm>

namespace crp {

const char* errorKindName(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::EmptyYard: return "EmptyYard";
    case ErrorKind::EmptyOrigin: return "EmptyOrigin";
    case ErrorKind::StackFull: return "StackFull";
    case ErrorKind::SameStack: return "SameStack";
    case ErrorKind::InvalidStack: return "InvalidStack";
    case ErrorKind::TargetBlocked: return "TargetBlocked";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownTerminal: return "UnknownTerminal";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::Deadlock: return "Deadlock";
    case ErrorKind::InternalLoop: return "InternalLoop";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    }
    return "Error";
}

Yard::Yard(const std::vector<std::vector<int>>& stacks, int maxHeight) {
    if (stacks.empty())
        throw Error(ErrorKind::InvalidStack, "yard needs at least one stack");
    if (maxHeight < 1)
        throw Error(ErrorKind::InvalidStack, "maxHeight must be positive");
    stackCount_ = static_cast<int>(stacks.size());
    maxHeight_ = maxHeight;
    cells_.assign(static_cast<std::size_t>(stackCount_) * maxHeight_, 0);
    heights_.assign(stackCount_, 0);

    int maxId = 0;
    for (int s = 0; s < stackCount_; ++s) {
        if (static_cast<int>(stacks[s].size()) > maxHeight_)
            throw Error(ErrorKind::StackFull, "stack " + std::to_string(s + 1) + " exceeds maxHeight " +
                                                  std::to_string(maxHeight_));
        heights_[s] = static_cast<std::int32_t>(stacks[s].size());
        for (std::size_t t = 0; t < stacks[s].size(); ++t) {
            const int id = stacks[s][t];
            if (id < 1)
                throw Error(ErrorKind::ParseError, "container IDs must be positive, got " + std::to_string(id));
            cell(s)[t] = id;
            maxId = std::max(maxId, id);
            sortedIds_.push_back(id);
        }
    }
    totalContainers_ = static_cast<int>(sortedIds_.size());
    remaining_ = totalContainers_;
    idSentinel_ = std::max(totalContainers_, maxId) + 1;

    idStack_.assign(static_cast<std::size_t>(maxId) + 1, 0);
    for (int s = 0; s < stackCount_; ++s)
        for (std::int32_t id : stack(s + 1)) {
            if (idStack_[id] != 0)
                throw Error(ErrorKind::ParseError, "duplicate container ID " + std::to_string(id));
            idStack_[id] = s + 1;
        }
    std::sort(sortedIds_.begin(), sortedIds_.end());
}

int Yard::topOf(int s) const {
    const int i = check(s) - 1;
    if (heights_[i] == 0)
        throw Error(ErrorKind::EmptyOrigin, "stack " + std::to_string(s) + " is empty");
    return cells_[static_cast<std::size_t>(i) * maxHeight_ + heights_[i] - 1];
}

int Yard::targetContainer() const {
    if (remaining_ == 0)
        throw Error(ErrorKind::EmptyYard, "no containers remain");
    return sortedIds_[nextIdx_];
}

int Yard::targetStack() const { return idStack_[targetContainer()]; }

int Yard::nextTarget() const {
    if (nextIdx_ + 1 >= static_cast<int>(sortedIds_.size()))
        return 0;
    return sortedIds_[nextIdx_ + 1];
}

int Yard::stackOf(int id) const {
    if (id < 1 || id >= static_cast<int>(idStack_.size()))
        throw Error(ErrorKind::InvalidStack, "unknown container ID " + std::to_string(id));
    return idStack_[id];
}

int Yard::minIdOn(int s) const {
    int best = idSentinel_;
    for (std::int32_t id : stack(s))
        best = std::min(best, static_cast<int>(id));
    return best;
}

Move Yard::relocate(int origin, int destination, const TimeModel& time) {
    check(origin);
    check(destination);
    if (origin == destination)
        throw Error(ErrorKind::SameStack, "relocation needs two distinct stacks");
    const int o = origin - 1, d = destination - 1;
    if (heights_[o] == 0)
        throw Error(ErrorKind::EmptyOrigin, "stack " + std::to_string(origin) + " is empty");
    if (heights_[d] == maxHeight_)
        throw Error(ErrorKind::StackFull, "stack " + std::to_string(destination) + " is full");

    const std::int32_t id = cell(o)[heights_[o] - 1];
    --heights_[o];
    cell(d)[heights_[d]] = id;
    ++heights_[d];
    idStack_[id] = destination;

    const double seconds = time.moveTime(cranePosition_, origin, destination);
    cranePosition_ = destination;
    return Move{MoveKind::Relocate, origin, destination, id, seconds};
}

Move Yard::retrieve(const TimeModel& time) {
    const int id = targetContainer();
    const int s = idStack_[id];
    const int i = s - 1;
    if (cell(i)[heights_[i] - 1] != id)
        throw Error(ErrorKind::TargetBlocked,
                    "container " + std::to_string(id) + " is not on top of stack " + std::to_string(s));
    --heights_[i];
    idStack_[id] = 0;
    ++nextIdx_;
    --remaining_;

    const double seconds = time.moveTime(cranePosition_, s, 0);
    cranePosition_ = 0;
    return Move{MoveKind::Retrieve, s, 0, id, seconds};
}

bool Yard::sameCells(const Yard& other) const {
    for (int s = 1; s <= stackCount_; ++s) {
        auto a = stack(s), b = other.stack(s);
        if (!std::equal(a.begin(), a.end(), b.begin(), b.end()))
            return false;
    }
    return true;
}

void Yard::checkInvariants() const {
    std::vector<std::int32_t> seen;
    for (int s = 0; s < stackCount_; ++s) {
        if (heights_[s] < 0 || heights_[s] > maxHeight_)
            throw Error(ErrorKind::InvalidStack, "height cap violated on stack " + std::to_string(s + 1));
        for (std::int32_t id : stack(s + 1)) {
            seen.push_back(id);
            if (idStack_[id] != s + 1)
                throw Error(ErrorKind::InvalidStack, "position index stale for ID " + std::to_string(id));
        }
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw Error(ErrorKind::InvalidStack, "duplicate IDs in yard");
    if (static_cast<int>(seen.size()) != remaining_)
        throw Error(ErrorKind::InvalidStack, "remaining count stale");
    if (cranePosition_ < 0 || cranePosition_ > stackCount_)
        throw Error(ErrorKind::InvalidStack, "crane position out of range");
    // the remaining multiset must be exactly the not-yet-retrieved suffix
    for (std::size_t k = 0; k < seen.size(); ++k)
        if (seen[k] != sortedIds_[nextIdx_ + k])
            throw Error(ErrorKind::InvalidStack, "retrievals out of ID order");
}

} // namespace crp
