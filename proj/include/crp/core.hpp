#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crp/error.hpp"

namespace crp {

/// Crane timing constants. The trolley needs trolleySecondsPerSlot to pass one
/// stack width and pickupSeconds per container lift; both overridable.
struct TimeModel {
    double trolleySecondsPerSlot = 1.2;
    double pickupSeconds = 30.0;

    /// Time of one move: reach the origin, pick up, carry to the destination.
    /// Stacks sit at coordinates 1..S, the truck at 0.
    double moveTime(int cranePosition, int origin, int destination) const {
        const int reach = cranePosition > origin ? cranePosition - origin : origin - cranePosition;
        const int carry = origin > destination ? origin - destination : destination - origin;
        return trolleySecondsPerSlot * reach + trolleySecondsPerSlot * carry + pickupSeconds;
    }
};

enum class MoveKind { Relocate, Retrieve };

struct Move {
    MoveKind kind;
    int origin;      // 1-based stack index
    int destination; // 1-based stack index, 0 = truck
    int containerId;
    double seconds;
};

/// Outcome of driving one yard to completion.
struct SolutionStats {
    long relocations = 0;
    long retrievals = 0;
    double craneSeconds = 0.0;
    std::vector<Move> moves; // populated only when move recording is on
};

/// Single-bay container yard. Stacks are numbered 1..S and store container IDs
/// bottom to top; the truck sits at coordinate 0. Containers leave the yard in
/// ascending ID order. Plain value type: copy freely, no shared state.
class Yard {
public:
    Yard() = default;

    /// Builds a yard from bottom-to-top stack listings. Validates distinct
    /// positive IDs and the height cap.
    Yard(const std::vector<std::vector<int>>& stacks, int maxHeight);

    int stackCount() const { return stackCount_; }
    int maxHeight() const { return maxHeight_; }
    int cranePosition() const { return cranePosition_; }
    int totalContainers() const { return totalContainers_; }
    int remaining() const { return remaining_; }
    bool empty() const { return remaining_ == 0; }

    int height(int stack) const { return heights_[check(stack) - 1]; }
    bool full(int stack) const { return height(stack) == maxHeight_; }

    /// Containers of one stack, bottom to top.
    std::span<const std::int32_t> stack(int s) const {
        const int i = check(s) - 1;
        return {cells_.data() + static_cast<std::size_t>(i) * maxHeight_,
                static_cast<std::size_t>(heights_[i])};
    }

    int topOf(int s) const;

    /// Smallest remaining ID; the container that must leave next.
    int targetContainer() const;
    /// Stack currently holding the target container.
    int targetStack() const;
    /// Second-smallest remaining ID, 0 when fewer than two containers remain.
    int nextTarget() const;
    /// Stack holding `id`, 0 once retrieved. Requires `id` to have been present.
    int stackOf(int id) const;
    /// Smallest ID on a stack, or idSentinel() when the stack is empty.
    int minIdOn(int s) const;
    /// One larger than every ID this yard ever held.
    int idSentinel() const { return idSentinel_; }

    /// Pops the top of `origin` onto `destination`; crane ends at the
    /// destination. Throws EmptyOrigin, StackFull, SameStack.
    Move relocate(int origin, int destination, const TimeModel& time = {});

    /// Removes the target container from the top of its stack to the truck;
    /// crane ends at 0. Throws TargetBlocked when the target is buried.
    Move retrieve(const TimeModel& time = {});

    /// Recomputes all invariants from scratch; test support.
    void checkInvariants() const;

    bool operator==(const Yard& other) const {
        return stackCount_ == other.stackCount_ && maxHeight_ == other.maxHeight_ &&
               heights_ == other.heights_ && sameCells(other);
    }

private:
    int check(int stack) const {
        if (stack < 1 || stack > stackCount_)
            throw Error(ErrorKind::InvalidStack, "stack index " + std::to_string(stack) +
                                                     " outside [1, " + std::to_string(stackCount_) + "]");
        return stack;
    }
    std::int32_t* cell(int stackIdx0) {
        return cells_.data() + static_cast<std::size_t>(stackIdx0) * maxHeight_;
    }
    bool sameCells(const Yard& other) const;

    int stackCount_ = 0;
    int maxHeight_ = 0;
    int cranePosition_ = 0;
    int totalContainers_ = 0;
    int remaining_ = 0;
    int idSentinel_ = 1;
    std::vector<std::int32_t> cells_;   // stackCount_*maxHeight_, flat
    std::vector<std::int32_t> heights_; // per stack
    std::vector<std::int32_t> idStack_; // id -> 1-based stack, 0 = gone
    std::vector<std::int32_t> sortedIds_;
    int nextIdx_ = 0; // cursor into sortedIds_; sortedIds_[nextIdx_] is the target
};

} // namespace crp
