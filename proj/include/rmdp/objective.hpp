#pragma once
// Optimization criteria shared by the solvers and the exact oracles.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rmdp {

enum class ObjectiveKind { ReachReward, Reachability, Discounted };

/// Optimization criterion. Reach objectives carry a target state set; the
/// discounted objective carries a factor in [0, 1). Expected total reward
/// until the target follows the usual convention that paths never reaching
/// the target accrue infinite reward.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::ReachReward;
    std::vector<int> target;
    double discount = 0.0;

    static Objective reach_reward(std::vector<int> target_states) {
        return {ObjectiveKind::ReachReward, std::move(target_states), 0.0};
    }
    static Objective reachability(std::vector<int> target_states) {
        return {ObjectiveKind::Reachability, std::move(target_states), 0.0};
    }
    static Objective discounted(double factor) {
        if (!(factor >= 0.0 && factor < 1.0))
            throw std::invalid_argument("discount factor must lie in [0,1), got " +
                                        std::to_string(factor));
        return {ObjectiveKind::Discounted, {}, factor};
    }
};

inline const char* to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::ReachReward: return "reach-reward";
        case ObjectiveKind::Reachability: return "reachability";
        case ObjectiveKind::Discounted: return "discounted";
    }
    return "?";
}

}  // namespace rmdp
