#pragma once
// Qualitative analysis on the support graph. With graph-preserving rows the
// support of every member of an uncertainty set equals the declared support,
// so almost-sure reachability questions are probability-free and shared by
// the robust, optimistic and nominal problems.

#include <algorithm>
#include <deque>
#include <string>
#include <vector>

#include "rmdp/model.hpp"

namespace rmdp {

/// Directed support structure of a model: per state and enabled action the
/// declared successor set, plus reversed adjacency for backward searches.
/// Multi-environment models contribute the union of their (identical, when
/// valid) per-environment supports.
struct SupportGraph {
    struct Choice {
        int action = -1;
        std::vector<int> successors;
    };
    std::vector<std::vector<Choice>> states;
    std::vector<std::vector<int>> predecessors;

    int num_states() const { return static_cast<int>(states.size()); }
};

/**
 * Extracts the support graph. With `strict` set, throws invalid_argument on
 * any row that is not graph preserving and on multi-environment support
 * mismatches; this is the mode the reach-reward pipeline relies on, since the
 * qualitative sets below are only meaningful when no member of an uncertainty
 * set can drop a declared edge.
 */
inline SupportGraph support_graph(const Model& model, bool strict = false) {
    SupportGraph g;
    g.states.resize(model.num_states());
    g.predecessors.resize(model.num_states());
    std::vector<std::vector<char>> pred_seen(model.num_states(),
                                             std::vector<char>(model.num_states(), 0));
    for (int s = 0; s < model.num_states(); ++s) {
        for (const ActionEntry& entry : model.states[s]) {
            SupportGraph::Choice choice;
            choice.action = entry.action;
            std::vector<char> seen(model.num_states(), 0);
            for (int env = 0; env < static_cast<int>(entry.rows.size()); ++env) {
                const UncertainRow& row = entry.rows[env];
                if (!row.defined()) continue;
                if (strict) {
                    GraphPreservation gp = check_graph_preserving(row);
                    if (!gp.ok)
                        throw std::invalid_argument("row at " + model.pair_label(s, entry.action) +
                                                    " is not graph preserving: " + gp.reason);
                    if (env > 0 && entry.rows[0].defined() &&
                        row.support() != entry.rows[0].support())
                        throw std::invalid_argument(
                            "environments disagree on the support of " +
                            model.pair_label(s, entry.action));
                }
                for (int succ : row.support()) {
                    if (succ < 0 || succ >= model.num_states()) continue;
                    if (!seen[succ]) {
                        seen[succ] = 1;
                        choice.successors.push_back(succ);
                    }
                    if (!pred_seen[succ][s]) {
                        pred_seen[succ][s] = 1;
                        g.predecessors[succ].push_back(s);
                    }
                }
            }
            std::sort(choice.successors.begin(), choice.successors.end());
            g.states[s].push_back(std::move(choice));
        }
    }
    for (auto& preds : g.predecessors) std::sort(preds.begin(), preds.end());
    return g;
}

namespace detail {

inline std::vector<char> target_mask(int n, const std::vector<int>& target,
                                     const char* caller) {
    if (target.empty())
        throw std::invalid_argument(std::string(caller) + ": empty target set");
    std::vector<char> mask(n, 0);
    for (int t : target) {
        if (t < 0 || t >= n)
            throw std::invalid_argument(std::string(caller) + ": target state index " +
                                        std::to_string(t) + " out of range");
        mask[t] = 1;
    }
    return mask;
}

inline std::vector<int> mask_to_sorted(const std::vector<char>& mask, char wanted) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(mask.size()); ++i)
        if (mask[i] == wanted) out.push_back(i);
    return out;
}

}  // namespace detail

/**
 * States from which EVERY policy reaches the target almost surely (the
 * target itself included). Standard double fixed point: the outer loop
 * maintains a candidate set `good`; the inner loop grows, from the target,
 * the states all of whose actions stay inside `good` and step into the grown
 * set with positive probability. States with an action that can leak outside
 * or stall forever drop out of `good` on the next round.
 *
 * Meaningful for graph-preserving models, where the declared support equals
 * every member's support.
 */
inline std::vector<int> min_reach_certain(const Model& model, const std::vector<int>& target) {
    const SupportGraph g = support_graph(model);
    const int n = g.num_states();
    const std::vector<char> in_target = detail::target_mask(n, target, "min_reach_certain");

    std::vector<char> good(n, 1);
    while (true) {
        std::vector<char> grown = in_target;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int s = 0; s < n; ++s) {
                if (grown[s]) continue;
                bool all_ok = !g.states[s].empty();
                for (const auto& choice : g.states[s]) {
                    bool inside = true, progress = false;
                    for (int succ : choice.successors) {
                        inside = inside && good[succ];
                        progress = progress || grown[succ];
                    }
                    if (choice.successors.empty() || !inside || !progress) {
                        all_ok = false;
                        break;
                    }
                }
                if (all_ok) {
                    grown[s] = 1;
                    grew = true;
                }
            }
        }
        if (grown == good) return detail::mask_to_sorted(good, 1);
        good = std::move(grown);
    }
}

/// Trichotomy of states for expected total reward until reaching `target`.
/// `zero` is used by the reachability objective instead (see prob0_max).
struct ReachPartition {
    std::vector<int> target;
    std::vector<int> infinite;
    std::vector<int> unknown;
    std::vector<int> zero;
};

/**
 * Splits states for the reach-reward objective: `target` as given, `infinite`
 * the states where some policy avoids the target with positive probability
 * (their expected total reward is +inf under the convention that paths
 * missing the target accrue infinite reward), `unknown` the rest - the states
 * value iteration actually solves. Every action of an `unknown` state leads
 * only into `unknown` or `target` states, so no backup reads an infinite
 * value.
 */
inline ReachPartition classify_reach_reward(const Model& model, const std::vector<int>& target) {
    ReachPartition part;
    const std::vector<char> in_target =
        detail::target_mask(model.num_states(), target, "classify_reach_reward");
    part.target = detail::mask_to_sorted(in_target, 1);

    std::vector<char> certain(model.num_states(), 0);
    for (int s : min_reach_certain(model, part.target)) certain[s] = 1;
    for (int s = 0; s < model.num_states(); ++s) {
        if (in_target[s]) continue;
        (certain[s] ? part.unknown : part.infinite).push_back(s);
    }
    return part;
}

/**
 * States whose maximal reachability probability is zero: no path to the
 * target exists in the support graph under any action choice. Sound for all
 * modes - members of an uncertainty set can only shrink the support, never
 * extend it past the declared successors. Target states are excluded.
 */
inline std::vector<int> prob0_max(const Model& model, const std::vector<int>& target) {
    const SupportGraph g = support_graph(model);
    const int n = g.num_states();
    const std::vector<char> in_target = detail::target_mask(n, target, "prob0_max");

    std::vector<char> can_reach = in_target;
    std::deque<int> frontier(target.begin(), target.end());
    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        for (int pred : g.predecessors[cur])
            if (!can_reach[pred]) {
                can_reach[pred] = 1;
                frontier.push_back(pred);
            }
    }
    return detail::mask_to_sorted(can_reach, 0);
}

/// Per-state minimal number of support-graph steps to the target (0 on the
/// target, kInf-like INT_MAX/2 when unreachable), plus for each state the
/// lowest-index action realizing that distance. Used to seed policy
/// iteration with a policy that makes progress everywhere it can.
struct BfsToTarget {
    std::vector<int> distance;
    std::vector<int> action;
};

inline BfsToTarget bfs_to_target(const Model& model, const std::vector<int>& target) {
    const SupportGraph g = support_graph(model);
    const int n = g.num_states();
    const std::vector<char> in_target = detail::target_mask(n, target, "bfs_to_target");
    constexpr int kUnreached = 1 << 29;

    BfsToTarget out;
    out.distance.assign(n, kUnreached);
    out.action.assign(n, -1);
    for (int t : target) out.distance[t] = 0;

    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (in_target[s]) continue;
            for (const auto& choice : g.states[s]) {
                int best_succ = kUnreached;
                for (int succ : choice.successors)
                    best_succ = std::min(best_succ, out.distance[succ]);
                if (best_succ != kUnreached && best_succ + 1 < out.distance[s]) {
                    out.distance[s] = best_succ + 1;
                    out.action[s] = choice.action;
                    changed = true;
                }
            }
        }
    }
    // Lowest-index action attaining the recorded distance (the relaxation
    // above may have settled on a later action first).
    for (int s = 0; s < n; ++s) {
        if (in_target[s] || out.distance[s] == kUnreached) continue;
        for (const auto& choice : g.states[s]) {
            int best_succ = kUnreached;
            for (int succ : choice.successors)
                best_succ = std::min(best_succ, out.distance[succ]);
            if (best_succ + 1 == out.distance[s]) {
                out.action[s] = choice.action;
                break;
            }
        }
    }
    return out;
}

}  // namespace rmdp
