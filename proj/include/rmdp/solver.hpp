#pragma once
// Robust / optimistic / nominal dynamic programming over uncertain models:
// value iteration, greedy policy extraction, fixed-policy evaluation, policy
// iteration, and the exact per-environment treatment of multi-environment
// models (which follow static semantics and are deliberately kept away from
// the dynamic-programming path).

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "rmdp/graph.hpp"
#include "rmdp/model.hpp"
#include "rmdp/objective.hpp"
#include "rmdp/oracle.hpp"
#include "rmdp/types.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

/// Who controls nature: Robust resolves each row against the agent,
/// Optimistic with the agent, Nominal takes point rows at face value.
enum class Mode { Robust, Optimistic, Nominal };

inline const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::Robust: return "robust";
        case Mode::Optimistic: return "optimistic";
        case Mode::Nominal: return "nominal";
    }
    return "?";
}

/// Value per state (+inf on the infinite partition of a reach-reward
/// objective) plus convergence bookkeeping of the producing iteration.
struct ValueVector {
    std::vector<double> values;
    double residual = 0.0;
    long iterations = 0;
    bool converged = false;
};

/// Outcome of a full solve: values plus the witnessing stationary policy.
/// `eval_rounds` / `max_round_sweeps` are filled by policy iteration only.
struct SolveResult {
    ValueVector values;
    StationaryPolicy policy;
    Mode mode = Mode::Robust;
    Objective objective;
    long eval_rounds = 0;
    long max_round_sweeps = 0;
};

namespace detail {

inline Direction mode_direction(Mode mode) {
    return mode == Mode::Optimistic ? Direction::Maximize : Direction::Minimize;
}

/// Number of worker threads a sweep may use: RMDP_THREADS when set (floored
/// at 1), hardware concurrency otherwise.
inline int resolve_threads() {
    if (const char* env = std::getenv("RMDP_THREADS")) {
        char* end = nullptr;
        long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed >= 1) return static_cast<int>(std::min(parsed, 64L));
        return 1;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 64u));
}

/// States below this count are swept sequentially regardless of the cap.
inline constexpr std::size_t kParallelThreshold = 512;

/// Applies `work(k)` for k in [0, count). Chunked across threads when the
/// problem is large enough; each index is written by exactly one worker and
/// reductions happen after joining, so results do not depend on the thread
/// count.
template <typename Work>
inline void for_each_index(std::size_t count, Work&& work) {
    const int threads = resolve_threads();
    if (threads <= 1 || count < kParallelThreshold) {
        for (std::size_t k = 0; k < count; ++k) work(k);
        return;
    }
    const std::size_t chunk = (count + threads - 1) / threads;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &work] {
            for (std::size_t k = lo; k < hi; ++k) work(k);
        });
    }
    for (auto& th : pool) th.join();
}

/// Iteration plan shared by every solver entry point: initial values and the
/// list of states the Bellman operator actually updates.
struct SolvePlan {
    std::vector<double> values;
    std::vector<int> iterate;
    ReachPartition partition;
};

inline void check_mode(const Model& model, Mode mode) {
    if (model.kind == ModelKind::Memdp)
        throw std::invalid_argument(
            "multi-environment models follow static semantics; use memdp_evaluate or "
            "memdp_best_stationary instead of dynamic programming");
    if (mode == Mode::Nominal && model.kind != ModelKind::Mdp)
        throw std::invalid_argument(std::string("nominal mode requires kind=mdp, got ") +
                                    to_string(model.kind));
}

inline SolvePlan make_plan(const Model& model, const Objective& objective) {
    SolvePlan plan;
    plan.values.assign(model.num_states(), 0.0);
    switch (objective.kind) {
        case ObjectiveKind::ReachReward: {
            support_graph(model, /*strict=*/true);  // reject non-graph-preserving rows
            plan.partition = classify_reach_reward(model, objective.target);
            for (int s : plan.partition.infinite) plan.values[s] = kInf;
            plan.iterate = plan.partition.unknown;
            break;
        }
        case ObjectiveKind::Reachability: {
            plan.partition.target = objective.target;
            std::sort(plan.partition.target.begin(), plan.partition.target.end());
            plan.partition.zero = prob0_max(model, objective.target);
            std::vector<char> skip(model.num_states(), 0);
            for (int s : plan.partition.target) {
                plan.values[s] = 1.0;
                skip[s] = 1;
            }
            for (int s : plan.partition.zero) skip[s] = 1;
            for (int s = 0; s < model.num_states(); ++s)
                if (!skip[s]) plan.iterate.push_back(s);
            break;
        }
        case ObjectiveKind::Discounted: {
            plan.iterate.resize(model.num_states());
            for (int s = 0; s < model.num_states(); ++s) plan.iterate[s] = s;
            break;
        }
    }
    return plan;
}

/// Overwrites the plan's iterated entries with caller-provided warm-start
/// values; trivial partitions keep their prescribed values.
inline void apply_warm_start(SolvePlan& plan, const std::vector<double>& initial) {
    if (initial.empty()) return;
    if (initial.size() != plan.values.size())
        throw std::invalid_argument("warm-start vector length does not match state count");
    for (int s : plan.iterate) plan.values[s] = initial[s];
}

/// One-row backup: reward plus (possibly discounted) extremal expectation of
/// the current values over the row's support.
inline double backup_entry(const ActionEntry& entry, const Objective& objective, Direction dir,
                           const std::vector<double>& values, std::vector<double>& scratch) {
    const UncertainRow& row = entry.rows[0];
    scratch.resize(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) scratch[i] = values[row.support()[i]];
    const double inner = inner_extremum(row, scratch, dir).value;
    switch (objective.kind) {
        case ObjectiveKind::ReachReward: return *entry.reward + inner;
        case ObjectiveKind::Reachability: return inner;
        case ObjectiveKind::Discounted: return *entry.reward + objective.discount * inner;
    }
    return inner;
}

inline double backup_state_greedy(const Model& model, int s, const Objective& objective,
                                  Direction dir, const std::vector<double>& values,
                                  std::vector<double>& scratch) {
    double best = -kInf;
    for (const ActionEntry& entry : model.states[s])
        best = std::max(best, backup_entry(entry, objective, dir, values, scratch));
    return best;
}

inline double backup_state_policy(const Model& model, int s, const StationaryPolicy& policy,
                                  const Objective& objective, Direction dir,
                                  const std::vector<double>& values,
                                  std::vector<double>& scratch) {
    double acc = 0.0;
    for (auto [a, w] : policy.choice[s])
        acc += w * backup_entry(*model.find_entry(s, a), objective, dir, values, scratch);
    return acc;
}

/// Double-buffered Jacobi sweeps until the max-norm residual over iterated
/// states drops below epsilon. `greedy` selects between optimization and
/// fixed-policy evaluation.
template <typename StateBackup>
inline ValueVector iterate_to_fixpoint(SolvePlan plan, double epsilon, long max_iter,
                                       StateBackup&& state_backup) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");

    ValueVector out;
    if (plan.iterate.empty()) {
        out.values = std::move(plan.values);
        out.converged = true;
        return out;
    }

    std::vector<double> current = plan.values;
    std::vector<double> next = plan.values;
    std::vector<double> deltas(plan.iterate.size(), 0.0);

    while (out.iterations < max_iter) {
        for_each_index(plan.iterate.size(), [&](std::size_t k) {
            thread_local std::vector<double> scratch;
            const int s = plan.iterate[k];
            next[s] = state_backup(s, current, scratch);
            deltas[k] = std::abs(next[s] - current[s]);
        });
        out.residual = 0.0;
        for (double d : deltas) out.residual = std::max(out.residual, d);
        current.swap(next);
        ++out.iterations;
        if (out.residual < epsilon) {
            out.converged = true;
            break;
        }
    }
    out.values = std::move(current);
    return out;
}

}  // namespace detail

/**
 * Value iteration from the objective's canonical initialization (zero on
 * iterated states, the prescribed constants elsewhere), or from `initial`
 * when given. Robust mode resolves every row adversarially, optimistic mode
 * cooperatively; nominal mode evaluates point rows and requires kind=mdp.
 *
 * Reach-reward demands graph-preserving rows and assigns +inf to states some
 * policy can steer away from the target. Plain value iteration certifies the
 * residual, not the true error; callers wanting certified accuracy should
 * cross-check with the exact oracles on small instances.
 */
inline ValueVector value_iteration(const Model& model, const Objective& objective, Mode mode,
                                   double epsilon = 1e-6, long max_iter = 100000,
                                   const std::vector<double>& initial = {}) {
    require_valid(model);
    detail::check_mode(model, mode);
    detail::SolvePlan plan = detail::make_plan(model, objective);
    detail::apply_warm_start(plan, initial);
    const Direction dir = detail::mode_direction(mode);
    return detail::iterate_to_fixpoint(
        std::move(plan), epsilon, max_iter,
        [&](int s, const std::vector<double>& cur, std::vector<double>& scratch) {
            return detail::backup_state_greedy(model, s, objective, dir, cur, scratch);
        });
}

/**
 * Greedy deterministic policy for a value vector: per state the enabled
 * action with the best one-step backup, ties resolved toward the lowest
 * action index. States the objective fixes (target, infinite, prob-zero)
 * receive their lowest-index enabled action.
 */
inline StationaryPolicy extract_policy(const Model& model, const ValueVector& values,
                                       const Objective& objective, Mode mode) {
    require_valid(model);
    detail::check_mode(model, mode);
    if (static_cast<int>(values.values.size()) != model.num_states())
        throw std::invalid_argument("value vector length does not match state count");

    detail::SolvePlan plan = detail::make_plan(model, objective);
    std::vector<char> iterated(model.num_states(), 0);
    for (int s : plan.iterate) iterated[s] = 1;

    const Direction dir = detail::mode_direction(mode);
    std::vector<int> picks(model.num_states(), -1);
    std::vector<double> scratch;
    for (int s = 0; s < model.num_states(); ++s) {
        if (!iterated[s]) {
            picks[s] = model.states[s].front().action;
            continue;
        }
        double best = -kInf;
        for (const ActionEntry& entry : model.states[s]) {
            const double q =
                detail::backup_entry(entry, objective, dir, values.values, scratch);
            if (q > best) {
                best = q;
                picks[s] = entry.action;
            }
        }
    }
    return StationaryPolicy::deterministic(std::move(picks));
}

/**
 * Iterative evaluation of a fixed stationary policy under the same
 * preprocessing as value_iteration. Rejects multi-environment models (their
 * evaluation is exact, see memdp_evaluate) and policies using disabled
 * actions. Randomized policies mix per-action backups linearly; nature still
 * resolves each row separately, matching rectangular robust evaluation.
 */
inline ValueVector policy_evaluation(const Model& model, const StationaryPolicy& policy,
                                     const Objective& objective, Mode mode,
                                     double epsilon = 1e-6, long max_iter = 100000,
                                     const std::vector<double>& initial = {}) {
    require_valid(model);
    detail::check_mode(model, mode);
    require_policy_compatible(model, policy);
    detail::SolvePlan plan = detail::make_plan(model, objective);
    detail::apply_warm_start(plan, initial);
    const Direction dir = detail::mode_direction(mode);
    return detail::iterate_to_fixpoint(
        std::move(plan), epsilon, max_iter,
        [&](int s, const std::vector<double>& cur, std::vector<double>& scratch) {
            return detail::backup_state_policy(model, s, policy, objective, dir, cur, scratch);
        });
}

namespace detail {

/// Starting policy for policy iteration. Reach-reward steers every state
/// toward the target along shortest support-graph paths, guaranteeing the
/// first evaluation converges; other objectives start from the lowest
/// enabled action.
inline StationaryPolicy initial_policy(const Model& model, const Objective& objective) {
    std::vector<int> picks(model.num_states());
    for (int s = 0; s < model.num_states(); ++s) picks[s] = model.states[s].front().action;
    if (objective.kind == ObjectiveKind::ReachReward) {
        const BfsToTarget bfs = bfs_to_target(model, objective.target);
        for (int s = 0; s < model.num_states(); ++s)
            if (bfs.action[s] >= 0) picks[s] = bfs.action[s];
    }
    return StationaryPolicy::deterministic(std::move(picks));
}

}  // namespace detail

/**
 * Policy iteration: evaluate the current policy to tolerance epsilon/10,
 * improve greedily, stop when the policy repeats. `max_iter` caps both the
 * improvement rounds and each evaluation's sweeps. With approximate
 * evaluation the greedy step can in principle cycle between equal-valued
 * policies, hence the cap; results should agree with value_iteration within
 * an order of magnitude of epsilon.
 */
inline SolveResult policy_iteration(const Model& model, const Objective& objective, Mode mode,
                                    double epsilon = 1e-6, long max_iter = 100000) {
    require_valid(model);
    detail::check_mode(model, mode);

    SolveResult result;
    result.mode = mode;
    result.objective = objective;
    result.policy = detail::initial_policy(model, objective);

    for (long round = 0; round < max_iter; ++round) {
        result.values =
            policy_evaluation(model, result.policy, objective, mode, epsilon / 10.0, max_iter);
        result.eval_rounds = round + 1;
        result.max_round_sweeps = std::max(result.max_round_sweeps, result.values.iterations);

        StationaryPolicy improved = extract_policy(model, result.values, objective, mode);
        if (improved == result.policy) return result;
        result.policy = std::move(improved);
    }
    result.values.converged = false;
    return result;
}

/// Exact per-environment evaluation of a stationary policy on a
/// multi-environment model.
struct MemdpEvaluation {
    /// values[e][s]: exact value of state s in environment e (+inf possible
    /// for reach-reward when the policy's chain misses the target).
    std::vector<std::vector<double>> values;
    /// min over environments at the initial state, and its first attainer.
    double worst_initial = 0.0;
    int worst_environment = -1;
};

/**
 * Evaluates `policy` on every environment's induced chain with the exact
 * linear-system oracle and reports the worst (lowest) initial-state value,
 * the static worst case over the finite environment set.
 */
inline MemdpEvaluation memdp_evaluate(const Model& model, const StationaryPolicy& policy,
                                      const Objective& objective) {
    if (model.kind != ModelKind::Memdp)
        throw std::invalid_argument(std::string("memdp_evaluate requires kind=memdp, got ") +
                                    to_string(model.kind));
    require_valid(model);
    require_policy_compatible(model, policy);

    MemdpEvaluation out;
    out.worst_initial = kInf;
    for (int env = 0; env < model.environments; ++env) {
        Dtmc chain = detail::induce_point_dtmc(model, policy, env);
        out.values.push_back(exact_dtmc_value(chain, objective));
        const double at_initial = out.values.back()[model.initial];
        if (at_initial < out.worst_initial) {
            out.worst_initial = at_initial;
            out.worst_environment = env;
        }
    }
    if (out.worst_environment < 0) out.worst_environment = 0;  // all environments +inf
    return out;
}

/**
 * Exhaustive search over deterministic stationary policies of a
 * multi-environment model, maximizing the worst-case initial-state value.
 * Ties keep the lexicographically smallest policy (states ascending, action
 * indices compared per state). The policy count Prod_s |A(s)| must not
 * exceed `guard`. The returned values are the statewise minimum over
 * environments under the winning policy.
 */
inline SolveResult memdp_best_stationary(const Model& model, const Objective& objective,
                                         long guard = 10000) {
    if (model.kind != ModelKind::Memdp)
        throw std::invalid_argument("memdp_best_stationary requires kind=memdp");
    require_valid(model);

    double policies = 1.0;
    for (int s = 0; s < model.num_states(); ++s) policies *= model.states[s].size();
    if (policies > static_cast<double>(guard))
        throw std::invalid_argument("policy space of size " + std::to_string(policies) +
                                    " exceeds the enumeration guard " + std::to_string(guard));

    SolveResult best;
    best.mode = Mode::Robust;
    best.objective = objective;
    best.values.converged = true;

    std::vector<std::size_t> odometer(model.num_states(), 0);
    double best_worst = -kInf;
    long evaluated = 0;
    bool more = true;
    while (more) {
        std::vector<int> picks(model.num_states());
        for (int s = 0; s < model.num_states(); ++s)
            picks[s] = model.states[s][odometer[s]].action;
        StationaryPolicy policy = StationaryPolicy::deterministic(std::move(picks));

        const MemdpEvaluation eval = memdp_evaluate(model, policy, objective);
        ++evaluated;
        if (eval.worst_initial > best_worst || evaluated == 1) {
            best_worst = eval.worst_initial;
            best.policy = std::move(policy);
            best.values.values.assign(model.num_states(), kInf);
            for (int s = 0; s < model.num_states(); ++s)
                for (int env = 0; env < model.environments; ++env)
                    best.values.values[s] = std::min(best.values.values[s], eval.values[env][s]);
        }

        // advance: last state varies fastest, giving lexicographic order
        more = false;
        for (int s = model.num_states() - 1; s >= 0; --s) {
            if (++odometer[s] < model.states[s].size()) {
                more = true;
                break;
            }
            odometer[s] = 0;
        }
    }
    best.values.iterations = evaluated;
    return best;
}

enum class Method { ValueIteration, PolicyIteration, Enumerate };

/// One-call solve used by the command-line front end.
inline SolveResult solve(const Model& model, const Objective& objective, Mode mode,
                         Method method, double epsilon = 1e-6, long max_iter = 100000) {
    if (method == Method::Enumerate) return memdp_best_stationary(model, objective);
    if (method == Method::PolicyIteration)
        return policy_iteration(model, objective, mode, epsilon, max_iter);
    SolveResult result;
    result.mode = mode;
    result.objective = objective;
    result.values = value_iteration(model, objective, mode, epsilon, max_iter);
    result.policy = extract_policy(model, result.values, objective, mode);
    return result;
}

}  // namespace rmdp
