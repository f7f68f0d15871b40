#pragma once
// Independent reference computations used to check the fast algorithmic
// paths: polytope vertex enumeration for interval rows, grid search for L1
// rows, exact Markov-chain values via dense linear solves, and an exhaustive
// robust value that enumerates agent policies against vertex-valued natures.
// None of these call the solvers or inner-problem routines they verify; they
// trade asymptotics for transparency and are guarded to desk-scale inputs.

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmdp/model.hpp"
#include "rmdp/objective.hpp"
#include "rmdp/types.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

/**
 * All vertices of the polytope { p : lower <= p <= upper, sum p = 1 }.
 * At a vertex all coordinates but at most one sit on a bound, so every
 * vertex arises by fixing all-but-one coordinate at a bound and balancing
 * the remaining one; the enumeration tries every balancing position and
 * every bound assignment, keeps the feasible candidates and deduplicates
 * componentwise within 1e-12. Supports are capped at 8 successors.
 */
inline std::vector<std::vector<double>> interval_vertices(const std::vector<double>& lower,
                                                          const std::vector<double>& upper) {
    const std::size_t m = lower.size();
    if (m == 0 || m != upper.size())
        throw std::invalid_argument("interval_vertices: empty row or bound length mismatch");
    if (m > 8)
        throw std::invalid_argument("interval_vertices: supports above 8 successors exceed the "
                                    "enumeration guard");

    std::vector<std::vector<double>> found;
    std::vector<double> candidate(m);
    for (std::size_t balance = 0; balance < m; ++balance) {
        for (unsigned bits = 0; bits < (1u << m); ++bits) {
            double rest = 1.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j == balance) continue;
                candidate[j] = (bits >> j) & 1u ? upper[j] : lower[j];
                rest -= candidate[j];
            }
            if (rest < lower[balance] - kConstructTol || rest > upper[balance] + kConstructTol)
                continue;
            candidate[balance] = std::clamp(rest, lower[balance], upper[balance]);
            found.push_back(candidate);
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::vector<double>> unique;
    for (const auto& v : found) {
        bool duplicate = false;
        if (!unique.empty()) {
            duplicate = true;
            for (std::size_t j = 0; j < m; ++j)
                if (std::abs(unique.back()[j] - v[j]) > kConstructTol) {
                    duplicate = false;
                    break;
                }
        }
        if (!duplicate) unique.push_back(v);
    }
    return unique;
}

/// Inner interval problem by exhaustive vertex scan (the optimum of a linear
/// objective over a polytope sits on a vertex). Ties keep the first vertex
/// in the deterministic enumeration order.
inline InnerResult brute_inner_interval(const UncertainRow& row, const std::vector<double>& values,
                                        Direction direction) {
    if (!row.is_interval())
        throw std::invalid_argument("brute_inner_interval: row is not an interval row");
    if (values.size() != row.size())
        throw std::invalid_argument("brute_inner_interval: value vector does not match support");
    const auto& iv = row.as_interval();
    const auto vertices = interval_vertices(iv.lower, iv.upper);
    if (vertices.empty())
        throw std::invalid_argument("brute_inner_interval: infeasible row (no vertices)");

    InnerResult best;
    bool first = true;
    for (const auto& v : vertices) {
        double value = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) value += v[i] * values[i];
        const bool better = direction == Direction::Minimize ? value < best.value
                                                             : value > best.value;
        if (first || better) {
            best.probs = v;
            best.value = value;
            first = false;
        }
    }
    return best;
}

namespace detail {

/// Integer segment [kmin, kmax] within [0, rem] satisfying
/// |k - alpha| + |k - beta| <= big_r. The constraint is convex
/// piecewise-linear in k, so its feasible set is one segment; the bounds are
/// widened by a hair and callers re-check candidates exactly. Returns false
/// when the segment misses the integers in range.
inline bool pair_split_segment(double alpha, double beta, double big_r, long rem, long& kmin,
                               long& kmax) {
    const double lo_ab = std::min(alpha, beta), hi_ab = std::max(alpha, beta);
    if (hi_ab - lo_ab > big_r + 1e-9) return false;
    const double slack = (big_r - (hi_ab - lo_ab)) / 2.0;
    kmin = std::max(static_cast<long>(std::ceil(lo_ab - slack - 1e-9)), 0L);
    kmax = std::min(static_cast<long>(std::floor(hi_ab + slack + 1e-9)), rem);
    return kmin <= kmax;
}

}  // namespace detail

/**
 * Inner L1 problem by search over the step-1/steps simplex grid, taken
 * within the ball inflated by (m-1)/steps - the rounding slack that
 * guarantees the grid meets the ball even at radius zero, where the search
 * returns the center's grid neighbor. All but the last two grid coordinates
 * are enumerated outright (with the partial L1 budget as a pruning bound);
 * the final pair is resolved in closed form over its integer-feasible
 * segment, which yields exactly the optimum of the full grid enumeration.
 * The returned value is within max|values| * m / steps of the true optimum.
 * Supports are capped at 4 successors.
 */
inline InnerResult grid_inner_l1(const std::vector<double>& center, double radius,
                                 const std::vector<double>& values, Direction direction,
                                 long steps) {
    const std::size_t m = center.size();
    if (m == 0 || values.size() != m)
        throw std::invalid_argument("grid_inner_l1: empty row or value length mismatch");
    if (m > 4)
        throw std::invalid_argument("grid_inner_l1: supports above 4 successors exceed the "
                                    "search guard");
    if (steps < 1) throw std::invalid_argument("grid_inner_l1: steps must be positive");
    if (!(radius >= 0.0 && radius <= 2.0))
        throw std::invalid_argument("grid_inner_l1: radius outside [0,2]");

    const double q = static_cast<double>(steps);
    // Rounding the center to the grid moves each coordinate by at most 1/(2q)
    // and the redistribution by at most (m-1)/q in L1; admitting that slack
    // keeps the search nonempty for every radius, including zero.
    const double bound = radius + static_cast<double>(m - 1) / q;
    bool found = false;
    double best_value = 0.0;
    std::vector<long> best_k(m, 0), partial_k(m, 0);

    // Enumerate grid masses for coordinates [0, m-2); close the last pair.
    auto consider = [&](double value, const std::vector<long>& ks, long ka, long kb) {
        const bool better = direction == Direction::Minimize ? value < best_value
                                                             : value > best_value;
        if (!found || better) {
            best_k = ks;
            best_k[m - 2] = ka;
            best_k[m - 1] = kb;
            best_value = value;
            found = true;
        }
    };

    if (m == 1) {
        // The only grid distribution is (1); it is feasible since the center
        // itself must be the point distribution.
        return {{1.0}, values[0]};
    }

    auto close_pair = [&](long rem, double used_budget, double prefix_value) {
        const double big_r = (bound - used_budget) * q;
        if (big_r < -1e-9) return;
        const double alpha = center[m - 2] * q;
        const double beta = static_cast<double>(rem) - center[m - 1] * q;
        long kmin = 0, kmax = 0;
        if (!detail::pair_split_segment(alpha, beta, big_r, rem, kmin, kmax)) return;

        // The objective is linear in the split, so the grid optimum sits at a
        // segment end; re-check each end against the slack-adjusted ball and
        // step inward when the widened segment overshot by a grid cell.
        auto feasible = [&](long k) {
            const double dist = used_budget +
                                std::abs(static_cast<double>(k) / q - center[m - 2]) +
                                std::abs(static_cast<double>(rem - k) / q - center[m - 1]);
            return dist <= bound + kConstructTol;
        };
        auto offer = [&](long k) {
            consider(prefix_value + static_cast<double>(k) * values[m - 2] +
                         static_cast<double>(rem - k) * values[m - 1],
                     partial_k, k, rem - k);
        };
        for (long k = kmin; k <= std::min(kmin + 2, kmax); ++k)
            if (feasible(k)) {
                offer(k);
                break;
            }
        for (long k = kmax; k >= std::max(kmax - 2, kmin); --k)
            if (feasible(k)) {
                offer(k);
                break;
            }
    };

    // The partial budget grows monotonically once a coordinate passes its
    // center, so a budget overrun on the far side ends that scan outright.
    auto overrun = [&](long k, double used, double c) {
        return used > bound + kConstructTol && static_cast<double>(k) / q >= c;
    };

    if (m == 2) {
        close_pair(steps, 0.0, 0.0);
    } else if (m == 3) {
        for (long k0 = 0; k0 <= steps; ++k0) {
            const double used = std::abs(static_cast<double>(k0) / q - center[0]);
            if (overrun(k0, used, center[0])) break;
            if (used > bound + kConstructTol) continue;
            partial_k[0] = k0;
            close_pair(steps - k0, used, static_cast<double>(k0) * values[0]);
        }
    } else {
        for (long k0 = 0; k0 <= steps; ++k0) {
            const double used0 = std::abs(static_cast<double>(k0) / q - center[0]);
            if (overrun(k0, used0, center[0])) break;
            if (used0 > bound + kConstructTol) continue;
            partial_k[0] = k0;
            for (long k1 = 0; k1 + k0 <= steps; ++k1) {
                const double used =
                    used0 + std::abs(static_cast<double>(k1) / q - center[1]);
                if (overrun(k1, used, center[1])) break;
                if (used > bound + kConstructTol) continue;
                partial_k[1] = k1;
                close_pair(steps - k0 - k1,
                           used,
                           static_cast<double>(k0) * values[0] +
                               static_cast<double>(k1) * values[1]);
            }
        }
    }

    if (!found)
        throw std::runtime_error("grid_inner_l1: no grid point inside the ball; refine steps");
    InnerResult res;
    res.probs.resize(m);
    for (std::size_t i = 0; i < m; ++i) res.probs[i] = static_cast<double>(best_k[i]) / q;
    res.value = best_value / q;
    return res;
}

namespace detail {

/// Dense Gaussian elimination with partial pivoting; solves A x = b in
/// place. Throws when a pivot column collapses (singular system).
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw std::runtime_error("singular linear system (pivot " + std::to_string(col) +
                                     "); the preceding partition step should have removed "
                                     "non-contracting states");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r][col] / a[col][col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

/// States with a positive-probability path to a `sources` state in the
/// chain; paths may not leave a `blocked` state (used to absorb the
/// objective's target while searching for doomed states).
inline std::vector<char> chain_can_reach(const Dtmc& chain, const std::vector<char>& sources,
                                         const std::vector<char>* blocked = nullptr) {
    const int n = chain.num_states();
    std::vector<std::vector<int>> preds(n);
    for (int s = 0; s < n; ++s) {
        if (blocked && (*blocked)[s]) continue;
        const auto& row = chain.rows[s];
        for (std::size_t i = 0; i < row.support.size(); ++i)
            if (row.probs[i] > 0.0) preds[row.support[i]].push_back(s);
    }
    std::vector<char> reached = sources;
    std::deque<int> frontier;
    for (int s = 0; s < n; ++s)
        if (sources[s]) frontier.push_back(s);
    while (!frontier.empty()) {
        int cur = frontier.front();
        frontier.pop_front();
        for (int p : preds[cur])
            if (!reached[p]) {
                reached[p] = 1;
                frontier.push_back(p);
            }
    }
    return reached;
}

inline void check_chain(const Dtmc& chain) {
    if (chain.num_states() == 0) throw std::invalid_argument("empty chain");
    if (chain.num_states() > 200)
        throw std::invalid_argument("exact_dtmc_value: chains above 200 states exceed the "
                                    "dense-solve guard");
    if (chain.rewards.size() != chain.rows.size())
        throw std::invalid_argument("chain rewards do not cover every state");
    for (int s = 0; s < chain.num_states(); ++s) {
        const auto& row = chain.rows[s];
        double sum = 0.0;
        for (std::size_t i = 0; i < row.support.size(); ++i) {
            const int succ = row.support[i];
            if (succ < 0 || succ >= chain.num_states())
                throw std::invalid_argument("chain successor index out of range");
            if (row.probs[i] < -kDerivedTol)
                throw std::invalid_argument("negative chain probability");
            sum += row.probs[i];
        }
        if (std::abs(sum - 1.0) > kDerivedTol)
            throw std::invalid_argument("chain row " + std::to_string(s) + " sums to " +
                                        std::to_string(sum));
    }
}

}  // namespace detail

/**
 * Exact state values of a Markov chain under the given objective, by direct
 * linear solve. Reach-reward assigns 0 on the target, +inf on states whose
 * probability of reaching the target is below 1 (found graph-theoretically),
 * and solves (I - P)v = r on the rest. Reachability solves (I - P)v = b with
 * b the one-step target mass, after fixing 1 on the target and 0 on states
 * with no path to it. Discounting solves (I - discount*P)v = r outright.
 * Guarded to 200 states.
 */
inline std::vector<double> exact_dtmc_value(const Dtmc& chain, const Objective& objective) {
    detail::check_chain(chain);
    const int n = chain.num_states();

    if (objective.kind == ObjectiveKind::Discounted) {
        std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
        for (int s = 0; s < n; ++s) {
            a[s][s] = 1.0;
            const auto& row = chain.rows[s];
            for (std::size_t i = 0; i < row.support.size(); ++i)
                a[s][row.support[i]] -= objective.discount * row.probs[i];
        }
        return detail::solve_dense(std::move(a), chain.rewards);
    }

    if (objective.target.empty())
        throw std::invalid_argument("exact_dtmc_value: empty target set");
    std::vector<char> target(n, 0);
    for (int t : objective.target) {
        if (t < 0 || t >= n)
            throw std::invalid_argument("exact_dtmc_value: target index out of range");
        target[t] = 1;
    }

    const std::vector<char> can_reach = detail::chain_can_reach(chain, target);

    std::vector<double> values(n, 0.0);
    std::vector<int> solve_states;
    if (objective.kind == ObjectiveKind::ReachReward) {
        // A state misses the target with positive probability exactly when it
        // can reach, without touching the target, some state with no path to
        // the target at all.
        std::vector<char> dead(n, 0);
        for (int s = 0; s < n; ++s) dead[s] = !can_reach[s];
        const std::vector<char> doomed = detail::chain_can_reach(chain, dead, &target);
        for (int s = 0; s < n; ++s) {
            if (target[s]) continue;
            if (doomed[s])
                values[s] = kInf;
            else
                solve_states.push_back(s);
        }
    } else {
        for (int s = 0; s < n; ++s) {
            if (target[s])
                values[s] = 1.0;
            else if (can_reach[s])
                solve_states.push_back(s);
        }
    }

    if (solve_states.empty()) return values;

    std::vector<int> position(n, -1);
    for (std::size_t i = 0; i < solve_states.size(); ++i) position[solve_states[i]] = i;

    const std::size_t k = solve_states.size();
    std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const int s = solve_states[i];
        a[i][i] = 1.0;
        b[i] = objective.kind == ObjectiveKind::ReachReward ? chain.rewards[s] : 0.0;
        const auto& row = chain.rows[s];
        for (std::size_t j = 0; j < row.support.size(); ++j) {
            const int succ = row.support[j];
            if (target[succ]) {
                if (objective.kind == ObjectiveKind::Reachability) b[i] += row.probs[j];
                continue;
            }
            if (position[succ] >= 0) a[i][position[succ]] -= row.probs[j];
            // successors outside the solve set carry value 0 (reachability)
            // and cannot occur for reach-reward by the doomed-set closure
        }
    }
    const std::vector<double> solved = detail::solve_dense(std::move(a), std::move(b));
    for (std::size_t i = 0; i < k; ++i) values[solve_states[i]] = solved[i];
    return values;
}

/**
 * Exhaustive robust value of an interval model at its initial state: the
 * maximum over deterministic stationary agent policies of the minimum over
 * all joint per-row vertex selections of the exact chain value. Valid
 * because rectangular interval sets admit vertex-valued worst-case natures
 * and deterministic stationary optimal agents. Guarded by the policy count
 * (product of enabled-action counts) and the joint vertex count (product of
 * per-row vertex counts over every enabled row).
 */
inline double brute_force_robust_value(const Model& model, const Objective& objective,
                                       long policy_guard = 64, long vertex_guard = 10000) {
    if (model.kind != ModelKind::Imdp)
        throw std::invalid_argument("brute_force_robust_value expects kind=imdp");
    require_valid(model);

    double policy_count = 1.0;
    for (int s = 0; s < model.num_states(); ++s) policy_count *= model.states[s].size();
    if (policy_count > static_cast<double>(policy_guard))
        throw std::invalid_argument("agent policy space exceeds the guard of " +
                                    std::to_string(policy_guard));

    // Vertex sets for every enabled row, indexed per state per entry.
    std::vector<std::vector<std::vector<std::vector<double>>>> vertices(model.num_states());
    double joint = 1.0;
    for (int s = 0; s < model.num_states(); ++s) {
        for (const ActionEntry& entry : model.states[s]) {
            const auto& iv = entry.rows[0].as_interval();
            vertices[s].push_back(interval_vertices(iv.lower, iv.upper));
            joint *= static_cast<double>(vertices[s].back().size());
        }
    }
    if (joint > static_cast<double>(vertex_guard))
        throw std::invalid_argument("joint vertex selections exceed the guard of " +
                                    std::to_string(vertex_guard));

    double best = -kInf;
    std::vector<std::size_t> policy(model.num_states(), 0);
    bool more_policies = true;
    while (more_policies) {
        // Worst case over vertex-valued natures for this policy.
        double worst = kInf;
        std::vector<std::size_t> pick(model.num_states(), 0);
        bool more_picks = true;
        while (more_picks) {
            Dtmc chain;
            chain.initial = model.initial;
            chain.rows.resize(model.num_states());
            chain.rewards.assign(model.num_states(), 0.0);
            for (int s = 0; s < model.num_states(); ++s) {
                const ActionEntry& entry = model.states[s][policy[s]];
                chain.rows[s].support = entry.rows[0].support();
                chain.rows[s].probs = vertices[s][policy[s]][pick[s]];
                chain.rewards[s] = *entry.reward;
            }
            worst = std::min(worst, exact_dtmc_value(chain, objective)[model.initial]);

            more_picks = false;
            for (int s = model.num_states() - 1; s >= 0; --s) {
                if (++pick[s] < vertices[s][policy[s]].size()) {
                    more_picks = true;
                    break;
                }
                pick[s] = 0;
            }
        }
        best = std::max(best, worst);

        more_policies = false;
        for (int s = model.num_states() - 1; s >= 0; --s) {
            if (++policy[s] < model.states[s].size()) {
                more_policies = true;
                break;
            }
            policy[s] = 0;
        }
    }
    return best;
}

}  // namespace rmdp
