#pragma once
// Immutable decision-process models over uncertain transition rows, plus the
// induced-chain and stationary-policy types shared by solvers and oracles.
//
// A model is a set of named states with per-state enabled actions drawn from
// a global action alphabet. Each enabled (state, action) pair carries one
// uncertain row per environment (exactly one environment unless the model is
// a multi-environment MDP) and a nonnegative reward. Models are assembled via
// ModelBuilder or the document parser and treated as immutable afterwards;
// validate() reports every semantic violation instead of stopping at the
// first.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rmdp/types.hpp"
#include "rmdp/uncertainty.hpp"

namespace rmdp {

enum class ModelKind { Mdp, Imdp, L1, Memdp };

inline const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Mdp: return "mdp";
        case ModelKind::Imdp: return "imdp";
        case ModelKind::L1: return "l1";
        case ModelKind::Memdp: return "memdp";
    }
    return "?";
}

/// One enabled action of one state: a row per environment plus the reward.
/// `rows` is indexed by environment; a default-constructed (undefined) row
/// marks an environment the document failed to cover, which validate()
/// reports. `reward` is absent when the document defined transitions but no
/// reward for the pair (also a diagnostic).
struct ActionEntry {
    int action = -1;
    std::vector<UncertainRow> rows;
    std::optional<double> reward;

    const UncertainRow& row(int environment = 0) const { return rows.at(environment); }
};

class Model {
  public:
    ModelKind kind = ModelKind::Mdp;
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    int initial = 0;
    int environments = 1;
    /// Per state, entries in strictly ascending action order.
    std::vector<std::vector<ActionEntry>> states;

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(action_names.size()); }

    const std::string& state_name(int s) const { return state_names.at(s); }
    const std::string& action_name(int a) const { return action_names.at(a); }

    int state_index(const std::string& name) const {
        for (std::size_t i = 0; i < state_names.size(); ++i)
            if (state_names[i] == name) return static_cast<int>(i);
        return -1;
    }

    int action_index(const std::string& name) const {
        for (int i = 0; i < num_actions(); ++i)
            if (action_names[i] == name) return i;
        return -1;
    }

    const std::vector<ActionEntry>& entries(int s) const {
        if (s < 0 || s >= num_states())
            throw std::out_of_range("unknown state index " + std::to_string(s));
        return states[s];
    }

    const ActionEntry* find_entry(int s, int a) const {
        for (const ActionEntry& e : entries(s))
            if (e.action == a) return &e;
        return nullptr;
    }

    /// Human-readable "(state,action)" label for diagnostics.
    std::string pair_label(int s, int a) const {
        std::string sn =
            (s >= 0 && s < static_cast<int>(state_names.size())) ? state_names[s]
                                                                 : std::to_string(s);
        std::string an = (a >= 0 && a < num_actions()) ? action_names[a] : std::to_string(a);
        return "(" + sn + "," + an + ")";
    }
};

/// Actions enabled in state `s`, ascending. Throws on unknown states.
inline std::vector<int> enabled_actions(const Model& model, int s) {
    std::vector<int> out;
    for (const ActionEntry& e : model.entries(s)) out.push_back(e.action);
    return out;
}

/// Markov chain with per-state sparse successor rows and per-state rewards.
struct Dtmc {
    struct Row {
        std::vector<int> support;
        std::vector<double> probs;
    };
    int initial = 0;
    std::vector<Row> rows;
    std::vector<double> rewards;

    int num_states() const { return static_cast<int>(rows.size()); }
};

/// Stationary policy: one distribution over enabled actions per state,
/// stored as (action, probability) pairs in ascending action order.
struct StationaryPolicy {
    std::vector<std::vector<std::pair<int, double>>> choice;

    static StationaryPolicy deterministic(std::vector<int> actions) {
        StationaryPolicy p;
        p.choice.reserve(actions.size());
        for (int a : actions) p.choice.push_back({{a, 1.0}});
        return p;
    }

    int num_states() const { return static_cast<int>(choice.size()); }

    bool is_deterministic() const {
        for (const auto& c : choice)
            if (c.size() != 1 || c[0].second != 1.0) return false;
        return true;
    }

    /// Chosen action for a Dirac state, -1 if the state randomizes.
    int action_at(int s) const {
        const auto& c = choice.at(s);
        return (c.size() == 1 && c[0].second == 1.0) ? c[0].first : -1;
    }

    bool operator==(const StationaryPolicy& other) const { return choice == other.choice; }
};

namespace detail {

inline void check_row_shape(const Model& model, int s, const ActionEntry& entry, int env,
                            const UncertainRow& row, std::vector<Diagnostic>& out) {
    auto add = [&](const std::string& rule, const std::string& msg) {
        out.push_back({s, entry.action, rule, msg + " at " + model.pair_label(s, entry.action) +
                                                  (model.environments > 1
                                                       ? " environment " + std::to_string(env)
                                                       : "")});
    };

    for (int succ : row.support())
        if (succ < 0 || succ >= model.num_states())
            add("unknown-successor", "support references state index " + std::to_string(succ));

    const bool kind_ok = (model.kind == ModelKind::Imdp && row.is_interval()) ||
                         (model.kind == ModelKind::L1 && row.is_l1()) ||
                         ((model.kind == ModelKind::Mdp || model.kind == ModelKind::Memdp) &&
                          row.is_point());
    if (!kind_ok) {
        add("row-kind-mismatch", std::string("row representation does not match model kind '") +
                                     to_string(model.kind) + "'");
        return;
    }

    if (row.is_point()) {
        const auto& probs = row.as_point().probs;
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0 + kConstructTol))
                add("probability-range", "probability " + std::to_string(p) + " outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kConstructTol)
            add("row-not-stochastic", "row sums to " + std::to_string(sum));
    } else if (row.is_interval()) {
        const auto& iv = row.as_interval();
        double sum_lower = 0.0, sum_upper = 0.0;
        for (std::size_t i = 0; i < iv.lower.size(); ++i) {
            if (iv.lower[i] <= 0.0)
                add("zero-lower-bound", "support entry " +
                                            model.state_name(row.support()[i]) +
                                            " has lower bound " + std::to_string(iv.lower[i]) +
                                            "; supported transitions need positive lower bounds"
                                            " (off-support entries are implicitly [0,0])");
            if (iv.lower[i] > iv.upper[i] + kConstructTol)
                add("bound-order", "lower bound exceeds upper bound on entry " +
                                       model.state_name(row.support()[i]));
            if (iv.upper[i] > 1.0 + kConstructTol)
                add("probability-range", "upper bound " + std::to_string(iv.upper[i]) +
                                             " exceeds 1");
            sum_lower += iv.lower[i];
            sum_upper += iv.upper[i];
        }
        if (sum_lower > 1.0 + kConstructTol)
            add("row-infeasible", "lower bounds sum to " + std::to_string(sum_lower));
        if (sum_upper < 1.0 - kConstructTol)
            add("row-infeasible", "upper bounds sum to " + std::to_string(sum_upper));
    } else {
        const auto& ball = row.as_l1();
        double sum = 0.0;
        for (double c : ball.center) {
            if (!(c >= 0.0 && c <= 1.0 + kConstructTol))
                add("probability-range", "center entry " + std::to_string(c) + " outside [0,1]");
            sum += c;
        }
        if (std::abs(sum - 1.0) > kConstructTol)
            add("row-not-stochastic", "center sums to " + std::to_string(sum));
        if (!(ball.radius >= 0.0) || ball.radius > 2.0 + kConstructTol)
            add("deviation-range", "L1 deviation " + std::to_string(ball.radius) +
                                       " outside [0,2]");
    }
}

}  // namespace detail

/**
 * Full semantic check of a model. Returns every violation found (empty means
 * valid): deadlocked states, transition/reward domain mismatches, negative or
 * non-finite rewards, rows that do not match the model kind, infeasible or
 * non-stochastic rows, and multi-environment support or coverage mismatches.
 * Purely a function of the model value; never throws on semantic problems.
 */
inline std::vector<Diagnostic> validate(const Model& model) {
    std::vector<Diagnostic> out;

    if (model.initial < 0 || model.initial >= model.num_states())
        out.push_back({-1, -1, "initial-state",
                       "initial state index " + std::to_string(model.initial) + " out of range"});
    if (model.environments < 1)
        out.push_back({-1, -1, "environment-count", "model declares no environments"});
    if (model.kind != ModelKind::Memdp && model.environments != 1)
        out.push_back({-1, -1, "environment-count",
                       "only multi-environment models may declare several environments"});

    for (int s = 0; s < model.num_states(); ++s) {
        const auto& entries = model.states[s];
        if (entries.empty()) {
            out.push_back({s, -1, "deadlock",
                           "state " + model.state_name(s) + " enables no action"});
            continue;
        }
        for (std::size_t i = 0; i + 1 < entries.size(); ++i)
            if (entries[i].action >= entries[i + 1].action)
                out.push_back({s, entries[i].action, "action-order",
                               "enabled actions of " + model.state_name(s) +
                                   " are not strictly ascending"});

        for (const ActionEntry& entry : entries) {
            if (entry.action < 0 || entry.action >= model.num_actions()) {
                out.push_back({s, entry.action, "unknown-action",
                               "state " + model.state_name(s) + " enables unknown action index " +
                                   std::to_string(entry.action)});
                continue;
            }

            const bool any_row = std::any_of(entry.rows.begin(), entry.rows.end(),
                                             [](const UncertainRow& r) { return r.defined(); });
            if (!any_row && entry.reward.has_value()) {
                out.push_back({s, entry.action, "reward-without-transitions",
                               "reward defined but no transitions at " +
                                   model.pair_label(s, entry.action)});
                continue;
            }
            if (any_row && !entry.reward.has_value())
                out.push_back({s, entry.action, "transitions-without-reward",
                               "transitions defined but no reward at " +
                                   model.pair_label(s, entry.action)});
            if (entry.reward.has_value() &&
                (!std::isfinite(*entry.reward) || *entry.reward < 0.0))
                out.push_back({s, entry.action, "reward-range",
                               "reward " + std::to_string(*entry.reward) +
                                   " at " + model.pair_label(s, entry.action) +
                                   " must be finite and nonnegative"});

            if (static_cast<int>(entry.rows.size()) != model.environments) {
                out.push_back({s, entry.action, "environment-coverage",
                               "row count " + std::to_string(entry.rows.size()) +
                                   " does not match environment count at " +
                                   model.pair_label(s, entry.action)});
                continue;
            }
            for (int env = 0; env < model.environments; ++env) {
                const UncertainRow& row = entry.rows[env];
                if (!row.defined()) {
                    out.push_back({s, entry.action, "environment-coverage",
                                   "environment " + std::to_string(env) +
                                       " defines no transitions at " +
                                       model.pair_label(s, entry.action)});
                    continue;
                }
                detail::check_row_shape(model, s, entry, env, row, out);
                if (env > 0 && entry.rows[0].defined() &&
                    row.support() != entry.rows[0].support())
                    out.push_back({s, entry.action, "environment-support-mismatch",
                                   "environments disagree on the support of " +
                                       model.pair_label(s, entry.action)});
            }
        }
    }
    return out;
}

/// Throws ValidationError when validate() reports anything.
inline void require_valid(const Model& model) {
    std::vector<Diagnostic> diags = validate(model);
    if (diags.empty()) return;
    std::ostringstream what;
    what << "model fails validation with " << diags.size() << " diagnostic(s); first: "
         << diags.front().rule << ": " << diags.front().message;
    throw ValidationError(what.str(), std::move(diags));
}

/// Checks that a policy matches the model's shape: one distribution per
/// state, supported on enabled actions, weights positive and summing to 1.
inline void require_policy_compatible(const Model& model, const StationaryPolicy& policy) {
    if (policy.num_states() != model.num_states())
        throw std::invalid_argument("policy covers " + std::to_string(policy.num_states()) +
                                    " states, model has " + std::to_string(model.num_states()));
    for (int s = 0; s < model.num_states(); ++s) {
        if (policy.choice[s].empty())
            throw std::invalid_argument("policy chooses nothing in state " + model.state_name(s));
        double sum = 0.0;
        int prev = -1;
        for (auto [a, w] : policy.choice[s]) {
            if (a <= prev)
                throw std::invalid_argument("policy actions not ascending in state " +
                                            model.state_name(s));
            prev = a;
            if (!model.find_entry(s, a))
                throw std::invalid_argument("policy uses action not enabled at " +
                                            model.pair_label(s, a));
            if (!(w > 0.0) || w > 1.0 + kConstructTol)
                throw std::invalid_argument("policy weight " + std::to_string(w) +
                                            " out of range at " + model.pair_label(s, a));
            sum += w;
        }
        if (std::abs(sum - 1.0) > kConstructTol)
            throw std::invalid_argument("policy weights sum to " + std::to_string(sum) +
                                        " in state " + model.state_name(s));
    }
}

namespace detail {

/// Chain induced on one environment's point rows by a stationary policy.
/// Rewards mix linearly. Zero-probability entries (support padding in
/// multi-environment rows, zero policy weights) are dropped so the chain's
/// support reflects its actual dynamics.
inline Dtmc induce_point_dtmc(const Model& model, const StationaryPolicy& policy, int env) {
    Dtmc chain;
    chain.initial = model.initial;
    chain.rows.resize(model.num_states());
    chain.rewards.assign(model.num_states(), 0.0);
    for (int s = 0; s < model.num_states(); ++s) {
        std::map<int, double> mix;
        for (auto [a, w] : policy.choice[s]) {
            const ActionEntry* entry = model.find_entry(s, a);
            const UncertainRow& row = entry->row(env);
            const auto& probs = row.as_point().probs;
            for (std::size_t i = 0; i < probs.size(); ++i)
                mix[row.support()[i]] += w * probs[i];
            chain.rewards[s] += w * entry->reward.value_or(0.0);
        }
        for (auto [succ, p] : mix) {
            if (p <= 0.0) continue;
            chain.rows[s].support.push_back(succ);
            chain.rows[s].probs.push_back(p);
        }
    }
    return chain;
}

}  // namespace detail

/// Markov chain induced by a stationary policy on a point-valued model.
/// Only kind=mdp models have a unique chain; other kinds throw.
inline Dtmc induce_dtmc(const Model& model, const StationaryPolicy& policy) {
    if (model.kind != ModelKind::Mdp)
        throw std::invalid_argument(std::string("induce_dtmc requires kind=mdp, got ") +
                                    to_string(model.kind));
    require_policy_compatible(model, policy);
    return detail::induce_point_dtmc(model, policy, 0);
}

/**
 * Incremental model assembly for tests, generators and the document parser.
 * Structural misuse (unknown names, duplicate transitions) throws
 * FormatError immediately; semantic problems are left for validate().
 */
class ModelBuilder {
  public:
    explicit ModelBuilder(ModelKind kind, int environments = 1) : kind_(kind) {
        model_.kind = kind;
        model_.environments = environments;
        if (kind != ModelKind::Memdp && environments != 1)
            throw FormatError("only memdp models take an environment count");
        if (environments < 1) throw FormatError("environment count must be positive");
    }

    ModelBuilder& states(const std::vector<std::string>& names) {
        for (const auto& n : names) state(n);
        return *this;
    }

    ModelBuilder& state(const std::string& name) {
        if (model_.state_index(name) >= 0) throw FormatError("duplicate state name '" + name + "'");
        model_.state_names.push_back(name);
        return *this;
    }

    ModelBuilder& actions(const std::vector<std::string>& names) {
        for (const auto& n : names) action(n);
        return *this;
    }

    ModelBuilder& action(const std::string& name) {
        if (model_.action_index(name) >= 0)
            throw FormatError("duplicate action name '" + name + "'");
        model_.action_names.push_back(name);
        return *this;
    }

    ModelBuilder& initial(const std::string& name) {
        initial_ = name;
        return *this;
    }

    /// Point transition (kind mdp, l1 centers, or one memdp environment).
    ModelBuilder& transition(const std::string& from, const std::string& action,
                             const std::string& to, double p, int environment = 0) {
        Cell& cell = cell_for(from, action);
        add_succ(cell, environment, to, {p, 0.0});
        return *this;
    }

    /// Interval transition (kind imdp).
    ModelBuilder& bounds(const std::string& from, const std::string& action,
                         const std::string& to, double lower, double upper) {
        Cell& cell = cell_for(from, action);
        add_succ(cell, 0, to, {lower, upper});
        return *this;
    }

    /// L1 deviation budget for a (state, action) pair (kind l1).
    ModelBuilder& deviation(const std::string& from, const std::string& action, double d) {
        Cell& cell = cell_for(from, action);
        if (cell.deviation.has_value())
            throw FormatError("duplicate deviation for (" + from + "," + action + ")");
        cell.deviation = d;
        return *this;
    }

    ModelBuilder& reward(const std::string& from, const std::string& action, double value) {
        Cell& cell = cell_for(from, action);
        if (cell.reward.has_value())
            throw FormatError("duplicate reward for (" + from + "," + action + ")");
        cell.reward = value;
        return *this;
    }

    /// Assembles the model. Support order is ascending state index (i.e.
    /// declaration order); enabled actions ascend by action index.
    Model build() {
        model_.states.assign(model_.state_names.size(), {});
        if (!initial_.has_value()) throw FormatError("no initial state declared");
        model_.initial = model_.state_index(*initial_);
        if (model_.initial < 0) throw FormatError("initial state '" + *initial_ + "' undeclared");

        for (auto& [key, cell] : cells_) {
            auto [s, a] = key;
            ActionEntry entry;
            entry.action = a;
            entry.reward = cell.reward;
            entry.rows.resize(model_.environments);
            for (int env = 0; env < model_.environments; ++env) {
                auto it = cell.succ.find(env);
                if (it == cell.succ.end()) continue;  // left undefined for validate()
                std::vector<int> support;
                std::vector<double> first, second;
                for (auto& [succ, pair] : it->second) {
                    support.push_back(succ);
                    first.push_back(pair.first);
                    second.push_back(pair.second);
                }
                switch (model_.kind) {
                    case ModelKind::Imdp:
                        entry.rows[env] = UncertainRow::interval(support, first, second);
                        break;
                    case ModelKind::L1:
                        entry.rows[env] =
                            UncertainRow::l1(support, first, cell.deviation.value_or(0.0));
                        break;
                    default:
                        entry.rows[env] = UncertainRow::point(support, first);
                        break;
                }
            }
            model_.states[s].push_back(std::move(entry));
        }
        for (auto& entries : model_.states)
            std::sort(entries.begin(), entries.end(),
                      [](const ActionEntry& x, const ActionEntry& y) { return x.action < y.action; });
        return model_;
    }

    /// Gaps between declared deviations and transition-bearing pairs, for the
    /// parser's schema check (kind l1 only).
    std::vector<std::string> deviation_gaps() const {
        std::vector<std::string> gaps;
        for (const auto& [key, cell] : cells_) {
            const bool has_rows = !cell.succ.empty();
            if (has_rows && !cell.deviation.has_value())
                gaps.push_back("missing deviation for (" + model_.state_names[key.first] + "," +
                               model_.action_names[key.second] + ")");
            if (!has_rows && cell.deviation.has_value())
                gaps.push_back("deviation without transitions for (" +
                               model_.state_names[key.first] + "," +
                               model_.action_names[key.second] + ")");
        }
        return gaps;
    }

  private:
    struct Cell {
        // per environment: successor -> (p|lower|center, upper)
        std::map<int, std::map<int, std::pair<double, double>>> succ;
        std::optional<double> deviation;
        std::optional<double> reward;
    };

    Cell& cell_for(const std::string& from, const std::string& action) {
        int s = model_.state_index(from);
        if (s < 0) throw FormatError("unknown state '" + from + "'");
        int a = model_.action_index(action);
        if (a < 0) throw FormatError("unknown action '" + action + "'");
        return cells_[{s, a}];
    }

    void add_succ(Cell& cell, int environment, const std::string& to,
                  std::pair<double, double> value) {
        if (environment < 0 || environment >= model_.environments)
            throw FormatError("environment index " + std::to_string(environment) +
                              " out of range");
        int t = model_.state_index(to);
        if (t < 0) throw FormatError("unknown state '" + to + "'");
        auto& row = cell.succ[environment];
        if (row.count(t))
            throw FormatError("duplicate transition to '" + to + "'");
        row[t] = value;
    }

    ModelKind kind_;
    Model model_;
    std::optional<std::string> initial_;
    std::map<std::pair<int, int>, Cell> cells_;
};

}  // namespace rmdp
