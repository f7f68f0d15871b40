#pragma once
// JSON document formats: model files (one schema per model kind), policy
// files, and result documents. Serialization is canonical - object keys
// sorted, arrays in index order, shortest-roundtrip numbers - so equal
// models produce identical bytes, which the content hash and the
// golden-output tests rely on.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmdp/model.hpp"
#include "rmdp/objective.hpp"
#include "rmdp/solver.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

using nlohmann::json;

namespace detail {

inline void require_keys(const json& object, const std::vector<std::string>& required,
                         const std::vector<std::string>& optional, const std::string& where) {
    for (const auto& key : required)
        if (!object.contains(key))
            throw FormatError(where + ": missing required key '" + key + "'");
    for (const auto& [key, value] : object.items()) {
        (void)value;
        bool known = false;
        for (const auto& k : required) known = known || k == key;
        for (const auto& k : optional) known = known || k == key;
        if (!known) throw FormatError(where + ": unknown key '" + key + "'");
    }
}

inline std::string get_string(const json& object, const char* key, const std::string& where) {
    const auto& value = object.at(key);
    if (!value.is_string())
        throw FormatError(where + ": key '" + key + "' must be a string");
    return value.get<std::string>();
}

inline double get_number(const json& object, const char* key, const std::string& where) {
    const auto& value = object.at(key);
    if (!value.is_number())
        throw FormatError(where + ": key '" + key + "' must be a number");
    return value.get<double>();
}

inline ModelKind parse_kind(const std::string& text) {
    if (text == "mdp") return ModelKind::Mdp;
    if (text == "imdp") return ModelKind::Imdp;
    if (text == "l1") return ModelKind::L1;
    if (text == "memdp") return ModelKind::Memdp;
    throw FormatError("unknown model kind '" + text + "' (expected mdp|imdp|l1|memdp)");
}

inline void parse_point_transitions(ModelBuilder& builder, const json& list, int environment,
                                    const std::string& where) {
    if (!list.is_array()) throw FormatError(where + " must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        const json& t = list[i];
        if (!t.is_object()) throw FormatError(at + " must be an object");
        require_keys(t, {"from", "action", "to", "p"}, {}, at);
        builder.transition(get_string(t, "from", at), get_string(t, "action", at),
                           get_string(t, "to", at), get_number(t, "p", at), environment);
    }
}

}  // namespace detail

/**
 * Parses a model document. Rejects malformed JSON, unknown keys, unknown
 * names and duplicate entries with FormatError; semantic violations (sums,
 * bounds, coverage) are left to validate() so callers can report the full
 * diagnostic list.
 *
 * Document shape: kind, states, initial, actions, rewards plus per kind
 *   mdp:   transitions [{from, action, to, p}]
 *   imdp:  transitions [{from, action, to, lower, upper}]
 *   l1:    transitions [{from, action, to, p}] and deviations
 *          [{state, action, d}] covering exactly the transition-bearing pairs
 *   memdp: environments [[{from, action, to, p}], ...]
 */
inline Model parse_model_document(const json& document) {
    if (!document.is_object()) throw FormatError("model document must be a JSON object");
    const std::string kind_text =
        detail::get_string(document, "kind", "model document");
    const ModelKind kind = detail::parse_kind(kind_text);

    std::vector<std::string> required{"kind", "states", "initial", "actions", "rewards"};
    switch (kind) {
        case ModelKind::Mdp:
        case ModelKind::Imdp: required.push_back("transitions"); break;
        case ModelKind::L1:
            required.push_back("transitions");
            required.push_back("deviations");
            break;
        case ModelKind::Memdp: required.push_back("environments"); break;
    }
    detail::require_keys(document, required, {}, "model document");

    const json& states = document.at("states");
    const json& actions = document.at("actions");
    if (!states.is_array() || states.empty())
        throw FormatError("'states' must be a nonempty array of names");
    if (!actions.is_array() || actions.empty())
        throw FormatError("'actions' must be a nonempty array of names");

    int environments = 1;
    if (kind == ModelKind::Memdp) {
        const json& envs = document.at("environments");
        if (!envs.is_array() || envs.empty())
            throw FormatError("'environments' must be a nonempty array of transition lists");
        environments = static_cast<int>(envs.size());
    }

    ModelBuilder builder(kind, environments);
    for (const auto& name : states) {
        if (!name.is_string()) throw FormatError("'states' entries must be strings");
        builder.state(name.get<std::string>());
    }
    for (const auto& name : actions) {
        if (!name.is_string()) throw FormatError("'actions' entries must be strings");
        builder.action(name.get<std::string>());
    }
    builder.initial(detail::get_string(document, "initial", "model document"));

    if (kind == ModelKind::Imdp) {
        const json& list = document.at("transitions");
        if (!list.is_array()) throw FormatError("'transitions' must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string at = "transitions[" + std::to_string(i) + "]";
            const json& t = list[i];
            if (!t.is_object()) throw FormatError(at + " must be an object");
            detail::require_keys(t, {"from", "action", "to", "lower", "upper"}, {}, at);
            builder.bounds(detail::get_string(t, "from", at),
                           detail::get_string(t, "action", at), detail::get_string(t, "to", at),
                           detail::get_number(t, "lower", at),
                           detail::get_number(t, "upper", at));
        }
    } else if (kind == ModelKind::Memdp) {
        const json& envs = document.at("environments");
        for (std::size_t e = 0; e < envs.size(); ++e)
            detail::parse_point_transitions(builder, envs[e], static_cast<int>(e),
                                            "environments[" + std::to_string(e) + "]");
    } else {
        detail::parse_point_transitions(builder, document.at("transitions"), 0, "transitions");
    }

    if (kind == ModelKind::L1) {
        const json& list = document.at("deviations");
        if (!list.is_array()) throw FormatError("'deviations' must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string at = "deviations[" + std::to_string(i) + "]";
            const json& d = list[i];
            if (!d.is_object()) throw FormatError(at + " must be an object");
            detail::require_keys(d, {"state", "action", "d"}, {}, at);
            builder.deviation(detail::get_string(d, "state", at),
                              detail::get_string(d, "action", at),
                              detail::get_number(d, "d", at));
        }
    }

    const json& rewards = document.at("rewards");
    if (!rewards.is_array()) throw FormatError("'rewards' must be an array");
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        const std::string at = "rewards[" + std::to_string(i) + "]";
        const json& r = rewards[i];
        if (!r.is_object()) throw FormatError(at + " must be an object");
        detail::require_keys(r, {"state", "action", "value"}, {}, at);
        builder.reward(detail::get_string(r, "state", at), detail::get_string(r, "action", at),
                       detail::get_number(r, "value", at));
    }

    Model model = builder.build();
    if (kind == ModelKind::L1)
        for (const std::string& gap : builder.deviation_gaps()) throw FormatError(gap);
    return model;
}

/// Canonical document for a model; parse(serialize(m)) reproduces m.
inline json serialize_model(const Model& model) {
    json document;
    document["kind"] = to_string(model.kind);
    document["states"] = model.state_names;
    document["actions"] = model.action_names;
    document["initial"] = model.state_name(model.initial);

    json rewards = json::array();
    auto emit_rows = [&](int environment) {
        json list = json::array();
        for (int s = 0; s < model.num_states(); ++s) {
            for (const ActionEntry& entry : model.states[s]) {
                const UncertainRow& row = entry.rows.at(environment);
                if (!row.defined()) continue;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    json t;
                    t["from"] = model.state_name(s);
                    t["action"] = model.action_name(entry.action);
                    t["to"] = model.state_name(row.support()[i]);
                    if (row.is_interval()) {
                        t["lower"] = row.as_interval().lower[i];
                        t["upper"] = row.as_interval().upper[i];
                    } else if (row.is_l1()) {
                        t["p"] = row.as_l1().center[i];
                    } else {
                        t["p"] = row.as_point().probs[i];
                    }
                    list.push_back(std::move(t));
                }
            }
        }
        return list;
    };

    if (model.kind == ModelKind::Memdp) {
        json envs = json::array();
        for (int e = 0; e < model.environments; ++e) envs.push_back(emit_rows(e));
        document["environments"] = std::move(envs);
    } else {
        document["transitions"] = emit_rows(0);
    }

    if (model.kind == ModelKind::L1) {
        json deviations = json::array();
        for (int s = 0; s < model.num_states(); ++s)
            for (const ActionEntry& entry : model.states[s]) {
                if (!entry.rows[0].defined()) continue;
                json d;
                d["state"] = model.state_name(s);
                d["action"] = model.action_name(entry.action);
                d["d"] = entry.rows[0].as_l1().radius;
                deviations.push_back(std::move(d));
            }
        document["deviations"] = std::move(deviations);
    }

    for (int s = 0; s < model.num_states(); ++s)
        for (const ActionEntry& entry : model.states[s]) {
            if (!entry.reward.has_value()) continue;
            json r;
            r["state"] = model.state_name(s);
            r["action"] = model.action_name(entry.action);
            r["value"] = *entry.reward;
            rewards.push_back(std::move(r));
        }
    document["rewards"] = std::move(rewards);
    return document;
}

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits. A stable
/// content digest for cross-referencing results with their inputs (not a
/// cryptographic commitment).
inline std::string model_hash(const Model& model) {
    const std::string canonical = serialize_model(model).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char byte : canonical) {
        h ^= byte;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Rounds through text to at most 12 significant digits, the precision
/// result documents print values with.
inline double round_12_significant(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return std::strtod(buf, nullptr);
}

/// Policy document from a solver policy: state name -> action name.
inline json policy_to_json(const Model& model, const StationaryPolicy& policy) {
    json out;
    for (int s = 0; s < model.num_states(); ++s) {
        const auto& choice = policy.choice[s];
        if (choice.size() == 1 && choice[0].second == 1.0) {
            out[model.state_name(s)] = model.action_name(choice[0].first);
        } else {
            json mix;
            for (auto [a, w] : choice) mix[model.action_name(a)] = w;
            out[model.state_name(s)] = std::move(mix);
        }
    }
    return out;
}

/// Parses a policy document: a JSON object mapping every state name to
/// either an action name or an object of action-name -> probability.
inline StationaryPolicy parse_policy_document(const json& document, const Model& model) {
    if (!document.is_object()) throw FormatError("policy document must be a JSON object");
    StationaryPolicy policy;
    policy.choice.resize(model.num_states());
    std::vector<char> seen(model.num_states(), 0);
    for (const auto& [state_name, value] : document.items()) {
        const int s = model.state_index(state_name);
        if (s < 0) throw FormatError("policy references unknown state '" + state_name + "'");
        seen[s] = 1;
        if (value.is_string()) {
            const int a = model.action_index(value.get<std::string>());
            if (a < 0)
                throw FormatError("policy references unknown action '" +
                                  value.get<std::string>() + "'");
            policy.choice[s] = {{a, 1.0}};
        } else if (value.is_object()) {
            for (const auto& [action_name, weight] : value.items()) {
                const int a = model.action_index(action_name);
                if (a < 0)
                    throw FormatError("policy references unknown action '" + action_name + "'");
                if (!weight.is_number())
                    throw FormatError("policy weight for action '" + action_name +
                                      "' must be a number");
                policy.choice[s].push_back({a, weight.get<double>()});
            }
            std::sort(policy.choice[s].begin(), policy.choice[s].end());
        } else {
            throw FormatError("policy entry for state '" + state_name +
                              "' must be an action name or an action->probability object");
        }
    }
    for (int s = 0; s < model.num_states(); ++s)
        if (!seen[s])
            throw FormatError("policy does not cover state '" + model.state_name(s) + "'");
    return policy;
}

inline json objective_to_json(const Model& model, const Objective& objective) {
    json out;
    out["type"] = to_string(objective.kind);
    if (objective.kind == ObjectiveKind::Discounted) {
        out["discount"] = objective.discount;
    } else {
        json names = json::array();
        for (int t : objective.target) names.push_back(model.state_name(t));
        out["target"] = std::move(names);
    }
    return out;
}

/**
 * Result document: values (12 significant digits; "inf" for states whose
 * expected total reward is infinite), the witnessing policy, convergence
 * bookkeeping, the solve configuration and the input model's content hash.
 */
inline json result_document(const Model& model, const ValueVector& values,
                            const json& policy_json, Mode mode, const Objective& objective) {
    json document;
    json value_map;
    for (int s = 0; s < model.num_states(); ++s) {
        const double v = values.values.at(s);
        if (std::isinf(v))
            value_map[model.state_name(s)] = "inf";
        else
            value_map[model.state_name(s)] = round_12_significant(v);
    }
    document["values"] = std::move(value_map);
    document["policy"] = policy_json;
    document["iterations"] = values.iterations;
    document["converged"] = values.converged;
    document["residual"] = round_12_significant(values.residual);
    document["mode"] = to_string(mode);
    document["objective"] = objective_to_json(model, objective);
    document["version"] = kToolVersion;
    document["model_hash"] = model_hash(model);
    return document;
}

/// Reads and parses a JSON file. Unreadable paths raise IoError; malformed
/// JSON raises FormatError carrying the parser's line/column context.
inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path + "'");
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& err) {
        throw FormatError(std::string("in '") + path + "': " + err.what());
    }
}

inline Model load_model(const std::string& path) { return parse_model_document(load_json(path)); }

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace rmdp
