// Command-line front end: solve / generate / learn over JSON model files.
//
// Exit codes: 0 success, 2 usage or document errors, 3 I/O failures,
// 4 solver stopped at the iteration cap (the result document is still
// written so callers can inspect the partial answer).

#include <cstdint>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <rmdp/rmdp.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNoConvergence = 4;

void emit(const rmdp::json& document, const std::string& output_path) {
    const std::string text = document.dump(2) + "\n";
    if (output_path.empty())
        std::cout << text;
    else
        rmdp::write_text(output_path, text);
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string part;
    while (std::getline(stream, part, ','))
        if (!part.empty()) parts.push_back(part);
    return parts;
}

rmdp::Mode parse_mode(const std::string& text) {
    if (text == "robust") return rmdp::Mode::Robust;
    if (text == "optimistic") return rmdp::Mode::Optimistic;
    if (text == "nominal") return rmdp::Mode::Nominal;
    throw rmdp::FormatError("unknown mode '" + text + "'");
}

rmdp::Method parse_method(const std::string& text) {
    if (text == "vi") return rmdp::Method::ValueIteration;
    if (text == "pi") return rmdp::Method::PolicyIteration;
    if (text == "enumerate") return rmdp::Method::Enumerate;
    throw rmdp::FormatError("unknown method '" + text + "'");
}

/// Resolves --objective/--target/--discount against the loaded model,
/// rejecting flag combinations that do not fit the objective type.
rmdp::Objective build_objective(const rmdp::Model& model, const std::string& objective_text,
                                const std::string& target_csv, double discount,
                                bool discount_given) {
    const bool discounted = objective_text == "discounted";
    if (discounted && !target_csv.empty())
        throw rmdp::FormatError("--target does not apply to the discounted objective");
    if (!discounted && discount_given)
        throw rmdp::FormatError("--discount applies only to the discounted objective");
    if (discounted) return rmdp::Objective::discounted(discount);

    if (target_csv.empty())
        throw rmdp::FormatError("objective '" + objective_text +
                                "' requires --target with at least one state name");
    std::vector<int> target;
    for (const std::string& name : split_csv(target_csv)) {
        const int s = model.state_index(name);
        if (s < 0) throw rmdp::FormatError("--target names unknown state '" + name + "'");
        target.push_back(s);
    }
    if (objective_text == "reach-reward") return rmdp::Objective::reach_reward(target);
    if (objective_text == "reachability") return rmdp::Objective::reachability(target);
    throw rmdp::FormatError("unknown objective '" + objective_text +
                            "' (expected reach-reward|reachability|discounted)");
}

/// Loads and validates a model, printing every diagnostic on failure.
rmdp::Model load_checked_model(const std::string& path) {
    rmdp::Model model = rmdp::load_model(path);
    const std::vector<rmdp::Diagnostic> diagnostics = rmdp::validate(model);
    if (!diagnostics.empty()) {
        std::cerr << "error: model '" << path << "' failed validation:\n";
        for (const rmdp::Diagnostic& d : diagnostics)
            std::cerr << "  [" << d.rule << "] " << d.message << "\n";
        throw rmdp::ValidationError("invalid model", diagnostics);
    }
    return model;
}

/// Worst-case evaluation of a fixed policy over a finite environment set.
/// The document's `values` are the per-state minima over environments; the
/// per-environment initial-state values are listed alongside.
int run_memdp_evaluation(const rmdp::Model& model, const rmdp::json& policy_json,
                         const rmdp::Objective& objective, const std::string& output_path) {
    const rmdp::StationaryPolicy policy = rmdp::parse_policy_document(policy_json, model);
    const rmdp::MemdpEvaluation evaluation = rmdp::memdp_evaluate(model, policy, objective);

    rmdp::ValueVector worst;
    worst.values.assign(model.num_states(), rmdp::kInf);
    for (const auto& env_values : evaluation.values)
        for (int s = 0; s < model.num_states(); ++s)
            worst.values[s] = std::min(worst.values[s], env_values[s]);
    worst.converged = true;

    rmdp::json document =
        rmdp::result_document(model, worst, policy_json, rmdp::Mode::Robust, objective);
    rmdp::json initials = rmdp::json::array();
    for (const auto& env_values : evaluation.values) {
        const double v = env_values[model.initial];
        if (std::isinf(v))
            initials.push_back("inf");
        else
            initials.push_back(rmdp::round_12_significant(v));
    }
    document["environment_initial_values"] = std::move(initials);
    document["worst_environment"] = evaluation.worst_environment;
    emit(document, output_path);
    return kExitOk;
}

int run_solve(const std::string& model_path, const std::string& objective_text,
              const std::string& target_csv, double discount, bool discount_given,
              const std::string& mode_text, const std::string& method_text, double epsilon,
              long max_iter, const std::string& policy_path, const std::string& output_path) {
    const rmdp::Model model = load_checked_model(model_path);
    const rmdp::Objective objective =
        build_objective(model, objective_text, target_csv, discount, discount_given);
    const rmdp::Mode mode = parse_mode(mode_text);
    const rmdp::Method method = parse_method(method_text);

    if (model.kind == rmdp::ModelKind::Memdp) {
        if (mode != rmdp::Mode::Robust)
            throw rmdp::FormatError(
                "multi-environment models support --mode robust only");
        if (!policy_path.empty())
            return run_memdp_evaluation(model, rmdp::load_json(policy_path), objective,
                                        output_path);
        if (method != rmdp::Method::Enumerate)
            throw rmdp::FormatError(
                "multi-environment models require --method enumerate (value and policy "
                "iteration assume per-step environment choices)");
    } else if (method == rmdp::Method::Enumerate) {
        throw rmdp::FormatError("--method enumerate applies only to multi-environment models");
    }

    if (!policy_path.empty()) {
        const rmdp::json policy_json = rmdp::load_json(policy_path);
        const rmdp::StationaryPolicy policy = rmdp::parse_policy_document(policy_json, model);
        const rmdp::ValueVector values =
            rmdp::policy_evaluation(model, policy, objective, mode, epsilon, max_iter);
        emit(rmdp::result_document(model, values, policy_json, mode, objective), output_path);
        return values.converged ? kExitOk : kExitNoConvergence;
    }

    const rmdp::SolveResult result =
        rmdp::solve(model, objective, mode, method, epsilon, max_iter);
    emit(rmdp::result_document(model, result.values,
                               rmdp::policy_to_json(model, result.policy), mode, objective),
         output_path);
    return result.values.converged ? kExitOk : kExitNoConvergence;
}

int run_generate(int states, int actions, const std::string& kind_text, double density,
                 double width, std::uint64_t seed, const std::string& output_path) {
    rmdp::GeneratorConfig config;
    config.states = states;
    config.actions = actions;
    config.kind = rmdp::detail::parse_kind(kind_text);
    config.density = density;
    config.width = width;
    config.seed = seed;
    emit(rmdp::serialize_model(rmdp::generate_model(config)), output_path);
    return kExitOk;
}

int run_learn(const std::string& truth_path, long samples, double delta, double eps_min,
              std::uint64_t seed, const std::string& objective_text,
              const std::string& target_csv, double discount, bool discount_given,
              double epsilon, long max_iter, const std::string& output_path,
              const std::string& output_model_path) {
    const rmdp::Model truth = load_checked_model(truth_path);
    const rmdp::Objective objective =
        build_objective(truth, objective_text, target_csv, discount, discount_given);
    const rmdp::PacConfig config(delta, samples, eps_min);
    const rmdp::PacResult result =
        rmdp::pac_pipeline(truth, config, objective, seed, epsilon, max_iter);

    rmdp::json document;
    document["learned_model"] = rmdp::serialize_model(result.learned);
    document["result"] = rmdp::result_document(
        result.learned, result.robust.values,
        rmdp::policy_to_json(result.learned, result.robust.policy), rmdp::Mode::Robust,
        objective);
    document["nominal"] = rmdp::result_document(
        truth, result.nominal.values, rmdp::policy_to_json(truth, result.nominal.policy),
        rmdp::Mode::Nominal, objective);
    document["metadata"] = {{"delta", delta},
                            {"delta_prime", result.delta_prime},
                            {"n_per_sa", samples},
                            {"eps_min", eps_min},
                            {"seed", seed}};
    emit(document, output_path);
    if (!output_model_path.empty())
        rmdp::write_text(output_model_path,
                         rmdp::serialize_model(result.learned).dump(2) + "\n");
    return result.robust.values.converged && result.nominal.values.converged
               ? kExitOk
               : kExitNoConvergence;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const rmdp::IoError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitIo;
    } catch (const rmdp::ValidationError&) {
        return kExitUsage;  // diagnostics already printed
    } catch (const rmdp::FormatError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust Markov decision processes: solve, generate, learn"};
    app.require_subcommand(1);

    // --- solve ---------------------------------------------------------
    auto* solve_cmd = app.add_subcommand("solve", "Solve a model file or evaluate a policy");
    std::string model_path, objective_text, target_csv, policy_path, output_path;
    std::string mode_text = "robust", method_text = "vi";
    double discount = 0.0, epsilon = 1e-6;
    long max_iter = 100000;
    solve_cmd->add_option("--model", model_path, "Model document to solve")->required();
    solve_cmd->add_option("--objective", objective_text, "reach-reward|reachability|discounted")
        ->required()
        ->check(CLI::IsMember({"reach-reward", "reachability", "discounted"}));
    solve_cmd->add_option("--target", target_csv,
                          "Comma-separated target state names (reach objectives)");
    auto* discount_opt =
        solve_cmd->add_option("--discount", discount, "Discount factor in [0,1)");
    solve_cmd->add_option("--mode", mode_text, "robust|optimistic|nominal (default robust)")
        ->check(CLI::IsMember({"robust", "optimistic", "nominal"}));
    solve_cmd->add_option("--method", method_text, "vi|pi|enumerate (default vi)")
        ->check(CLI::IsMember({"vi", "pi", "enumerate"}));
    solve_cmd->add_option("--epsilon", epsilon, "Convergence threshold (default 1e-6)");
    solve_cmd->add_option("--max-iter", max_iter, "Iteration cap (default 100000)");
    solve_cmd->add_option("--policy", policy_path,
                          "Evaluate this policy document instead of optimizing");
    solve_cmd->add_option("--output", output_path, "Write the result here instead of stdout");

    // --- generate ------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("generate", "Emit a random model document");
    int gen_states = 2, gen_actions = 1;
    std::string gen_kind = "imdp", gen_output;
    double gen_density = 0.3, gen_width = 0.2;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("--states", gen_states, "Number of states (>= 2)")->required();
    gen_cmd->add_option("--actions", gen_actions, "Actions per state")->required();
    gen_cmd->add_option("--kind", gen_kind, "mdp|imdp|l1 (default imdp)")
        ->check(CLI::IsMember({"mdp", "imdp", "l1"}));
    gen_cmd->add_option("--density", gen_density, "Extra-edge probability (default 0.3)");
    gen_cmd->add_option("--width", gen_width, "Uncertainty width budget (default 0.2)");
    gen_cmd->add_option("--seed", gen_seed, "Generator seed")->required();
    gen_cmd->add_option("--output", gen_output, "Write the model here instead of stdout");

    // --- learn ---------------------------------------------------------
    auto* learn_cmd =
        app.add_subcommand("learn", "Sample a point model and learn an interval model");
    std::string truth_path, learn_objective, learn_target, learn_output, learn_output_model;
    long learn_samples = 0;
    double learn_delta = 0.0, learn_eps_min = 1e-6, learn_discount = 0.0;
    double learn_epsilon = 1e-6;
    long learn_max_iter = 100000;
    std::uint64_t learn_seed = 0;
    learn_cmd->add_option("--truth", truth_path, "Point model to sample from")->required();
    learn_cmd->add_option("--samples", learn_samples, "Samples per state-action pair")
        ->required();
    learn_cmd->add_option("--delta", learn_delta, "Total failure probability in (0,1)")
        ->required();
    learn_cmd->add_option("--eps-min", learn_eps_min,
                          "Lower-bound floor for learned intervals (default 1e-6)");
    learn_cmd->add_option("--seed", learn_seed, "Sampling seed")->required();
    learn_cmd
        ->add_option("--objective", learn_objective, "reach-reward|reachability|discounted")
        ->required()
        ->check(CLI::IsMember({"reach-reward", "reachability", "discounted"}));
    learn_cmd->add_option("--target", learn_target,
                          "Comma-separated target state names (reach objectives)");
    auto* learn_discount_opt =
        learn_cmd->add_option("--discount", learn_discount, "Discount factor in [0,1)");
    learn_cmd->add_option("--epsilon", learn_epsilon, "Convergence threshold (default 1e-6)");
    learn_cmd->add_option("--max-iter", learn_max_iter, "Iteration cap (default 100000)");
    learn_cmd->add_option("--output", learn_output, "Write the report here instead of stdout");
    learn_cmd->add_option("--output-model", learn_output_model,
                          "Also write the learned model document here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return kExitUsage;
    }

    if (solve_cmd->parsed())
        return guarded([&] {
            return run_solve(model_path, objective_text, target_csv, discount,
                             discount_opt->count() > 0, mode_text, method_text, epsilon,
                             max_iter, policy_path, output_path);
        });
    if (gen_cmd->parsed())
        return guarded([&] {
            return run_generate(gen_states, gen_actions, gen_kind, gen_density, gen_width,
                                gen_seed, gen_output);
        });
    return guarded([&] {
        return run_learn(truth_path, learn_samples, learn_delta, learn_eps_min, learn_seed,
                         learn_objective, learn_target, learn_discount,
                         learn_discount_opt->count() > 0, learn_epsilon, learn_max_iter,
                         learn_output, learn_output_model);
    });
}
