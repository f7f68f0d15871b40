// Model assembly, semantic validation and policy-induced chains. Structural
// misuse must throw immediately from the builder, while semantic defects are
// collected by validate() one diagnostic per violation.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include <rmdp/model.hpp>
#include <rmdp/types.hpp>
#include <rmdp/uncertainty.hpp>

#include "test_models.hpp"

using rmdp::ActionEntry;
using rmdp::FormatError;
using rmdp::Model;
using rmdp::ModelBuilder;
using rmdp::ModelKind;
using rmdp::StationaryPolicy;
using rmdp::UncertainRow;
using rmdp::ValidationError;

namespace {

bool has_rule(const std::vector<rmdp::Diagnostic>& diags, const std::string& rule) {
    return std::any_of(diags.begin(), diags.end(),
                       [&](const rmdp::Diagnostic& d) { return d.rule == rule; });
}

/// Minimal valid point model: one state looping under one action.
Model tiny_mdp() {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s"}).actions({"a"}).initial("s");
    b.transition("s", "a", "s", 1.0);
    b.reward("s", "a", 0.0);
    return b.build();
}

}  // namespace

TEST_CASE("builder assembles names, indices and sorted entries") {
    const Model model = testm::two_action_model();
    CHECK(model.kind == ModelKind::Imdp);
    CHECK(model.num_states() == 2);
    CHECK(model.num_actions() == 2);
    CHECK(model.initial == 0);
    CHECK(model.state_index("g") == 1);
    CHECK(model.state_index("nope") == -1);
    CHECK(model.action_index("b") == 1);
    CHECK(model.action_index("nope") == -1);

    CHECK(rmdp::enabled_actions(model, 0) == std::vector<int>{0, 1});
    CHECK(rmdp::enabled_actions(model, 1) == std::vector<int>{0});
    CHECK_THROWS_AS(rmdp::enabled_actions(model, 2), std::out_of_range);

    // Supports ascend by state index regardless of declaration order.
    const ActionEntry* entry = model.find_entry(0, 0);
    REQUIRE(entry != nullptr);
    CHECK(entry->row().support() == std::vector<int>{0, 1});
    CHECK(entry->reward == 1.0);
    CHECK(model.find_entry(1, 1) == nullptr);

    CHECK(rmdp::validate(model).empty());
    CHECK_NOTHROW(rmdp::require_valid(model));
}

TEST_CASE("builder rejects structural misuse outright") {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s"}).actions({"a"});
    CHECK_THROWS_AS(b.state("s"), FormatError);
    CHECK_THROWS_AS(b.action("a"), FormatError);
    CHECK_THROWS_AS(b.transition("t", "a", "s", 1.0), FormatError);
    CHECK_THROWS_AS(b.transition("s", "z", "s", 1.0), FormatError);
    CHECK_THROWS_AS(b.transition("s", "a", "t", 1.0), FormatError);
    CHECK_THROWS_AS(b.transition("s", "a", "s", 1.0, 1), FormatError);

    b.transition("s", "a", "s", 1.0);
    CHECK_THROWS_AS(b.transition("s", "a", "s", 0.5), FormatError);
    b.reward("s", "a", 0.0);
    CHECK_THROWS_AS(b.reward("s", "a", 1.0), FormatError);

    // No initial state declared.
    CHECK_THROWS_AS(b.build(), FormatError);
    b.initial("s");
    CHECK_NOTHROW(b.build());

    CHECK_THROWS_AS(ModelBuilder(ModelKind::Mdp, 2), FormatError);
    CHECK_THROWS_AS(ModelBuilder(ModelKind::Memdp, 0), FormatError);

    ModelBuilder undeclared(ModelKind::Mdp);
    undeclared.states({"s"}).actions({"a"}).initial("t");
    undeclared.transition("s", "a", "s", 1.0).reward("s", "a", 0.0);
    CHECK_THROWS_AS(undeclared.build(), FormatError);
}

TEST_CASE("builder tracks missing L1 deviations for the parser") {
    ModelBuilder b(ModelKind::L1);
    b.states({"s", "t"}).actions({"a", "b"}).initial("s");
    b.transition("s", "a", "t", 1.0).reward("s", "a", 0.0);
    b.deviation("s", "b", 0.1);
    const auto gaps = b.deviation_gaps();
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[0].find("missing deviation") != std::string::npos);
    CHECK(gaps[1].find("deviation without transitions") != std::string::npos);
    CHECK_THROWS_AS(b.deviation("s", "b", 0.2), FormatError);
}

TEST_CASE("validation flags deadlocks and domain mismatches") {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s", "t", "u"}).actions({"a", "b"}).initial("s");
    b.transition("s", "a", "s", 1.0).reward("s", "a", 0.0);
    b.transition("s", "b", "s", 1.0);     // transitions without reward
    b.reward("t", "a", 1.0);              // reward without transitions
    const auto diags = rmdp::validate(b.build());
    CHECK(has_rule(diags, "deadlock"));   // u enables nothing
    CHECK(has_rule(diags, "transitions-without-reward"));
    CHECK(has_rule(diags, "reward-without-transitions"));
}

TEST_CASE("validation flags out-of-range scalars") {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s"}).actions({"a"}).initial("s");
    b.transition("s", "a", "s", 1.0);
    b.reward("s", "a", -2.0);
    CHECK(has_rule(rmdp::validate(b.build()), "reward-range"));

    Model broken = tiny_mdp();
    broken.initial = 5;
    CHECK(has_rule(rmdp::validate(broken), "initial-state"));

    broken = tiny_mdp();
    broken.environments = 0;
    CHECK(has_rule(rmdp::validate(broken), "environment-count"));

    broken = tiny_mdp();
    broken.environments = 2;
    CHECK(has_rule(rmdp::validate(broken), "environment-count"));
}

TEST_CASE("validation flags malformed point rows") {
    ModelBuilder leaky(ModelKind::Mdp);
    leaky.states({"s"}).actions({"a"}).initial("s");
    leaky.transition("s", "a", "s", 0.9).reward("s", "a", 0.0);
    CHECK(has_rule(rmdp::validate(leaky.build()), "row-not-stochastic"));

    ModelBuilder hot(ModelKind::Mdp);
    hot.states({"s"}).actions({"a"}).initial("s");
    hot.transition("s", "a", "s", 1.2).reward("s", "a", 0.0);
    CHECK(has_rule(rmdp::validate(hot.build()), "probability-range"));

    Model wild = tiny_mdp();
    wild.states[0][0].rows[0] = UncertainRow::point({9}, {1.0});
    CHECK(has_rule(rmdp::validate(wild), "unknown-successor"));

    Model crossed = tiny_mdp();
    crossed.states[0][0].rows[0] = UncertainRow::interval({0}, {1.0}, {1.0});
    CHECK(has_rule(rmdp::validate(crossed), "row-kind-mismatch"));
}

TEST_CASE("validation flags malformed interval rows") {
    auto interval_model = [](double lo0, double hi0, double lo1, double hi1) {
        ModelBuilder b(ModelKind::Imdp);
        b.states({"s", "t"}).actions({"a"}).initial("s");
        b.bounds("s", "a", "s", lo0, hi0);
        b.bounds("s", "a", "t", lo1, hi1);
        b.reward("s", "a", 0.0);
        b.bounds("t", "a", "t", 1.0, 1.0);
        b.reward("t", "a", 0.0);
        return b.build();
    };
    CHECK(has_rule(rmdp::validate(interval_model(0.0, 0.5, 0.5, 1.0)), "zero-lower-bound"));
    CHECK(has_rule(rmdp::validate(interval_model(0.6, 0.4, 0.3, 0.6)), "bound-order"));
    CHECK(has_rule(rmdp::validate(interval_model(0.7, 0.8, 0.5, 0.9)), "row-infeasible"));
    CHECK(has_rule(rmdp::validate(interval_model(0.1, 0.4, 0.1, 0.4)), "row-infeasible"));
    CHECK(has_rule(rmdp::validate(interval_model(0.2, 1.3, 0.1, 0.8)), "probability-range"));
    CHECK(rmdp::validate(interval_model(0.3, 0.7, 0.3, 0.7)).empty());
}

TEST_CASE("validation flags malformed deviation rows") {
    auto ball_model = [](double p0, double p1, double d) {
        ModelBuilder b(ModelKind::L1);
        b.states({"s", "t"}).actions({"a"}).initial("s");
        b.transition("s", "a", "s", p0).transition("s", "a", "t", p1);
        b.deviation("s", "a", d).reward("s", "a", 0.0);
        b.transition("t", "a", "t", 1.0);
        b.deviation("t", "a", 0.0).reward("t", "a", 0.0);
        return b.build();
    };
    CHECK(rmdp::validate(ball_model(0.5, 0.5, 0.4)).empty());
    CHECK(has_rule(rmdp::validate(ball_model(0.5, 0.5, 2.5)), "deviation-range"));
    CHECK(has_rule(rmdp::validate(ball_model(0.5, 0.5, -0.1)), "deviation-range"));
    CHECK(has_rule(rmdp::validate(ball_model(0.5, 0.4, 0.4)), "row-not-stochastic"));
}

TEST_CASE("validation flags multi-environment coverage and support gaps") {
    ModelBuilder partial(ModelKind::Memdp, 2);
    partial.states({"s"}).actions({"a"}).initial("s");
    partial.transition("s", "a", "s", 1.0, 0);
    partial.reward("s", "a", 0.0);
    CHECK(has_rule(rmdp::validate(partial.build()), "environment-coverage"));

    ModelBuilder skewed(ModelKind::Memdp, 2);
    skewed.states({"s", "t"}).actions({"a"}).initial("s");
    skewed.transition("s", "a", "s", 1.0, 0);
    skewed.transition("s", "a", "t", 1.0, 1);
    skewed.reward("s", "a", 0.0);
    skewed.transition("t", "a", "t", 1.0, 0).transition("t", "a", "t", 1.0, 1);
    skewed.reward("t", "a", 0.0);
    CHECK(has_rule(rmdp::validate(skewed.build()), "environment-support-mismatch"));

    CHECK(rmdp::validate(testm::switch_memdp()).empty());
}

TEST_CASE("validation flags hand-assembled ordering defects") {
    Model model = tiny_mdp();
    model.states[0].push_back(model.states[0][0]);  // action 0 twice is not ascending
    CHECK(has_rule(rmdp::validate(model), "action-order"));

    Model unknown = tiny_mdp();
    unknown.states[0][0].action = 7;
    CHECK(has_rule(rmdp::validate(unknown), "unknown-action"));
}

TEST_CASE("require_valid carries the diagnostic list") {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s", "t"}).actions({"a"}).initial("s");
    b.transition("s", "a", "s", 1.0).reward("s", "a", 0.0);
    const Model model = b.build();
    try {
        rmdp::require_valid(model);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE(e.diagnostics().size() == 1);
        CHECK(e.diagnostics().front().rule == "deadlock");
        CHECK(std::string(e.what()).find("deadlock") != std::string::npos);
    }
}

TEST_CASE("policies know their shape and determinism") {
    StationaryPolicy det = StationaryPolicy::deterministic({0, 1, 0});
    CHECK(det.num_states() == 3);
    CHECK(det.is_deterministic());
    CHECK(det.action_at(1) == 1);

    StationaryPolicy mixed;
    mixed.choice = {{{0, 0.5}, {1, 0.5}}};
    CHECK(!mixed.is_deterministic());
    CHECK(mixed.action_at(0) == -1);
}

TEST_CASE("policy compatibility checks shape, support and weights") {
    const Model model = testm::two_action_model();

    CHECK_NOTHROW(rmdp::require_policy_compatible(
        model, StationaryPolicy::deterministic({1, 0})));
    StationaryPolicy mixed;
    mixed.choice = {{{0, 0.25}, {1, 0.75}}, {{0, 1.0}}};
    CHECK_NOTHROW(rmdp::require_policy_compatible(model, mixed));

    CHECK_THROWS_AS(rmdp::require_policy_compatible(
                        model, StationaryPolicy::deterministic({0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(rmdp::require_policy_compatible(
                        model, StationaryPolicy::deterministic({0, 1})),
                    std::invalid_argument);  // g enables only action a

    StationaryPolicy empty;
    empty.choice = {{}, {{0, 1.0}}};
    CHECK_THROWS_AS(rmdp::require_policy_compatible(model, empty), std::invalid_argument);

    StationaryPolicy unsorted;
    unsorted.choice = {{{1, 0.5}, {0, 0.5}}, {{0, 1.0}}};
    CHECK_THROWS_AS(rmdp::require_policy_compatible(model, unsorted), std::invalid_argument);

    StationaryPolicy leaky;
    leaky.choice = {{{0, 0.25}, {1, 0.5}}, {{0, 1.0}}};
    CHECK_THROWS_AS(rmdp::require_policy_compatible(model, leaky), std::invalid_argument);

    StationaryPolicy zeroed;
    zeroed.choice = {{{0, 0.0}, {1, 1.0}}, {{0, 1.0}}};
    CHECK_THROWS_AS(rmdp::require_policy_compatible(model, zeroed), std::invalid_argument);
}

TEST_CASE("induced chains mix rows and rewards by policy weight") {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s", "g"}).actions({"a", "b"}).initial("s");
    b.transition("s", "a", "g", 1.0).reward("s", "a", 1.0);
    b.transition("s", "b", "s", 0.5).transition("s", "b", "g", 0.5).reward("s", "b", 3.0);
    b.transition("g", "a", "g", 1.0).reward("g", "a", 0.0);
    const Model model = b.build();

    StationaryPolicy mixed;
    mixed.choice = {{{0, 0.5}, {1, 0.5}}, {{0, 1.0}}};
    const rmdp::Dtmc chain = rmdp::induce_dtmc(model, mixed);
    CHECK(chain.initial == 0);
    REQUIRE(chain.rows[0].support == std::vector<int>{0, 1});
    CHECK(chain.rows[0].probs[0] == Catch::Approx(0.25).margin(1e-15));
    CHECK(chain.rows[0].probs[1] == Catch::Approx(0.75).margin(1e-15));
    CHECK(chain.rewards[0] == Catch::Approx(2.0).margin(1e-15));
    CHECK(chain.rewards[1] == 0.0);

    CHECK_THROWS_AS(rmdp::induce_dtmc(testm::loop_exit_model(),
                                      StationaryPolicy::deterministic({0, 0})),
                    std::invalid_argument);
}

TEST_CASE("induced chains drop zero-probability padding") {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s", "g"}).actions({"a"}).initial("s");
    b.transition("s", "a", "s", 0.0).transition("s", "a", "g", 1.0).reward("s", "a", 1.0);
    b.transition("g", "a", "g", 1.0).reward("g", "a", 0.0);
    const Model model = b.build();

    const rmdp::Dtmc chain =
        rmdp::induce_dtmc(model, StationaryPolicy::deterministic({0, 0}));
    CHECK(chain.rows[0].support == std::vector<int>{1});
    CHECK(chain.rows[0].probs == std::vector<double>{1.0});
}

TEST_CASE("multi-environment fixture exposes one row per environment") {
    const Model model = testm::switch_memdp();
    CHECK(model.environments == 2);
    const ActionEntry* entry = model.find_entry(0, 0);
    REQUIRE(entry != nullptr);
    REQUIRE(entry->rows.size() == 2);
    CHECK(entry->row(0).support() == entry->row(1).support());
    CHECK(entry->row(0).as_point().probs == std::vector<double>{1.0, 0.0});
    CHECK(entry->row(1).as_point().probs == std::vector<double>{0.0, 1.0});
}
