// Qualitative analysis on support graphs: extraction, almost-sure
// reachability under every policy, the reach-reward partition, zero-probability
// states and breadth-first seeding. These must depend on supports only, never
// on the numeric row parameters.

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <stdexcept>
#include <vector>

#include <rmdp/graph.hpp>
#include <rmdp/model.hpp>
#include <rmdp/prng.hpp>

#include "test_models.hpp"

using rmdp::Model;
using rmdp::ModelBuilder;
using rmdp::ModelKind;
using rmdp::SupportGraph;

namespace {

/// Goal plus a state that may fall into an inescapable trap.
Model trap_model() {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s", "t", "g"}).actions({"a"}).initial("s");
    b.transition("s", "a", "t", 0.5).transition("s", "a", "g", 0.5).reward("s", "a", 1.0);
    b.transition("t", "a", "t", 1.0).reward("t", "a", 0.0);
    b.transition("g", "a", "g", 1.0).reward("g", "a", 0.0);
    return b.build();
}

/// Goal chain plus an unconnected island.
Model island_model() {
    ModelBuilder b(ModelKind::Mdp);
    b.states({"s", "g", "u"}).actions({"a"}).initial("s");
    b.transition("s", "a", "g", 1.0).reward("s", "a", 1.0);
    b.transition("g", "a", "g", 1.0).reward("g", "a", 0.0);
    b.transition("u", "a", "u", 1.0).reward("u", "a", 0.0);
    return b.build();
}

}  // namespace

TEST_CASE("support graphs collect sorted successors and predecessors") {
    const SupportGraph g = rmdp::support_graph(testm::two_action_model());
    REQUIRE(g.num_states() == 2);
    REQUIRE(g.states[0].size() == 2);
    CHECK(g.states[0][0].action == 0);
    CHECK(g.states[0][0].successors == std::vector<int>{0, 1});
    CHECK(g.states[0][1].successors == std::vector<int>{0, 1});
    CHECK(g.states[1][0].successors == std::vector<int>{1});
    CHECK(g.predecessors[0] == std::vector<int>{0});
    CHECK(g.predecessors[1] == std::vector<int>{0, 1});
}

TEST_CASE("multi-environment supports contribute once") {
    const SupportGraph g = rmdp::support_graph(testm::switch_memdp());
    CHECK(g.states[0][0].successors == std::vector<int>{1, 2});
    CHECK(g.states[0][1].successors == std::vector<int>{1, 2});
}

TEST_CASE("strict extraction rejects rows that can drop edges") {
    ModelBuilder b(ModelKind::Imdp);
    b.states({"s", "g"}).actions({"a"}).initial("s");
    b.bounds("s", "a", "s", 0.0, 0.5);
    b.bounds("s", "a", "g", 0.5, 1.0);
    b.reward("s", "a", 1.0);
    b.bounds("g", "a", "g", 1.0, 1.0);
    b.reward("g", "a", 0.0);
    const Model leaky = b.build();
    CHECK_NOTHROW(rmdp::support_graph(leaky));
    CHECK_THROWS_AS(rmdp::support_graph(leaky, true), std::invalid_argument);

    ModelBuilder m(ModelKind::Memdp, 2);
    m.states({"s", "t"}).actions({"a"}).initial("s");
    m.transition("s", "a", "s", 1.0, 0);
    m.transition("s", "a", "t", 1.0, 1);
    m.reward("s", "a", 0.0);
    m.transition("t", "a", "t", 1.0, 0).transition("t", "a", "t", 1.0, 1);
    m.reward("t", "a", 0.0);
    const Model skewed = m.build();
    CHECK_NOTHROW(rmdp::support_graph(skewed));
    CHECK_THROWS_AS(rmdp::support_graph(skewed, true), std::invalid_argument);
}

TEST_CASE("certain reachability spans the ring") {
    CHECK(rmdp::min_reach_certain(testm::ring_model(), {2}) == std::vector<int>{0, 1, 2});
    CHECK(rmdp::min_reach_certain(testm::loop_exit_model(), {1}) == std::vector<int>{0, 1});
    CHECK(rmdp::min_reach_certain(testm::two_action_model(), {1}) == std::vector<int>{0, 1});
}

TEST_CASE("certain reachability excludes states that can fall into traps") {
    // The first pass grows s through the not-yet-pruned trap; only the second
    // outer round discovers that s leaks.
    CHECK(rmdp::min_reach_certain(trap_model(), {2}) == std::vector<int>{2});
    CHECK(rmdp::min_reach_certain(island_model(), {1}) == std::vector<int>{0, 1});
}

TEST_CASE("certain reachability validates its target set") {
    const Model model = testm::ring_model();
    CHECK_THROWS_AS(rmdp::min_reach_certain(model, {}), std::invalid_argument);
    CHECK_THROWS_AS(rmdp::min_reach_certain(model, {7}), std::invalid_argument);
}

TEST_CASE("reach-reward partition splits target, solvable and infinite states") {
    const rmdp::ReachPartition ring = rmdp::classify_reach_reward(testm::ring_model(), {2});
    CHECK(ring.target == std::vector<int>{2});
    CHECK(ring.unknown == std::vector<int>{0, 1});
    CHECK(ring.infinite.empty());

    const rmdp::ReachPartition trap = rmdp::classify_reach_reward(trap_model(), {2});
    CHECK(trap.target == std::vector<int>{2});
    CHECK(trap.infinite == std::vector<int>{0, 1});
    CHECK(trap.unknown.empty());
}

TEST_CASE("zero-probability states are those with no support path") {
    CHECK(rmdp::prob0_max(island_model(), {1}) == std::vector<int>{2});
    CHECK(rmdp::prob0_max(testm::ring_model(), {2}).empty());
    CHECK(rmdp::prob0_max(trap_model(), {2}) == std::vector<int>{1});
}

TEST_CASE("breadth-first seeding records distances and lowest actions") {
    const rmdp::BfsToTarget two = rmdp::bfs_to_target(testm::two_action_model(), {1});
    CHECK(two.distance[1] == 0);
    CHECK(two.distance[0] == 1);
    CHECK(two.action[0] == 0);  // both actions reach in one step; lowest wins

    const rmdp::BfsToTarget ring = rmdp::bfs_to_target(testm::ring_model(), {2});
    CHECK(ring.distance == std::vector<int>{1, 1, 0});
    CHECK(ring.action[0] == 1);  // only the jump reaches the target directly
    CHECK(ring.action[1] == 0);

    const rmdp::BfsToTarget island = rmdp::bfs_to_target(island_model(), {1});
    CHECK(island.distance[2] > (1 << 20));  // unreachable sentinel
    CHECK(island.action[2] == -1);
}

TEST_CASE("the partition is a function of supports, not of bound widths") {
    std::mt19937_64 rng = rmdp::detail::seeded_engine(77, 1);
    std::mt19937_64 rewidth = rmdp::detail::seeded_engine(77, 2);
    for (int trial = 0; trial < 25; ++trial) {
        const Model model = testm::small_random_imdp(rng);
        const std::vector<int> target{model.num_states() - 1};
        const rmdp::ReachPartition before = rmdp::classify_reach_reward(model, target);

        Model reshaped = model;
        for (auto& entries : reshaped.states)
            for (auto& entry : entries)
                entry.rows[0] = testm::random_interval_row(rewidth, entry.rows[0].support());
        rmdp::require_valid(reshaped);
        const rmdp::ReachPartition after = rmdp::classify_reach_reward(reshaped, target);
        CHECK(before.infinite == after.infinite);
        CHECK(before.unknown == after.unknown);
    }
}

TEST_CASE("certain reachability agrees with policy-by-policy enumeration") {
    std::mt19937_64 rng = rmdp::detail::seeded_engine(78, 1);
    for (int trial = 0; trial < 25; ++trial) {
        const Model model = testm::small_random_imdp(rng);
        const std::vector<int> target{model.num_states() - 1};
        const testm::PartitionReference ref =
            testm::partition_by_policy_enumeration(model, target);
        CHECK(rmdp::min_reach_certain(model, target) == ref.certain);
    }
    const testm::PartitionReference trap_ref =
        testm::partition_by_policy_enumeration(trap_model(), {2});
    CHECK(trap_ref.certain == std::vector<int>{2});
    CHECK(trap_ref.infinite == std::vector<int>{0, 1});
}
