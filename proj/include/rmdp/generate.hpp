#pragma once
// Seeded random model instances for tests and benchmarks. Every generated
// model funnels probability mass toward an absorbing final state: each
// (state, action) row always contains the next state in index order, so all
// policies reach the target almost surely and reach-reward values are
// finite. Lower bounds stay at or above 0.01, keeping rows graph preserving.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "rmdp/model.hpp"
#include "rmdp/prng.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

struct GeneratorConfig {
    int states = 2;
    int actions = 1;
    ModelKind kind = ModelKind::Imdp;
    double density = 0.3;   // chance of each optional successor edge
    double width = 0.2;     // max interval width / L1 deviation budget
    std::uint64_t seed = 0;
};

namespace detail {

inline constexpr double kGenMinProb = 0.01;

/// Random distribution over `m` entries with every entry >= 2*kGenMinProb,
/// leaving room to widen intervals while keeping lower bounds >= kGenMinProb.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t m) {
    if (m == 1) return {1.0};
    const double floor_mass = std::min(2.0 * kGenMinProb, 0.5 / static_cast<double>(m));
    std::vector<double> weights(m);
    double total = 0.0;
    for (double& w : weights) {
        w = 0.05 + canonical(rng);
        total += w;
    }
    std::vector<double> probs(m);
    const double spread = 1.0 - floor_mass * static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) probs[i] = floor_mass + spread * weights[i] / total;
    return probs;
}

}  // namespace detail

/**
 * Deterministic random model. States s0..s{N-1} all enable every action;
 * the last state is absorbing with reward 0 and serves as the reachability
 * target of choice. Every other row supports its successor-in-index-order
 * plus a density-controlled random subset, with rewards in [0.1, 1].
 * Interval widths are capped by `width` and clipped so lower bounds stay
 * positive; L1 deviations are capped by `width` and by graph preservation.
 * Identical configs produce identical models (and documents) byte for byte.
 */
inline Model generate_model(const GeneratorConfig& config) {
    if (config.states < 2) throw std::invalid_argument("generator: need at least two states");
    if (config.actions < 1) throw std::invalid_argument("generator: need at least one action");
    if (!(config.density >= 0.0 && config.density <= 1.0))
        throw std::invalid_argument("generator: density must lie in [0,1]");
    if (!(config.width >= 0.0 && config.width <= 1.0))
        throw std::invalid_argument("generator: width must lie in [0,1]");
    if (config.kind == ModelKind::Memdp)
        throw std::invalid_argument("generator: multi-environment models are not generated");

    std::mt19937_64 rng = detail::seeded_engine(config.seed);

    Model model;
    model.kind = config.kind;
    model.initial = 0;
    model.environments = 1;
    for (int s = 0; s < config.states; ++s) model.state_names.push_back("s" + std::to_string(s));
    for (int a = 0; a < config.actions; ++a) model.action_names.push_back("a" + std::to_string(a));
    model.states.resize(config.states);

    const int target = config.states - 1;
    for (int s = 0; s < config.states; ++s) {
        for (int a = 0; a < config.actions; ++a) {
            ActionEntry entry;
            entry.action = a;

            if (s == target) {
                entry.reward = 0.0;
                entry.rows.push_back(
                    config.kind == ModelKind::Imdp
                        ? UncertainRow::interval({target}, {1.0}, {1.0})
                        : (config.kind == ModelKind::L1
                               ? UncertainRow::l1({target}, {1.0}, 0.0)
                               : UncertainRow::point({target}, {1.0})));
                model.states[s].push_back(std::move(entry));
                continue;
            }

            std::vector<int> support{s + 1};  // guaranteed progress edge
            for (int succ = 0; succ < config.states; ++succ) {
                const bool include = detail::canonical(rng) < config.density;
                if (succ != s + 1 && include) support.push_back(succ);
            }
            std::sort(support.begin(), support.end());

            const std::vector<double> probs = detail::random_distribution(rng, support.size());
            switch (config.kind) {
                case ModelKind::Mdp:
                    entry.rows.push_back(UncertainRow::point(support, probs));
                    break;
                case ModelKind::Imdp: {
                    std::vector<double> lower(probs.size()), upper(probs.size());
                    for (std::size_t i = 0; i < probs.size(); ++i) {
                        const double half =
                            std::min({config.width / 2.0, probs[i] - detail::kGenMinProb,
                                      1.0 - probs[i]});
                        lower[i] = probs[i] - std::max(half, 0.0);
                        upper[i] = probs[i] + std::max(half, 0.0);
                    }
                    entry.rows.push_back(UncertainRow::interval(support, lower, upper));
                    break;
                }
                case ModelKind::L1: {
                    double min_center = 1.0;
                    for (double p : probs) min_center = std::min(min_center, p);
                    const double radius = std::max(
                        0.0, std::min(config.width, 2.0 * (min_center - detail::kGenMinProb)));
                    entry.rows.push_back(UncertainRow::l1(support, probs, radius));
                    break;
                }
                case ModelKind::Memdp: break;  // rejected above
            }
            entry.reward = 0.1 + 0.9 * detail::canonical(rng);
            model.states[s].push_back(std::move(entry));
        }
    }
    return model;
}

}  // namespace rmdp
