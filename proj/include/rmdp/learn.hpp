#pragma once
// PAC estimation of an interval model from samples of a point model: count
// successor draws per (state, action), wrap each empirical frequency in a
// Hoeffding confidence radius with the failure budget split across every
// supported transition, and hand the result to the robust solver. With
// probability at least 1 - delta the learned intervals contain the truth,
// making the robust value a lower confidence bound on the true value.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmdp/model.hpp"
#include "rmdp/objective.hpp"
#include "rmdp/prng.hpp"
#include "rmdp/solver.hpp"
#include "rmdp/types.hpp"

namespace rmdp {

/// Successor draw counts aligned with the sampled model's rows.
struct SampleCounts {
    struct RowCounts {
        long total = 0;
        std::vector<long> per_successor;  // aligned with the row's support
    };
    std::uint64_t seed = 0;
    /// counts[s][i] matches model.states[s][i].
    std::vector<std::vector<RowCounts>> counts;
};

/// Learner parameters; constructor enforces the documented ranges.
struct PacConfig {
    double delta;
    long n_per_sa;
    double eps_min;

    explicit PacConfig(double delta_, long n_per_sa_, double eps_min_ = 1e-6)
        : delta(delta_), n_per_sa(n_per_sa_), eps_min(eps_min_) {
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("PacConfig: delta must lie in (0,1), got " +
                                        std::to_string(delta));
        if (n_per_sa < 1)
            throw std::invalid_argument("PacConfig: need at least one sample per (s,a)");
        if (!(eps_min > 0.0 && eps_min < 1.0))
            throw std::invalid_argument("PacConfig: eps_min must lie in (0,1)");
    }
};

/**
 * Draws `n_per_sa` successor samples for every enabled (state, action) of a
 * point model. Each pair gets its own seed-derived stream, so counts are
 * reproducible and independent of enumeration order.
 */
inline SampleCounts sample_counts(const Model& truth, long n_per_sa, std::uint64_t seed) {
    if (truth.kind != ModelKind::Mdp)
        throw std::invalid_argument("sample_counts expects a point model (kind=mdp)");
    require_valid(truth);
    if (n_per_sa < 1) throw std::invalid_argument("sample_counts: need at least one sample");

    SampleCounts out;
    out.seed = seed;
    out.counts.resize(truth.num_states());
    for (int s = 0; s < truth.num_states(); ++s) {
        for (const ActionEntry& entry : truth.states[s]) {
            const auto& probs = entry.rows[0].as_point().probs;
            SampleCounts::RowCounts rc;
            rc.total = n_per_sa;
            rc.per_successor.assign(probs.size(), 0);
            std::mt19937_64 rng = detail::seeded_engine(seed, static_cast<std::uint64_t>(s),
                                                        static_cast<std::uint64_t>(entry.action));
            for (long draw = 0; draw < n_per_sa; ++draw) {
                const double u = detail::canonical(rng);
                double cumulative = 0.0;
                std::size_t hit = probs.size() - 1;  // guard against rounding at the tail
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    cumulative += probs[i];
                    if (u < cumulative) {
                        hit = i;
                        break;
                    }
                }
                ++rc.per_successor[hit];
            }
            out.counts[s].push_back(std::move(rc));
        }
    }
    return out;
}

/// Supported transitions across the whole model (the union-bound count the
/// per-transition failure budget delta' divides by).
inline long count_supported_transitions(const Model& model) {
    long total = 0;
    for (const auto& entries : model.states)
        for (const ActionEntry& entry : entries) total += static_cast<long>(entry.rows[0].size());
    return total;
}

inline double hoeffding_radius(long n, double delta_prime) {
    return std::sqrt(std::log(2.0 / delta_prime) / (2.0 * static_cast<double>(n)));
}

/**
 * Interval model from counts: every supported transition of the truth gets
 * [max(phat - c, eps_min), min(phat + c, 1)] where phat is the empirical
 * frequency and c the Hoeffding radius for the per-transition budget
 * delta' = delta / #supported-transitions. The eps_min floor keeps learned
 * rows graph preserving. States, actions, supports and rewards are copied
 * from the truth. The result is validated before being returned.
 */
inline Model hoeffding_imdp(const Model& truth, const SampleCounts& counts,
                            const PacConfig& config) {
    if (truth.kind != ModelKind::Mdp)
        throw std::invalid_argument("hoeffding_imdp expects a point model (kind=mdp)");
    require_valid(truth);
    if (counts.counts.size() != static_cast<std::size_t>(truth.num_states()))
        throw std::invalid_argument("hoeffding_imdp: counts do not cover the model's states");

    const long transitions = count_supported_transitions(truth);
    const double delta_prime = config.delta / static_cast<double>(transitions);

    Model learned;
    learned.kind = ModelKind::Imdp;
    learned.state_names = truth.state_names;
    learned.action_names = truth.action_names;
    learned.initial = truth.initial;
    learned.environments = 1;
    learned.states.resize(truth.num_states());

    for (int s = 0; s < truth.num_states(); ++s) {
        const auto& row_counts = counts.counts[s];
        if (row_counts.size() != truth.states[s].size())
            throw std::invalid_argument("hoeffding_imdp: counts do not cover state " +
                                        truth.state_name(s));
        for (std::size_t i = 0; i < truth.states[s].size(); ++i) {
            const ActionEntry& entry = truth.states[s][i];
            const SampleCounts::RowCounts& rc = row_counts[i];
            if (rc.total <= 0)
                throw std::invalid_argument("hoeffding_imdp: no samples at " +
                                            truth.pair_label(s, entry.action));
            if (rc.per_successor.size() != entry.rows[0].size())
                throw std::invalid_argument("hoeffding_imdp: successor counts misaligned at " +
                                            truth.pair_label(s, entry.action));

            const double c = hoeffding_radius(rc.total, delta_prime);
            std::vector<double> lower(rc.per_successor.size()),
                upper(rc.per_successor.size());
            for (std::size_t j = 0; j < rc.per_successor.size(); ++j) {
                const double phat = static_cast<double>(rc.per_successor[j]) /
                                    static_cast<double>(rc.total);
                lower[j] = std::max(phat - c, config.eps_min);
                upper[j] = std::min(phat + c, 1.0);
            }
            ActionEntry learned_entry;
            learned_entry.action = entry.action;
            learned_entry.reward = entry.reward;
            learned_entry.rows.push_back(
                UncertainRow::interval(entry.rows[0].support(), std::move(lower),
                                       std::move(upper)));
            learned.states[s].push_back(std::move(learned_entry));
        }
    }
    require_valid(learned);
    return learned;
}

/// Bundle produced by the end-to-end learning pipeline.
struct PacResult {
    Model learned;
    SampleCounts counts;
    double delta_prime = 0.0;
    SolveResult robust;   // robust solve of the learned interval model
    SolveResult nominal;  // nominal solve of the sampled truth
};

/**
 * Sample, learn, solve: draws counts from the truth, builds the Hoeffding
 * interval model, solves it robustly and solves the truth nominally for
 * comparison. With the learner's confidence, robust <= true <= optimistic
 * at the initial state.
 */
inline PacResult pac_pipeline(const Model& truth, const PacConfig& config,
                              const Objective& objective, std::uint64_t seed,
                              double epsilon = 1e-6, long max_iter = 100000) {
    PacResult out;
    out.counts = sample_counts(truth, config.n_per_sa, seed);
    out.learned = hoeffding_imdp(truth, out.counts, config);
    out.delta_prime = config.delta / static_cast<double>(count_supported_transitions(truth));
    out.robust = solve(out.learned, objective, Mode::Robust, Method::ValueIteration, epsilon,
                       max_iter);
    out.nominal = solve(truth, objective, Mode::Nominal, Method::ValueIteration, epsilon,
                        max_iter);
    return out;
}

}  // namespace rmdp
