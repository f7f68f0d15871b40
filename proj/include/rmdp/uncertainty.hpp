#pragma once
// Per-(state,action) uncertain transition rows and their inner optimization
// problems: given a value per successor, find the distribution in the row's
// uncertainty set that minimizes (adversarial nature) or maximizes
// (cooperative nature) the expected value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rmdp/types.hpp"

namespace rmdp {

enum class Direction { Minimize, Maximize };

/// Fixed transition probabilities over the support.
struct PointRow {
    std::vector<double> probs;
};

/// Independent per-successor probability bounds; the set is the polytope
/// { p : lower <= p <= upper, sum p = 1 } over the support.
struct IntervalRow {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// L1 ball of radius `radius` around the `center` distribution, intersected
/// with the simplex over the support.
struct L1Row {
    std::vector<double> center;
    double radius = 0.0;
};

/// One uncertain successor distribution. `support` lists successor state
/// indices in strictly ascending order; all per-successor arrays in the
/// shape are aligned with it. States off the support carry probability zero
/// in every member of the set.
class UncertainRow {
  public:
    UncertainRow() = default;

    static UncertainRow point(std::vector<int> support, std::vector<double> probs) {
        UncertainRow r;
        r.init_support(std::move(support), probs.size());
        r.shape_ = PointRow{std::move(probs)};
        return r;
    }

    static UncertainRow interval(std::vector<int> support, std::vector<double> lower,
                                 std::vector<double> upper) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("interval row: lower/upper length mismatch");
        UncertainRow r;
        r.init_support(std::move(support), lower.size());
        r.shape_ = IntervalRow{std::move(lower), std::move(upper)};
        return r;
    }

    static UncertainRow l1(std::vector<int> support, std::vector<double> center, double radius) {
        UncertainRow r;
        r.init_support(std::move(support), center.size());
        r.shape_ = L1Row{std::move(center), radius};
        return r;
    }

    /// Default-constructed rows have an empty support and act as "not defined".
    bool defined() const { return !support_.empty(); }
    std::size_t size() const { return support_.size(); }

    const std::vector<int>& support() const { return support_; }

    bool is_point() const { return std::holds_alternative<PointRow>(shape_); }
    bool is_interval() const { return std::holds_alternative<IntervalRow>(shape_); }
    bool is_l1() const { return std::holds_alternative<L1Row>(shape_); }

    const PointRow& as_point() const { return std::get<PointRow>(shape_); }
    const IntervalRow& as_interval() const { return std::get<IntervalRow>(shape_); }
    const L1Row& as_l1() const { return std::get<L1Row>(shape_); }

  private:
    void init_support(std::vector<int> support, std::size_t expected) {
        if (support.size() != expected)
            throw std::invalid_argument("uncertain row: support/probability length mismatch");
        if (!std::is_sorted(support.begin(), support.end()) ||
            std::adjacent_find(support.begin(), support.end()) != support.end())
            throw std::invalid_argument("uncertain row: support must be strictly ascending");
        support_ = std::move(support);
    }

    std::vector<int> support_;
    std::variant<PointRow, IntervalRow, L1Row> shape_;
};

/// Extremal distribution over the row's support together with its value.
struct InnerResult {
    std::vector<double> probs;
    double value = 0.0;
};

namespace detail {

inline void require_finite(const std::vector<double>& values) {
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("inner problem: non-finite value input");
}

/// Successor positions ordered by value (ascending for Minimize, descending
/// for Maximize); equal values tie-break by ascending successor index, i.e.
/// ascending position, in both directions.
inline std::vector<int> rank_by_value(const std::vector<double>& values, Direction dir) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values[a] != values[b])
            return dir == Direction::Minimize ? values[a] < values[b] : values[a] > values[b];
        return a < b;
    });
    return order;
}

inline double dot(const std::vector<double>& probs, const std::vector<double>& values) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) acc += probs[i] * values[i];
    return acc;
}

}  // namespace detail

/// Expected value under a point row; the direction is irrelevant.
inline InnerResult inner_point(const UncertainRow& row, const std::vector<double>& values) {
    if (!row.is_point()) throw std::invalid_argument("inner_point: row is not a point row");
    if (values.size() != row.size())
        throw std::invalid_argument("inner_point: value vector does not match support");
    detail::require_finite(values);
    InnerResult res{row.as_point().probs, 0.0};
    res.value = detail::dot(res.probs, values);
    return res;
}

/**
 * Extremal expectation over an interval row.
 *
 * Successors are ranked by value (preferred end first); every probability
 * starts at its lower bound, and the slack 1 - sum(lower) is poured into
 * successors in rank order, capping each at its upper bound. The first
 * successor whose headroom exceeds the remaining slack absorbs all of it;
 * later successors keep their lower bounds. Runs in O(m log m).
 */
inline InnerResult inner_interval(const UncertainRow& row, const std::vector<double>& values,
                                  Direction direction) {
    if (!row.is_interval()) throw std::invalid_argument("inner_interval: row is not an interval row");
    const IntervalRow& iv = row.as_interval();
    const std::size_t m = row.size();
    if (values.size() != m)
        throw std::invalid_argument("inner_interval: value vector does not match support");
    if (m == 0) throw std::invalid_argument("inner_interval: empty row");
    detail::require_finite(values);

    const double sum_lower = std::accumulate(iv.lower.begin(), iv.lower.end(), 0.0);
    const double sum_upper = std::accumulate(iv.upper.begin(), iv.upper.end(), 0.0);
    if (sum_lower > 1.0 + kConstructTol || sum_upper < 1.0 - kConstructTol)
        throw std::invalid_argument("inner_interval: infeasible row (lower bounds sum to " +
                                    std::to_string(sum_lower) + ", upper bounds to " +
                                    std::to_string(sum_upper) + ")");

    InnerResult res{iv.lower, 0.0};
    double budget = 1.0 - sum_lower;
    for (int pos : detail::rank_by_value(values, direction)) {
        const double headroom = iv.upper[pos] - iv.lower[pos];
        if (budget - headroom >= 0.0) {
            res.probs[pos] = iv.upper[pos];
            budget -= headroom;
        } else {
            // Pivot successor absorbs the rest; clamp against rounding.
            res.probs[pos] = std::min(iv.lower[pos] + std::max(budget, 0.0), iv.upper[pos]);
            break;
        }
    }
    res.value = detail::dot(res.probs, values);
    return res;
}

/**
 * Extremal expectation over an L1 ball row.
 *
 * The preferred successor (lowest value when minimizing, highest when
 * maximizing) receives min{1, center + radius/2}; everyone else starts at the
 * center. The overshoot above total mass 1 is then removed from successors in
 * reverse preference order, flooring each at zero. The result stays within
 * the ball: mass added equals mass removed, so the L1 distance is at most
 * 2 * min{1 - center_first, radius/2} <= radius.
 */
inline InnerResult inner_l1(const UncertainRow& row, const std::vector<double>& values,
                            Direction direction) {
    if (!row.is_l1()) throw std::invalid_argument("inner_l1: row is not an L1 row");
    const L1Row& ball = row.as_l1();
    const std::size_t m = row.size();
    if (values.size() != m) throw std::invalid_argument("inner_l1: value vector does not match support");
    if (m == 0) throw std::invalid_argument("inner_l1: empty row");
    if (!(ball.radius >= 0.0) || ball.radius > 2.0 + kConstructTol)
        throw std::invalid_argument("inner_l1: radius must lie in [0, 2]");
    detail::require_finite(values);

    const std::vector<int> order = detail::rank_by_value(values, direction);
    InnerResult res{ball.center, 0.0};
    res.probs[order[0]] = std::min(1.0, ball.center[order[0]] + ball.radius / 2.0);

    double total = std::accumulate(res.probs.begin(), res.probs.end(), 0.0);
    for (std::size_t k = m; k-- > 1 && total > 1.0;) {
        const int pos = order[k];
        res.probs[pos] = std::max(0.0, 1.0 - (total - res.probs[pos]));
        total = std::accumulate(res.probs.begin(), res.probs.end(), 0.0);
    }
    res.value = detail::dot(res.probs, values);
    return res;
}

/// Dispatch to the row's inner problem.
inline InnerResult inner_extremum(const UncertainRow& row, const std::vector<double>& values,
                                  Direction direction) {
    if (row.is_point()) return inner_point(row, values);
    if (row.is_interval()) return inner_interval(row, values, direction);
    return inner_l1(row, values, direction);
}

/// Outcome of the graph-preservation test: `ok` iff no member of the
/// uncertainty set can drop a support entry to probability zero.
struct GraphPreservation {
    bool ok = true;
    std::string reason;
};

/// A row is graph preserving when every distribution in its set has the
/// declared support: point rows are singleton sets and qualify trivially,
/// interval rows need positive lower bounds, and an L1 ball must have
/// radius < 2 * min(center).
inline GraphPreservation check_graph_preserving(const UncertainRow& row) {
    if (row.is_point()) return {true, ""};
    if (row.is_interval()) {
        const auto& iv = row.as_interval();
        for (std::size_t i = 0; i < iv.lower.size(); ++i)
            if (iv.lower[i] <= 0.0)
                return {false, "interval lower bound " + std::to_string(iv.lower[i]) +
                                   " on support entry " + std::to_string(row.support()[i]) +
                                   " permits dropping the edge"};
        return {true, ""};
    }
    const auto& ball = row.as_l1();
    double min_center = kInf;
    for (double c : ball.center) min_center = std::min(min_center, c);
    if (!(ball.radius < 2.0 * min_center))
        return {false, "L1 radius " + std::to_string(ball.radius) +
                           " reaches zero on a support entry (2 * min center = " +
                           std::to_string(2.0 * min_center) + ")"};
    return {true, ""};
}

}  // namespace rmdp
