#pragma once

// Finite-depth pressure P_n(q) = (1/n) log sum_{|I|=n} psi^q(A_I) and its
// gradient, the Gibbs average of (1/n) log sigma(A_I).

#include <cocycle/enumeration.hpp>
#include <cocycle/errors.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/shift_space.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cocycle {

struct PressureEstimate {
    QVector q;
    int depth = 0;
    double value = 0.0;
    Vector gradient;
    /// Valid upper bound on the limit pressure (q nonincreasing).
    std::optional<double> upper_bound;
    /// Valid lower bound on the limit pressure (q nondecreasing).
    std::optional<double> lower_bound;
    /// |P_n - P_m| for the two deepest depths of a bracket run.
    std::optional<double> cauchy_gap;
};

namespace detail {

/// Running-max log-sum-exp for a batch of q vectors, with the Gibbs-weighted
/// sum of log sigma vectors scaled by the same running maximum.
class GibbsAccumulator {
public:
    GibbsAccumulator() = default;
    GibbsAccumulator(std::size_t grid_size, std::size_t dim)
        : dim_(dim),
          max_log_(grid_size, -std::numeric_limits<double>::infinity()),
          sum_(grid_size, 0.0),
          weighted_(grid_size * dim, 0.0) {}

    void add(std::size_t slot, double log_weight, std::span<const double> point) {
        double& m = max_log_[slot];
        double* g = &weighted_[slot * dim_];
        if (log_weight > m) {
            const double f = std::exp(m - log_weight);
            sum_[slot] = sum_[slot] * f + 1.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                g[j] = g[j] * f + point[j];
            }
            m = log_weight;
        } else {
            const double w = std::exp(log_weight - m);
            sum_[slot] += w;
            for (std::size_t j = 0; j < dim_; ++j) {
                g[j] += w * point[j];
            }
        }
    }

    void merge(const GibbsAccumulator& other) {
        for (std::size_t slot = 0; slot < sum_.size(); ++slot) {
            const double a = max_log_[slot];
            const double b = other.max_log_[slot];
            if (b == -std::numeric_limits<double>::infinity()) {
                continue;
            }
            const double m = std::max(a, b);
            const double fa = std::exp(a - m);
            const double fb = std::exp(b - m);
            sum_[slot] = sum_[slot] * fa + other.sum_[slot] * fb;
            for (std::size_t j = 0; j < dim_; ++j) {
                double& g = weighted_[slot * dim_ + j];
                g = g * fa + other.weighted_[slot * dim_ + j] * fb;
            }
            max_log_[slot] = m;
        }
    }

    /// log sum of weights
    double log_total(std::size_t slot) const { return max_log_[slot] + std::log(sum_[slot]); }

    /// Weighted mean of the points.
    Vector mean(std::size_t slot) const {
        Vector out(static_cast<Index>(dim_));
        for (std::size_t j = 0; j < dim_; ++j) {
            out[static_cast<Index>(j)] = weighted_[slot * dim_ + j] / sum_[slot];
        }
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> max_log_;
    std::vector<double> sum_;
    std::vector<double> weighted_;
};

inline void check_q(const OneStepCocycle& c, const QVector& q) {
    if (q.size() != c.dim()) {
        throw input_error("q has length " + std::to_string(q.size()) + " but the cocycle has dimension " +
                          std::to_string(c.dim()));
    }
    if (!q.values.allFinite()) {
        throw input_error("q has non-finite entries");
    }
}

inline double dot(const QVector& q, std::span<const double> log_sigma) {
    double acc = 0.0;
    for (std::size_t j = 0; j < log_sigma.size(); ++j) {
        acc += q[static_cast<Index>(j)] * log_sigma[j];
    }
    return acc;
}

inline void sort_descending(Vector& v) {
    std::sort(v.data(), v.data() + v.size(), std::greater<>());
}

} // namespace detail

/// P_n for every q of the grid from a single enumeration pass.
inline std::vector<PressureEstimate> pressure_grid(const OneStepCocycle& c, std::span<const QVector> grid, int depth,
                                                   const EnumerationOptions& options = {}) {
    if (grid.empty()) {
        throw input_error("q grid is empty");
    }
    for (const QVector& q : grid) {
        detail::check_q(c, q);
    }
    const auto dim = static_cast<std::size_t>(c.dim());
    const detail::GibbsAccumulator identity(grid.size(), dim);
    const auto acc = reduce_products(
        c, depth, identity,
        [&](detail::GibbsAccumulator& a, const ProductLeaf& leaf) {
            for (std::size_t slot = 0; slot < grid.size(); ++slot) {
                a.add(slot, detail::dot(grid[slot], leaf.log_sigma), leaf.log_sigma);
            }
        },
        [](detail::GibbsAccumulator& into, detail::GibbsAccumulator&& later) { into.merge(later); }, options);

    std::vector<PressureEstimate> out;
    out.reserve(grid.size());
    const double n = depth;
    for (std::size_t slot = 0; slot < grid.size(); ++slot) {
        PressureEstimate e;
        e.q = grid[slot];
        e.depth = depth;
        e.value = acc.log_total(slot) / n;
        e.gradient = acc.mean(slot) / n;
        detail::sort_descending(e.gradient);
        out.push_back(std::move(e));
    }
    return out;
}

inline PressureEstimate pressure(const OneStepCocycle& c, const QVector& q, int depth,
                                 const EnumerationOptions& options = {}) {
    return std::move(pressure_grid(c, std::span<const QVector>(&q, 1), depth, options).front());
}

/// Evaluates P_n at every depth and attaches the bounds that sub- or
/// super-multiplicativity of psi^q makes rigorous. The returned estimate is
/// the one at the deepest depth.
inline PressureEstimate pressure_bracket(const OneStepCocycle& c, const QVector& q, std::span<const int> depths,
                                         const EnumerationOptions& options = {}) {
    if (depths.empty()) {
        throw input_error("depth list is empty");
    }
    if (!std::is_sorted(depths.begin(), depths.end()) ||
        std::adjacent_find(depths.begin(), depths.end()) != depths.end()) {
        throw input_error("depth list must be strictly ascending");
    }
    detail::check_q(c, q);

    // t_m = q_m - q_{m+1} for m < d; the last factor |det|^{q_d} is multiplicative.
    bool nonincreasing = true;
    bool nondecreasing = true;
    for (Index m = 0; m + 1 < q.size(); ++m) {
        const double t = q[m] - q[m + 1];
        nonincreasing = nonincreasing && t >= 0.0;
        nondecreasing = nondecreasing && t <= 0.0;
    }

    std::vector<PressureEstimate> runs;
    runs.reserve(depths.size());
    for (int n : depths) {
        runs.push_back(pressure(c, q, n, options));
    }
    PressureEstimate out = runs.back();
    if (nonincreasing) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : runs) {
            best = std::min(best, r.value);
        }
        out.upper_bound = best;
    }
    if (nondecreasing) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& r : runs) {
            best = std::max(best, r.value);
        }
        out.lower_bound = best;
    }
    if (runs.size() >= 2) {
        out.cauchy_gap = std::abs(runs[runs.size() - 1].value - runs[runs.size() - 2].value);
    }
    return out;
}

} // namespace cocycle
