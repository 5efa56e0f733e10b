#pragma once

// Exhaustive enumeration of the k^n products A_I, |I| = n.
//
// Words are visited depth-first in lexicographic order with one partial
// product per tree level, so each internal node costs a single matrix
// multiply. The top of the tree is cut into a fixed set of prefix tasks
// whose count does not depend on the number of workers; in deterministic
// mode the per-task partial results are merged by a fixed binary tree over
// task index, which makes reductions bit-identical for any thread count.

#include <cocycle/errors.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/shift_space.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace cocycle {

inline constexpr std::uint64_t default_leaf_budget = std::uint64_t{1} << 26;

struct EnumerationOptions {
    std::uint64_t budget = default_leaf_budget;
    unsigned threads = 1;
    bool deterministic = true;
};

/// Everything known about one leaf A_I of the enumeration tree.
struct ProductLeaf {
    std::span<const int> word;
    const ScaledMatrix& product;
    /// log singular values of A_I, nonincreasing
    std::span<const double> log_sigma;
    double log_abs_det;
};

/// k^n, saturating at UINT64_MAX.
inline std::uint64_t word_count(int k, int n) {
    std::uint64_t acc = 1;
    for (int i = 0; i < n; ++i) {
        if (acc > UINT64_MAX / static_cast<std::uint64_t>(k)) {
            return UINT64_MAX;
        }
        acc *= static_cast<std::uint64_t>(k);
    }
    return acc;
}

inline void check_budget(int k, int n, std::uint64_t budget) {
    if (n < 1) {
        throw input_error("depth must be at least 1, got " + std::to_string(n));
    }
    const std::uint64_t count = word_count(k, n);
    if (count > budget) {
        const std::string total = count == UINT64_MAX ? std::string("more than 2^64") : std::to_string(count);
        throw resource_error("enumerating k^n = " + std::to_string(k) + "^" + std::to_string(n) + " = " +
                             total + " words exceeds the leaf budget of " + std::to_string(budget));
    }
}

namespace detail {

inline constexpr std::uint64_t target_task_count = 64;

/// Prefix depth used to split the tree; depends only on (k, n).
inline int split_depth(int k, int n) {
    if (k == 1) {
        return 0;
    }
    int s = 0;
    std::uint64_t tasks = 1;
    while (s < n && tasks < target_task_count) {
        tasks *= static_cast<std::uint64_t>(k);
        ++s;
    }
    return s;
}

/// Per-worker DFS state; all buffers are allocated once.
class ProductWalker {
public:
    ProductWalker(const OneStepCocycle& c, int depth)
        : cocycle_(c),
          depth_(depth),
          products_(static_cast<std::size_t>(depth) + 1, ScaledMatrix::identity(c.dim())),
          log_det_(static_cast<std::size_t>(depth) + 1, 0.0),
          word_(static_cast<std::size_t>(depth), 0),
          choice_(static_cast<std::size_t>(depth) + 1, 0),
          log_sigma_(static_cast<std::size_t>(c.dim())),
          kernel_(c.dim()) {}

    /// Visits all leaves below the prefix whose base-k digits (most significant
    /// first) encode `prefix_index`.
    template <class LeafFn>
    void walk(std::uint64_t prefix_index, int prefix_len, LeafFn&& on_leaf) {
        const int k = cocycle_.alphabet_size();
        for (int pos = prefix_len - 1; pos >= 0; --pos) {
            word_[static_cast<std::size_t>(pos)] = static_cast<int>(prefix_index % static_cast<std::uint64_t>(k));
            prefix_index /= static_cast<std::uint64_t>(k);
        }
        for (int level = 0; level < prefix_len; ++level) {
            extend(level, word_[static_cast<std::size_t>(level)]);
        }
        if (prefix_len == depth_) {
            emit(on_leaf);
            return;
        }
        int level = prefix_len;
        choice_[static_cast<std::size_t>(level)] = 0;
        while (level >= prefix_len) {
            int& symbol = choice_[static_cast<std::size_t>(level)];
            if (symbol == k) {
                --level;
                if (level >= prefix_len) {
                    ++choice_[static_cast<std::size_t>(level)];
                }
                continue;
            }
            word_[static_cast<std::size_t>(level)] = symbol;
            extend(level, symbol);
            if (level + 1 == depth_) {
                emit(on_leaf);
                ++symbol;
            } else {
                ++level;
                choice_[static_cast<std::size_t>(level)] = 0;
            }
        }
    }

private:
    void extend(int level, int symbol) {
        const auto l = static_cast<std::size_t>(level);
        products_[l + 1].assign_product(cocycle_.generator(symbol), products_[l]);
        log_det_[l + 1] = log_det_[l] + cocycle_.log_abs_det(symbol);
    }

    template <class LeafFn>
    void emit(LeafFn& on_leaf) {
        const auto n = static_cast<std::size_t>(depth_);
        kernel_.log_sigma(products_[n], log_det_[n], log_sigma_);
        on_leaf(ProductLeaf{std::span<const int>(word_), products_[n], log_sigma_, log_det_[n]});
    }

    const OneStepCocycle& cocycle_;
    int depth_;
    std::vector<ScaledMatrix> products_;
    std::vector<double> log_det_;
    std::vector<int> word_;
    std::vector<int> choice_;
    std::vector<double> log_sigma_;
    SpectrumKernel kernel_;
};

template <class TaskFn>
void run_tasks(std::uint64_t task_count, unsigned threads, TaskFn&& body) {
    const unsigned workers =
        static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, task_count)));
    if (workers == 1) {
        body(0u);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                body(w);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace detail

/// Folds every leaf of the depth-n tree into an accumulator.
///
/// `on_leaf(Acc&, const ProductLeaf&)` consumes one leaf; `merge(Acc& into,
/// Acc&& later)` combines the result of a lexicographically earlier block of
/// words with a later one. In deterministic mode the result does not depend
/// on `options.threads`.
template <class Acc, class LeafFn, class MergeFn>
Acc reduce_products(const OneStepCocycle& c, int depth, const Acc& identity, LeafFn&& on_leaf, MergeFn&& merge,
                    const EnumerationOptions& options = {}) {
    check_budget(c.alphabet_size(), depth, options.budget);
    const int prefix_len = detail::split_depth(c.alphabet_size(), depth);
    const std::uint64_t tasks = word_count(c.alphabet_size(), prefix_len);
    std::atomic<std::uint64_t> next{0};

    if (options.deterministic) {
        std::vector<Acc> parts(tasks, identity);
        detail::run_tasks(tasks, options.threads, [&](unsigned) {
            detail::ProductWalker walker(c, depth);
            for (std::uint64_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
                Acc& acc = parts[t];
                walker.walk(t, prefix_len, [&](const ProductLeaf& leaf) { on_leaf(acc, leaf); });
            }
        });
        for (std::uint64_t width = 1; width < tasks; width *= 2) {
            for (std::uint64_t i = 0; i + width < tasks; i += 2 * width) {
                merge(parts[i], std::move(parts[i + width]));
            }
        }
        return std::move(parts.front());
    }

    std::vector<Acc> finished;
    std::mutex finished_mutex;
    detail::run_tasks(tasks, options.threads, [&](unsigned) {
        detail::ProductWalker walker(c, depth);
        Acc acc = identity;
        for (std::uint64_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
            walker.walk(t, prefix_len, [&](const ProductLeaf& leaf) { on_leaf(acc, leaf); });
        }
        const std::lock_guard lock(finished_mutex);
        finished.push_back(std::move(acc));
    });
    Acc out = std::move(finished.front());
    for (std::size_t i = 1; i < finished.size(); ++i) {
        merge(out, std::move(finished[i]));
    }
    return out;
}

/// Calls `visit(const ProductLeaf&)` once for every word of length n. With a
/// single thread the order is lexicographic; with more threads the visitor is
/// invoked concurrently and must synchronize itself.
template <class Visitor>
void enumerate_products(const OneStepCocycle& c, int depth, Visitor&& visit, const EnumerationOptions& options = {}) {
    check_budget(c.alphabet_size(), depth, options.budget);
    const int prefix_len = detail::split_depth(c.alphabet_size(), depth);
    const std::uint64_t tasks = word_count(c.alphabet_size(), prefix_len);
    std::atomic<std::uint64_t> next{0};
    detail::run_tasks(tasks, options.threads, [&](unsigned) {
        detail::ProductWalker walker(c, depth);
        for (std::uint64_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
            walker.walk(t, prefix_len, visit);
        }
    });
}

} // namespace cocycle
