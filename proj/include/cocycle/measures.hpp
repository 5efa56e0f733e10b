#pragma once

// Bernoulli and finite-memory Markov measures on the full shift, their
// entropies and finite-depth Lyapunov vectors, and a lower bound on the
// variational supremum h(mu) + <q, chi(mu)> obtained by optimizing over
// these families.

#include <cocycle/enumeration.hpp>
#include <cocycle/errors.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/pressure.hpp>
#include <cocycle/shift_space.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cocycle {

/// Lyapunov-type vector, nonincreasing.
struct ExponentVector {
    Vector values;

    ExponentVector() = default;
    explicit ExponentVector(Vector v) : values(std::move(v)) {}
    ExponentVector(std::initializer_list<double> init) : values(static_cast<Index>(init.size())) {
        std::copy(init.begin(), init.end(), values.data());
    }

    Index size() const { return values.size(); }
    double operator[](Index i) const { return values[i]; }
    bool sorted() const {
        for (Index i = 0; i + 1 < values.size(); ++i) {
            if (values[i] < values[i + 1]) {
                return false;
            }
        }
        return true;
    }
};

namespace detail {

inline double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;
}

inline double safe_log_prob(double p) {
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

inline void check_probability_vector(std::span<const double> p, const char* what) {
    double total = 0.0;
    for (double x : p) {
        if (!std::isfinite(x) || x < 0.0) {
            throw input_error(std::string(what) + " has a negative or non-finite entry");
        }
        total += x;
    }
    if (p.empty() || std::abs(total - 1.0) > 1e-12) {
        throw input_error(std::string(what) + " does not sum to 1 (sum = " + std::to_string(total) + ")");
    }
}

} // namespace detail

/// Product measure with symbol probabilities p.
class BernoulliMeasure {
public:
    explicit BernoulliMeasure(std::vector<double> p) : p_(std::move(p)) {
        detail::check_probability_vector(p_, "Bernoulli probability vector");
    }

    static BernoulliMeasure uniform(int k) {
        return BernoulliMeasure(std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
    }

    int alphabet_size() const { return static_cast<int>(p_.size()); }
    std::span<const double> probabilities() const { return p_; }
    double probability(int symbol) const { return p_[static_cast<std::size_t>(symbol)]; }

    double log_cylinder(std::span<const int> word) const {
        double acc = 0.0;
        for (int s : word) {
            acc += detail::safe_log_prob(p_[static_cast<std::size_t>(s)]);
        }
        return acc;
    }

    double entropy() const {
        double h = 0.0;
        for (double x : p_) {
            h -= detail::xlogx(x);
        }
        return h;
    }

private:
    std::vector<double> p_;
};

/// Stationary Markov measure of memory m >= 1. States are words of length m
/// (encoded base k, oldest symbol most significant); row s of the transition
/// matrix is the distribution of the next symbol given state s.
class MarkovMeasure {
public:
    static constexpr int max_memory = 2;

    /// Builds the measure from transitions, solving for the stationary vector.
    static MarkovMeasure from_transition(Matrix transition, int memory = 1) {
        const Vector stationary = stationary_vector(transition, memory);
        return MarkovMeasure(std::move(transition), stationary, memory);
    }

    MarkovMeasure(Matrix transition, Vector stationary, int memory = 1)
        : transition_(std::move(transition)), stationary_(std::move(stationary)), memory_(memory) {
        if (memory_ < 1 || memory_ > max_memory) {
            throw input_error("Markov memory must be in 1.." + std::to_string(max_memory));
        }
        const Index k = transition_.cols();
        if (k < 1 || transition_.rows() != state_count(static_cast<int>(k), memory_)) {
            throw input_error("transition matrix must have k^memory rows and k columns");
        }
        for (Index s = 0; s < transition_.rows(); ++s) {
            const Vector row = transition_.row(s);
            detail::check_probability_vector(std::span<const double>(row.data(), static_cast<std::size_t>(k)),
                                             "transition row");
        }
        if (stationary_.size() != transition_.rows()) {
            throw input_error("stationary vector has the wrong length");
        }
        detail::check_probability_vector(
            std::span<const double>(stationary_.data(), static_cast<std::size_t>(stationary_.size())),
            "stationary vector");
        const Vector pushed = push_forward(stationary_);
        if ((pushed - stationary_).cwiseAbs().maxCoeff() > 1e-10) {
            throw input_error("stationary vector is not invariant under the transition matrix");
        }
    }

    int alphabet_size() const { return static_cast<int>(transition_.cols()); }
    int memory() const { return memory_; }
    const Matrix& transition() const { return transition_; }
    const Vector& stationary() const { return stationary_; }

    static Index state_count(int k, int memory) {
        Index s = 1;
        for (int i = 0; i < memory; ++i) {
            s *= k;
        }
        return s;
    }

    Index next_state(Index state, int symbol) const {
        return (state * alphabet_size() + symbol) % transition_.rows();
    }

    double log_cylinder(std::span<const int> word) const {
        const auto n = static_cast<int>(word.size());
        const int k = alphabet_size();
        if (n < memory_) {
            // Marginal over states whose first n symbols match.
            Index prefix = 0;
            for (int s : word) {
                prefix = prefix * k + s;
            }
            const Index span = state_count(k, memory_ - n);
            double total = 0.0;
            for (Index tail = 0; tail < span; ++tail) {
                total += stationary_[prefix * span + tail];
            }
            return detail::safe_log_prob(total);
        }
        Index state = 0;
        for (int i = 0; i < memory_; ++i) {
            state = state * k + word[static_cast<std::size_t>(i)];
        }
        double acc = detail::safe_log_prob(stationary_[state]);
        for (int i = memory_; i < n; ++i) {
            const int s = word[static_cast<std::size_t>(i)];
            acc += detail::safe_log_prob(transition_(state, s));
            state = next_state(state, s);
        }
        return acc;
    }

    double entropy() const {
        double h = 0.0;
        for (Index s = 0; s < transition_.rows(); ++s) {
            double row = 0.0;
            for (Index b = 0; b < transition_.cols(); ++b) {
                row -= detail::xlogx(transition_(s, b));
            }
            h += stationary_[s] * row;
        }
        return h;
    }

    /// Solves pi T = pi, sum(pi) = 1 in the least-squares sense.
    static Vector stationary_vector(const Matrix& transition, int memory) {
        const Index k = transition.cols();
        const Index states = transition.rows();
        if (k < 1 || states != state_count(static_cast<int>(k), memory)) {
            throw input_error("transition matrix must have k^memory rows and k columns");
        }
        Matrix system = Matrix::Zero(states + 1, states);
        for (Index s = 0; s < states; ++s) {
            for (Index b = 0; b < k; ++b) {
                const Index t = (s * k + b) % states;
                system(t, s) += transition(s, b);
            }
            system(s, s) -= 1.0;
            system(states, s) = 1.0;
        }
        Vector rhs = Vector::Zero(states + 1);
        rhs[states] = 1.0;
        Vector pi = system.completeOrthogonalDecomposition().solve(rhs);
        pi = pi.cwiseMax(0.0);
        return pi / pi.sum();
    }

private:
    Vector push_forward(const Vector& pi) const {
        Vector out = Vector::Zero(pi.size());
        for (Index s = 0; s < transition_.rows(); ++s) {
            for (Index b = 0; b < transition_.cols(); ++b) {
                out[next_state(s, static_cast<int>(b))] += pi[s] * transition_(s, b);
            }
        }
        return out;
    }

    Matrix transition_;
    Vector stationary_;
    int memory_ = 1;
};

using Measure = std::variant<BernoulliMeasure, MarkovMeasure>;

inline double entropy(const BernoulliMeasure& mu) {
    return mu.entropy();
}
inline double entropy(const MarkovMeasure& mu) {
    return mu.entropy();
}
inline double entropy(const Measure& mu) {
    return std::visit([](const auto& m) { return m.entropy(); }, mu);
}

inline double log_cylinder(const Measure& mu, std::span<const int> word) {
    return std::visit([&](const auto& m) { return m.log_cylinder(word); }, mu);
}

inline int alphabet_size(const Measure& mu) {
    return std::visit([](const auto& m) { return m.alphabet_size(); }, mu);
}

namespace detail {

inline void check_measure(const OneStepCocycle& c, const Measure& mu) {
    if (alphabet_size(mu) != c.alphabet_size()) {
        throw input_error("measure has " + std::to_string(alphabet_size(mu)) + " symbols, cocycle has " +
                          std::to_string(c.alphabet_size()));
    }
}

} // namespace detail

/// (1/n) sum_I mu[I] log sigma(A_I): the depth-n Lyapunov vector of mu.
inline ExponentVector lyapunov_vector(const OneStepCocycle& c, const Measure& mu, int depth,
                                      const EnumerationOptions& options = {}) {
    detail::check_measure(c, mu);
    const Vector zero = Vector::Zero(c.dim());
    Vector sum = reduce_products(
        c, depth, zero,
        [&](Vector& acc, const ProductLeaf& leaf) {
            const double w = std::exp(log_cylinder(mu, leaf.word));
            if (w == 0.0) {
                return;
            }
            for (std::size_t j = 0; j < leaf.log_sigma.size(); ++j) {
                acc[static_cast<Index>(j)] += w * leaf.log_sigma[j];
            }
        },
        [](Vector& into, Vector&& later) { into += later; }, options);
    sum /= depth;
    detail::sort_descending(sum);
    return ExponentVector(std::move(sum));
}

/// Both sides of the finite inequality sum p_i (c_i - log p_i) <= log sum e^{c_i}
/// applied to cylinder weights p_I = mu[I] and c_I = log psi^q(A_I), divided by n.
struct BowenTerms {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap() const { return rhs - lhs; }
};

inline BowenTerms bowen_check(const OneStepCocycle& c, const Measure& mu, const QVector& q, int depth,
                              const EnumerationOptions& options = {}) {
    detail::check_measure(c, mu);
    detail::check_q(c, q);
    struct Acc {
        double lhs = 0.0;
        double max_log = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
    };
    const Acc acc = reduce_products(
        c, depth, Acc{},
        [&](Acc& a, const ProductLeaf& leaf) {
            const double cost = detail::dot(q, leaf.log_sigma);
            const double log_mu = log_cylinder(mu, leaf.word);
            if (std::isfinite(log_mu)) {
                a.lhs += std::exp(log_mu) * (cost - log_mu);
            }
            if (cost > a.max_log) {
                a.sum = a.sum * std::exp(a.max_log - cost) + 1.0;
                a.max_log = cost;
            } else {
                a.sum += std::exp(cost - a.max_log);
            }
        },
        [](Acc& into, Acc&& later) {
            into.lhs += later.lhs;
            const double m = std::max(into.max_log, later.max_log);
            into.sum = into.sum * std::exp(into.max_log - m) + later.sum * std::exp(later.max_log - m);
            into.max_log = m;
        },
        options);
    return BowenTerms{acc.lhs / depth, (acc.max_log + std::log(acc.sum)) / depth};
}

enum class MeasureFamily { bernoulli, markov };

struct CrosscheckOptions {
    int restarts = 8;
    int max_iterations = 200;
    double gradient_tolerance = 1e-7;
    /// Markov memory; ignored for the Bernoulli family.
    int memory = 1;
    std::uint64_t seed = 0x243f6a8885a308d3ULL;
    EnumerationOptions enumeration;
};

struct CrosscheckResult {
    /// max over the family of h(mu) + <q, chi_n(mu)>
    double best = 0.0;
    double pressure = 0.0;
    Measure witness;
    bool converged = false;
    int iterations = 0;
    double gap() const { return pressure - best; }
};

namespace detail {

/// Sufficient statistics of the words for a memory-m chain: for every class of
/// words sharing (initial state, transition counts) the sum of
/// <q, log sigma(A_I)> over the class.
class BlockObjective {
public:
    BlockObjective(int k, int memory, int depth) : k_(k), memory_(memory), depth_(depth) {
        states_ = static_cast<int>(MarkovMeasure::state_count(k, memory));
    }

    using Key = std::vector<std::uint16_t>;

    Key key_of(std::span<const int> word) const {
        Key key(1 + static_cast<std::size_t>(states_ * k_), 0);
        int state = 0;
        for (int i = 0; i < memory_; ++i) {
            state = state * k_ + word[static_cast<std::size_t>(i)];
        }
        key[0] = static_cast<std::uint16_t>(state);
        for (std::size_t i = static_cast<std::size_t>(memory_); i < word.size(); ++i) {
            const int s = word[i];
            ++key[1 + static_cast<std::size_t>(state * k_ + s)];
            state = (state * k_ + s) % states_;
        }
        return key;
    }

    void finalize(const std::map<Key, double>& classes) {
        keys_.clear();
        totals_.clear();
        for (const auto& [key, total] : classes) {
            keys_.push_back(key);
            totals_.push_back(total);
        }
    }

    int states() const { return states_; }
    int alphabet() const { return k_; }

    /// Objective at row-stochastic parameters (states x k, row-major).
    double value(std::span<const double> params) const {
        const Vector pi = stationary(params);
        double h = 0.0;
        for (int s = 0; s < states_; ++s) {
            double row = 0.0;
            for (int b = 0; b < k_; ++b) {
                row -= xlogx(params[static_cast<std::size_t>(s * k_ + b)]);
            }
            h += pi[s] * row;
        }
        std::vector<double> logp(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            logp[i] = safe_log_prob(params[i]);
        }
        double drift = 0.0;
        for (std::size_t c = 0; c < keys_.size(); ++c) {
            const Key& key = keys_[c];
            const double p0 = pi[key[0]];
            if (p0 <= 0.0) {
                continue;
            }
            double lw = std::log(p0);
            for (std::size_t i = 0; i < params.size(); ++i) {
                if (key[i + 1] != 0) {
                    lw += key[i + 1] * logp[i];
                }
            }
            drift += std::exp(lw) * totals_[c];
        }
        return h + drift / depth_;
    }

    /// Gradient in the ambient coordinates: exact for memory 0, central
    /// differences otherwise (the stationary vector depends on every row).
    std::vector<double> gradient(std::span<const double> params) const {
        std::vector<double> g(params.size(), 0.0);
        if (memory_ == 0) {
            for (std::size_t b = 0; b < params.size(); ++b) {
                g[b] = -std::log(params[b]) - 1.0;
            }
            for (std::size_t c = 0; c < keys_.size(); ++c) {
                const Key& key = keys_[c];
                for (std::size_t b = 0; b < params.size(); ++b) {
                    if (key[b + 1] == 0) {
                        continue;
                    }
                    // d/dp_b prod_j p_j^{n_j} = n_b p_b^{n_b - 1} prod_{j != b} p_j^{n_j}
                    double lw = std::log(static_cast<double>(key[b + 1]));
                    for (std::size_t j = 0; j < params.size(); ++j) {
                        const int e = key[j + 1] - (j == b ? 1 : 0);
                        if (e != 0) {
                            lw += e * std::log(params[j]);
                        }
                    }
                    g[b] += std::exp(lw) * totals_[c] / depth_;
                }
            }
            return g;
        }
        std::vector<double> probe(params.begin(), params.end());
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double h = std::min(1e-7, 0.5 * params[i]);
            probe[i] = params[i] + h;
            const double up = value(probe);
            probe[i] = params[i] - h;
            const double down = value(probe);
            probe[i] = params[i];
            g[i] = (up - down) / (2.0 * h);
        }
        return g;
    }

    Vector stationary(std::span<const double> params) const {
        if (memory_ == 0) {
            return Vector::Ones(1);
        }
        Matrix t(states_, k_);
        for (int s = 0; s < states_; ++s) {
            for (int b = 0; b < k_; ++b) {
                t(s, b) = params[static_cast<std::size_t>(s * k_ + b)];
            }
        }
        return MarkovMeasure::stationary_vector(t, memory_);
    }

private:
    int k_;
    int memory_;
    int depth_;
    int states_ = 1;
    std::vector<Key> keys_;
    std::vector<double> totals_;
};

inline constexpr double simplex_floor = 1e-10;

/// Euclidean projection of each row onto {x >= floor, sum x = 1}.
inline void project_rows(std::vector<double>& x, int rows, int k) {
    const double mass = 1.0 - k * simplex_floor;
    std::vector<double> sorted(static_cast<std::size_t>(k));
    for (int r = 0; r < rows; ++r) {
        double* row = &x[static_cast<std::size_t>(r * k)];
        for (int b = 0; b < k; ++b) {
            row[b] -= simplex_floor;
        }
        std::copy(row, row + k, sorted.begin());
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double cumulative = 0.0;
        double theta = 0.0;
        for (int j = 0; j < k; ++j) {
            cumulative += sorted[static_cast<std::size_t>(j)];
            const double candidate = (cumulative - mass) / (j + 1);
            if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) {
                theta = candidate;
            }
        }
        for (int b = 0; b < k; ++b) {
            row[b] = std::max(row[b] - theta, 0.0) + simplex_floor;
        }
    }
}

struct AscentRun {
    std::vector<double> params;
    double value = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

inline AscentRun projected_ascent(const BlockObjective& objective, std::vector<double> start,
                                  const CrosscheckOptions& options) {
    const int rows = objective.states();
    const int k = objective.alphabet();
    project_rows(start, rows, k);
    AscentRun run;
    run.params = std::move(start);
    run.value = objective.value(run.params);
    double step = 1.0;
    std::vector<double> trial(run.params.size());
    for (run.iterations = 0; run.iterations < options.max_iterations; ++run.iterations) {
        const std::vector<double> g = objective.gradient(run.params);
        bool accepted = false;
        double moved = 0.0;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] = run.params[i] + step * g[i];
            }
            project_rows(trial, rows, k);
            double inner = 0.0;
            moved = 0.0;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                const double delta = trial[i] - run.params[i];
                inner += g[i] * delta;
                moved += delta * delta;
            }
            if (moved == 0.0) {
                break;
            }
            const double candidate = objective.value(trial);
            if (candidate >= run.value + 1e-4 * inner) {
                accepted = true;
                run.value = std::max(run.value, candidate);
                std::swap(run.params, trial);
                break;
            }
            step *= 0.5;
        }
        const double projected_gradient = std::sqrt(moved) / step;
        if (!accepted || projected_gradient <= options.gradient_tolerance) {
            run.converged = true;
            ++run.iterations;
            break;
        }
        step = std::min(step * 2.0, 1e3);
    }
    return run;
}

inline std::vector<double> random_simplex_rows(std::mt19937_64& rng, int rows, int k) {
    std::exponential_distribution<double> draw(1.0);
    std::vector<double> out(static_cast<std::size_t>(rows * k));
    for (int r = 0; r < rows; ++r) {
        double total = 0.0;
        for (int b = 0; b < k; ++b) {
            const double x = draw(rng);
            out[static_cast<std::size_t>(r * k + b)] = x;
            total += x;
        }
        for (int b = 0; b < k; ++b) {
            out[static_cast<std::size_t>(r * k + b)] /= total;
        }
    }
    return out;
}

inline bool better(const AscentRun& a, const AscentRun& b) {
    if (a.value != b.value) {
        return a.value > b.value;
    }
    return a.params < b.params;
}

inline AscentRun optimize_family(const OneStepCocycle& c, const QVector& q, int depth, int memory,
                                 const CrosscheckOptions& options, const std::vector<std::vector<double>>& extra_starts) {
    const int k = c.alphabet_size();
    BlockObjective objective(k, memory, depth);
    using Classes = std::map<BlockObjective::Key, double>;
    const Classes classes = reduce_products(
        c, depth, Classes{},
        [&](Classes& acc, const ProductLeaf& leaf) { acc[objective.key_of(leaf.word)] += dot(q, leaf.log_sigma); },
        [](Classes& into, Classes&& later) {
            for (auto& [key, total] : later) {
                into[key] += total;
            }
        },
        options.enumeration);
    objective.finalize(classes);

    const int rows = objective.states();
    std::vector<std::vector<double>> starts;
    starts.emplace_back(static_cast<std::size_t>(rows * k), 1.0 / k);
    std::mt19937_64 rng(options.seed);
    for (int r = 1; r < options.restarts; ++r) {
        starts.push_back(random_simplex_rows(rng, rows, k));
    }
    starts.insert(starts.end(), extra_starts.begin(), extra_starts.end());

    AscentRun best;
    bool first = true;
    for (auto& start : starts) {
        AscentRun run = projected_ascent(objective, std::move(start), options);
        if (first || better(run, best)) {
            best = std::move(run);
            first = false;
        }
    }
    return best;
}

} // namespace detail

/// Maximizes h(mu) + <q, chi_n(mu)> over Bernoulli or Markov measures by
/// multi-start projected gradient ascent and compares with P_n(q). Bowen's
/// inequality makes best <= P_n(q) an exact finite-depth statement.
inline CrosscheckResult variational_crosscheck(const OneStepCocycle& c, const QVector& q, int depth,
                                               MeasureFamily family, const CrosscheckOptions& options = {}) {
    detail::check_q(c, q);
    const int k = c.alphabet_size();
    CrosscheckResult out{0.0, pressure(c, q, depth, options.enumeration).value,
                         BernoulliMeasure::uniform(k), false, 0};

    const detail::AscentRun bernoulli = detail::optimize_family(c, q, depth, 0, options, {});
    if (family == MeasureFamily::bernoulli) {
        out.best = bernoulli.value;
        out.witness = BernoulliMeasure(bernoulli.params);
        out.converged = bernoulli.converged;
        out.iterations = bernoulli.iterations;
        return out;
    }

    const int memory = options.memory;
    if (memory < 1 || memory > MarkovMeasure::max_memory) {
        throw input_error("Markov memory must be in 1.." + std::to_string(MarkovMeasure::max_memory));
    }
    if (depth < memory) {
        throw input_error("depth must be at least the Markov memory");
    }
    // Every Bernoulli measure is a Markov measure with identical rows; seeding
    // from the Bernoulli optimum keeps the Markov result at least as good.
    const auto rows = static_cast<int>(MarkovMeasure::state_count(k, memory));
    std::vector<double> seeded;
    for (int r = 0; r < rows; ++r) {
        seeded.insert(seeded.end(), bernoulli.params.begin(), bernoulli.params.end());
    }
    const detail::AscentRun markov = detail::optimize_family(c, q, depth, memory, options, {seeded});
    Matrix transition(rows, k);
    for (int r = 0; r < rows; ++r) {
        for (int b = 0; b < k; ++b) {
            transition(r, b) = markov.params[static_cast<std::size_t>(r * k + b)];
        }
    }
    out.best = markov.value;
    out.witness = MarkovMeasure::from_transition(std::move(transition), memory);
    out.converged = markov.converged;
    out.iterations = markov.iterations;
    return out;
}

} // namespace cocycle
