#pragma once

// Legendre duality against the finite-depth pressure: the exponent range
// estimate and the entropy spectrum S(alpha) = inf_q { P_n(q) - <q, alpha> }.
//
// Duality is always taken against the fixed depth-n pressure, which is an
// exactly convex and smooth function of q. Depth convergence is a separate
// concern handled by the pressure diagnostics.

#include <cocycle/enumeration.hpp>
#include <cocycle/errors.hpp>
#include <cocycle/hull.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/measures.hpp>
#include <cocycle/pressure.hpp>
#include <cocycle/shift_space.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cocycle {

enum class SpectrumStatus { interior, boundary_suspect, infeasible };

inline std::string_view to_string(SpectrumStatus s) {
    switch (s) {
    case SpectrumStatus::interior:
        return "interior";
    case SpectrumStatus::boundary_suspect:
        return "boundary-suspect";
    case SpectrumStatus::infeasible:
        return "infeasible";
    }
    return "unknown";
}

struct SpectrumPoint {
    ExponentVector alpha;
    /// S(alpha) at the final iterate; for infeasible points the last (unbounded) f value.
    double value = 0.0;
    QVector minimizer;
    SpectrumStatus status = SpectrumStatus::interior;
    int iterations = 0;
    double gradient_norm = 0.0;
    /// Estimated distance from alpha to the relative boundary of the depth-n
    /// exponent hull; negative when alpha lies outside it.
    double boundary_distance = 0.0;
};

struct OmegaEstimate {
    std::vector<ExponentVector> vertices;
    int depth = 0;
    std::vector<QVector> q_samples;
    /// Gibbs gradients at every probe, in probe order.
    std::vector<ExponentVector> gradients;
    Index affine_dimension = 0;
};

struct SpectrumOptions {
    double q_max = 64.0;
    double gradient_tolerance = 1e-7;
    /// Decrease per step below which a run escaping past q_max is a boundary point.
    double stall_rate = 1e-6;
    /// alpha closer than this to the relative boundary is labeled boundary-suspect.
    double boundary_band = 0.05;
    int max_iterations = 20000;
    bool warm_start = true;
    /// Largest k^n for which the per-word spectra are kept in memory; deeper
    /// runs stream every evaluation through the enumerator.
    std::uint64_t cloud_limit = std::uint64_t{1} << 21;
    EnumerationOptions enumeration;
};

/// P_n(q) and its gradient for one cocycle and depth, evaluated either from a
/// cached table of distinct log-singular-value vectors (with multiplicities)
/// or by re-enumerating.
class DepthPressure {
public:
    struct Evaluation {
        double value = 0.0;
        Vector gradient;
    };

    DepthPressure(const OneStepCocycle& c, int depth, const SpectrumOptions& options = {})
        : cocycle_(c), depth_(depth), enumeration_(options.enumeration), dim_(static_cast<std::size_t>(c.dim())) {
        check_budget(c.alphabet_size(), depth, enumeration_.budget);
        if (word_count(c.alphabet_size(), depth) <= options.cloud_limit) {
            build_cloud();
        }
    }

    int depth() const { return depth_; }
    const OneStepCocycle& cocycle() const { return cocycle_; }
    bool cached() const { return cached_; }
    std::size_t distinct_points() const { return log_mult_.size(); }

    Evaluation evaluate(const QVector& q) const {
        detail::check_q(cocycle_, q);
        if (!cached_) {
            PressureEstimate e = pressure(cocycle_, q, depth_, enumeration_);
            return {e.value, std::move(e.gradient)};
        }
        const std::size_t count = log_mult_.size();
        std::vector<double>& x = scratch_;
        x.resize(count);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < count; ++i) {
            x[i] = log_mult_[i] + detail::dot(q, point(i));
            m = std::max(m, x[i]);
        }
        double total = 0.0;
        Vector g = Vector::Zero(static_cast<Index>(dim_));
        for (std::size_t i = 0; i < count; ++i) {
            const double w = std::exp(x[i] - m);
            total += w;
            const auto p = point(i);
            for (std::size_t j = 0; j < dim_; ++j) {
                g[static_cast<Index>(j)] += w * p[j];
            }
        }
        Evaluation out{(m + std::log(total)) / depth_, g / (total * depth_)};
        detail::sort_descending(out.gradient);
        return out;
    }

    /// Distance from alpha to the relative boundary of the convex hull of
    /// {(1/n) log sigma(A_I)}, estimated through support values along probe
    /// directions inside the hull's affine span (an over-estimate of at most a
    /// few percent in two dimensions). Negative when alpha is outside.
    double boundary_distance(const Vector& alpha) const {
        if (!sketch_) {
            build_sketch();
        }
        const double off = sketch_->frame.offset(alpha);
        if (off > 1e-6) {
            return -off;
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sketch_->directions.size(); ++i) {
            best = std::min(best, sketch_->support[i] - sketch_->directions[i].dot(alpha));
        }
        return best;
    }

private:
    struct Sketch {
        AffineFrame frame;
        std::vector<Vector> directions;
        std::vector<double> support;
    };

    std::span<const double> point(std::size_t i) const { return {&points_[i * dim_], dim_}; }

    void build_cloud() {
        EnumerationOptions ordered = enumeration_;
        ordered.deterministic = true;
        const std::vector<double> raw = reduce_products(
            cocycle_, depth_, std::vector<double>{},
            [](std::vector<double>& acc, const ProductLeaf& leaf) {
                acc.insert(acc.end(), leaf.log_sigma.begin(), leaf.log_sigma.end());
            },
            [](std::vector<double>& into, std::vector<double>&& later) {
                into.insert(into.end(), later.begin(), later.end());
            },
            ordered);
        std::unordered_map<std::string, std::size_t> index;
        std::vector<double> counts;
        const std::size_t words = raw.size() / dim_;
        for (std::size_t w = 0; w < words; ++w) {
            std::string key(reinterpret_cast<const char*>(&raw[w * dim_]), dim_ * sizeof(double));
            auto [it, inserted] = index.try_emplace(std::move(key), counts.size());
            if (inserted) {
                points_.insert(points_.end(), raw.begin() + static_cast<std::ptrdiff_t>(w * dim_),
                               raw.begin() + static_cast<std::ptrdiff_t>((w + 1) * dim_));
                counts.push_back(1.0);
            } else {
                counts[it->second] += 1.0;
            }
        }
        log_mult_.resize(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            log_mult_[i] = std::log(counts[i]);
        }
        cached_ = true;
    }

    template <class Fn>
    void for_each_exponent(Fn&& fn) const {
        const double n = depth_;
        Vector v(static_cast<Index>(dim_));
        if (cached_) {
            for (std::size_t i = 0; i < log_mult_.size(); ++i) {
                const auto p = point(i);
                for (std::size_t j = 0; j < dim_; ++j) {
                    v[static_cast<Index>(j)] = p[j] / n;
                }
                fn(v);
            }
            return;
        }
        enumerate_products(
            cocycle_, depth_,
            [&](const ProductLeaf& leaf) {
                for (std::size_t j = 0; j < dim_; ++j) {
                    v[static_cast<Index>(j)] = leaf.log_sigma[j] / n;
                }
                fn(v);
            },
            EnumerationOptions{enumeration_.budget, 1, true});
    }

    void build_sketch() const {
        const auto d = static_cast<Index>(dim_);
        Vector sum = Vector::Zero(d);
        Matrix scatter = Matrix::Zero(d, d);
        double count = 0.0;
        double scale = 1.0;
        for_each_exponent([&](const Vector& v) {
            sum += v;
            scatter.noalias() += v * v.transpose();
            count += 1.0;
            scale = std::max(scale, v.cwiseAbs().maxCoeff());
        });
        Sketch sk;
        sk.frame.center = sum / count;
        const Matrix cov = scatter / count - sk.frame.center * sk.frame.center.transpose();
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        std::vector<Index> kept;
        for (Index i = d - 1; i >= 0; --i) {
            if (std::sqrt(std::max(eig.eigenvalues()[i], 0.0)) > 1e-7 * scale) {
                kept.push_back(i);
            }
        }
        sk.frame.basis.resize(d, static_cast<Index>(kept.size()));
        for (std::size_t c = 0; c < kept.size(); ++c) {
            sk.frame.basis.col(static_cast<Index>(c)) = eig.eigenvectors().col(kept[c]);
        }
        const Index r = sk.frame.dimension();
        const Matrix& b = sk.frame.basis;
        if (r == 1) {
            sk.directions = {b.col(0), Vector(-b.col(0))};
        } else if (r == 2) {
            constexpr int angles = 64;
            for (int a = 0; a < angles; ++a) {
                const double t = 2.0 * std::numbers::pi * a / angles;
                sk.directions.push_back(std::cos(t) * b.col(0) + std::sin(t) * b.col(1));
            }
        } else if (r >= 3) {
            for (Index c = 0; c < r; ++c) {
                sk.directions.push_back(b.col(c));
                sk.directions.push_back(-b.col(c));
            }
            std::mt19937_64 rng(0x13198a2e03707344ULL);
            std::normal_distribution<double> normal;
            for (int i = 0; i < 256; ++i) {
                Vector coeff(r);
                for (Index c = 0; c < r; ++c) {
                    coeff[c] = normal(rng);
                }
                sk.directions.push_back(b * coeff.normalized());
            }
        }
        sk.support.assign(sk.directions.size(), -std::numeric_limits<double>::infinity());
        for_each_exponent([&](const Vector& v) {
            for (std::size_t i = 0; i < sk.directions.size(); ++i) {
                sk.support[i] = std::max(sk.support[i], sk.directions[i].dot(v));
            }
        });
        sketch_ = std::move(sk);
    }

    OneStepCocycle cocycle_;
    int depth_;
    EnumerationOptions enumeration_;
    std::size_t dim_;
    bool cached_ = false;
    std::vector<double> points_;
    std::vector<double> log_mult_;
    mutable std::vector<double> scratch_;
    mutable std::optional<Sketch> sketch_;
};

/// Unit probe directions: the circle for d = 2, a Fibonacci sphere for d = 3,
/// seeded Gaussian directions above.
inline std::vector<Vector> probe_directions(Index d, int count) {
    std::vector<Vector> out;
    if (d == 1 || count <= 0) {
        return out;
    }
    if (d == 2) {
        for (int j = 0; j < count; ++j) {
            const double t = 2.0 * std::numbers::pi * j / count;
            Vector v(2);
            v << std::cos(t), std::sin(t);
            out.push_back(v);
        }
        return out;
    }
    if (d == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < count; ++j) {
            const double z = 1.0 - 2.0 * (j + 0.5) / count;
            const double r = std::sqrt(1.0 - z * z);
            Vector v(3);
            v << r * std::cos(golden * j), r * std::sin(golden * j), z;
            out.push_back(v);
        }
        return out;
    }
    std::mt19937_64 rng(0xa4093822299f31d0ULL);
    std::normal_distribution<double> normal;
    for (int j = 0; j < count; ++j) {
        Vector v(d);
        for (Index i = 0; i < d; ++i) {
            v[i] = normal(rng);
        }
        out.push_back(v.normalized());
    }
    return out;
}

/// Inner approximation of the depth-n exponent range: the hull of Gibbs
/// gradients at the origin, the axis points +-radius e_i, and `probe_count`
/// directions on the sphere of the given radius.
inline OmegaEstimate estimate_omega(const OneStepCocycle& c, int depth, double probe_radius, int probe_count,
                                    const EnumerationOptions& options = {}) {
    if (!(probe_radius > 0.0) || !std::isfinite(probe_radius)) {
        throw input_error("probe radius must be positive");
    }
    if (probe_count < 0) {
        throw input_error("probe count must be nonnegative");
    }
    const Index d = c.dim();
    OmegaEstimate out;
    out.depth = depth;
    out.q_samples.push_back(QVector::zero(d));
    for (Index i = 0; i < d; ++i) {
        QVector up = QVector::zero(d);
        up[i] = probe_radius;
        QVector down = QVector::zero(d);
        down[i] = -probe_radius;
        out.q_samples.push_back(up);
        out.q_samples.push_back(down);
    }
    for (const Vector& u : probe_directions(d, probe_count)) {
        out.q_samples.emplace_back(Vector(probe_radius * u));
    }
    const auto estimates = pressure_grid(c, out.q_samples, depth, options);
    std::vector<Vector> cloud;
    cloud.reserve(estimates.size());
    for (const auto& e : estimates) {
        out.gradients.emplace_back(e.gradient);
        cloud.push_back(e.gradient);
    }
    for (Vector& v : hull_vertices(cloud)) {
        out.vertices.emplace_back(std::move(v));
    }
    std::vector<Vector> verts;
    for (const auto& v : out.vertices) {
        verts.push_back(v.values);
    }
    out.affine_dimension = verts.size() > 1 ? affine_frame(verts).dimension() : 0;
    return out;
}

namespace detail {

inline void check_alpha(const OneStepCocycle& c, const ExponentVector& alpha) {
    if (alpha.size() != c.dim()) {
        throw input_error("alpha has length " + std::to_string(alpha.size()) + " but the cocycle has dimension " +
                          std::to_string(c.dim()));
    }
    if (!alpha.values.allFinite()) {
        throw input_error("alpha has non-finite entries");
    }
    if (!alpha.sorted()) {
        throw input_error("alpha must be sorted nonincreasing");
    }
}

} // namespace detail

/// Minimizes f(q) = P_n(q) - <q, alpha> by gradient descent with
/// Barzilai-Borwein trial steps and Armijo backtracking.
inline SpectrumPoint spectrum_point(const DepthPressure& model, const ExponentVector& alpha, const QVector& q_init,
                                    const SpectrumOptions& options = {}) {
    detail::check_alpha(model.cocycle(), alpha);
    detail::check_q(model.cocycle(), q_init);

    SpectrumPoint out;
    out.alpha = alpha;
    Vector q = q_init.values;
    auto objective = [&](const Vector& at, Vector& grad) {
        DepthPressure::Evaluation e = model.evaluate(QVector(at));
        grad = e.gradient - alpha.values;
        return e.value - at.dot(alpha.values);
    };

    Vector grad;
    double f = objective(q, grad);
    Vector prev_q;
    Vector prev_grad;
    double step = 1.0;
    double last_decrease = std::numeric_limits<double>::infinity();
    enum class Exit { converged, escaped, stalled, exhausted } exit = Exit::exhausted;

    int it = 0;
    Vector trial_grad;
    for (; it < options.max_iterations; ++it) {
        const double gn = grad.norm();
        if (gn <= options.gradient_tolerance) {
            exit = Exit::converged;
            break;
        }
        if (q.norm() > options.q_max) {
            exit = Exit::escaped;
            break;
        }
        if (prev_q.size() > 0) {
            const Vector s = q - prev_q;
            const Vector y = grad - prev_grad;
            const double sy = s.dot(y);
            if (sy > 0.0) {
                step = s.squaredNorm() / sy;
            }
        }
        bool accepted = false;
        double f_trial = f;
        Vector trial;
        for (int halving = 0; halving < 80; ++halving) {
            trial = q - step * grad;
            f_trial = objective(trial, trial_grad);
            if (f_trial <= f - 1e-4 * step * gn * gn) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            exit = Exit::stalled;
            break;
        }
        last_decrease = f - f_trial;
        prev_q = std::move(q);
        prev_grad = std::move(grad);
        q = std::move(trial);
        grad = trial_grad;
        f = f_trial;
    }

    out.value = f;
    out.minimizer = QVector(q);
    out.iterations = it;
    out.gradient_norm = grad.norm();
    out.boundary_distance = model.boundary_distance(alpha.values);

    // A line search that cannot make progress at a near-zero gradient has hit
    // rounding, not a boundary.
    const bool precise = out.gradient_norm <= 1e3 * options.gradient_tolerance;
    switch (exit) {
    case Exit::converged:
    case Exit::stalled:
    case Exit::exhausted:
        if ((exit == Exit::converged || precise) && q.norm() <= options.q_max) {
            out.status = out.boundary_distance < options.boundary_band ? SpectrumStatus::boundary_suspect
                                                                       : SpectrumStatus::interior;
        } else {
            out.status = out.boundary_distance < 0.0 ? SpectrumStatus::infeasible : SpectrumStatus::boundary_suspect;
        }
        break;
    case Exit::escaped:
        out.status = last_decrease < options.stall_rate ? SpectrumStatus::boundary_suspect
                                                        : SpectrumStatus::infeasible;
        break;
    }
    return out;
}

inline SpectrumPoint spectrum_point(const OneStepCocycle& c, const ExponentVector& alpha, int depth,
                                    const QVector& q_init, const SpectrumOptions& options = {}) {
    const DepthPressure model(c, depth, options);
    return spectrum_point(model, alpha, q_init, options);
}

/// Spectrum along a list of exponent vectors, in input order. Each point is
/// warm-started from the previous interior minimizer when enabled.
inline std::vector<SpectrumPoint> spectrum_curve(const OneStepCocycle& c, std::span<const ExponentVector> alphas,
                                                 int depth, const SpectrumOptions& options = {}) {
    if (alphas.empty()) {
        throw input_error("alpha list is empty");
    }
    for (const ExponentVector& alpha : alphas) {
        detail::check_alpha(c, alpha);
    }
    const DepthPressure model(c, depth, options);
    std::vector<SpectrumPoint> out;
    out.reserve(alphas.size());
    QVector start = QVector::zero(c.dim());
    for (const ExponentVector& alpha : alphas) {
        out.push_back(spectrum_point(model, alpha, start, options));
        if (options.warm_start && out.back().status == SpectrumStatus::interior) {
            start = out.back().minimizer;
        }
    }
    return out;
}

} // namespace cocycle
