#pragma once

// Dense kernels on small square matrices: log singular values, compound
// (exterior power) matrices, the generalized singular value function, and an
// overflow-safe representation for long matrix products.

#include <cocycle/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace cocycle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Parameter of psi^q; one real weight per singular value.
struct QVector {
    Vector values;

    QVector() = default;
    explicit QVector(Vector v) : values(std::move(v)) {}
    QVector(std::initializer_list<double> init) : values(static_cast<Index>(init.size())) {
        std::copy(init.begin(), init.end(), values.data());
    }
    static QVector zero(Index d) { return QVector(Vector::Zero(d)); }

    Index size() const { return values.size(); }
    double operator[](Index i) const { return values[i]; }
    double& operator[](Index i) { return values[i]; }
};

/// Natural logs of the singular values, nonincreasing.
struct SingularSpectrum {
    Vector log_sigma;

    Index size() const { return log_sigma.size(); }
    double operator[](Index i) const { return log_sigma[i]; }
    double sum() const { return log_sigma.sum(); }
};

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

inline void require_finite(const Matrix& m, const char* what) {
    if (!all_finite(m)) {
        throw input_error(std::string(what) + " has non-finite entries");
    }
}

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw input_error(std::string(what) + " must be a nonempty square matrix");
    }
}

namespace detail {

// Singular values of [[a, b], [c, d]] without forming M^T M.
inline void singular_values_2x2(double a, double b, double c, double d, double& s1, double& s2) {
    const double r1 = std::hypot(a + d, c - b);
    const double r2 = std::hypot(a - d, c + b);
    s1 = 0.5 * (r1 + r2);
    const double det = std::abs(a * d - b * c);
    s2 = s1 > 0.0 ? det / s1 : 0.0;
}

inline double safe_log(double x) {
    return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Logs of the singular values of `m`, sorted nonincreasing. Zero singular
/// values map to -inf.
inline SingularSpectrum singular_values(const Matrix& m) {
    require_square(m, "matrix");
    require_finite(m, "matrix");
    const Index d = m.rows();
    SingularSpectrum out{Vector(d)};
    if (d == 1) {
        out.log_sigma[0] = detail::safe_log(std::abs(m(0, 0)));
        return out;
    }
    if (d == 2) {
        double s1 = 0.0;
        double s2 = 0.0;
        detail::singular_values_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1), s1, s2);
        out.log_sigma << detail::safe_log(s1), detail::safe_log(s2);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    for (Index i = 0; i < d; ++i) {
        out.log_sigma[i] = detail::safe_log(s[i]);
    }
    return out;
}

/// Natural log of |det m|; -inf for singular input.
inline double log_abs_det(const Matrix& m) {
    require_square(m, "matrix");
    if (m.rows() == 1) {
        return detail::safe_log(std::abs(m(0, 0)));
    }
    if (m.rows() == 2) {
        return detail::safe_log(std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)));
    }
    const Eigen::PartialPivLU<Matrix> lu(m);
    const Matrix& packed = lu.matrixLU();
    double acc = 0.0;
    for (Index i = 0; i < packed.rows(); ++i) {
        acc += detail::safe_log(std::abs(packed(i, i)));
    }
    return acc;
}

/// Log of the spectral norm.
inline double log_norm(const Matrix& m) {
    return singular_values(m).log_sigma[0];
}

/// All m-element subsets of {0, ..., d-1} in lexicographic order.
inline std::vector<std::vector<int>> lexicographic_subsets(int d, int m) {
    std::vector<std::vector<int>> out;
    if (m < 0 || m > d) {
        return out;
    }
    std::vector<int> current(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        current[static_cast<std::size_t>(i)] = i;
    }
    while (true) {
        out.push_back(current);
        int pos = m - 1;
        while (pos >= 0 && current[static_cast<std::size_t>(pos)] == d - m + pos) {
            --pos;
        }
        if (pos < 0) {
            break;
        }
        ++current[static_cast<std::size_t>(pos)];
        for (int j = pos + 1; j < m; ++j) {
            current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

inline long long binomial(int n, int r) {
    if (r < 0 || r > n) {
        return 0;
    }
    long long acc = 1;
    for (int i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
    }
    return acc;
}

/// m-th compound matrix: entry (I, J) is det m[I, J] for lexicographically
/// ordered m-subsets I, J. Multiplicative: C_m(AB) = C_m(A) C_m(B).
inline Matrix exterior_power(const Matrix& m, int order) {
    require_square(m, "matrix");
    const int d = static_cast<int>(m.rows());
    if (order < 1 || order > d) {
        throw input_error("exterior power order " + std::to_string(order) + " outside 1.." +
                          std::to_string(d));
    }
    const auto subsets = lexicographic_subsets(d, order);
    const auto count = static_cast<Index>(subsets.size());
    Matrix out(count, count);
    Matrix minor(order, order);
    for (Index r = 0; r < count; ++r) {
        const auto& rows = subsets[static_cast<std::size_t>(r)];
        for (Index c = 0; c < count; ++c) {
            const auto& cols = subsets[static_cast<std::size_t>(c)];
            for (int i = 0; i < order; ++i) {
                for (int j = 0; j < order; ++j) {
                    minor(i, j) = m(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
                }
            }
            out(r, c) = minor.determinant();
        }
    }
    return out;
}

/// sum_i q_i log sigma_i. Terms with q_i == 0 are skipped so that a zero
/// singular value only matters when it is actually weighted.
inline double log_psi(const SingularSpectrum& spectrum, const QVector& q) {
    if (spectrum.size() != q.size()) {
        throw input_error("q has length " + std::to_string(q.size()) + ", expected " +
                          std::to_string(spectrum.size()));
    }
    double acc = 0.0;
    for (Index i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) {
            continue;
        }
        if (std::isinf(spectrum[i]) && spectrum[i] < 0.0 && q[i] < 0.0) {
            throw domain_error("negative power of a zero singular value");
        }
        acc += q[i] * spectrum[i];
    }
    return acc;
}

/// log psi^q(m) = sum_i q_i log sigma_i(m).
inline double log_psi(const Matrix& m, const QVector& q) {
    const SingularSpectrum s = singular_values(m);
    if (s.size() != q.size()) {
        throw input_error("q has length " + std::to_string(q.size()) + ", expected " +
                          std::to_string(s.size()));
    }
    const Index d = s.size();
    const bool singular = std::isinf(s[d - 1]) ||
                          s[d - 1] - s[0] < std::log(static_cast<double>(d) *
                                                     std::numeric_limits<double>::epsilon());
    if (singular) {
        for (Index i = 0; i < d; ++i) {
            if (q[i] < 0.0) {
                throw domain_error("psi^q with a negative exponent is undefined for a singular matrix");
            }
        }
    }
    return log_psi(s, q);
}

/// exp(log_scale) * base, with the max-row-sum norm of base kept in [1/2, 2].
/// Rescaling uses powers of two only, so the represented product is exact up
/// to the rounding of the multiplications themselves.
class ScaledMatrix {
public:
    static constexpr double window_low = 0.5;
    static constexpr double window_high = 2.0;

    ScaledMatrix() = default;

    explicit ScaledMatrix(Matrix base, double log_scale = 0.0)
        : base_(std::move(base)), log_scale_(log_scale) {
        require_square(base_, "scaled matrix base");
        renormalize();
    }

    static ScaledMatrix identity(Index d) { return ScaledMatrix(Matrix::Identity(d, d)); }

    const Matrix& base() const { return base_; }
    double log_scale() const { return log_scale_; }
    Index dim() const { return base_.rows(); }

    /// The represented matrix; overflows for long products, use only for tests and I/O.
    Matrix value() const { return std::exp(log_scale_) * base_; }

    /// Overwrites *this with left * other, renormalized.
    void assign_product(const Matrix& left, const ScaledMatrix& other) {
        base_.noalias() = left * other.base_;
        log_scale_ = other.log_scale_;
        renormalize();
    }

    void renormalize() {
        const double norm = base_.cwiseAbs().rowwise().sum().maxCoeff();
        if (!std::isfinite(norm)) {
            throw numeric_error("scaled product overflowed");
        }
        if (norm == 0.0) {
            throw numeric_error("scaled product collapsed to zero");
        }
        if (norm < window_low || norm > window_high) {
            int exponent = 0;
            std::frexp(norm, &exponent);
            base_ *= std::ldexp(1.0, -exponent);
            log_scale_ += exponent * std::numbers::ln2;
            if (!std::isfinite(log_scale_)) {
                throw numeric_error("log scale overflowed");
            }
        }
    }

private:
    Matrix base_;
    double log_scale_ = 0.0;
};

/// m * acc, the representation renormalized into the norm window.
inline ScaledMatrix scaled_multiply(const ScaledMatrix& acc, const Matrix& m) {
    require_finite(m, "multiplier");
    if (m.rows() != acc.dim() || m.cols() != acc.dim()) {
        throw input_error("dimension mismatch in scaled_multiply");
    }
    ScaledMatrix out = acc;
    out.assign_product(m, acc);
    return out;
}

inline SingularSpectrum singular_values(const ScaledMatrix& m) {
    SingularSpectrum s = singular_values(m.base());
    s.log_sigma.array() += m.log_scale();
    return s;
}

/// Log singular values of scaled products with known log|det|, without
/// per-call allocation. The smallest value is reconstructed from the
/// determinant, so sum(log sigma) == log|det| holds to rounding even when
/// the product is badly conditioned.
class SpectrumKernel {
public:
    explicit SpectrumKernel(Index d) : d_(d), svd_(d, d) {}

    void log_sigma(const ScaledMatrix& m, double log_abs_det, std::span<double> out) {
        const Matrix& b = m.base();
        const double shift = m.log_scale();
        if (d_ == 1) {
            out[0] = log_abs_det;
            return;
        }
        if (d_ == 2) {
            const double top = 0.5 * (std::hypot(b(0, 0) + b(1, 1), b(1, 0) - b(0, 1)) +
                                      std::hypot(b(0, 0) - b(1, 1), b(1, 0) + b(0, 1)));
            out[0] = std::log(top) + shift;
            out[1] = log_abs_det - out[0];
            if (out[1] > out[0]) {
                std::swap(out[0], out[1]);
            }
            return;
        }
        svd_.compute(b);
        const Vector& s = svd_.singularValues();
        double partial = 0.0;
        for (Index i = 0; i + 1 < d_; ++i) {
            out[static_cast<std::size_t>(i)] = detail::safe_log(s[i]) + shift;
            partial += out[static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(d_ - 1)] = log_abs_det - partial;
        std::sort(out.begin(), out.end(), std::greater<>());
    }

private:
    Index d_;
    Eigen::JacobiSVD<Matrix> svd_;
};

} // namespace cocycle
