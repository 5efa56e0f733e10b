#pragma once

// Words over a finite alphabet and one-step cocycles: the product along a
// word I = i_0 ... i_{n-1} is A_I = A_{i_{n-1}} ... A_{i_0}.

#include <cocycle/errors.hpp>
#include <cocycle/matrix_core.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cocycle {

/// Finite word; symbols are stored 0-based and printed 1-based.
class Word {
public:
    Word() = default;
    explicit Word(std::vector<int> symbols) : symbols_(std::move(symbols)) {}
    Word(std::initializer_list<int> symbols) : symbols_(symbols) {}

    /// Parses "121" (one digit per symbol) or "1,2,10"; symbols are 1-based.
    static Word parse(std::string_view text) {
        std::vector<int> out;
        const bool comma = text.find(',') != std::string_view::npos;
        if (!comma) {
            for (char ch : text) {
                if (ch < '1' || ch > '9') {
                    throw input_error("invalid symbol '" + std::string(1, ch) + "' in word");
                }
                out.push_back(ch - '1');
            }
            return Word(std::move(out));
        }
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t end = std::min(text.find(',', start), text.size());
            const std::string_view token = text.substr(start, end - start);
            int value = 0;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || ptr != token.data() + token.size() || value < 1) {
                throw input_error("invalid symbol '" + std::string(token) + "' in word");
            }
            out.push_back(value - 1);
            start = end + 1;
        }
        return Word(std::move(out));
    }

    std::string to_string() const {
        const bool wide = std::any_of(symbols_.begin(), symbols_.end(), [](int s) { return s >= 9; });
        std::string out;
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (wide && i > 0) {
                out += ',';
            }
            out += std::to_string(symbols_[i] + 1);
        }
        return out;
    }

    std::size_t size() const { return symbols_.size(); }
    bool empty() const { return symbols_.empty(); }
    int operator[](std::size_t i) const { return symbols_[i]; }
    std::span<const int> symbols() const { return symbols_; }
    auto begin() const { return symbols_.begin(); }
    auto end() const { return symbols_.end(); }

    Word concat(const Word& other) const {
        std::vector<int> out = symbols_;
        out.insert(out.end(), other.symbols_.begin(), other.symbols_.end());
        return Word(std::move(out));
    }

    Word repeat(std::size_t times) const {
        std::vector<int> out;
        out.reserve(symbols_.size() * times);
        for (std::size_t t = 0; t < times; ++t) {
            out.insert(out.end(), symbols_.begin(), symbols_.end());
        }
        return Word(std::move(out));
    }

    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word&, const Word&) = default;

private:
    std::vector<int> symbols_;
};

/// Generator tuple (A_1, ..., A_k) of invertible d x d matrices.
class OneStepCocycle {
public:
    /// Relative determinant threshold below which a generator counts as singular.
    static constexpr double singular_tolerance = 1e-12;

    explicit OneStepCocycle(std::vector<Matrix> generators) : generators_(std::move(generators)) {
        if (generators_.empty()) {
            throw validation_error("cocycle needs at least one generator");
        }
        dim_ = generators_.front().rows();
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            const Matrix& a = generators_[i];
            const std::string name = "generator " + std::to_string(i + 1);
            if (a.rows() != dim_ || a.cols() != dim_ || dim_ == 0) {
                throw validation_error(name + " has shape " + std::to_string(a.rows()) + "x" +
                                       std::to_string(a.cols()) + ", expected " + std::to_string(dim_) +
                                       "x" + std::to_string(dim_));
            }
            if (!a.allFinite()) {
                throw validation_error(name + " has non-finite entries");
            }
            const SingularSpectrum s = singular_values(a);
            const double ld = cocycle::log_abs_det(a);
            const double threshold = std::log(singular_tolerance) + static_cast<double>(dim_) * s[0];
            if (!std::isfinite(ld) || ld <= threshold) {
                throw validation_error(name + " is singular");
            }
            log_abs_det_.push_back(ld);
            max_log_norm_ = std::max(max_log_norm_, s[0]);
            max_log_inverse_norm_ = std::max(max_log_inverse_norm_, -s[dim_ - 1]);
        }
    }

    int alphabet_size() const { return static_cast<int>(generators_.size()); }
    Index dim() const { return dim_; }
    const Matrix& generator(int symbol) const { return generators_.at(static_cast<std::size_t>(symbol)); }
    std::span<const Matrix> generators() const { return generators_; }
    double log_abs_det(int symbol) const { return log_abs_det_.at(static_cast<std::size_t>(symbol)); }

    /// max_i log ||A_i||
    double max_log_norm() const { return max_log_norm_; }
    /// max_i log ||A_i^{-1}||
    double max_log_inverse_norm() const { return max_log_inverse_norm_; }

    /// The cocycle generated by the order-t compound matrices.
    OneStepCocycle exterior_power(int order) const {
        std::vector<Matrix> out;
        out.reserve(generators_.size());
        for (const Matrix& a : generators_) {
            out.push_back(cocycle::exterior_power(a, order));
        }
        return OneStepCocycle(std::move(out));
    }

    void check_symbol(int symbol) const {
        if (symbol < 0 || symbol >= alphabet_size()) {
            throw input_error("symbol " + std::to_string(symbol + 1) + " outside alphabet 1.." +
                              std::to_string(alphabet_size()));
        }
    }

private:
    std::vector<Matrix> generators_;
    std::vector<double> log_abs_det_;
    Index dim_ = 0;
    double max_log_norm_ = -std::numeric_limits<double>::infinity();
    double max_log_inverse_norm_ = -std::numeric_limits<double>::infinity();
};

/// A_I with the last symbol's matrix leftmost; the empty word gives the identity.
inline ScaledMatrix word_product(const OneStepCocycle& c, const Word& word) {
    ScaledMatrix acc = ScaledMatrix::identity(c.dim());
    ScaledMatrix next = acc;
    for (int s : word) {
        c.check_symbol(s);
        next.assign_product(c.generator(s), acc);
        std::swap(acc, next);
    }
    return acc;
}

/// log|det A_I|, exact sum of the generator log-determinants.
inline double word_log_abs_det(const OneStepCocycle& c, const Word& word) {
    double acc = 0.0;
    for (int s : word) {
        c.check_symbol(s);
        acc += c.log_abs_det(s);
    }
    return acc;
}

} // namespace cocycle
