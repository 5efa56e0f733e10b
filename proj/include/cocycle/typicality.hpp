#pragma once

// Certificates for the standing hypotheses on a one-step cocycle:
// (1-)typicality through holonomy loops around a homoclinic orbit of a
// periodic point, and domination of a singular value gap.
//
// Local stable and unstable holonomies of a one-step cocycle are the
// identity (the cocycle only reads coordinate zero), so the holonomy loop
// reduces to W = A^n(p)^{-1} A^n(z), with n a multiple of the period.

#include <cocycle/enumeration.hpp>
#include <cocycle/errors.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/shift_space.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cocycle {

/// p = periodic^infinity and a homoclinic point z whose orbit segment of
/// length n follows `bridge`, padded with the periodic symbols up to the next
/// multiple of the period.
struct HomoclinicSpec {
    Word periodic;
    Word bridge;

    std::size_t period() const { return periodic.size(); }

    std::size_t padded_length() const {
        const std::size_t per = period();
        return (bridge.size() + per - 1) / per * per;
    }

    Word padded_bridge() const {
        std::vector<int> out(bridge.begin(), bridge.end());
        for (std::size_t j = bridge.size(); j < padded_length(); ++j) {
            out.push_back(periodic[j % period()]);
        }
        return Word(std::move(out));
    }

    Word periodic_block() const { return periodic.repeat(padded_length() / period()); }

    void validate(const OneStepCocycle& c) const {
        if (periodic.empty()) {
            throw input_error("periodic word must be nonempty");
        }
        if (bridge.empty()) {
            throw input_error("bridge word must be nonempty");
        }
        for (int s : periodic) {
            c.check_symbol(s);
        }
        for (int s : bridge) {
            c.check_symbol(s);
        }
        if (padded_bridge() == periodic_block()) {
            throw input_error("bridge '" + bridge.to_string() + "' follows the periodic orbit; z would equal p");
        }
    }
};

/// W_p^z = A^n(p)^{-1} A^n(z).
inline Matrix holonomy_loop(const OneStepCocycle& c, const HomoclinicSpec& spec) {
    spec.validate(c);
    const ScaledMatrix along_z = word_product(c, spec.padded_bridge());
    const ScaledMatrix along_p = word_product(c, spec.periodic_block());
    const Eigen::PartialPivLU<Matrix> lu(along_p.base());
    if (!(lu.rcond() > 1e-13)) {
        throw numeric_error("periodic block product is too ill-conditioned to invert");
    }
    const Matrix w = lu.solve(along_z.base()) * std::exp(along_z.log_scale() - along_p.log_scale());
    if (!w.allFinite()) {
        throw numeric_error("holonomy loop overflowed");
    }
    return w;
}

enum class Verdict { pass, fail, inconclusive };
enum class Typicality { typical, not_typical, inconclusive };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::pass:
        return "pass";
    case Verdict::fail:
        return "fail";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

inline std::string_view to_string(Typicality t) {
    switch (t) {
    case Typicality::typical:
        return "typical";
    case Typicality::not_typical:
        return "not-typical";
    case Typicality::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

/// pass above tol, fail at or below tol/10, inconclusive in between.
inline Verdict classify_margin(double margin, double tol) {
    if (margin > tol) {
        return Verdict::pass;
    }
    if (margin > 0.1 * tol) {
        return Verdict::inconclusive;
    }
    return Verdict::fail;
}

inline Verdict worst(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) {
        return Verdict::fail;
    }
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) {
        return Verdict::inconclusive;
    }
    return Verdict::pass;
}

struct EigenvalueCheck {
    Verdict verdict = Verdict::fail;
    /// |lambda_i|, nonincreasing
    std::vector<double> moduli;
    bool real = true;
    /// min_i (|lambda_i| - |lambda_{i+1}|) / |lambda_i|; 0 for complex spectra.
    double min_relative_gap = 0.0;
};

struct IndependenceCheck {
    /// I: eigenvectors taken through the holonomy loop (0-based).
    std::vector<int> image_indices;
    /// J: eigenvectors taken as they are (0-based).
    std::vector<int> plain_indices;
    /// sigma_min / sigma_max of the column-stacked unit vectors.
    double ratio = 0.0;
    Verdict verdict = Verdict::fail;
};

/// Conditions (i) and (ii) for one exterior power.
struct TypicalitySection {
    int order = 1;
    EigenvalueCheck eigenvalues;
    /// Empty when condition (i) fails, since the eigenbasis is then not real.
    std::vector<IndependenceCheck> independence;
    Verdict independence_verdict = Verdict::fail;
    Verdict verdict = Verdict::fail;
    double margin = 0.0;
};

struct TypicalityReport {
    std::vector<TypicalitySection> sections;
    Typicality overall = Typicality::inconclusive;
    /// Human-readable reason when not typical, e.g. "t=1: condition (ii)".
    std::string failure;
    double margin = 0.0;

    const EigenvalueCheck& eigenvalue_check() const { return sections.front().eigenvalues; }
    const std::vector<IndependenceCheck>& independence_checks() const { return sections.front().independence; }
    std::map<int, Verdict> per_exterior_power() const {
        std::map<int, Verdict> out;
        for (const auto& s : sections) {
            out[s.order] = s.verdict;
        }
        return out;
    }
};

struct TypicalityOptions {
    /// Cap on the C(2D, D) independence tests of a D-dimensional power.
    std::uint64_t max_independence_checks = std::uint64_t{1} << 20;
};

namespace detail {

struct Eigenbasis {
    EigenvalueCheck check;
    Matrix vectors;  // columns v_1..v_D, ordered by decreasing modulus
};

inline Eigenbasis eigenbasis(const Matrix& period_map, double tol) {
    const Index d = period_map.rows();
    Eigenbasis out;
    const Eigen::EigenSolver<Matrix> solver(period_map, true);
    if (solver.info() != Eigen::Success) {
        throw numeric_error("eigen-decomposition of the periodic product failed");
    }
    const auto& values = solver.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(values[a]) > std::abs(values[b]); });
    for (Index i : order) {
        const std::complex<double> lambda = values[i];
        out.check.moduli.push_back(std::abs(lambda));
        if (std::abs(lambda.imag()) > 1e-12 * std::max(1.0, std::abs(lambda))) {
            out.check.real = false;
        }
    }
    if (!out.check.real) {
        out.check.min_relative_gap = 0.0;
        out.check.verdict = Verdict::fail;
        return out;
    }
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < out.check.moduli.size(); ++i) {
        const double top = out.check.moduli[i];
        gap = std::min(gap, top > 0.0 ? (top - out.check.moduli[i + 1]) / top : 0.0);
    }
    out.check.min_relative_gap = d == 1 ? 1.0 : gap;
    out.check.verdict = classify_margin(out.check.min_relative_gap, tol);

    out.vectors.resize(d, d);
    const auto vecs = solver.eigenvectors();
    for (Index c = 0; c < d; ++c) {
        Vector v = vecs.col(order[static_cast<std::size_t>(c)]).real();
        v.normalize();
        for (Index r = 0; r < d; ++r) {
            if (std::abs(v[r]) > 1e-12) {
                if (v[r] < 0.0) {
                    v = -v;
                }
                break;
            }
        }
        out.vectors.col(c) = v;
    }
    return out;
}

inline TypicalitySection one_typical_section(const OneStepCocycle& c, const HomoclinicSpec& spec, double tol,
                                             int order, const TypicalityOptions& options) {
    TypicalitySection section;
    section.order = order;
    const Matrix period_map = word_product(c, spec.periodic).value();
    const Eigenbasis basis = eigenbasis(period_map, tol);
    section.eigenvalues = basis.check;
    section.margin = basis.check.min_relative_gap;
    if (basis.check.verdict == Verdict::fail) {
        section.verdict = Verdict::fail;
        return section;
    }

    const int d = static_cast<int>(c.dim());
    const std::uint64_t total = static_cast<std::uint64_t>(binomial(2 * d, d));
    if (total > options.max_independence_checks) {
        throw resource_error("independence test needs C(" + std::to_string(2 * d) + "," + std::to_string(d) +
                             ") = " + std::to_string(total) + " determinants");
    }
    const Matrix loop = holonomy_loop(c, spec);
    Matrix images = loop * basis.vectors;
    for (Index col = 0; col < images.cols(); ++col) {
        images.col(col).normalize();
    }
    // Only |I| + |J| = d needs testing: any admissible pair extends to one of
    // full size, and subsets of independent sets are independent.
    Verdict all = Verdict::pass;
    double min_ratio = std::numeric_limits<double>::infinity();
    Matrix stacked(d, d);
    for (int a = 0; a <= d; ++a) {
        const auto image_sets = lexicographic_subsets(d, a);
        const auto plain_sets = lexicographic_subsets(d, d - a);
        for (const auto& image : image_sets) {
            for (const auto& plain : plain_sets) {
                Index col = 0;
                for (int i : image) {
                    stacked.col(col++) = images.col(i);
                }
                for (int j : plain) {
                    stacked.col(col++) = basis.vectors.col(j);
                }
                const Eigen::JacobiSVD<Matrix> svd(stacked);
                const Vector& s = svd.singularValues();
                IndependenceCheck check;
                check.image_indices = image;
                check.plain_indices = plain;
                check.ratio = s[0] > 0.0 ? s[d - 1] / s[0] : 0.0;
                check.verdict = classify_margin(check.ratio, tol);
                all = worst(all, check.verdict);
                min_ratio = std::min(min_ratio, check.ratio);
                section.independence.push_back(std::move(check));
            }
        }
    }
    section.independence_verdict = all;
    section.verdict = worst(basis.check.verdict, all);
    section.margin = std::min(section.margin, min_ratio);
    return section;
}

inline TypicalityReport aggregate(std::vector<TypicalitySection> sections) {
    TypicalityReport report;
    report.sections = std::move(sections);
    report.overall = Typicality::typical;
    report.margin = std::numeric_limits<double>::infinity();
    for (const auto& s : report.sections) {
        report.margin = std::min(report.margin, s.margin);
        if (s.verdict == Verdict::fail && report.overall != Typicality::not_typical) {
            report.overall = Typicality::not_typical;
            const bool first = s.eigenvalues.verdict == Verdict::fail;
            report.failure = "t=" + std::to_string(s.order) + ": condition " + (first ? "(i)" : "(ii)");
        } else if (s.verdict == Verdict::inconclusive && report.overall == Typicality::typical) {
            report.overall = Typicality::inconclusive;
        }
    }
    return report;
}

} // namespace detail

/// Conditions (i) and (ii) for the cocycle itself.
inline TypicalityReport check_one_typical(const OneStepCocycle& c, const HomoclinicSpec& spec, double tol = 1e-8,
                                          const TypicalityOptions& options = {}) {
    spec.validate(c);
    return detail::aggregate({detail::one_typical_section(c, spec, tol, 1, options)});
}

/// 1-typicality of every exterior power t = 1..d-1 with the same (p, z).
inline TypicalityReport check_typical(const OneStepCocycle& c, const HomoclinicSpec& spec, double tol = 1e-8,
                                      const TypicalityOptions& options = {}) {
    spec.validate(c);
    std::vector<TypicalitySection> sections;
    const int top = std::max(1, static_cast<int>(c.dim()) - 1);
    for (int t = 1; t <= top; ++t) {
        if (t == 1) {
            sections.push_back(detail::one_typical_section(c, spec, tol, 1, options));
        } else {
            sections.push_back(detail::one_typical_section(c.exterior_power(t), spec, tol, t, options));
        }
    }
    return detail::aggregate(std::move(sections));
}

inline bool is_primitive(const Word& w) {
    const std::size_t n = w.size();
    for (std::size_t r = 1; r < n; ++r) {
        if (n % r != 0) {
            continue;
        }
        bool repeats = true;
        for (std::size_t i = r; i < n && repeats; ++i) {
            repeats = w[i] == w[i - r];
        }
        if (repeats) {
            return false;
        }
    }
    return n > 0;
}

/// All words of the given length in lexicographic order.
inline std::vector<Word> words_of_length(int k, int length) {
    std::vector<Word> out;
    const std::uint64_t count = word_count(k, length);
    out.reserve(count);
    for (std::uint64_t code = 0; code < count; ++code) {
        std::vector<int> symbols(static_cast<std::size_t>(length));
        std::uint64_t rest = code;
        for (int pos = length - 1; pos >= 0; --pos) {
            symbols[static_cast<std::size_t>(pos)] = static_cast<int>(rest % static_cast<std::uint64_t>(k));
            rest /= static_cast<std::uint64_t>(k);
        }
        out.emplace_back(std::move(symbols));
    }
    return out;
}

struct HomoclinicSearch {
    /// First typical pair in search order, if any.
    std::optional<HomoclinicSpec> spec;
    /// Report of the returned pair, or of the best-margin candidate otherwise.
    TypicalityReport report;
    double best_margin = -std::numeric_limits<double>::infinity();
    std::uint64_t candidates = 0;
    bool found() const { return spec.has_value(); }
};

/// Scans primitive periodic words by length then lexicographically, and for
/// each the bridges of length 1..max_bridge, returning the first typical pair.
inline HomoclinicSearch search_homoclinic(const OneStepCocycle& c, int max_period, int max_bridge, double tol = 1e-8,
                                          const EnumerationOptions& budget = {}, const TypicalityOptions& options = {}) {
    if (max_period < 1 || max_bridge < 1) {
        throw input_error("search bounds must be at least 1");
    }
    const int k = c.alphabet_size();
    std::uint64_t periods = 0;
    std::uint64_t bridges = 0;
    for (int p = 1; p <= max_period; ++p) {
        periods += word_count(k, p);
    }
    for (int b = 1; b <= max_bridge; ++b) {
        bridges += word_count(k, b);
    }
    if (periods > budget.budget || bridges > budget.budget || periods * bridges > budget.budget) {
        throw resource_error("homoclinic search over " + std::to_string(periods) + " periodic words x " +
                             std::to_string(bridges) + " bridges exceeds the budget of " +
                             std::to_string(budget.budget));
    }
    HomoclinicSearch out;
    for (int p = 1; p <= max_period; ++p) {
        for (const Word& periodic : words_of_length(k, p)) {
            if (!is_primitive(periodic)) {
                continue;
            }
            for (int b = 1; b <= max_bridge; ++b) {
                for (const Word& bridge : words_of_length(k, b)) {
                    HomoclinicSpec spec{periodic, bridge};
                    if (spec.padded_bridge() == spec.periodic_block()) {
                        continue;
                    }
                    ++out.candidates;
                    TypicalityReport report;
                    try {
                        report = check_typical(c, spec, tol, options);
                    } catch (const numeric_error&) {
                        continue;
                    }
                    if (report.overall == Typicality::typical) {
                        out.best_margin = std::max(out.best_margin, report.margin);
                        out.spec = spec;
                        out.report = std::move(report);
                        return out;
                    }
                    if (report.margin > out.best_margin || out.report.sections.empty()) {
                        out.best_margin = std::max(out.best_margin, report.margin);
                        out.report = std::move(report);
                    }
                }
            }
        }
    }
    return out;
}

enum class DominationMode { exhaustive, sampled };
enum class DominationVerdict { dominated, not_dominated, inconclusive };

inline std::string_view to_string(DominationVerdict v) {
    switch (v) {
    case DominationVerdict::dominated:
        return "dominated";
    case DominationVerdict::not_dominated:
        return "not-dominated";
    case DominationVerdict::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

struct DominationOptions {
    int samples = 10000;
    std::uint64_t seed = 0xb7e151628aed2a6bULL;
    /// Lengths at or below the burn-in are reported but not fitted.
    int burn_in = 4;
    /// Fitted log tau must be at most this for a dominated verdict.
    double rate_threshold = -1e-3;
    EnumerationOptions enumeration;
};

struct DominationReport {
    int index = 1;
    std::vector<int> lengths;
    /// max over words of log(sigma_{i+1} / sigma_i), per length
    std::vector<double> worst_log_ratio;
    std::vector<int> fitted_lengths;
    double log_tau = 0.0;
    double log_c = 0.0;
    bool monotone = false;
    DominationVerdict verdict = DominationVerdict::inconclusive;
};

/// Measures the worst singular value ratio sigma_{i+1}/sigma_i over all (or
/// randomly sampled) words of each length and fits log ratio ~ log C + N log tau.
inline DominationReport check_dominated(const OneStepCocycle& c, int index, std::span<const int> lengths,
                                        DominationMode mode, const DominationOptions& options = {}) {
    const int d = static_cast<int>(c.dim());
    if (index < 1 || index >= d) {
        throw input_error("domination index " + std::to_string(index) + " outside 1.." + std::to_string(d - 1));
    }
    if (lengths.empty()) {
        throw input_error("length list is empty");
    }
    if (!std::is_sorted(lengths.begin(), lengths.end()) ||
        std::adjacent_find(lengths.begin(), lengths.end()) != lengths.end() || lengths.front() < 1) {
        throw input_error("lengths must be positive and strictly ascending");
    }
    if (mode == DominationMode::exhaustive) {
        for (int n : lengths) {
            check_budget(c.alphabet_size(), n, options.enumeration.budget);
        }
    }

    DominationReport report;
    report.index = index;
    report.lengths.assign(lengths.begin(), lengths.end());
    const auto i = static_cast<std::size_t>(index - 1);
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<int> symbol(0, c.alphabet_size() - 1);
    SpectrumKernel kernel(c.dim());
    std::vector<double> log_sigma(static_cast<std::size_t>(d));

    for (int n : lengths) {
        double worst_ratio = -std::numeric_limits<double>::infinity();
        if (mode == DominationMode::exhaustive) {
            worst_ratio = reduce_products(
                c, n, worst_ratio,
                [&](double& acc, const ProductLeaf& leaf) {
                    acc = std::max(acc, leaf.log_sigma[i + 1] - leaf.log_sigma[i]);
                },
                [](double& into, double&& later) { into = std::max(into, later); }, options.enumeration);
        } else {
            std::vector<int> symbols(static_cast<std::size_t>(n));
            for (int s = 0; s < options.samples; ++s) {
                for (int& x : symbols) {
                    x = symbol(rng);
                }
                const Word w(symbols);
                const ScaledMatrix product = word_product(c, w);
                kernel.log_sigma(product, word_log_abs_det(c, w), log_sigma);
                worst_ratio = std::max(worst_ratio, log_sigma[i + 1] - log_sigma[i]);
            }
        }
        report.worst_log_ratio.push_back(worst_ratio);
    }

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t j = 0; j < report.lengths.size(); ++j) {
        if (report.lengths[j] > options.burn_in) {
            report.fitted_lengths.push_back(report.lengths[j]);
            xs.push_back(report.lengths[j]);
            ys.push_back(report.worst_log_ratio[j]);
        }
    }
    if (xs.size() < 2) {
        report.verdict = DominationVerdict::inconclusive;
        return report;
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        sxy += (xs[j] - mx) * (ys[j] - my);
        sxx += (xs[j] - mx) * (xs[j] - mx);
    }
    report.log_tau = sxy / sxx;
    report.log_c = my - report.log_tau * mx;
    report.monotone = true;
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        if (!(ys[j + 1] < ys[j])) {
            report.monotone = false;
        }
    }
    if (report.log_tau > options.rate_threshold) {
        report.verdict = DominationVerdict::not_dominated;
    } else {
        report.verdict = report.monotone ? DominationVerdict::dominated : DominationVerdict::inconclusive;
    }
    return report;
}

} // namespace cocycle
