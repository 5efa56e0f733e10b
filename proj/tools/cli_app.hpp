#pragma once

#include <cocycle/cocycle.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cocycle::cli {

enum exit_code : int {
    exit_ok = 0,
    exit_numeric = 1,
    exit_validation = 2,
    exit_resource = 3,
    exit_inconclusive = 4,
};

struct RunConfig {
    std::string subcommand;
    std::string cocycle_path;
    std::vector<std::vector<double>> q;
    std::vector<std::vector<double>> alpha;
    int depth = 10;
    std::vector<int> depths;
    double probe_radius = 8.0;
    int probe_count = 16;
    std::vector<double> measure;
    std::string family = "bernoulli";
    int memory = 1;
    int max_period = 2;
    int max_bridge = 3;
    int index = 1;
    std::optional<double> tol;
    std::string mode = "exhaustive";
    std::string periodic;
    std::string bridge;
    int threads = 1;
    bool deterministic = false;
    std::optional<std::uint64_t> budget;
    std::string output;
    std::string format = "json";
};

namespace detail {

using nlohmann::json;

inline json array(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

inline json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

/// Shortest decimal form that parses back to the same double.
inline std::string number(double x) { return json(x).dump(); }

inline std::string csv_optional(const std::optional<double>& x) { return x ? number(*x) : std::string(); }

inline Vector to_vector(const std::vector<double>& v) {
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Index>(i)] = v[i];
    }
    return out;
}

inline void check_length(const std::vector<double>& v, Index d, const char* what) {
    if (static_cast<Index>(v.size()) != d) {
        throw validation_error(std::string("--") + what + " has " + std::to_string(v.size()) +
                               " entries but the cocycle has dimension " + std::to_string(d));
    }
}

class Emitter {
public:
    Emitter(std::ostream& out, std::string format) : out_(out), format_(std::move(format)) {}

    bool csv() const { return format_ == "csv"; }
    void record(const json& j) { out_ << j.dump() << '\n'; }
    void line(const std::string& s) { out_ << s << '\n'; }

private:
    std::ostream& out_;
    std::string format_;
};

inline int run_pressure(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts, Emitter& em) {
    std::vector<QVector> grid;
    for (const auto& q : cfg.q) {
        check_length(q, c.dim(), "q");
        grid.emplace_back(QVector{to_vector(q)});
    }
    if (grid.empty()) {
        throw validation_error("pressure needs at least one --q");
    }
    std::vector<PressureEstimate> results;
    if (cfg.depths.empty()) {
        results = pressure_grid(c, grid, cfg.depth, opts);
    } else {
        for (const QVector& q : grid) {
            results.push_back(pressure_bracket(c, q, cfg.depths, opts));
        }
    }
    const Index d = c.dim();
    if (em.csv()) {
        std::string header;
        for (Index i = 1; i <= d; ++i) {
            header += "q_" + std::to_string(i) + ",";
        }
        header += "n,value,";
        for (Index i = 1; i <= d; ++i) {
            header += "grad_" + std::to_string(i) + ",";
        }
        header += "upper,lower,gap";
        em.line(header);
        for (const auto& r : results) {
            std::string row;
            for (Index i = 0; i < d; ++i) {
                row += number(r.q[i]) + ",";
            }
            row += std::to_string(r.depth) + "," + number(r.value) + ",";
            for (Index i = 0; i < d; ++i) {
                row += number(r.gradient[i]) + ",";
            }
            row += csv_optional(r.upper_bound) + "," + csv_optional(r.lower_bound) + "," + csv_optional(r.cauchy_gap);
            em.line(row);
        }
        return exit_ok;
    }
    for (const auto& r : results) {
        em.record({{"command", "pressure"},
                   {"q", array(r.q.values)},
                   {"n", r.depth},
                   {"value", r.value},
                   {"gradient", array(r.gradient)},
                   {"upper", optional_number(r.upper_bound)},
                   {"lower", optional_number(r.lower_bound)},
                   {"gap", optional_number(r.cauchy_gap)}});
    }
    return exit_ok;
}

inline int run_spectrum(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts, Emitter& em) {
    std::vector<ExponentVector> alphas;
    for (const auto& a : cfg.alpha) {
        check_length(a, c.dim(), "alpha");
        alphas.emplace_back(to_vector(a));
    }
    if (alphas.empty()) {
        throw validation_error("spectrum needs at least one --alpha");
    }
    SpectrumOptions sopts;
    sopts.enumeration = opts;
    if (cfg.tol) {
        sopts.gradient_tolerance = *cfg.tol;
    }
    const auto points = spectrum_curve(c, alphas, cfg.depth, sopts);
    const Index d = c.dim();
    if (em.csv()) {
        std::string header;
        for (Index i = 1; i <= d; ++i) {
            header += "alpha_" + std::to_string(i) + ",";
        }
        header += "value,status";
        for (Index i = 1; i <= d; ++i) {
            header += ",q_" + std::to_string(i);
        }
        em.line(header);
        for (const auto& p : points) {
            std::string row;
            for (Index i = 0; i < d; ++i) {
                row += number(p.alpha[i]) + ",";
            }
            row += number(p.value) + "," + std::string(to_string(p.status));
            for (Index i = 0; i < d; ++i) {
                row += "," + number(p.minimizer[i]);
            }
            em.line(row);
        }
        return exit_ok;
    }
    for (const auto& p : points) {
        em.record({{"command", "spectrum"},
                   {"alpha", array(p.alpha.values)},
                   {"n", cfg.depth},
                   {"value", p.value},
                   {"status", std::string(to_string(p.status))},
                   {"q", array(p.minimizer.values)},
                   {"iterations", p.iterations},
                   {"gradient_norm", p.gradient_norm},
                   {"boundary_distance", p.boundary_distance}});
    }
    return exit_ok;
}

inline int run_lyapunov(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts, Emitter& em) {
    const BernoulliMeasure mu = cfg.measure.empty() ? BernoulliMeasure::uniform(c.alphabet_size())
                                                    : BernoulliMeasure(cfg.measure);
    if (mu.alphabet_size() != c.alphabet_size()) {
        throw validation_error("--measure has " + std::to_string(mu.alphabet_size()) +
                               " entries but the cocycle has " + std::to_string(c.alphabet_size()) + " symbols");
    }
    const ExponentVector chi = lyapunov_vector(c, mu, cfg.depth, opts);
    std::vector<double> p(mu.probabilities().begin(), mu.probabilities().end());
    em.record({{"command", "lyapunov"},
               {"measure", p},
               {"n", cfg.depth},
               {"exponents", array(chi.values)},
               {"entropy", mu.entropy()}});
    return exit_ok;
}

inline int run_omega(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts, Emitter& em) {
    const OmegaEstimate omega = estimate_omega(c, cfg.depth, cfg.probe_radius, cfg.probe_count, opts);
    json vertices = json::array();
    for (const auto& v : omega.vertices) {
        vertices.push_back(array(v.values));
    }
    em.record({{"command", "omega"},
               {"n", omega.depth},
               {"affine_dimension", omega.affine_dimension},
               {"probes", omega.q_samples.size()},
               {"vertices", std::move(vertices)}});
    return exit_ok;
}

inline json section_json(const TypicalitySection& s) {
    json independence = json::array();
    for (const auto& check : s.independence) {
        std::vector<int> image;
        std::vector<int> plain;
        for (int i : check.image_indices) {
            image.push_back(i + 1);
        }
        for (int j : check.plain_indices) {
            plain.push_back(j + 1);
        }
        independence.push_back({{"I", image},
                                {"J", plain},
                                {"ratio", check.ratio},
                                {"verdict", std::string(to_string(check.verdict))}});
    }
    return {{"t", s.order},
            {"eigenvalues",
             {{"verdict", std::string(to_string(s.eigenvalues.verdict))},
              {"moduli", s.eigenvalues.moduli},
              {"real", s.eigenvalues.real},
              {"min_relative_gap", s.eigenvalues.min_relative_gap}}},
            {"independence", std::move(independence)},
            {"verdict", std::string(to_string(s.verdict))},
            {"margin", s.margin}};
}

inline json report_json(const TypicalityReport& r) {
    json sections = json::array();
    for (const auto& s : r.sections) {
        sections.push_back(section_json(s));
    }
    return {{"overall", std::string(to_string(r.overall))},
            {"failure", r.failure},
            {"margin", r.margin},
            {"sections", std::move(sections)}};
}

inline int run_check_typical(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts,
                             Emitter& em) {
    const double tol = cfg.tol.value_or(1e-8);
    if (!cfg.periodic.empty() || !cfg.bridge.empty()) {
        if (cfg.periodic.empty() || cfg.bridge.empty()) {
            throw validation_error("--periodic and --bridge must be given together");
        }
        const HomoclinicSpec spec{Word::parse(cfg.periodic), Word::parse(cfg.bridge)};
        const TypicalityReport report = check_typical(c, spec, tol);
        em.record({{"command", "check-typical"},
                   {"periodic", spec.periodic.to_string()},
                   {"bridge", spec.bridge.to_string()},
                   {"report", report_json(report)}});
        return report.overall == Typicality::inconclusive ? exit_inconclusive : exit_ok;
    }
    const HomoclinicSearch found = search_homoclinic(c, cfg.max_period, cfg.max_bridge, tol, opts);
    json record = {{"command", "check-typical"},
                   {"found", found.found()},
                   {"candidates", found.candidates},
                   {"best_margin", found.best_margin}};
    if (found.spec) {
        record["periodic"] = found.spec->periodic.to_string();
        record["bridge"] = found.spec->bridge.to_string();
    }
    record["report"] = found.report.sections.empty() ? json(nullptr) : report_json(found.report);
    em.record(record);
    if (!found.found() && !found.report.sections.empty() && found.report.overall == Typicality::inconclusive) {
        return exit_inconclusive;
    }
    return exit_ok;
}

inline int run_check_dominated(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts,
                               Emitter& em) {
    DominationMode mode;
    if (cfg.mode == "exhaustive") {
        mode = DominationMode::exhaustive;
    } else if (cfg.mode == "sampled") {
        mode = DominationMode::sampled;
    } else {
        throw validation_error("--mode must be exhaustive or sampled");
    }
    std::vector<int> lengths = cfg.depths;
    if (lengths.empty()) {
        for (int n = 1; n <= cfg.depth; ++n) {
            lengths.push_back(n);
        }
    }
    DominationOptions dopts;
    dopts.enumeration = opts;
    const DominationReport r = check_dominated(c, cfg.index, lengths, mode, dopts);
    em.record({{"command", "check-dominated"},
               {"index", r.index},
               {"mode", cfg.mode},
               {"lengths", r.lengths},
               {"worst_log_ratio", r.worst_log_ratio},
               {"log_tau", r.log_tau},
               {"log_c", r.log_c},
               {"monotone", r.monotone},
               {"verdict", std::string(to_string(r.verdict))}});
    return r.verdict == DominationVerdict::inconclusive ? exit_inconclusive : exit_ok;
}

inline json measure_json(const Measure& mu) {
    if (const auto* b = std::get_if<BernoulliMeasure>(&mu)) {
        return {{"family", "bernoulli"},
                {"p", std::vector<double>(b->probabilities().begin(), b->probabilities().end())}};
    }
    const auto& m = std::get<MarkovMeasure>(mu);
    json rows = json::array();
    for (Index r = 0; r < m.transition().rows(); ++r) {
        rows.push_back(array(m.transition().row(r).transpose()));
    }
    return {{"family", "markov"}, {"memory", m.memory()}, {"transition", std::move(rows)}};
}

inline int run_crosscheck(const RunConfig& cfg, const OneStepCocycle& c, const EnumerationOptions& opts,
                          Emitter& em) {
    MeasureFamily family;
    if (cfg.family == "bernoulli") {
        family = MeasureFamily::bernoulli;
    } else if (cfg.family == "markov") {
        family = MeasureFamily::markov;
    } else {
        throw validation_error("--family must be bernoulli or markov");
    }
    if (cfg.q.empty()) {
        throw validation_error("crosscheck needs at least one --q");
    }
    CrosscheckOptions copts;
    copts.enumeration = opts;
    copts.memory = cfg.memory;
    if (cfg.tol) {
        copts.gradient_tolerance = *cfg.tol;
    }
    for (const auto& q : cfg.q) {
        check_length(q, c.dim(), "q");
        const CrosscheckResult r = variational_crosscheck(c, QVector{to_vector(q)}, cfg.depth, family, copts);
        em.record({{"command", "crosscheck"},
                   {"q", q},
                   {"n", cfg.depth},
                   {"family", cfg.family},
                   {"best", r.best},
                   {"pressure", r.pressure},
                   {"gap", r.gap()},
                   {"converged", r.converged},
                   {"iterations", r.iterations},
                   {"witness", measure_json(r.witness)}});
    }
    return exit_ok;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out) {
    if (cfg.format != "json" && cfg.format != "csv") {
        throw validation_error("--format must be json or csv");
    }
    if (cfg.format == "csv" && cfg.subcommand != "pressure" && cfg.subcommand != "spectrum") {
        throw validation_error("csv output is available for pressure and spectrum only");
    }
    if (cfg.depth < 1) {
        throw validation_error("--depth must be at least 1");
    }
    if (cfg.threads < 1) {
        throw validation_error("--threads must be at least 1");
    }
    if (cfg.cocycle_path.empty()) {
        throw validation_error("--cocycle is required");
    }
    const OneStepCocycle c = load_cocycle(cfg.cocycle_path);
    EnumerationOptions opts;
    opts.threads = cfg.threads;
    opts.deterministic = cfg.deterministic || cfg.threads == 1;
    if (cfg.budget) {
        opts.budget = *cfg.budget;
    }
    Emitter em(out, cfg.format);
    const std::string& cmd = cfg.subcommand;
    if (cmd == "pressure") {
        return run_pressure(cfg, c, opts, em);
    }
    if (cmd == "spectrum") {
        return run_spectrum(cfg, c, opts, em);
    }
    if (cmd == "lyapunov") {
        return run_lyapunov(cfg, c, opts, em);
    }
    if (cmd == "omega") {
        return run_omega(cfg, c, opts, em);
    }
    if (cmd == "check-typical") {
        return run_check_typical(cfg, c, opts, em);
    }
    if (cmd == "check-dominated") {
        return run_check_dominated(cfg, c, opts, em);
    }
    if (cmd == "crosscheck") {
        return run_crosscheck(cfg, c, opts, em);
    }
    throw validation_error("unknown subcommand '" + cmd + "'");
}

} // namespace detail

/// Runs one subcommand, writing records to `out` (or cfg.output) and
/// diagnostics to `err`. Output is buffered so failed runs leave no partial file.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::ostringstream buffer;
    int code = exit_ok;
    try {
        code = detail::dispatch(cfg, buffer);
    } catch (const resource_error& e) {
        err << "resource error: " << e.what() << '\n';
        return exit_resource;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const parse_error& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_validation;
    } catch (const error& e) {
        err << "validation error: " << e.what() << '\n';
        return exit_validation;
    }
    if (cfg.output.empty()) {
        out << buffer.str();
    } else {
        std::ofstream file(cfg.output, std::ios::binary);
        if (!file) {
            err << "validation error: cannot write " << cfg.output << '\n';
            return exit_validation;
        }
        file << buffer.str();
    }
    return code;
}

} // namespace cocycle::cli
