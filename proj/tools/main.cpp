#include "cli_app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> split_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        const double x = std::stod(item, &used);
        if (used != item.size()) {
            throw CLI::ValidationError("not a number: " + item);
        }
        out.push_back(x);
    }
    return out;
}

std::vector<int> split_ints(const std::string& text) {
    std::vector<int> out;
    for (double x : split_doubles(text)) {
        if (x != static_cast<int>(x)) {
            throw CLI::ValidationError("not an integer: " + std::to_string(x));
        }
        out.push_back(static_cast<int>(x));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pressure, Lyapunov spectra and typicality checks for one-step matrix cocycles"};
    app.require_subcommand(1);
    app.fallthrough();

    cocycle::cli::RunConfig cfg;
    std::vector<std::string> q_text;
    std::vector<std::string> alpha_text;
    std::string depths_text;
    std::string measure_text;
    std::optional<double> tol;

    app.add_option("--cocycle", cfg.cocycle_path, "cocycle JSON file")->check(CLI::ExistingFile);
    app.add_option("--q", q_text, "exponent vector q_1,...,q_d (repeatable)");
    app.add_option("--alpha", alpha_text, "exponent target alpha_1,...,alpha_d (repeatable)");
    app.add_option("--depth", cfg.depth, "word length n")->capture_default_str();
    app.add_option("--depths", depths_text, "ascending depth list N1,N2,... (pressure bracket, domination lengths)");
    app.add_option("--probe-radius", cfg.probe_radius, "radius of the omega probe sphere")->capture_default_str();
    app.add_option("--probe-count", cfg.probe_count, "number of omega probe directions")->capture_default_str();
    app.add_option("--measure", measure_text, "Bernoulli weights p_1,...,p_k");
    app.add_option("--family", cfg.family, "bernoulli|markov")->capture_default_str();
    app.add_option("--memory", cfg.memory, "Markov memory (1 or 2)")->capture_default_str();
    app.add_option("--max-period", cfg.max_period, "longest periodic word in the search")->capture_default_str();
    app.add_option("--max-bridge", cfg.max_bridge, "longest bridge word in the search")->capture_default_str();
    app.add_option("--periodic", cfg.periodic, "periodic word, e.g. 12");
    app.add_option("--bridge", cfg.bridge, "bridge word, e.g. 2");
    app.add_option("--index", cfg.index, "domination index i")->capture_default_str();
    app.add_option("--mode", cfg.mode, "exhaustive|sampled")->capture_default_str();
    app.add_option("--tol", tol, "tolerance override");
    app.add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
    app.add_flag("--deterministic", cfg.deterministic, "thread-count independent reductions");
    app.add_option("--output", cfg.output, "output file (default stdout)");
    app.add_option("--format", cfg.format, "json|csv")->capture_default_str();

    const std::pair<const char*, const char*> commands[] = {
        {"pressure", "P_n(q) and its gradient for each --q; --depths adds bounds"},
        {"spectrum", "Legendre spectrum S_n(alpha) for each --alpha"},
        {"lyapunov", "exponent vector of a Bernoulli --measure"},
        {"omega", "vertices of the depth-n exponent range estimate"},
        {"check-typical", "typicality of --periodic/--bridge, or search up to --max-period/--max-bridge"},
        {"check-dominated", "domination of index --index over lengths 1..--depth or --depths"},
        {"crosscheck", "variational optimum over a measure --family against P_n(q)"},
    };
    for (const auto& [name, description] : commands) {
        app.add_subcommand(name, description)->fallthrough();
    }

    try {
        app.parse(argc, argv);
        cfg.subcommand = app.get_subcommands().front()->get_name();
        for (const auto& s : q_text) {
            cfg.q.push_back(split_doubles(s));
        }
        for (const auto& s : alpha_text) {
            cfg.alpha.push_back(split_doubles(s));
        }
        if (!depths_text.empty()) {
            cfg.depths = split_ints(depths_text);
        }
        if (!measure_text.empty()) {
            cfg.measure = split_doubles(measure_text);
        }
        cfg.tol = tol;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cocycle::cli::exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return cocycle::cli::exit_validation;
    }

    if (const char* budget = std::getenv("COCYCLE_BUDGET")) {
        try {
            cfg.budget = std::stoull(budget);
        } catch (const std::exception&) {
            std::cerr << "validation error: COCYCLE_BUDGET must be a positive integer\n";
            return cocycle::cli::exit_validation;
        }
    }
    return cocycle::cli::run(cfg, std::cout, std::cerr);
}
