// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cli_app.hpp"

#include <cocycle/cocycle.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cocycle;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && out_.pass) {
            out_.pass = false;
            out_.detail = what;
        }
    }
    void note(const std::string& text) {
        if (out_.pass) {
            out_.detail = text;
        }
    }
    Outcome result() const { return out_; }

private:
    Outcome out_;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Matrix scalar(double x) {
    Matrix m(1, 1);
    m << x;
    return m;
}

Matrix random_matrix(std::mt19937_64& rng, Index d) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            m(i, j) = g(rng);
        }
    }
    return m;
}

QVector random_q(std::mt19937_64& rng, Index d, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    QVector q = QVector::zero(d);
    for (Index i = 0; i < d; ++i) {
        q[i] = u(rng);
    }
    return q;
}

BernoulliMeasure random_bernoulli(std::mt19937_64& rng, int k) {
    std::gamma_distribution<double> g(1.0, 1.0);
    std::vector<double> p(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& x : p) {
        x = g(rng) + 1e-3;
        total += x;
    }
    for (double& x : p) {
        x /= total;
    }
    return BernoulliMeasure(p);
}

double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

OneStepCocycle diag_pair() { return OneStepCocycle({mat2(4, 0, 0, 1), mat2(1, 0, 0, 4)}); }
OneStepCocycle scalar_pair() { return OneStepCocycle({scalar(2), scalar(0.5)}); }
OneStepCocycle typical_pair() { return OneStepCocycle({mat2(2, 0, 0, 0.5), mat2(1, 1, -1, 1)}); }
OneStepCocycle shear_pair() { return OneStepCocycle({mat2(1, 1, 0, 1), mat2(0.5, 0, 0.3, 1.5)}); }

OneStepCocycle triple_3d() {
    Matrix a(3, 3), b(3, 3), c(3, 3);
    a << 2, 0.5, 0, 0, 1, 0.3, 0.1, 0, 0.5;
    b << 1, 0, 0.4, 0.6, 0.8, 0, 0, 0.2, 1.5;
    c << 0.7, 0.3, 0.2, 0, 1.2, 0.5, 0.4, 0, 0.9;
    return OneStepCocycle({a, b, c});
}

Outcome scalar_factorization() {
    Check check;
    const OneStepCocycle c = scalar_pair();
    double worst = 0.0;
    for (double q : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const double expected = std::log(std::pow(2.0, q) + std::pow(2.0, -q));
        for (int n : {4, 8, 12}) {
            worst = std::max(worst, std::abs(pressure(c, {q}, n).value - expected));
        }
    }
    check.expect(worst <= 1e-12, "max error " + fmt(worst));
    check.note("max error " + fmt(worst));
    return check.result();
}

Outcome binomial_oracle() {
    Check check;
    // 11-term binomial sum, evaluated directly.
    double sum = 0.0;
    for (int j = 0; j <= 10; ++j) {
        sum += std::exp(std::lgamma(11.0) - std::lgamma(j + 1.0) - std::lgamma(11.0 - j) +
                        std::max(j, 10 - j) * std::log(4.0));
    }
    const double oracle = std::log(sum) / 10.0;
    const double value = pressure(diag_pair(), {1, 0}, 10).value;
    check.expect(std::abs(value - oracle) <= 1e-9, "P_10 = " + fmt(value) + " vs " + fmt(oracle));
    check.expect(std::abs(value - 1.6768) < 5e-5, "P_10 not near 1.6768");
    check.note("P_10 = " + std::to_string(value));
    return check.result();
}

Outcome convexity() {
    Check check;
    std::mt19937_64 rng(301);
    const std::vector<OneStepCocycle> cocycles{diag_pair(), shear_pair(), triple_3d()};
    double worst = INFINITY;
    for (const OneStepCocycle& c : cocycles) {
        const int n = c.dim() == 3 ? 6 : 10;
        const DepthPressure model(c, n);
        for (int trial = 0; trial < 100; ++trial) {
            const QVector a = random_q(rng, c.dim(), 3.0);
            const QVector b = random_q(rng, c.dim(), 3.0);
            const QVector mid(0.5 * (a.values + b.values));
            const double slack =
                0.5 * (model.evaluate(a).value + model.evaluate(b).value) - model.evaluate(mid).value;
            worst = std::min(worst, slack);
        }
    }
    check.expect(worst >= -1e-9, "min slack " + fmt(worst));
    check.note("min slack " + fmt(worst));
    return check.result();
}

Outcome exterior_identity() {
    Check check;
    std::mt19937_64 rng(401);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = trial % 2 == 0 ? 2 : 3;
        const Matrix m = random_matrix(rng, d);
        const QVector q = random_q(rng, d, 3.0);
        double via_norms = 0.0;
        for (Index k = 1; k <= d; ++k) {
            const double next = k < d ? q[k] : 0.0;
            const double norm =
                Eigen::JacobiSVD<Matrix>(exterior_power(m, static_cast<int>(k))).singularValues()[0];
            via_norms += (q[k - 1] - next) * std::log(norm);
        }
        const double psi = std::exp(log_psi(m, q));
        const double ref = std::exp(via_norms);
        worst = std::max(worst, std::abs(psi - ref) / ref);
    }
    check.expect(worst <= 1e-9, "max relative error " + fmt(worst));
    check.note("max relative error " + fmt(worst));
    return check.result();
}

Outcome bowen() {
    Check check;
    std::mt19937_64 rng(501);
    std::uniform_int_distribution<int> depth(1, 8);
    const std::vector<OneStepCocycle> cocycles{diag_pair(), shear_pair(), typical_pair(), triple_3d()};
    double worst = INFINITY;
    for (int trial = 0; trial < 200; ++trial) {
        const OneStepCocycle& c = cocycles[static_cast<std::size_t>(trial) % cocycles.size()];
        const BowenTerms t =
            bowen_check(c, random_bernoulli(rng, c.alphabet_size()), random_q(rng, c.dim(), 3.0), depth(rng));
        worst = std::min(worst, t.gap());
    }
    check.expect(worst >= -1e-10, "min gap " + fmt(worst));
    double equality = 0.0;
    for (const OneStepCocycle& c : cocycles) {
        const BowenTerms t = bowen_check(c, BernoulliMeasure::uniform(c.alphabet_size()), QVector::zero(c.dim()), 6);
        equality = std::max(equality, std::abs(t.gap()));
    }
    check.expect(equality <= 1e-12, "q=0 uniform gap " + fmt(equality));
    check.note("min gap " + fmt(worst) + ", q=0 gap " + fmt(equality));
    return check.result();
}

Outcome gradient_check() {
    Check check;
    std::mt19937_64 rng(601);
    double worst = 0.0;
    const std::vector<OneStepCocycle> cocycles{typical_pair(), triple_3d()};
    for (int trial = 0; trial < 50; ++trial) {
        const OneStepCocycle& c = cocycles[static_cast<std::size_t>(trial) % 2];
        const int n = c.dim() == 2 ? 10 : 6;
        const DepthPressure model(c, n);
        const QVector q = random_q(rng, c.dim(), 2.0);
        const Vector g = model.evaluate(q).gradient;
        for (Index i = 0; i < c.dim(); ++i) {
            QVector up = q;
            QVector down = q;
            up[i] += 1e-4;
            down[i] -= 1e-4;
            const double fd = (model.evaluate(up).value - model.evaluate(down).value) / 2e-4;
            worst = std::max(worst, std::abs(fd - g[i]));
        }
    }
    check.expect(worst <= 1e-5, "max deviation " + fmt(worst));
    check.note("max deviation " + fmt(worst));
    return check.result();
}

Outcome fenchel() {
    Check check;
    std::mt19937_64 rng(701);
    const DepthPressure model(typical_pair(), 12);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Vector q0 = random_q(rng, 2, 4.0).values;
        if (q0.norm() > 4.0) {
            q0 *= 4.0 / q0.norm();
        }
        const auto e = model.evaluate(QVector(q0));
        const SpectrumPoint p = spectrum_point(model, ExponentVector(e.gradient), QVector::zero(2));
        worst = std::max(worst, std::abs(p.value - (e.value - q0.dot(e.gradient))));
    }
    check.expect(worst <= 1e-5, "max deviation " + fmt(worst));
    check.note("max deviation " + fmt(worst));
    return check.result();
}

Outcome spectrum_oracle() {
    Check check;
    const double l4 = std::log(4.0);
    const SpectrumPoint p = spectrum_point(diag_pair(), ExponentVector{0.75 * l4, 0.25 * l4}, 14, QVector::zero(2));
    const double diag_err = std::abs(p.value - binary_entropy(0.25));
    check.expect(diag_err <= 0.05, "diag pair S = " + fmt(p.value));
    std::vector<ExponentVector> alphas;
    for (double s = -0.8; s <= 0.81; s += 0.2) {
        alphas.push_back(ExponentVector{s * std::log(2.0)});
    }
    const auto points = spectrum_curve(scalar_pair(), alphas, 14);
    double sweep_err = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double target = binary_entropy((alphas[i][0] / std::log(2.0) + 1.0) / 2.0);
        sweep_err = std::max(sweep_err, std::abs(points[i].value - target));
    }
    check.expect(sweep_err <= 0.05, "scalar sweep error " + fmt(sweep_err));
    check.note("diag error " + fmt(diag_err) + ", sweep error " + fmt(sweep_err));
    return check.result();
}

Outcome variational() {
    Check check;
    std::mt19937_64 rng(901);
    double worst = -INFINITY;
    for (const OneStepCocycle& c : {diag_pair(), typical_pair(), scalar_pair()}) {
        for (int trial = 0; trial < 3; ++trial) {
            const QVector q = random_q(rng, c.dim(), 2.0);
            for (MeasureFamily f : {MeasureFamily::bernoulli, MeasureFamily::markov}) {
                CrosscheckOptions opts;
                opts.max_iterations = 100;
                const CrosscheckResult r = variational_crosscheck(c, q, 8, f, opts);
                worst = std::max(worst, r.best - r.pressure);
            }
        }
    }
    check.expect(worst <= 1e-8, "optimum exceeds pressure by " + fmt(worst));
    const CrosscheckResult r = variational_crosscheck(scalar_pair(), {1}, 12, MeasureFamily::bernoulli);
    const auto& w = std::get<BernoulliMeasure>(r.witness);
    check.expect(std::abs(r.best - r.pressure) <= 0.01, "scalar gap " + fmt(r.gap()));
    check.expect(std::abs(w.probability(0) - 0.8) <= 0.02 && std::abs(w.probability(1) - 0.2) <= 0.02,
                 "witness " + fmt(w.probability(0)));
    check.note("max excess " + fmt(worst) + ", scalar gap " + fmt(r.gap()) + ", witness p_1 = " +
               fmt(w.probability(0)));
    return check.result();
}

Outcome typicality() {
    Check check;
    const TypicalityReport good = check_typical(typical_pair(), HomoclinicSpec{Word::parse("1"), Word::parse("2")});
    check.expect(good.overall == Typicality::typical, "typical pair: " + std::string(to_string(good.overall)));
    const OneStepCocycle commuting({mat2(2, 0, 0, 0.5), mat2(3, 0, 0, 1.0 / 3)});
    const TypicalityReport diag = check_typical(commuting, HomoclinicSpec{Word::parse("1"), Word::parse("2")});
    check.expect(diag.overall == Typicality::not_typical && diag.failure.find("(ii)") != std::string::npos,
                 "commuting pair: " + diag.failure);
    const OneStepCocycle repeated({mat2(2, 0, 0, 2), mat2(1, 1, -1, 1)});
    const TypicalityReport rep = check_typical(repeated, HomoclinicSpec{Word::parse("1"), Word::parse("2")});
    check.expect(rep.overall == Typicality::not_typical && rep.failure.find("(i)") != std::string::npos &&
                     rep.failure.find("(ii)") == std::string::npos,
                 "diag(2,2): " + rep.failure);
    check.note("typical margin " + fmt(good.margin) + "; " + diag.failure + "; " + rep.failure);
    return check.result();
}

Outcome domination() {
    Check check;
    std::vector<int> lengths;
    for (int n = 1; n <= 14; ++n) {
        lengths.push_back(n);
    }
    const DominationReport single =
        check_dominated(OneStepCocycle({mat2(4, 0, 0, 1)}), 1, lengths, DominationMode::exhaustive);
    check.expect(single.verdict == DominationVerdict::dominated &&
                     std::abs(single.log_tau + std::log(4.0)) <= 1e-6,
                 "single generator log tau " + fmt(single.log_tau));
    const DominationReport inverse = check_dominated(
        OneStepCocycle({mat2(2, 0, 0, 0.5), mat2(0.5, 0, 0, 2)}), 1, lengths, DominationMode::exhaustive);
    check.expect(inverse.verdict == DominationVerdict::not_dominated, "inverse pair not rejected");
    const DominationReport positive = check_dominated(OneStepCocycle({mat2(2, 1, 1, 1), mat2(1, 1, 1, 2)}), 1,
                                                      lengths, DominationMode::exhaustive);
    check.expect(positive.verdict == DominationVerdict::dominated && positive.log_tau < -0.1,
                 "positive pair log tau " + fmt(positive.log_tau));
    check.note("log tau: single " + fmt(single.log_tau) + ", inverse " + fmt(inverse.log_tau) + ", positive " +
               fmt(positive.log_tau));
    return check.result();
}

std::string run_cli(cli::RunConfig cfg, int threads, bool deterministic, int& code) {
    cfg.threads = threads;
    cfg.deterministic = deterministic;
    std::ostringstream out;
    std::ostringstream err;
    code = cli::run(cfg, out, err);
    return out.str();
}

Outcome determinism() {
    Check check;
    cli::RunConfig cfg;
    cfg.subcommand = "pressure";
    cfg.cocycle_path = std::string(COCYCLE_DATA_DIR) + "/triple_3d.json";
    cfg.q = {{1, 0.5, -0.5}, {2, 1, 0}, {-1, 0, 1}};
    cfg.depth = 10;
    int code = 0;
    const std::string one = run_cli(cfg, 1, true, code);
    check.expect(code == 0, "cli exit " + std::to_string(code));
    for (int threads : {2, 8}) {
        check.expect(run_cli(cfg, threads, true, code) == one, "output differs at " + std::to_string(threads));
    }
    const OneStepCocycle c = load_cocycle(cfg.cocycle_path);
    double worst = 0.0;
    for (const auto& qv : cfg.q) {
        const QVector q{qv[0], qv[1], qv[2]};
        EnumerationOptions loose;
        loose.threads = 8;
        loose.deterministic = false;
        worst = std::max(worst, std::abs(pressure(c, q, 10, loose).value - pressure(c, q, 10).value));
    }
    check.expect(worst <= 1e-10, "non-deterministic deviation " + fmt(worst));
    check.note("byte-identical at 1/2/8 workers, free-order deviation " + fmt(worst));
    return check.result();
}

Outcome omega() {
    Check check;
    const double l2 = std::log(2.0);
    const double l4 = std::log(4.0);
    const OmegaEstimate est = estimate_omega(diag_pair(), 12, 8.0, 16);
    Vector a(2), b(2);
    a << l2, l2;
    b << l4, 0.0;
    auto to_segment = [&](const Vector& x) {
        const Vector ab = b - a;
        const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        return (x - (a + t * ab)).norm();
    };
    double forward = 0.0;
    for (const auto& v : est.vertices) {
        forward = std::max(forward, to_segment(v.values));
    }
    // The hull is a segment, so the reverse distance is attained at the endpoints.
    double backward = 0.0;
    for (const Vector& end : {a, b}) {
        double best = INFINITY;
        for (std::size_t i = 0; i < est.vertices.size(); ++i) {
            for (std::size_t j = 0; j < est.vertices.size(); ++j) {
                const Vector& p = est.vertices[i].values;
                const Vector& r = est.vertices[j].values;
                const Vector pr = r - p;
                const double t = pr.squaredNorm() > 0 ? std::clamp((end - p).dot(pr) / pr.squaredNorm(), 0.0, 1.0)
                                                      : 0.0;
                best = std::min(best, (end - (p + t * pr)).norm());
            }
        }
        backward = std::max(backward, best);
    }
    const double h = std::max(forward, backward);
    check.expect(h <= 0.15, "Hausdorff distance " + fmt(h));
    check.note("Hausdorff distance " + fmt(h));
    return check.result();
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"scalar factorization", scalar_factorization},
        {"binomial oracle", binomial_oracle},
        {"convexity", convexity},
        {"exterior power identity", exterior_identity},
        {"Bowen inequality", bowen},
        {"gradient check", gradient_check},
        {"Fenchel round trip", fenchel},
        {"spectrum oracle", spectrum_oracle},
        {"variational cross-check", variational},
        {"typicality", typicality},
        {"domination", domination},
        {"determinism", determinism},
        {"omega estimate", omega},
    };
    int failures = 0;
    int index = 1;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2d %-24s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
        failures += o.pass ? 0 : 1;
        ++index;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
