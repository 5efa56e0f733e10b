#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cocycle;

namespace {

double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

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

} // namespace

TEST(Bernoulli, EntropyValues) {
    EXPECT_NEAR(BernoulliMeasure({0.25, 0.75}).entropy(), 0.5623351446188083, 1e-15);
    EXPECT_NEAR(BernoulliMeasure({0.3, 0.7}).entropy(), 0.6108643020548935, 1e-15);
    EXPECT_NEAR(BernoulliMeasure::uniform(3).entropy(), std::log(3.0), 1e-15);
    EXPECT_NEAR(BernoulliMeasure({1.0, 0.0}).entropy(), 0.0, 1e-15);
}

TEST(Bernoulli, RejectsBadVectors) {
    EXPECT_THROW(BernoulliMeasure({0.5, 0.6}), input_error);
    EXPECT_THROW(BernoulliMeasure({-0.1, 1.1}), input_error);
    EXPECT_THROW(BernoulliMeasure(std::vector<double>{}), input_error);
}

TEST(Markov, StationaryVectorOfTwoStateChain) {
    Matrix t(2, 2);
    t << 0.9, 0.1, 0.4, 0.6;
    const MarkovMeasure mu = MarkovMeasure::from_transition(t);
    EXPECT_NEAR(mu.stationary()[0], 0.8, 1e-12);
    EXPECT_NEAR(mu.stationary()[1], 0.2, 1e-12);
    EXPECT_NEAR(mu.entropy(), 0.8 * binary_entropy(0.1) + 0.2 * binary_entropy(0.4), 1e-12);
}

TEST(Markov, CylindersSumToOne) {
    Matrix t(4, 2);
    t << 0.9, 0.1, 0.3, 0.7, 0.5, 0.5, 0.2, 0.8;
    const MarkovMeasure mu = MarkovMeasure::from_transition(t, 2);
    for (int n = 1; n <= 5; ++n) {
        double total = 0.0;
        enumerate_products(fixtures::scalar_pair(), n,
                           [&](const ProductLeaf& leaf) { total += std::exp(mu.log_cylinder(leaf.word)); });
        EXPECT_NEAR(total, 1.0, 1e-12) << "n=" << n;
    }
}

TEST(Markov, RejectsNonInvariantVector) {
    Matrix t(2, 2);
    t << 0.9, 0.1, 0.4, 0.6;
    Vector pi(2);
    pi << 0.5, 0.5;
    EXPECT_THROW(MarkovMeasure(t, pi), input_error);
    EXPECT_THROW(MarkovMeasure::from_transition(t, 3), input_error);
}

TEST(Markov, IdenticalRowsAreBernoulli) {
    Matrix t(2, 2);
    t << 0.3, 0.7, 0.3, 0.7;
    const MarkovMeasure mu = MarkovMeasure::from_transition(t);
    const BernoulliMeasure nu({0.3, 0.7});
    EXPECT_NEAR(mu.entropy(), nu.entropy(), 1e-14);
    const std::vector<int> w{0, 1, 1, 0, 1};
    EXPECT_NEAR(mu.log_cylinder(w), nu.log_cylinder(w), 1e-14);
}

TEST(Lyapunov, DiagPairUnderFairCoin) {
    const ExponentVector chi = lyapunov_vector(fixtures::diag_pair(), BernoulliMeasure::uniform(2), 10);
    EXPECT_NEAR(chi[0], 0.8637263695258695, 1e-12);
    EXPECT_NEAR(chi[1], 0.5225679915940212, 1e-12);
    EXPECT_NEAR(chi[0] / std::log(4.0), 0.623046875, 1e-12);
}

TEST(Lyapunov, SumIsMeanLogDet) {
    std::mt19937_64 rng(7);
    const OneStepCocycle c = fixtures::triple_3d();
    const BernoulliMeasure mu = random_bernoulli(rng, 3);
    const ExponentVector chi = lyapunov_vector(c, mu, 6);
    double mean_logdet = 0.0;
    for (int s = 0; s < 3; ++s) {
        mean_logdet += mu.probability(s) * c.log_abs_det(s);
    }
    EXPECT_NEAR(chi.values.sum(), mean_logdet, 1e-12);
    EXPECT_TRUE(chi.sorted());
}

TEST(Lyapunov, TopExponentDecreasesAlongEvenDepths) {
    // E[max(j, n-j)]/n for the diag pair; odd depths tie with the even depth below.
    const OneStepCocycle c = fixtures::diag_pair();
    double previous = lyapunov_vector(c, BernoulliMeasure::uniform(2), 2)[0];
    for (int n = 4; n <= 12; n += 2) {
        const double top = lyapunov_vector(c, BernoulliMeasure::uniform(2), n)[0];
        EXPECT_LT(top, previous);
        EXPECT_GT(top, std::log(2.0));
        previous = top;
    }
}

TEST(Lyapunov, RejectsMismatchedAlphabet) {
    EXPECT_THROW(lyapunov_vector(fixtures::diag_pair(), BernoulliMeasure::uniform(3), 4), input_error);
}

TEST(Bowen, HoldsOnRandomTriples) {
    std::mt19937_64 rng(97);
    std::uniform_int_distribution<int> depth(1, 8);
    const std::vector<OneStepCocycle> cocycles{fixtures::diag_pair(), fixtures::shear_pair(), fixtures::triple_3d()};
    for (int trial = 0; trial < 60; ++trial) {
        const OneStepCocycle& c = cocycles[static_cast<std::size_t>(trial) % cocycles.size()];
        const int n = c.alphabet_size() == 3 ? std::min(depth(rng), 6) : depth(rng);
        const BowenTerms t = bowen_check(c, random_bernoulli(rng, c.alphabet_size()),
                                         fixtures::random_q(rng, c.dim(), 3.0), n);
        EXPECT_LE(t.lhs, t.rhs + 1e-10);
    }
}

TEST(Bowen, EqualityAtZeroWithUniformMeasure) {
    const BowenTerms t = bowen_check(fixtures::triple_3d(), BernoulliMeasure::uniform(3), QVector::zero(3), 5);
    EXPECT_NEAR(t.lhs, t.rhs, 1e-12);
    EXPECT_NEAR(t.rhs, std::log(3.0), 1e-12);
}

TEST(Bowen, EqualityForTheEquilibriumBernoulliMeasure) {
    // mu = (0.8, 0.2) is proportional to (2, 1/2), the Gibbs weights at q = 1.
    const BowenTerms t = bowen_check(fixtures::scalar_pair(), BernoulliMeasure({0.8, 0.2}), {1}, 6);
    EXPECT_NEAR(t.lhs, 0.9162907318741551, 1e-12);
    EXPECT_NEAR(t.rhs, 0.9162907318741551, 1e-12);
}

TEST(Bowen, StrictGapAwayFromEquilibrium) {
    const BowenTerms t = bowen_check(fixtures::scalar_pair(), BernoulliMeasure::uniform(2), {1}, 6);
    EXPECT_NEAR(t.lhs, std::log(2.0), 1e-12);
    EXPECT_GT(t.gap(), 0.2);
}

TEST(Crosscheck, ScalarOptimumAndWitness) {
    const CrosscheckResult r = variational_crosscheck(fixtures::scalar_pair(), {1}, 12, MeasureFamily::bernoulli);
    EXPECT_LE(r.best, r.pressure + 1e-8);
    EXPECT_NEAR(r.best, r.pressure, 0.01);
    const auto& w = std::get<BernoulliMeasure>(r.witness);
    EXPECT_NEAR(w.probability(0), 0.8, 0.02);
    EXPECT_NEAR(w.probability(1), 0.2, 0.02);
}

TEST(Crosscheck, NeverExceedsPressure) {
    std::mt19937_64 rng(5);
    for (const OneStepCocycle& c : {fixtures::diag_pair(), fixtures::typical_pair()}) {
        for (int trial = 0; trial < 3; ++trial) {
            const QVector q = fixtures::random_q(rng, 2, 2.0);
            const CrosscheckResult b = variational_crosscheck(c, q, 8, MeasureFamily::bernoulli);
            EXPECT_LE(b.best, b.pressure + 1e-8);
            CrosscheckOptions opts;
            opts.max_iterations = 60;
            const CrosscheckResult m = variational_crosscheck(c, q, 8, MeasureFamily::markov, opts);
            EXPECT_LE(m.best, m.pressure + 1e-8);
            EXPECT_GE(m.best, b.best - 1e-9);
        }
    }
}

TEST(Crosscheck, WitnessValueIsReproducible) {
    const OneStepCocycle c = fixtures::diag_pair();
    const QVector q{1, 0};
    const CrosscheckResult r = variational_crosscheck(c, q, 8, MeasureFamily::bernoulli);
    const ExponentVector chi = lyapunov_vector(c, r.witness, 8);
    EXPECT_NEAR(entropy(r.witness) + q.values.dot(chi.values), r.best, 1e-9);
}
