#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "adaptsense/strategies.hpp"

namespace {

using namespace adaptsense;

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(BayesUpdate, ZeroVectorLeavesPosterior) {
    const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    const auto q = bayes_update(p, SensingVector(std::vector<double>(4, 0.0)), 1.7, 2.0, 1.0);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(q[j], p[j], 1e-15);
    }
}

TEST(BayesUpdate, TwoCoordinateExample) {
    const std::vector<double> p{0.5, 0.5};
    const auto q = bayes_update(p, SensingVector::basis(2, 0), 1.0, 1.0, 1.0);
    const double e = std::exp(-0.5);
    EXPECT_NEAR(q[0], 1.0 / (1.0 + e), 1e-15);
    EXPECT_NEAR(q[1], e / (1.0 + e), 1e-15);
    EXPECT_NEAR(q[0], 0.6225, 1e-4);
}

TEST(BayesUpdate, RejectsBadInputs) {
    const std::vector<double> p{0.5, 0.5};
    EXPECT_THROW(bayes_update(p, SensingVector::basis(2, 0), 1.0, 1.0, 0.0), ConfigError);
    EXPECT_THROW(bayes_update(p, SensingVector::basis(3, 0), 1.0, 1.0, 1.0), UsageError);
}

TEST(BayesUpdate, SurvivesExtremeEvidence) {
    std::vector<double> p(8, 1.0 / 8.0);
    for (int i = 0; i < 50; ++i) {
        p = bayes_update(p, SensingVector::basis(8, 3), 1e3, 1e3, 1.0);
    }
    EXPECT_NEAR(p[3], 1.0, 1e-12);
    EXPECT_NEAR(sum(p), 1.0, 1e-12);
}

// Oracle: scan every integer beta and keep the largest feasible one.
std::vector<std::size_t> allocation_by_scan(std::size_t m, std::size_t n) {
    const auto stages = static_cast<std::size_t>(std::countr_zero(n));
    std::vector<std::size_t> best;
    for (std::size_t beta = 1; beta <= 2 * m + 2; ++beta) {
        std::vector<std::size_t> counts;
        std::size_t total = 0;
        for (std::size_t s = 1; s <= stages; ++s) {
            const std::size_t c = static_cast<std::size_t>(std::ceil(static_cast<double>(beta) / std::pow(2.0, s)));
            counts.push_back(c);
            total += c;
        }
        if (total <= m) {
            best = counts;
        }
    }
    return best;
}

TEST(StageAllocation, DocumentedExamples) {
    EXPECT_EQ(stage_allocation(14, 8), (std::vector<std::size_t>{8, 4, 2}));
    EXPECT_EQ(stage_allocation(5, 2), (std::vector<std::size_t>{5}));
    EXPECT_EQ(stage_allocation(3, 8), (std::vector<std::size_t>{1, 1, 1}));
}

TEST(StageAllocation, Errors) {
    EXPECT_THROW(stage_allocation(2, 8), ConfigError);
    EXPECT_THROW(stage_allocation(10, 12), ConfigError);
    EXPECT_THROW(stage_allocation(10, 1), ConfigError);
}

TEST(StageAllocation, ExhaustiveAgainstScan) {
    for (std::size_t n = 2; n <= 64; n *= 2) {
        const auto stages = static_cast<std::size_t>(std::countr_zero(n));
        for (std::size_t m = stages; m <= 256; ++m) {
            const auto alloc = stage_allocation(m, n);
            ASSERT_EQ(alloc, allocation_by_scan(m, n)) << "n=" << n << " m=" << m;
            ASSERT_EQ(alloc.size(), stages);
            std::size_t total = 0;
            for (std::size_t s = 0; s < alloc.size(); ++s) {
                ASSERT_GE(alloc[s], 1U);
                if (s > 0) {
                    ASSERT_LE(alloc[s], alloc[s - 1]);
                }
                total += alloc[s];
            }
            ASSERT_LE(total, m);
        }
    }
}

TEST(Nonadaptive, EntriesAndProtocol) {
    NonadaptiveRademacher s(16, 3, 42);
    const auto a = s.next_vector();
    EXPECT_EQ(s.next_vector()[0], a[0]);  // pending vector is re-served
    for (std::size_t j = 0; j < 16; ++j) {
        EXPECT_EQ(std::abs(a[j]), 0.25);
    }
    EXPECT_NEAR(a.norm(), 1.0, 1e-15);
    s.observe(0.0);
    EXPECT_THROW(s.observe(0.0), ProtocolError);
    s.next_vector();
    s.observe(1.0);
    s.next_vector();
    s.observe(1.0);
    EXPECT_TRUE(s.exhausted());
    EXPECT_THROW(s.next_vector(), ProtocolError);
    StrategyState state = NonadaptiveRademacher(4, 1, 1);
    EXPECT_THROW(finalize_support(state), ProtocolError);
}

TEST(Nonadaptive, SameSeedSameRows) {
    NonadaptiveRademacher a(32, 5, 9);
    NonadaptiveRademacher b(32, 5, 9);
    for (int i = 0; i < 5; ++i) {
        const auto va = a.next_vector();
        const auto vb = b.next_vector();
        for (std::size_t j = 0; j < 32; ++j) {
            ASSERT_EQ(va[j], vb[j]);
        }
        a.observe(0.0);
        b.observe(0.0);
    }
}

TEST(Bayesian, UniformPosteriorGivesHalfEntries) {
    BayesianAdaptive s(4, 1, 1.0, 1.0, 5);
    const auto a = s.next_vector();
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_DOUBLE_EQ(std::abs(a[j]), 0.5);
    }
    EXPECT_NEAR(a.norm(), 1.0, 1e-15);
}

TEST(Bayesian, ConcentratedPosteriorGivesBasisVector) {
    // Overwhelming evidence on index 7 drives the posterior to e_7 in
    // floating point; the next row is then +-e_7.
    BayesianAdaptive s(10, 40, 50.0, 0.1, 6);
    for (int i = 0; i < 39; ++i) {
        const auto a = s.next_vector();
        s.observe(50.0 * a[7]);
    }
    ASSERT_EQ(s.posterior()[7], 1.0);
    const auto a = s.next_vector();
    for (std::size_t j = 0; j < 10; ++j) {
        EXPECT_EQ(std::abs(a[j]), j == 7 ? 1.0 : 0.0);
    }
    s.observe(50.0 * a[7]);
    EXPECT_EQ(s.finalize_support(), 7U);
}

TEST(Bayesian, ProtocolErrors) {
    BayesianAdaptive s(4, 2, 1.0, 1.0, 5);
    EXPECT_THROW(s.observe(0.0), ProtocolError);
    s.next_vector();
    s.observe(0.0);
    EXPECT_THROW(s.finalize_support(), ProtocolError);
    s.next_vector();
    s.observe(0.0);
    EXPECT_THROW(s.next_vector(), ProtocolError);
    EXPECT_NO_THROW(s.finalize_support());
    EXPECT_THROW(BayesianAdaptive(4, 2, 1.0, 0.0, 5), ConfigError);
}

TEST(Bayesian, PosteriorStaysNormalized) {
    Rng rng(77);
    for (int run = 0; run < 30; ++run) {
        BayesianAdaptive s(64, 60, 0.5 + 3.0 * rng.uniform(), 0.2 + rng.uniform(), rng.next_u64());
        while (!s.exhausted()) {
            s.next_vector();
            s.observe(10.0 * rng.gaussian());
            const auto p = s.posterior();
            for (double v : p) {
                ASSERT_GE(v, 0.0);
            }
            ASSERT_NEAR(sum(p), 1.0, 1e-12);
        }
    }
}

TEST(Bayesian, TieBreaksToLowestIndex) {
    // Zero observations against symmetric rows leave p uniform.
    BayesianAdaptive s(2, 1, 1.0, 1.0, 8);
    s.next_vector();
    s.observe(0.0);
    EXPECT_DOUBLE_EQ(s.posterior()[0], s.posterior()[1]);
    EXPECT_EQ(s.finalize_support(), 0U);
}

TEST(Bisection, FirstStageRowForFour) {
    auto s = RecursiveBisection::with_budget(4, 2);
    const auto a = s.next_vector();
    const std::vector<double> expected{0.5, 0.5, -0.5, -0.5};
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(a[j], expected[j], 1e-15);
    }
    EXPECT_NEAR(a.norm(), 1.0, 1e-15);
}

TEST(Bisection, SignDecisions) {
    RecursiveBisection plus(4, {1, 1});
    plus.next_vector();
    plus.observe(2.0);
    EXPECT_EQ(plus.first_half(), (IndexRange{0, 1}));
    EXPECT_EQ(plus.second_half(), (IndexRange{1, 2}));
    EXPECT_EQ(plus.stage(), 1U);

    RecursiveBisection minus(4, {1, 1});
    minus.next_vector();
    minus.observe(-2.0);
    EXPECT_EQ(minus.first_half(), (IndexRange{2, 3}));
    EXPECT_EQ(minus.second_half(), (IndexRange{3, 4}));

    RecursiveBisection zero(4, {1, 1});
    zero.next_vector();
    zero.observe(0.0);
    EXPECT_EQ(zero.first_half(), (IndexRange{0, 1}));
    EXPECT_EQ(zero.sign_history(), std::vector<bool>{true});
}

TEST(Bisection, NoiselessTraceFindsThirdCoordinate) {
    // x = 3 e_2 (zero-based): stage 1 sees -3/2 -> keep {2,3};
    // stage 2 row is (0,0,1/sqrt2,-1/sqrt2), sees +3/sqrt2 -> keep {2}.
    std::vector<double> x(4, 0.0);
    x[2] = 3.0;
    const auto signal = SparseSignal::from_amplitudes(x);
    auto s = RecursiveBisection::with_budget(4, 2);
    while (!s.exhausted()) {
        const auto a = s.next_vector();
        s.observe(inner(signal, a));
    }
    EXPECT_EQ(s.finalize_support(), 2U);
    EXPECT_EQ(s.sign_history(), (std::vector<bool>{false, true}));
}

TEST(Bisection, NoiselessRecoveryAlways) {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = std::size_t{1} << (1 + rng.uniform_index(9));
        const auto stages = static_cast<std::size_t>(std::countr_zero(n));
        const std::size_t budget = stages + rng.uniform_index(3 * stages + 1);
        const std::size_t target = rng.uniform_index(n);
        std::vector<double> x(n, 0.0);
        x[target] = 0.01 + 5.0 * rng.uniform();
        const auto signal = SparseSignal::from_amplitudes(x);
        auto s = RecursiveBisection::with_budget(n, budget);
        std::size_t used = 0;
        while (!s.exhausted()) {
            const auto a = s.next_vector();
            s.observe(inner(signal, a));
            ++used;
        }
        ASSERT_EQ(used, budget);
        ASSERT_EQ(s.finalize_support(), target);
    }
}

TEST(Bisection, HalvesStayDisjointAndShrink) {
    auto s = RecursiveBisection::with_budget(64, 40);
    Rng rng(3);
    std::size_t stage = 0;
    while (!s.exhausted()) {
        const auto j1 = s.first_half();
        const auto j2 = s.second_half();
        ASSERT_EQ(j1.last, j2.first);
        ASSERT_EQ(j1.size(), j2.size());
        ASSERT_EQ(j1.size(), std::size_t{64} >> (s.stage() + 1));
        stage = s.stage();
        s.next_vector();
        s.observe(rng.gaussian());
    }
    EXPECT_EQ(stage, 5U);
    EXPECT_EQ(s.consumed(), 40U);
}

TEST(Bisection, ProtocolAndConfigErrors) {
    EXPECT_THROW(RecursiveBisection(6, {1, 1}), ConfigError);
    EXPECT_THROW(RecursiveBisection(8, {1, 1}), ConfigError);
    EXPECT_THROW(RecursiveBisection(4, {1, 0}), ConfigError);
    RecursiveBisection s(4, {1, 1});
    EXPECT_THROW(s.observe(1.0), ProtocolError);
    EXPECT_THROW(s.finalize_support(), ProtocolError);
    s.next_vector();
    s.observe(1.0);
    s.next_vector();
    s.observe(1.0);
    EXPECT_THROW(s.next_vector(), ProtocolError);
}

TEST(Directed, AppendsSamples) {
    DirectedEstimation s(5, 3, 2);
    const auto a = s.next_vector();
    EXPECT_EQ(a[3], 1.0);
    s.observe(1.5);
    EXPECT_EQ(std::vector<double>(s.samples().begin(), s.samples().end()), std::vector<double>{1.5});
    EXPECT_THROW(s.observe(1.0), ProtocolError);
    EXPECT_EQ(s.finalize_support(), 3U);
    EXPECT_THROW(DirectedEstimation(5, 5, 1), ConfigError);
}

TEST(AllStrategies, FuzzedNormsAndExactBudgets) {
    Rng rng(2024);
    for (int run = 0; run < 200; ++run) {
        const std::size_t n = std::size_t{1} << (1 + rng.uniform_index(8));
        const auto stages = static_cast<std::size_t>(std::countr_zero(n));
        const std::size_t budget = stages + rng.uniform_index(40);
        const double mu = 0.1 + 10.0 * rng.uniform();
        const double sigma = 0.05 + 2.0 * rng.uniform();
        std::vector<StrategyState> states;
        states.emplace_back(NonadaptiveRademacher(n, budget, rng.next_u64()));
        states.emplace_back(BayesianAdaptive(n, budget, mu, sigma, rng.next_u64()));
        states.emplace_back(RecursiveBisection::with_budget(n, budget));
        states.emplace_back(DirectedEstimation(n, rng.uniform_index(n), budget));
        for (auto& state : states) {
            std::size_t used = 0;
            while (!exhausted(state)) {
                const auto a = next_vector(state);
                ASSERT_LE(a.norm(), 1.0 + kNormTolerance);
                ASSERT_EQ(a.size(), n);
                // Adversarial answers: huge, tiny, and signed.
                const double y = rng.uniform() < 0.1 ? 1e6 * rng.gaussian() : mu * rng.gaussian();
                observe(state, y);
                ++used;
            }
            ASSERT_EQ(used, budget);
            ASSERT_EQ(consumed(state), budget);
        }
    }
}

TEST(StrategyState, CopySnapshotsState) {
    BayesianAdaptive s(8, 4, 1.0, 1.0, 10);
    s.next_vector();
    s.observe(0.3);
    BayesianAdaptive copy = s;
    const auto a = s.next_vector();
    const auto b = copy.next_vector();
    for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_EQ(a[j], b[j]);
    }
}

}  // namespace
