#include "p300/eeg_sim.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

namespace p300::eeg {
namespace {

using swlda::Label;
constexpr Label A = Label::attended;
constexpr Label N = Label::non_attended;

TEST(FitScoreModel, ConstantPoolsUseTheSdFloor) {
    const std::vector<double> s{0, 1, 0, 0, 1, 0};
    const std::vector<Label> l{N, A, N, N, A, N};
    const auto m = fit_score_model(s, l, ScoreMode::gaussian, 1e-4);
    EXPECT_EQ(m.mu_a, 1.0);
    EXPECT_EQ(m.mu_n, 0.0);
    EXPECT_EQ(m.sd_a, 1e-4);
    EXPECT_EQ(m.sd_n, 1e-4);
}

TEST(FitScoreModel, RecoversGaussianParameters) {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> a(1.0, 1.0), n(0.0, 1.0);
    std::bernoulli_distribution attended(1.0 / 6.0);
    std::vector<double> s;
    std::vector<Label> l;
    for (int i = 0; i < 10000; ++i) {
        const bool at = attended(rng);
        l.push_back(at ? A : N);
        s.push_back(at ? a(rng) : n(rng));
    }
    const auto m = fit_score_model(s, l, ScoreMode::gaussian);
    EXPECT_NEAR(m.mu_a, 1.0, 0.05);
    EXPECT_NEAR(m.mu_n, 0.0, 0.05);
    EXPECT_NEAR(m.sd_a, 1.0, 0.05);
    EXPECT_NEAR(m.sd_n, 1.0, 0.05);
}

TEST(FitScoreModel, PoolSizesSumToFlashesMinusOne) {
    std::mt19937_64 rng(4);
    const auto labels = flash_labels(rng, 10);
    std::vector<double> s(labels.size());
    std::iota(s.begin(), s.end(), 0.0);
    const auto m = fit_score_model(s, labels, ScoreMode::pooled);
    std::size_t total = 0;
    for (const auto& p : m.pools) total += p.size();
    EXPECT_EQ(total, labels.size() - 1);
    EXPECT_TRUE(m.diagnostics.empty());
}

TEST(FitScoreModel, EmptyPoolFallsBackToMarginal) {
    // Attended flashes never follow each other.
    const std::vector<double> s{0, 5, 0, 6, 0, 0};
    const std::vector<Label> l{N, A, N, A, N, N};
    const auto m = fit_score_model(s, l, ScoreMode::pooled);
    EXPECT_EQ(m.pools[pool_index(A, A)], (std::vector<double>{5, 6}));
    ASSERT_EQ(m.diagnostics.size(), 1u);
    EXPECT_THROW(fit_score_model({1, 2}, {N, N}, ScoreMode::gaussian), ValidationError);
}

TEST(DrawScore, DegenerateGaussianReturnsTheMean) {
    const auto m = gaussian_model(2.5, 1e-300, -1.0, 1e-300);
    SamplerState st(1);
    EXPECT_DOUBLE_EQ(draw_score(m, st, A), 2.5);
    EXPECT_DOUBLE_EQ(draw_score(m, st, N), -1.0);
}

SubjectScoreModel four_constant_pools() {
    SubjectScoreModel m;
    m.mode = ScoreMode::pooled;
    m.pools[pool_index(N, N)] = {0.0};
    m.pools[pool_index(N, A)] = {1.0};
    m.pools[pool_index(A, N)] = {10.0};
    m.pools[pool_index(A, A)] = {11.0};
    m.validate();
    return m;
}

TEST(DrawScore, PooledValueIdentifiesTheTransition) {
    const auto m = four_constant_pools();
    SamplerState st(7);
    const std::vector<Label> seq{A, A, N, N, A, N, A, A, A, N};
    Label prev = N;
    for (Label cur : seq) {
        const double y = draw_score(m, st, cur);
        EXPECT_EQ(y, m.pools[pool_index(prev, cur)][0]);
        prev = cur;
    }
}

TEST(DrawScore, PooledDrawsComeFromThePools) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    const auto labels = flash_labels(rng, 20);
    std::vector<double> s;
    for (std::size_t i = 0; i < labels.size(); ++i) s.push_back(g(rng) + (labels[i] == A));
    const auto m = fit_score_model(s, labels, ScoreMode::pooled);
    const std::set<double> values(s.begin(), s.end());
    SamplerState st(3);
    std::bernoulli_distribution coin(0.2);
    for (int i = 0; i < 5000; ++i) EXPECT_TRUE(values.count(draw_score(m, st, coin(rng) ? A : N)));
}

TEST(DrawScore, FixedSeedReproducesTheStream) {
    const auto m = gaussian_model(1.0, 1.0, 0.0, 1.0);
    SamplerState a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(draw_score(m, a, i % 5 ? N : A), draw_score(m, b, i % 5 ? N : A));
}

TEST(PoolCsv, RoundTrip) {
    const auto m = four_constant_pools();
    std::stringstream ss;
    write_pool_csv(m, ss);
    const auto back = read_pool_csv(ss);
    EXPECT_EQ(back.pools, m.pools);
    EXPECT_DOUBLE_EQ(back.mu_a, 6.0);
    std::stringstream bad("prev_state,cur_state,score\n0,3,1.0\n");
    EXPECT_THROW(read_pool_csv(bad), ValidationError);
}

TEST(Cohort, SameSeedIsBitIdentical) {
    CohortParams p;
    p.n_subjects = 3;
    p.chars = 4;
    const auto a = gen_synthetic_cohort(p), b = gen_synthetic_cohort(p);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(a[i].data.features, b[i].data.features);
        EXPECT_EQ(a[i].dprime, b[i].dprime);
    }
    p.seed = 2;
    EXPECT_NE(gen_synthetic_cohort(p)[0].data.features, a[0].data.features);
}

TEST(Cohort, OracleDirectionSeparatesByDprime) {
    CohortParams p;
    p.n_subjects = 2;
    p.dprime_mean = 2.0;
    p.dprime_sd = 0.0;
    p.chars = 60;
    for (const auto& s : gen_synthetic_cohort(p)) {
        const Eigen::VectorXd proj = s.data.features * s.direction;
        double sa = 0, sn = 0;
        int na = 0, nn = 0;
        for (std::size_t i = 0; i < s.data.size(); ++i)
            (s.data.rows[i].label == A ? (sa += proj(i), na++) : (sn += proj(i), nn++));
        EXPECT_NEAR(sa / na - sn / nn, 2.0, 0.1);
        // two attended flashes per 12-flash sequence
        EXPECT_EQ(na * 6, static_cast<int>(s.data.size()));
    }
}

TEST(Cohort, ClustersFollowTheMajorShare) {
    CohortParams p;
    p.n_subjects = 10;
    p.clusters = 2;
    p.chars = 1;
    int major = 0;
    for (const auto& s : gen_synthetic_cohort(p)) major += s.cluster == 0;
    EXPECT_EQ(major, 7);
}

}  // namespace
}  // namespace p300::eeg
