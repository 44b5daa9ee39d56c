#include <gtest/gtest.h>

#include "locobs/experiments.hpp"
#include "locobs/io.hpp"
#include "oracles.hpp"

using namespace locobs;

namespace {

OptimizerConfig seeded(std::uint64_t seed) {
    OptimizerConfig c;
    c.seed = RngSeed{seed};
    return c;
}

double delta_by_vector_slice(const Matrix& a, Index d1, Index d2) {
    locobs::Vector e0 = locobs::Vector::Zero(d2);
    e0(0) = 1.0;
    const Matrix slice = oracle::slice_with_vector(a, d1, d2, e0);
    return oracle::spectral_norm(oracle::kron(slice, Matrix::Identity(d2, d2)) - a);
}

} // namespace

TEST(Factor2Trial, EmbeddedOperatorSucceedsTrivially) {
    const BipartiteOperator a = embed_left(ginibre(3, 3, RngSeed{1}), 7);
    const TrialRecord rec = factor2_trial_on(a, RngSeed{1}, seeded(2));
    EXPECT_LE(rec.delta, 1e-12);
    EXPECT_TRUE(rec.success);
    EXPECT_GE(rec.ratio, 0.0);
}

TEST(Factor2Trial, ThreeBySevenFindsAdversarialUnitary) {
    const TrialRecord rec = factor2_trial(3, 7, RngSeed{2024}, seeded(7));
    EXPECT_TRUE(rec.success) << "delta " << rec.delta << " gap " << rec.best_gap;
    EXPECT_NEAR(twirl_gap(BipartiteOperator(ginibre(21, 21, RngSeed{2024}), 3, 7), rec.witness), rec.best_gap, 1e-10);
    EXPECT_EQ(rec.success, rec.best_gap >= rec.delta - kSuccessTol);
}

TEST(Factor2Trial, QubitTrialsMatchBruteForce) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const TrialRecord rec = factor2_trial(2, 2, RngSeed{s}, seeded(s));
        const Matrix a = ginibre(4, 4, RngSeed{s});
        EXPECT_NEAR(rec.delta, delta_by_vector_slice(a, 2, 2), 1e-6) << "seed " << s;
        EXPECT_NEAR(rec.best_gap, oracle::brute_force_defect_qubit(a, 2).value, 1e-6) << "seed " << s;
    }
}

TEST(Factor2Trial, RejectsSmallDimensions) {
    EXPECT_THROW(factor2_trial(1, 3, RngSeed{0}, {}), PreconditionError);
}

TEST(Factor2Campaign, SingleTrialEchoesRecord) {
    const OptimizerConfig cfg = seeded(4);
    const CampaignReport rep = factor2_campaign(2, 3, 1, RngSeed{9}, cfg);
    ASSERT_EQ(rep.trials.size(), 1u);
    const TrialRecord& t = rep.trials.front();
    OptimizerConfig trial_cfg = cfg;
    trial_cfg.seed = derive_seed(derive_seed(RngSeed{9}, 0), 4);
    const TrialRecord direct = factor2_trial(2, 3, derive_seed(RngSeed{9}, 0), trial_cfg);
    EXPECT_EQ(t.delta, direct.delta);
    EXPECT_EQ(t.best_gap, direct.best_gap);
    EXPECT_EQ(rep.n_success, t.success ? 1 : 0);
    EXPECT_EQ(rep.min_ratio, t.ratio);
    EXPECT_EQ(rep.median_ratio, t.ratio);
    EXPECT_EQ(rep.max_ratio, t.ratio);
}

TEST(Factor2Campaign, DeterministicAcrossRunsAndWorkers) {
    const CampaignReport a = factor2_campaign(2, 3, 6, RngSeed{5}, seeded(1), 1);
    const CampaignReport b = factor2_campaign(2, 3, 6, RngSeed{5}, seeded(1), 3);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(trial_csv_row(a.trials[i]), trial_csv_row(b.trials[i]));
    EXPECT_LE(a.n_success, a.n_trials);
    EXPECT_LE(a.min_ratio, a.median_ratio);
    EXPECT_LE(a.median_ratio, a.max_ratio);
}

TEST(Factor2Campaign, MedianOfEvenAndOdd) {
    EXPECT_EQ(median_of({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median_of({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_EQ(median_of({}), 0.0);
}

TEST(BoundChecks, EmbeddedOperatorPassesWithTolerancesAsMargins) {
    const BipartiteOperator a = embed_left(ginibre(2, 2, RngSeed{3}), 3);
    auto engine = make_engine(RngSeed{4});
    const BoundInstance b = check_bounds(a, DensityMatrix::wishart(3, engine), seeded(5), RngSeed{6});
    EXPECT_NEAR(b.chain_margin(), kChainTol, 1e-10);
    EXPECT_NEAR(b.defect_margin(), kDefectTol, 1e-8);
    EXPECT_NEAR(b.triangle_margin(), kTriangleTol, 1e-10);
    EXPECT_GE(b.chain_margin(), 0.0);
    EXPECT_GE(b.defect_margin(), 0.0);
    EXPECT_GE(b.triangle_margin(), 0.0);
}

TEST(BoundSuite, SmallRunPassesAllChecks) {
    const BoundSuiteReport rep = bound_suite({{2, 2}, {2, 3}}, 10, RngSeed{8}, seeded(0));
    ASSERT_EQ(rep.dims.size(), 2u);
    EXPECT_TRUE(rep.chain_all_pass());
    for (const auto& d : rep.dims) {
        EXPECT_EQ(d.chain_pass, d.n);
        EXPECT_EQ(d.defect_pass, d.n);
        EXPECT_EQ(d.triangle_pass, d.n);
    }
    EXPECT_THROW(bound_suite({{8, 9}}, 1, RngSeed{0}, {}), PreconditionError);
}
