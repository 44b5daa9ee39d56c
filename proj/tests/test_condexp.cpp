#include <gtest/gtest.h>

#include "locobs/condexp.hpp"
#include "oracles.hpp"

using namespace locobs;

namespace {

BipartiteOperator random_op(Index d1, Index d2, std::uint64_t seed) {
    return BipartiteOperator(ginibre(d1 * d2, d1 * d2, RngSeed{seed}), d1, d2);
}

DensityMatrix random_state(Index d, std::uint64_t seed) {
    auto engine = make_engine(RngSeed{seed});
    return DensityMatrix::wishart(d, engine);
}

Matrix transpose_map(const Matrix& x) { return x.transpose(); }

} // namespace

TEST(ETr, EmbeddedOperatorIsFixed) {
    const Matrix ap = ginibre(3, 3, RngSeed{1});
    EXPECT_LE(max_abs(e_tr(embed_left(ap, 4)) - ap), 1e-12);
}

TEST(ETr, SwapGivesHalfIdentity) {
    const BipartiteOperator sw(oracle::swap(2), 2, 2);
    const Matrix expected = oracle::partial_trace_2(oracle::swap(2), 2, 2) / 2.0;
    EXPECT_LE(max_abs(expected - Matrix::Identity(2, 2) / 2.0), 0.0);
    EXPECT_LE(max_abs(e_tr(sw) - expected), 1e-15);
}

TEST(ETr, IdentityGoesToIdentity) {
    EXPECT_LE(max_abs(e_tr(BipartiteOperator(Matrix::Identity(6, 6), 2, 3)) - Matrix::Identity(2, 2)), 1e-15);
}

TEST(ERho, ProductRule) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Matrix x = ginibre(3, 3, RngSeed{10 + s}), y = ginibre(2, 2, RngSeed{20 + s});
        const DensityMatrix rho = random_state(2, 30 + s);
        const Matrix expected = (rho.matrix() * y).trace() * x;
        EXPECT_LE(max_abs(e_rho(BipartiteOperator(kron(x, y), 3, 2), rho) - expected), 1e-12);
    }
}

TEST(ERho, MaximallyMixedIsTracial) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const BipartiteOperator a = random_op(3, 4, 40 + s);
        EXPECT_LE(max_abs(e_rho(a, DensityMatrix::maximally_mixed(4)) - e_tr(a)), 1e-12);
    }
}

TEST(ERho, PureStateMatchesVectorContraction) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const BipartiteOperator a = random_op(2, 3, 50 + s);
        Vector psi = ginibre(3, 1, RngSeed{60 + s}).col(0);
        psi.normalize();
        const DensityMatrix rho = DensityMatrix::pure(psi);
        EXPECT_LE(max_abs(e_rho(a, rho) - oracle::slice_with_vector(a.matrix(), 2, 3, psi)), 1e-12);
    }
}

TEST(ERho, RejectsWrongStateDimension) {
    EXPECT_THROW(e_rho(random_op(2, 3, 1), DensityMatrix::maximally_mixed(2)), DimensionError);
}

TEST(ConditionalExpectation, UnitalityBimoduleContractivity) {
    const std::pair<Index, Index> dims[] = {{2, 2}, {3, 3}, {2, 5}};
    std::uint64_t seed = 100;
    for (const auto& [d1, d2] : dims)
        for (int k = 0; k < 10; ++k, seed += 5) {
            const BipartiteOperator a = random_op(d1, d2, seed);
            const Matrix ap = ginibre(d1, d1, RngSeed{seed + 1});
            const Matrix c = ginibre(d1, d1, RngSeed{seed + 2}), d = ginibre(d1, d1, RngSeed{seed + 3});
            const DensityMatrix rho = random_state(d2, seed + 4);
            const BipartiteOperator cad(embed_left(c, d2).matrix() * a.matrix() * embed_left(d, d2).matrix(), d1, d2);
            for (int which = 0; which < 2; ++which) {
                auto e = [&](const BipartiteOperator& x) { return which == 0 ? e_tr(x) : e_rho(x, rho); };
                const double scale = std::max(1.0, max_abs(ap));
                EXPECT_LE(max_abs(e(embed_left(ap, d2)) - ap), 1e-12 * scale);
                const Matrix lhs = e(cad), rhs = c * e(a) * d;
                EXPECT_LE(max_abs(lhs - rhs), 1e-12 * std::max(1.0, max_abs(rhs)));
                EXPECT_LE(op_norm(e(a)), op_norm(a.matrix()) * (1.0 + 1e-12));
            }
        }
}

TEST(McTwirl, EmbeddedOperatorIsFixed) {
    const BipartiteOperator a = embed_left(ginibre(2, 2, RngSeed{3}), 3);
    for (Index n : {1, 7, 40}) {
        const TwirlEstimate t = mc_twirl(a, n, RngSeed{static_cast<std::uint64_t>(n)});
        EXPECT_LE(max_abs(t.average.matrix() - a.matrix()), 1e-12);
        EXPECT_LE(t.max_commutator_norm, 1e-12);
    }
}

TEST(McTwirl, SwapConvergesToTracialExpectation) {
    const BipartiteOperator sw(oracle::swap(2), 2, 2);
    const TwirlEstimate t = mc_twirl(sw, 10000, RngSeed{2});
    const Matrix limit = oracle::kron(Matrix::Identity(2, 2) / 2.0, Matrix::Identity(2, 2));
    EXPECT_LE(op_norm(t.average.matrix() - limit), 0.1);
}

TEST(McTwirl, TriangleBound) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const BipartiteOperator a = random_op(3, 3, 300 + s);
        const TwirlEstimate t = mc_twirl(a, 50, RngSeed{400 + s});
        EXPECT_LE(op_norm(a.matrix() - t.average.matrix()), t.max_commutator_norm + 1e-10);
    }
}

TEST(McTwirl, RejectsZeroSamples) { EXPECT_THROW(mc_twirl(random_op(2, 2, 1), 0, RngSeed{0}), PreconditionError); }

TEST(ProjectedTwirl, FullRankIsTracial) {
    const BipartiteOperator a = random_op(2, 4, 7);
    const ProjectedSubgroup full(Matrix::Identity(4, 4));
    EXPECT_EQ(full.rank(), 4);
    EXPECT_LE(max_abs(exact_projected_twirl(a, full).matrix() - embed_left(e_tr(a), 4).matrix()), 1e-12);
}

TEST(ProjectedTwirl, ZeroRankIsIdentityMap) {
    const BipartiteOperator a = random_op(2, 4, 8);
    const ProjectedSubgroup none(Matrix::Zero(4, 4));
    EXPECT_EQ(none.rank(), 0);
    EXPECT_EQ(exact_projected_twirl(a, none).matrix(), a.matrix());
}

TEST(ProjectedTwirl, MatchesMonteCarloSubgroupAverage) {
    const BipartiteOperator a = random_op(2, 4, 9);
    const ProjectedSubgroup sub = ProjectedSubgroup::from_frame(haar_unitary(4, RngSeed{10}), 2);
    auto engine = make_engine(RngSeed{11});
    Matrix sum = Matrix::Zero(8, 8);
    constexpr int n = 100000;
    for (int s = 0; s < n; ++s) {
        const Matrix u = sub.sample(engine);
        const Matrix lifted = oracle::kron(Matrix::Identity(2, 2), u);
        sum += lifted.adjoint() * a.matrix() * lifted;
    }
    EXPECT_LE(op_norm(sum / n - exact_projected_twirl(a, sub).matrix()), 0.05);
}

TEST(ProjectedTwirl, SubgroupSamplesAreUnitaryAndFixKernel) {
    const ProjectedSubgroup sub = ProjectedSubgroup::from_frame(haar_unitary(5, RngSeed{12}), 3);
    auto engine = make_engine(RngSeed{13});
    const Matrix q = Matrix::Identity(5, 5) - sub.projector();
    for (int s = 0; s < 20; ++s) {
        const Matrix u = sub.sample(engine);
        EXPECT_TRUE(is_unitary(u, 1e-12));
        EXPECT_LE(max_abs(u * q - q), 1e-12);
        EXPECT_LE(max_abs(u * sub.projector() - sub.projector() * u), 1e-12);
    }
}

TEST(ProjectedTwirl, NestedSubgroupCommutation) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Matrix frame = haar_unitary(4, RngSeed{500 + s});
        const Index rp = 1 + static_cast<Index>(s % 4);
        const Index rq = static_cast<Index>(s % static_cast<std::uint64_t>(rp + 1));
        const ProjectedSubgroup p = ProjectedSubgroup::from_frame(frame, rp);
        const ProjectedSubgroup q = ProjectedSubgroup::from_frame(frame, rq);
        const BipartiteOperator a = random_op(2, 4, 600 + s);
        const Matrix ep = exact_projected_twirl(a, p).matrix();
        auto engine = make_engine(RngSeed{700 + s});
        const Matrix lifted = oracle::kron(Matrix::Identity(2, 2), q.sample(engine));
        EXPECT_LE(op_norm(lifted * ep - ep * lifted), 1e-10);
    }
}

TEST(ProjectedTwirl, IsAConditionalExpectationOntoFixedPoints) {
    const ProjectedSubgroup sub = ProjectedSubgroup::from_frame(haar_unitary(3, RngSeed{14}), 2);
    const BipartiteOperator a = random_op(2, 3, 15);
    const BipartiteOperator once = exact_projected_twirl(a, sub);
    EXPECT_LE(max_abs(exact_projected_twirl(once, sub).matrix() - once.matrix()), 1e-12);
    EXPECT_LE(op_norm(once.matrix()), op_norm(a.matrix()) + 1e-12);
}

TEST(ProjectedTwirl, RejectsBadInputs) {
    Matrix notproj = Matrix::Identity(3, 3);
    notproj(0, 0) = 0.5;
    EXPECT_THROW(ProjectedSubgroup{notproj}, PreconditionError);
    EXPECT_THROW(ProjectedSubgroup(Matrix::Zero(2, 3)), DimensionError);
    EXPECT_THROW(exact_projected_twirl(random_op(2, 4, 1), ProjectedSubgroup(Matrix::Identity(3, 3))), DimensionError);
}

TEST(Choi, IdentityMap) {
    const ChoiMatrix c = choi_of_map([](const Matrix& x) { return x; }, 2, 2);
    Vector omega = Vector::Zero(4);
    omega(0) = omega(3) = 1.0;
    EXPECT_LE(max_abs(c.matrix() - omega * omega.adjoint()), 0.0);
    EXPECT_GE(c.min_eigenvalue(), -1e-12);
    EXPECT_TRUE(is_cp(c, 1e-10));
}

TEST(Choi, TracialAndSliceExpectationsAreCompletelyPositive) {
    const ChoiMatrix ct = choi_of_map([](const Matrix& x) { return e_tr(BipartiteOperator(x, 2, 2)); }, 4, 2);
    EXPECT_EQ(ct.matrix().rows(), 8);
    EXPECT_GE(ct.min_eigenvalue(), -1e-10);
    EXPECT_TRUE(is_cp(ct, 1e-10));
    for (std::uint64_t s = 0; s < 5; ++s) {
        const DensityMatrix rho = random_state(3, 800 + s);
        const ChoiMatrix cr = choi_of_map([&](const Matrix& x) { return e_rho(BipartiteOperator(x, 2, 3), rho); }, 6, 2);
        EXPECT_TRUE(is_cp(cr, 1e-10));
    }
}

TEST(Choi, TransposeIsNotCompletelyPositive) {
    const ChoiMatrix c = choi_of_map(transpose_map, 2, 2);
    EXPECT_LE(c.min_eigenvalue(), -0.5);
    EXPECT_FALSE(is_cp(c, 1e-10));
}

TEST(Choi, RejectsWrongOutputShape) {
    EXPECT_THROW(choi_of_map([](const Matrix& x) { return x; }, 2, 3), DimensionError);
}
