#include <gtest/gtest.h>

#include "locobs/quasilocal.hpp"
#include "oracles.hpp"

using namespace locobs;

namespace {

Matrix random_full(const LatticeSystem& sys, std::uint64_t seed) {
    return ginibre(sys.total_dim(), sys.total_dim(), RngSeed{seed});
}

LatticeSystem random_states(const std::vector<Index>& dims, std::uint64_t seed) {
    auto engine = make_engine(RngSeed{seed});
    std::vector<DensityMatrix> states;
    for (Index d : dims) states.push_back(DensityMatrix::wishart(d, engine));
    return LatticeSystem(dims, std::move(states));
}

std::vector<Region> all_regions(std::size_t n) {
    std::vector<Region> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t x = 0; x < n; ++x)
            if (mask & (std::size_t{1} << x)) s.push_back(x);
        out.emplace_back(std::move(s));
    }
    return out;
}

bool subset(const Region& a, const Region& b) {
    return std::includes(b.sites().begin(), b.sites().end(), a.sites().begin(), a.sites().end());
}

} // namespace

TEST(Region, BallIsClippedToTheChain) {
    EXPECT_EQ(Region::ball(2, 1, 6).sites(), (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_EQ(Region::ball(0, 2, 6).sites(), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(Region::ball(5, 9, 6).sites(), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(Region({3, 1}).sites(), (std::vector<std::size_t>{1, 3}));
    EXPECT_THROW(Region({1, 1}), DimensionError);
    EXPECT_THROW(Region::ball(6, 0, 6), DimensionError);
}

TEST(EmbedRegion, Examples) {
    const auto sys = LatticeSystem::maximally_mixed({2, 3, 2});
    const Matrix a = ginibre(12, 12, RngSeed{1});
    EXPECT_EQ(embed_region(a, Region::all(3), sys), a);
    EXPECT_EQ(embed_region(Matrix::Identity(3, 3), Region({1}), sys), Matrix(Matrix::Identity(12, 12)));
    const auto qubits = LatticeSystem::maximally_mixed({2, 2, 2});
    const Matrix id = Matrix::Identity(2, 2);
    EXPECT_EQ(embed_region(oracle::pauli_z(), Region({1}), qubits),
              oracle::kron(oracle::kron(id, oracle::pauli_z()), id));
}

TEST(EmbedRegion, NonContiguousRegionMatchesKronecker) {
    const auto sys = LatticeSystem::maximally_mixed({2, 3, 2});
    const Matrix x = ginibre(2, 2, RngSeed{2}), z = ginibre(2, 2, RngSeed{3});
    const Matrix expected = oracle::kron(oracle::kron(x, Matrix::Identity(3, 3)), z);
    EXPECT_LE(max_abs(embed_region(oracle::kron(x, z), Region({0, 2}), sys) - expected), 1e-15);
    EXPECT_THROW(embed_region(Matrix::Identity(3, 3), Region({0, 2}), sys), DimensionError);
}

TEST(ERegion, AllSitesIsIdentityMap) {
    const auto sys = random_states({2, 3}, 4);
    const Matrix a = random_full(sys, 5);
    EXPECT_LE(max_abs(e_region(a, Region::all(2), sys) - a), 1e-15);
}

TEST(ERegion, MaximallyMixedSingleSiteIsNormalizedPartialTrace) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2});
    const Matrix a = random_full(sys, 6);
    const Matrix expected = oracle::kron(oracle::partial_trace_2(a, 2, 2) / 2.0, Matrix::Identity(2, 2));
    EXPECT_LE(max_abs(e_region(a, Region({0}), sys) - expected), 1e-14);
}

TEST(ERegion, MatchesSitewiseContraction) {
    const auto sys = random_states({2, 3, 2}, 7);
    const Matrix a = random_full(sys, 8);
    for (const Region& r : all_regions(3))
        EXPECT_LE(max_abs(e_region(a, r, sys) - oracle::sitewise_e_region(a, r.sites(), sys)), 1e-12);
}

TEST(ERegion, CompatibilityOnThreeSites) {
    const auto sys = random_states({2, 3, 2}, 9);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Matrix a = random_full(sys, 10 + s);
        const Matrix nested = e_region(e_region(a, Region({0, 1}), sys), Region({0}), sys);
        EXPECT_LE(op_norm(nested - e_region(a, Region({0}), sys)), 1e-12);
    }
}

TEST(ERegion, CompatibilityOverAllNestedPairs) {
    const auto sys = random_states({2, 3, 2, 2}, 11);
    const auto regions = all_regions(4);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const Matrix a = random_full(sys, 20 + s);
        for (const Region& big : regions)
            for (const Region& small : regions) {
                if (!subset(small, big)) continue;
                const Matrix lhs = e_region(e_region(a, big, sys), small, sys);
                EXPECT_LE(op_norm(lhs - e_region(a, small, sys)), 1e-12);
            }
    }
}

TEST(ERegion, ContractionFixingBimodule) {
    const auto sys = random_states({2, 3, 2}, 12);
    for (std::uint64_t s = 0; s < 5; ++s)
        for (const Region& r : all_regions(3)) {
            const Matrix a = random_full(sys, 30 + s);
            EXPECT_LE(op_norm(e_region(a, r, sys)), op_norm(a) + 1e-12);
            const Index dr = region_dim(r, sys);
            const Matrix x = embed_region(ginibre(dr, dr, RngSeed{40 + s}), r, sys);
            EXPECT_LE(max_abs(e_region(x, r, sys) - x), 1e-12);
            const Matrix c = embed_region(ginibre(dr, dr, RngSeed{50 + s}), r, sys);
            const Matrix d = embed_region(ginibre(dr, dr, RngSeed{60 + s}), r, sys);
            const Matrix rhs = c * e_region(a, r, sys) * d;
            EXPECT_LE(max_abs(e_region(c * a * d, r, sys) - rhs), 1e-12 * std::max(1.0, max_abs(rhs)));
        }
}

TEST(ToBipartite, RegionFirstComplementSecond) {
    const auto sys = random_states({2, 3, 2}, 13);
    const Matrix x = ginibre(3, 3, RngSeed{14}), y = ginibre(2, 2, RngSeed{15}), z = ginibre(2, 2, RngSeed{16});
    const Matrix a = oracle::kron(oracle::kron(y, x), z);
    const BipartiteOperator b = to_bipartite(a, Region({1}), sys);
    EXPECT_EQ(b.d1(), 3);
    EXPECT_EQ(b.d2(), 4);
    EXPECT_LE(max_abs(b.matrix() - oracle::kron(x, oracle::kron(y, z))), 1e-14);
}

TEST(Evolve, ZeroTimeAndConservedHamiltonian) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2, 2, 2});
    const auto h = ChainHamiltonian::heisenberg(sys);
    const Matrix a = random_full(sys, 16);
    EXPECT_LE(max_abs(evolve(a, h, 0.0, sys) - a), 1e-12);
    const Matrix hd = h.dense(sys);
    EXPECT_LE(max_abs(evolve(hd, h, 1.3, sys) - hd), 1e-12);
}

TEST(Evolve, PreservesNorm) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2, 2, 2});
    const auto h = ChainHamiltonian::heisenberg(sys);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Matrix a = random_full(sys, 17 + s);
        EXPECT_NEAR(op_norm(evolve(a, h, 0.7, sys)), op_norm(a), 1e-9);
    }
}

TEST(Heisenberg, BondMatchesDefinition) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2});
    const Matrix x = oracle::pauli_x(), y = oracle::pauli_y(), z = oracle::pauli_z();
    const Matrix expected = (oracle::kron(x, x) + oracle::kron(y, y) + oracle::kron(z, z)) / 4.0;
    EXPECT_LE(max_abs(ChainHamiltonian::heisenberg(sys).dense(sys) - expected), 1e-15);
    EXPECT_THROW(ChainHamiltonian::heisenberg(LatticeSystem::maximally_mixed({2, 3})), DimensionError);
}

TEST(LocalizationCurve, StrictlyLocalObservable) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2, 2, 2, 2});
    const Matrix a = embed_region(ginibre(8, 8, RngSeed{18}), Region::ball(2, 1, 5), sys);
    const auto curve = localization_curve(a, 2, sys, {0, 1, 2, 3});
    ASSERT_EQ(curve.size(), 4u);
    EXPECT_GT(curve[0].error, 1e-3);
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LE(curve[k].error, 1e-12);
}

TEST(LocalizationCurve, HeisenbergChainMatchesSitewiseOracle) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2, 2, 2, 2, 2});
    const Region site({2});
    const Matrix a = evolve(embed_region(oracle::pauli_z(), site, sys), ChainHamiltonian::heisenberg(sys), 0.5, sys);
    const std::vector<std::size_t> radii{0, 1, 2, 3, 4, 5};
    const auto curve = localization_curve(a, 2, sys, radii);
    for (const auto& p : curve) {
        const auto ball = Region::ball(2, p.radius, 6);
        const double oracle_err = oracle::spectral_norm(oracle::sitewise_e_region(a, ball.sites(), sys) - a);
        EXPECT_NEAR(p.error, oracle_err, 1e-12) << "radius " << p.radius;
    }
    EXPECT_LE(curve.back().error, 1e-12);
}

TEST(LocalizationCurve, MaximallyMixedSiteEqualsWeylTwirl) {
    const auto sys = LatticeSystem::maximally_mixed({2, 3, 2});
    const Matrix a = random_full(sys, 19);
    EXPECT_LE(max_abs(e_region(a, Region({0, 2}), sys) - oracle::weyl_twirl_site(a, sys.dims(), 1)), 1e-12);
}

TEST(LatticeSystem, DimensionGuard) {
    const std::vector<Index> thirteen(13, 2);
    try {
        (void)LatticeSystem::maximally_mixed(thirteen);
        FAIL() << "expected DimensionGuardError";
    } catch (const DimensionGuardError& e) {
        EXPECT_NE(std::string(e.what()).find("4096"), std::string::npos);
    }
    EXPECT_NO_THROW(LatticeSystem::maximally_mixed(std::vector<Index>(12, 2)));
    EXPECT_THROW(LatticeSystem({2}, {DensityMatrix::maximally_mixed(3)}), DimensionError);
}

TEST(LatticeSystem, RejectsMismatchedOperators) {
    const auto sys = LatticeSystem::maximally_mixed({2, 2});
    EXPECT_THROW(e_region(Matrix::Identity(3, 3), Region({0}), sys), DimensionError);
    EXPECT_THROW(e_region(Matrix::Identity(4, 4), Region({2}), sys), DimensionError);
}
