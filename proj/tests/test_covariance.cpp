#include <gtest/gtest.h>

#include <random>

#include "mimostap/covariance.hpp"
#include "oracles.hpp"

using namespace mimostap;

namespace {

double rel(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

WaveformFactor factor(const Scenario& sc, std::size_t rank, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return WaveformFactor::random(rank, sc.code_size(), sc.chip_power(), rng);
}

}  // namespace

TEST(Shift, MatchesDefinition) {
    for (int p : {-3, -1, 0, 2, 5}) {
        ShiftMatrix J{5, p};
        EXPECT_EQ(J.dense(), oracle::shift(5, p)) << "p=" << p;
        std::mt19937_64 rng(p + 10);
        const CVector x = oracle::random_vector(5, rng);
        EXPECT_LT((J.apply(x) - oracle::shift(5, p) * x).norm(), 1e-15);
        EXPECT_LT((J.apply_transpose(x) - oracle::shift(5, p).transpose() * x).norm(), 1e-15);
    }
    // J_p = J_{-p}^T
    EXPECT_EQ(ShiftMatrix({4, 2}).dense(), ShiftMatrix({4, -2}).dense().transpose());
}

TEST(Commutation, TransposesVectorizedMatrices) {
    std::mt19937_64 rng(1);
    for (auto [r, c] : {std::pair{1, 1}, {2, 3}, {4, 13}, {16, 4}}) {
        const CommutationPermutation K(r, c);
        const CVector v = oracle::random_vector(r * c, rng);
        const Eigen::Map<const CMatrix> M(v.data(), r, c);
        const CMatrix Mt = M.transpose();
        EXPECT_EQ(K.apply(v), Eigen::Map<const CVector>(Mt.data(), Mt.size()));
        EXPECT_EQ(K.apply_transpose(K.apply(v)), v);
        const CMatrix D = K.dense();
        EXPECT_EQ(D * v, K.apply(v));
        EXPECT_TRUE((D.transpose() * D).isIdentity());
    }
}

TEST(Operators, TargetMatchesDenseKronecker) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    const CMatrix Vt = oracle::target_operator(sc);
    std::mt19937_64 rng(2);
    const CVector s = oracle::random_vector(sc.code_size(), rng);
    const CVector w = oracle::random_vector(sc.snapshot_size(), rng);
    EXPECT_LT((model.apply_vt(s) - Vt * s).norm(), 1e-12 * (Vt * s).norm());
    EXPECT_LT((model.apply_vt_adjoint(w) - Vt.adjoint() * w).norm(), 1e-12 * w.norm() * 10);
    EXPECT_LT((apply_vt(sc, s) - Vt * s).norm(), 1e-12 * (Vt * s).norm());
}

TEST(Operators, ClutterMatchesDenseKronecker) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc, CovariancePath::Direct);
    std::mt19937_64 rng(3);
    const CVector s = oracle::random_vector(sc.code_size(), rng);
    const CVector w = oracle::random_vector(sc.snapshot_size(), rng);
    const auto& patches = model.patches();
    for (std::size_t i = 0; i < patches.size(); i += 7) {
        const CMatrix V = oracle::clutter_operator(sc, patches[i].ring, patches[i].theta);
        EXPECT_LT((model.apply_vc(i, s) - V * s).norm(), 1e-12 * (1.0 + (V * s).norm()));
        EXPECT_LT((model.apply_vc_adjoint(i, w) - V.adjoint() * w).norm(),
                  1e-12 * (1.0 + (V.adjoint() * w).norm()));
        EXPECT_LT((apply_vc(sc, patches[i], s) - V * s).norm(), 1e-12 * (1.0 + (V * s).norm()));
        EXPECT_LT((apply_vc_adjoint(sc, patches[i], w) - V.adjoint() * w).norm(),
                  1e-12 * (1.0 + (V.adjoint() * w).norm()));
    }
}

TEST(Operators, AdjointIdentity) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
        const CVector s = oracle::random_vector(sc.code_size(), rng);
        const CVector w = oracle::random_vector(sc.snapshot_size(), rng);
        const std::size_t k = rng() % model.patches().size();
        EXPECT_NEAR(std::abs(w.dot(model.apply_vc(k, s)) - model.apply_vc_adjoint(k, w).dot(s)), 0.0,
                    1e-12 * s.norm() * w.norm());
        EXPECT_NEAR(std::abs(w.dot(model.apply_vt(s)) - model.apply_vt_adjoint(w).dot(s)), 0.0,
                    1e-12 * s.norm() * w.norm());
    }
}

TEST(Covariance, JammerNoiseLayout) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    const CMatrix R = oracle::jammer_noise(sc);
    EXPECT_LT(rel(model.jammer_noise_cov(), R), 1e-13);
    std::mt19937_64 rng(5);
    const CVector w = oracle::random_vector(sc.snapshot_size(), rng);
    const double q = w.dot(R * w).real();
    EXPECT_NEAR(model.jammer_noise_quadratic(w), q, 1e-12 * q);
    EXPECT_NEAR(model.beta(w), q / sc.total_energy, 1e-12 * q);
}

class CovarianceAssembly : public ::testing::TestWithParam<CovariancePath> {};

TEST_P(CovarianceAssembly, RuOfUMatchesOracle) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc, GetParam());
    for (std::size_t rank : {1u, 3u}) {
        const WaveformFactor u = factor(sc, rank, 10 + rank);
        const CMatrix expect = oracle::ru_of_u(sc, u.entries());
        EXPECT_LT(rel(model.ru_of_u(u), expect), 1e-12);
    }
}

TEST_P(CovarianceAssembly, RuOfWMatchesOracle) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc, GetParam());
    std::mt19937_64 rng(6);
    const FilterVector w{oracle::random_vector(sc.snapshot_size(), rng)};
    EXPECT_LT(rel(model.ru_of_w(w), oracle::ru_of_w(sc, w.entries)), 1e-12);
}

TEST_P(CovarianceAssembly, RuOfSIsRankOneFactor) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc, GetParam());
    std::mt19937_64 rng(7);
    const CVector s = oracle::random_vector(sc.code_size(), rng);
    const CMatrix U = s.adjoint();
    EXPECT_LT(rel(model.ru_of_s(s), oracle::ru_of_u(sc, U)), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Paths, CovarianceAssembly,
                         ::testing::Values(CovariancePath::Direct, CovariancePath::Fast));

TEST(Covariance, FastAndDirectAgreeWithRingPowers) {
    Scenario sc = oracle::small_scenario();
    sc.clutter.patch_power.resize(3 * 16);
    for (std::size_t i = 0; i < sc.clutter.patch_power.size(); ++i)
        sc.clutter.patch_power[i] = 0.5 + 0.1 * static_cast<double>(i % 7);
    const CovarianceModel model(sc, CovariancePath::Fast);
    const WaveformFactor u = factor(sc, 2, 8);
    EXPECT_LT(rel(model.ru_of_u_fast(u), model.ru_of_u_direct(u)), 1e-12);
    std::mt19937_64 rng(9);
    const FilterVector w{oracle::random_vector(sc.snapshot_size(), rng)};
    EXPECT_LT(rel(model.ru_of_w_fast(w), model.ru_of_w_direct(w)), 1e-12);
}

TEST(Covariance, FastPathWithoutCachedTables) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel direct(sc, CovariancePath::Direct);
    ASSERT_FALSE(direct.uses_fast_path());
    const WaveformFactor u = factor(sc, 2, 12);
    EXPECT_LT(rel(direct.ru_of_u_fast(u), direct.ru_of_u_direct(u)), 1e-12);
    const auto tables = precompute_spectral_tables(sc);
    EXPECT_LT(rel(direct.ru_of_u_fast(tables, u), direct.ru_of_u_direct(u)), 1e-12);
}

TEST(Covariance, AppendixAIdentity) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
        const WaveformFactor u = factor(sc, 1 + t % 4, 100 + t);
        const FilterVector w{oracle::random_vector(sc.snapshot_size(), rng)};
        const double lhs = w.entries.dot(model.ru_of_u(u) * w.entries).real();
        const double rhs = (u.entries() * model.ru_of_w(w) * u.entries().adjoint()).trace().real();
        EXPECT_NEAR(lhs, rhs, 1e-10 * lhs);
    }
}

TEST(Covariance, AssembledMatricesAreHermitianPositiveDefinite) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    const CMatrix R = model.ru_of_u(factor(sc, 3, 14));
    EXPECT_LT((R - R.adjoint()).norm(), 1e-14 * R.norm());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(R);
    EXPECT_GE(es.eigenvalues().minCoeff(), sc.noise_power * (1.0 - 1e-10));
}

TEST(Covariance, ClutterTermIsAdditiveOverFactorRows) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    const WaveformFactor u = factor(sc, 3, 15);
    const CMatrix Rjn = model.jammer_noise_cov();
    CMatrix sum = Rjn;
    for (Eigen::Index i = 0; i < 3; ++i)
        sum += model.ru_of_s(u.entries().row(i).adjoint()) - Rjn;
    EXPECT_LT(rel(model.ru_of_u(u), sum), 1e-12);
}

TEST(Tables, MatchKroneckerDefinitions) {
    const Scenario sc = oracle::small_scenario();
    const auto t = precompute_spectral_tables(sc);
    ASSERT_EQ(t.tilde.size(), 3u);
    ASSERT_EQ(t.breve.size(), 3u);
    const auto grid = sc.clutter.azimuth_grid();
    for (int p = -1; p <= 1; ++p) {
        const std::size_t n = sc.pulses.m_pulses * sc.geometry.n_tx * sc.geometry.n_rx;
        CMatrix tilde = CMatrix::Zero(n, n), breve = CMatrix::Zero(n, n);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const CMatrix d = oracle::doppler(sc.pulses.m_pulses, oracle::clutter_omega(sc, grid[k]));
            const CMatrix at = oracle::ula(sc.geometry.n_tx, sc.geometry.d_tx, grid[k]);
            const CMatrix ar = oracle::ula(sc.geometry.n_rx, sc.geometry.d_rx, grid[k]);
            const CMatrix vt = oracle::kron(oracle::kron(d, at), ar);
            const CMatrix vb = oracle::kron(oracle::kron(d, ar), at);
            const double pw = sc.clutter.power(p, k);
            tilde += pw * vt * vt.adjoint();
            breve += pw * vb.conjugate() * vb.transpose();
        }
        EXPECT_LT(rel(t.tilde[static_cast<std::size_t>(p + 1)], tilde), 1e-13);
        EXPECT_LT(rel(t.breve[static_cast<std::size_t>(p + 1)], breve), 1e-13);
    }
}

TEST(Covariance, TargetQuadraticFactors) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    const WaveformFactor u = factor(sc, 2, 16);
    const CMatrix Vt = oracle::target_operator(sc);
    const CMatrix Q = Vt * u.entries().adjoint() * u.entries() * Vt.adjoint();
    EXPECT_LT(rel(model.qt_of_u(u), Q), 1e-12);
    const CMatrix F = model.qt_factor_of_u(u);
    EXPECT_LT(rel(F * F.adjoint(), Q), 1e-12);
    std::mt19937_64 rng(17);
    const FilterVector w{oracle::random_vector(sc.snapshot_size(), rng)};
    EXPECT_LT((model.qt_factor_of_w(w) - Vt.adjoint() * w.entries).norm(),
              1e-12 * (Vt.adjoint() * w.entries).norm());
}

TEST(Covariance, FastPathHeuristic) {
    EXPECT_TRUE(prefer_fast_covariance(Scenario::reference()));
    Scenario sc;
    sc.clutter.patches_per_ring = 1;
    EXPECT_FALSE(prefer_fast_covariance(sc));
    EXPECT_TRUE(CovarianceModel(Scenario::reference()).uses_fast_path());
    EXPECT_FALSE(CovarianceModel(sc).uses_fast_path());
    EXPECT_TRUE(CovarianceModel(sc, CovariancePath::Fast).uses_fast_path());
}

TEST(Factor, RandomIsFeasibleAndFromWaveformIsRankOne) {
    std::mt19937_64 rng(18);
    const auto u = WaveformFactor::random(6, 52, 1.0 / 52.0, rng);
    EXPECT_EQ(u.rank(), 6u);
    EXPECT_EQ(u.code_size(), 52u);
    EXPECT_LT(u.feasibility_error(), 1e-15);
    const CVector s = oracle::random_vector(8, rng);
    const auto f = WaveformFactor::from_waveform(s);
    EXPECT_EQ(f.rank(), 1u);
    EXPECT_LT((f.entries().adjoint() * f.entries() - s * s.adjoint()).norm(), 1e-14 * s.squaredNorm());
}

TEST(Factor, NormalizeRestoresConstraint) {
    std::mt19937_64 rng(19);
    auto u = WaveformFactor::random(3, 10, 0.1, rng);
    u.entries() *= 2.0;
    EXPECT_GT(u.feasibility_error(), 0.1);
    u.normalize_columns();
    EXPECT_LT(u.feasibility_error(), 1e-15);
}

TEST(Covariance, RejectsMismatchedInputs) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(20);
    const auto wrong = WaveformFactor::random(2, sc.code_size() + 1, 0.1, rng);
    EXPECT_THROW(model.ru_of_u(wrong), std::invalid_argument);
    EXPECT_THROW(model.apply_vt(CVector::Zero(3)), std::invalid_argument);
    EXPECT_THROW(model.ru_of_w(FilterVector{CVector::Zero(3)}), std::invalid_argument);
}
