#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mimostap/evaluation.hpp"
#include "mimostap/optimizer.hpp"
#include "mimostap/validation.hpp"
#include "oracles.hpp"

using namespace mimostap;

namespace {

CMatrix random_hermitian(std::size_t n, std::mt19937_64& rng, bool positive) {
    CMatrix A(n, n);
    for (Eigen::Index j = 0; j < A.cols(); ++j) A.col(j) = oracle::random_vector(n, rng);
    if (positive) {
        CMatrix R = A * A.adjoint();
        R.diagonal().array() += 0.5;
        return R;
    }
    return A + A.adjoint();
}

/// Largest eigenvalue of R^{-1} Q by a general (non-Hermitian) eigensolver.
double brute_force_top(const CMatrix& Q, const CMatrix& R) {
    const CMatrix M = R.inverse() * Q;
    Eigen::ComplexEigenSolver<CMatrix> es(M);
    double best = -1e300;
    for (auto v : es.eigenvalues()) best = std::max(best, v.real());
    return best;
}

Scenario noise_only() {
    Scenario sc;
    sc.clutter.ring_halfwidth = 0;
    sc.clutter.patches_per_ring = 1;
    sc.clutter.uniform_patch_power = 0.0;
    return sc;
}

}  // namespace

TEST(Rank, DefaultRankBound) {
    EXPECT_EQ(default_rank(52), 6u);  // floor(sqrt(53)) - 1
    EXPECT_EQ(default_rank(1), 1u);
    EXPECT_EQ(default_rank(3), 1u);
    EXPECT_EQ(default_rank(8), 2u);
    EXPECT_EQ(default_rank(512), 21u);
    OptimizerConfig cfg;
    EXPECT_EQ(cfg.resolved_rank(52), 6u);
    cfg.rank = 3;
    EXPECT_EQ(cfg.resolved_rank(52), 3u);
}

TEST(Config, Validation) {
    OptimizerConfig cfg;
    EXPECT_NO_THROW(cfg.validate(52));
    cfg.rank = 53;
    EXPECT_THROW(cfg.validate(52), std::invalid_argument);
    cfg = {};
    cfg.eps_outer = 0.0;
    EXPECT_THROW(cfg.validate(52), std::invalid_argument);
    cfg = {};
    cfg.max_mm = 0;
    EXPECT_THROW(cfg.validate(52), std::invalid_argument);
}

TEST(GeneralizedEigen, MatchesBruteForce) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 5; ++t) {
        const CMatrix Q = random_hermitian(7, rng, true);
        const CMatrix R = random_hermitian(7, rng, true);
        const auto ep = largest_generalized_eigpair(Q, R);
        EXPECT_NEAR(ep.value, brute_force_top(Q, R), 1e-9 * std::abs(ep.value));
        EXPECT_NEAR(ep.vector.norm(), 1.0, 1e-12);
        EXPECT_LT((Q * ep.vector - ep.value * R * ep.vector).norm(), 1e-9 * Q.norm());
    }
}

TEST(GeneralizedEigen, LowRankAgreesWithFull) {
    std::mt19937_64 rng(2);
    CMatrix F(9, 3);
    for (Eigen::Index j = 0; j < 3; ++j) F.col(j) = oracle::random_vector(9, rng);
    const CMatrix R = random_hermitian(9, rng, true);
    const auto full = largest_generalized_eigpair(F * F.adjoint(), R);
    const auto low = largest_generalized_eigpair_lowrank(F, R);
    EXPECT_NEAR(low.value, full.value, 1e-10 * full.value);
    EXPECT_NEAR(std::abs(low.vector.dot(full.vector)), 1.0, 1e-8);
}

TEST(GeneralizedEigen, RejectsIndefiniteDenominator) {
    std::mt19937_64 rng(3);
    const CMatrix Q = random_hermitian(4, rng, true);
    CMatrix R = -CMatrix::Identity(4, 4);
    EXPECT_THROW(largest_generalized_eigpair(Q, R), NumericalError);
    EXPECT_THROW(largest_generalized_eigpair(Q, CMatrix::Identity(3, 3)), std::invalid_argument);
}

TEST(FilterStep, RankOneIsWhitenedMatchedFilter) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(4);
    const CVector s = oracle::random_vector(sc.code_size(), rng).normalized() * std::sqrt(sc.total_energy);
    const auto w = filter_step(model, WaveformFactor::from_waveform(s));
    const CVector expect = model.ru_of_s(s).llt().solve(model.apply_vt(s)).normalized();
    EXPECT_NEAR(std::abs(w.entries.dot(expect)), 1.0, 1e-10);
}

TEST(FilterStep, NoRandomFilterBeatsIt) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(5);
    const auto u = WaveformFactor::random(3, sc.code_size(), sc.chip_power(), rng);
    const CMatrix Q = model.qt_of_u(u), R = model.ru_of_u(u);
    auto ratio = [&](const CVector& w) { return w.dot(Q * w).real() / w.dot(R * w).real(); };
    const double best = ratio(filter_step(model, u).entries);
    for (int t = 0; t < 50; ++t)
        EXPECT_LE(ratio(oracle::random_vector(sc.snapshot_size(), rng)), best * (1 + 1e-12));
}

TEST(Mm, MonotoneAndFeasible) {
    std::mt19937_64 rng(6);
    const CMatrix K = random_hermitian(12, rng, false);
    auto u0 = WaveformFactor::random(3, 12, 0.25, rng);
    const auto res = mm_quadratic_maximize(K, u0, 1e-10, 1000);
    ASSERT_GE(res.objectives.size(), 2u);
    for (std::size_t j = 1; j < res.objectives.size(); ++j)
        EXPECT_GE(res.objectives[j], res.objectives[j - 1] - 1e-12 * res.scale);
    EXPECT_LT(res.factor.feasibility_error(), 1e-14);
    const CMatrix& U = res.factor.entries();
    EXPECT_NEAR((U * K * U.adjoint()).trace().real(), res.objectives.back(), 1e-10 * res.scale);
}

TEST(Mm, FixedPointIsStationaryForEachColumn) {
    // At an MM fixed point every column is aligned with its surrogate gradient.
    std::mt19937_64 rng(7);
    const CMatrix K = random_hermitian(6, rng, false);
    const auto res = mm_quadratic_maximize(K, WaveformFactor::random(1, 6, 1.0, rng), 1e-14, 20000);
    const CMatrix& U = res.factor.entries();
    const CMatrix B = U * K;
    for (Eigen::Index l = 0; l < 6; ++l) {
        const cplx inner = std::conj(U(0, l)) * B(0, l);
        EXPECT_NEAR(std::arg(inner), 0.0, 1e-4);
    }
}

TEST(Dinkelbach, RatiosIncreaseAndBeatStart) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(8);
    const auto u0 = WaveformFactor::random(2, sc.code_size(), sc.chip_power(), rng);
    const auto w = filter_step(model, u0);
    OptimizerConfig cfg;
    const auto res = dinkelbach_u_step(model, w, u0, cfg);
    ASSERT_GE(res.ratios.size(), 2u);
    for (std::size_t k = 1; k < res.ratios.size(); ++k)
        EXPECT_GE(res.ratios[k], res.ratios[k - 1] * (1 - 1e-9));
    EXPECT_EQ(res.mm_objectives.size(), res.ratios.size() - 1);
    EXPECT_EQ(res.mm_scales.size(), res.mm_objectives.size());
    EXPECT_LT(res.max_feasibility_error, 1e-12);
    EXPECT_LT(res.max_entry_residual, 1e-9);
}

TEST(Cyclic, NoiseOnlyReachesClosedForm) {
    // M N_R N_T e_t / sigma^2 = 256
    const CovarianceModel model(noise_only());
    OptimizerConfig cfg;
    cfg.seed = 3;
    const auto out = cyclic_design(model, cfg);
    EXPECT_TRUE(out.converged);
    EXPECT_NEAR(out.relaxed_sinr_db(), 10.0 * std::log10(256.0), 1e-4);
}

TEST(Cyclic, TraceShapesAndMonotonicity) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    OptimizerConfig cfg;
    cfg.seed = 4;
    const auto out = cyclic_design(model, cfg);
    const auto& tr = out.trace;
    const std::size_t n = tr.wall_times.size();
    EXPECT_EQ(tr.outer_objectives.size(), n + 1);
    EXPECT_EQ(tr.dinkelbach_objectives.size(), n);
    EXPECT_EQ(tr.mm_objectives.size(), n);
    EXPECT_EQ(tr.mm_scales.size(), n);
    EXPECT_EQ(count_monotonicity_violations(tr), 0u);
    EXPECT_LT(tr.max_feasibility_error, 1e-12);
    EXPECT_NEAR(out.relaxed_sinr, tr.outer_objectives.back(), 0.0);
    // g^(0) is the ratio at the starting point.
    EXPECT_EQ(tr.outer_objectives.front(), tr.dinkelbach_objectives.front().front());
}

TEST(Cyclic, RelaxedObjectiveMatchesRecomputedRatio) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    OptimizerConfig cfg;
    cfg.seed = 5;
    const auto out = cyclic_design(model, cfg);
    const CMatrix& U = out.factor.entries();
    const CVector& w = out.filter.entries;
    const double num = (U * model.qt_factor_of_w(out.filter)).squaredNorm();
    const double den = (U * model.ru_of_w(out.filter) * U.adjoint()).trace().real();
    EXPECT_NEAR(out.relaxed_sinr, num / den, 1e-10 * out.relaxed_sinr);
    // Same value through the R_u(U) form.
    const double alt = w.dot(model.qt_of_u(out.factor) * w).real() / w.dot(model.ru_of_u(out.factor) * w).real();
    EXPECT_NEAR(out.relaxed_sinr, alt, 1e-9 * out.relaxed_sinr);
}

TEST(Cyclic, SeedDeterminism) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    OptimizerConfig cfg;
    cfg.seed = 6;
    cfg.record_timing = false;
    const auto a = cyclic_design(model, cfg);
    const auto b = cyclic_design(model, cfg);
    EXPECT_EQ(a.trace.outer_objectives, b.trace.outer_objectives);
    EXPECT_EQ(a.factor.entries(), b.factor.entries());
    for (double t : a.trace.wall_times) EXPECT_EQ(t, 0.0);
}

TEST(Cyclic, RelaxedBoundsTrueSinrOfRankOneDesign) {
    // With r = 1 the relaxed design is itself a waveform, so the relaxed value
    // cannot exceed the true SINR of that waveform.
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    OptimizerConfig cfg;
    cfg.rank = 1;
    cfg.seed = 7;
    const auto out = cyclic_design(model, cfg);
    const CVector s = out.factor.entries().row(0).adjoint();
    EXPECT_LE(out.relaxed_sinr, true_sinr(model, s) * (1 + 1e-10));
}

TEST(Cyclic, RejectsBadInitialFactor) {
    const Scenario sc = oracle::small_scenario();
    const CovarianceModel model(sc);
    std::mt19937_64 rng(8);
    EXPECT_THROW(cyclic_design(model, {}, WaveformFactor::random(1, 3, 1.0, rng)), std::invalid_argument);
}
