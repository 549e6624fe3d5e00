#include "mimostap/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mimostap {

namespace {

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void record(SuiteResult& res, double err) {
    ++res.trials;
    res.worst = std::max(res.worst, err);
    if (!(err <= res.tolerance)) ++res.failures;
}

WaveformFactor random_factor(const Scenario& sc, std::mt19937_64& rng) {
    const std::size_t n = sc.code_size();
    return WaveformFactor::random(uniform_int(rng, 1, std::min<std::size_t>(n, 4)), n,
                                  sc.chip_power(), rng);
}

}  // namespace

Scenario random_small_scenario(std::mt19937_64& rng) {
    Scenario sc;
    sc.geometry.n_tx = uniform_int(rng, 1, 3);
    sc.geometry.n_rx = uniform_int(rng, 1, 3);
    sc.geometry.d_tx = uniform_real(rng, 0.3, 2.0);
    sc.geometry.d_rx = uniform_real(rng, 0.3, 1.0);
    sc.pulses.code_length = uniform_int(rng, 2, 5);
    sc.pulses.m_pulses = uniform_int(rng, 2, 4);
    sc.target.doa_rad = deg_to_rad(uniform_real(rng, -60.0, 60.0));
    sc.target.normalized_doppler = uniform_real(rng, -0.5, 0.5);
    sc.clutter.ring_halfwidth = uniform_int(rng, 0, 1);
    sc.clutter.patches_per_ring = uniform_int(rng, 3, 12);
    sc.clutter.platform_speed_mps = uniform_real(rng, 50.0, 200.0);
    const std::size_t total = sc.clutter.ring_count() * sc.clutter.patches_per_ring;
    sc.clutter.patch_power.resize(total);
    for (auto& p : sc.clutter.patch_power) p = uniform_real(rng, 0.1, 10.0);
    const std::size_t nj = uniform_int(rng, 0, 2);
    for (std::size_t j = 0; j < nj; ++j)
        sc.jammers.jammers.push_back(
            {deg_to_rad(uniform_real(rng, -80.0, 80.0)), uniform_real(rng, 1.0, 100.0)});
    sc.noise_power = uniform_real(rng, 0.5, 2.0);
    sc.total_energy = uniform_real(rng, 0.5, 2.0);
    return sc;
}

CVector random_cvector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CVector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = cplx(normal(rng), normal(rng));
    return v;
}

double relative_difference(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
    return std::abs(a - b) / scale;
}

double relative_difference(const CMatrix& a, const CMatrix& b) {
    const double scale = std::max({a.norm(), b.norm(), std::numeric_limits<double>::min()});
    return (a - b).norm() / scale;
}

std::size_t count_monotonicity_violations(const RunTrace& trace, double rel_slack) {
    auto count = [rel_slack](const std::vector<double>& xs, double scale) {
        std::size_t bad = 0;
        for (std::size_t k = 1; k < xs.size(); ++k)
            if (xs[k] < xs[k - 1] - rel_slack * std::max(std::abs(xs[k - 1]), scale)) ++bad;
        return bad;
    };
    std::size_t bad = count(trace.outer_objectives, 0.0);
    for (const auto& xs : trace.dinkelbach_objectives) bad += count(xs, 0.0);
    for (std::size_t n = 0; n < trace.mm_objectives.size(); ++n)
        for (std::size_t k = 0; k < trace.mm_objectives[n].size(); ++k) {
            const bool known = n < trace.mm_scales.size() && k < trace.mm_scales[n].size();
            bad += count(trace.mm_objectives[n][k], known ? trace.mm_scales[n][k] : 0.0);
        }
    return bad;
}

SuiteResult adjoint_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult res{"adjoint", 0, 0, 0.0, 1e-12};
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const Scenario sc = random_small_scenario(rng);
        const CovarianceModel model(sc, CovariancePath::Direct);
        const CVector s = random_cvector(sc.code_size(), rng);
        const CVector w = random_cvector(sc.snapshot_size(), rng);
        const cplx lhs_t = w.dot(model.apply_vt(s));
        const cplx rhs_t = model.apply_vt_adjoint(w).dot(s);
        const std::size_t k = uniform_int(rng, 0, model.patches().size() - 1);
        const cplx lhs_c = w.dot(model.apply_vc(k, s));
        const cplx rhs_c = model.apply_vc_adjoint(k, w).dot(s);
        const double scale = s.norm() * w.norm() * std::sqrt(static_cast<double>(sc.snapshot_size()));
        record(res, std::max(std::abs(lhs_t - rhs_t), std::abs(lhs_c - rhs_c)) / scale);
    }
    return res;
}

SuiteResult commutation_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult res{"commutation", 0, 0, 0.0, 0.0};
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t rows = uniform_int(rng, 1, 7), cols = uniform_int(rng, 1, 7);
        const CommutationPermutation K(rows, cols);
        const CVector v = random_cvector(rows * cols, rng);
        const Eigen::Map<const CMatrix> M(v.data(), static_cast<Eigen::Index>(rows),
                                          static_cast<Eigen::Index>(cols));
        const CMatrix Mt = M.transpose();
        const CVector vec_mt = Eigen::Map<const CVector>(Mt.data(), Mt.size());
        double err = (K.apply(v) - vec_mt).cwiseAbs().maxCoeff();
        err = std::max(err, (K.apply_transpose(K.apply(v)) - v).cwiseAbs().maxCoeff());
        record(res, err);
    }
    return res;
}

SuiteResult lemma1_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult res{"lemma1", 0, 0, 0.0, 1e-8};
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const Scenario sc = random_small_scenario(rng);
        const CovarianceModel model(sc, CovariancePath::Fast);
        const WaveformFactor u = random_factor(sc, rng);
        const FilterVector w{random_cvector(sc.snapshot_size(), rng)};
        const double eu = relative_difference(model.ru_of_u_fast(u), model.ru_of_u_direct(u));
        const double ew = relative_difference(model.ru_of_w_fast(w), model.ru_of_w_direct(w));
        record(res, std::max(eu, ew));
    }
    return res;
}

SuiteResult appendix_a_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult res{"appendix_a", 0, 0, 0.0, 1e-10};
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const Scenario sc = random_small_scenario(rng);
        const CovarianceModel model(sc);
        const WaveformFactor u = random_factor(sc, rng);
        const FilterVector w{random_cvector(sc.snapshot_size(), rng)};
        const double lhs = w.entries.dot(model.ru_of_u(u) * w.entries).real();
        const CMatrix& U = u.entries();
        const double rhs = (U * model.ru_of_w(w) * U.adjoint()).trace().real();
        record(res, relative_difference(lhs, rhs));
    }
    return res;
}

SuiteResult monotonicity_suite(std::size_t trials, std::uint64_t seed) {
    SuiteResult res{"monotonicity", 0, 0, 0.0, 0.0};
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const Scenario sc = random_small_scenario(rng);
        const CovarianceModel model(sc);
        OptimizerConfig cfg;
        cfg.seed = rng();
        cfg.rank = uniform_int(rng, 1, std::min<std::size_t>(sc.code_size(), 3));
        cfg.max_outer = 30;
        cfg.record_timing = false;
        const auto out = cyclic_design(model, cfg);
        record(res, static_cast<double>(count_monotonicity_violations(out.trace)));
    }
    return res;
}

std::vector<SuiteResult> run_validation(std::size_t trials, std::uint64_t seed) {
    return {adjoint_suite(trials, seed),
            commutation_suite(trials, seed + 1),
            lemma1_suite(trials, seed + 2),
            appendix_a_suite(trials, seed + 3),
            monotonicity_suite(std::max<std::size_t>(trials / 4, 1), seed + 4)};
}

}  // namespace mimostap
