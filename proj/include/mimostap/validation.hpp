#pragma once

/// \file validation.hpp
/// Randomized property suites over small scenarios.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mimostap/optimizer.hpp"

namespace mimostap {

struct SuiteResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double worst = 0.0;      ///< largest observed error (relative unless noted)
    double tolerance = 0.0;
    bool passed() const { return failures == 0; }
};

/// Small random scenario: N_T, N_R in [1,3], L in [2,5], M in [2,4], P in {0,1},
/// N_c in [3,12], random patch powers and up to two jammers.
Scenario random_small_scenario(std::mt19937_64& rng);

/// Random snapshot-length vector with i.i.d. CN(0,1) entries.
CVector random_cvector(std::size_t n, std::mt19937_64& rng);

/// |a - b| / max(|a|, |b|, tiny)
double relative_difference(double a, double b);
double relative_difference(const CMatrix& a, const CMatrix& b);

/// Violations of x_{k+1} >= x_k - slack*|x_k| in every outer, Dinkelbach and MM sequence.
/// MM sequences start at zero by construction, so their slack is taken relative
/// to max(|x_k|, ||K||_2 e_t).
std::size_t count_monotonicity_violations(const RunTrace& trace, double rel_slack = 1e-9);

/// <V s, w> = <s, V^H w> for the target and random clutter operators.
SuiteResult adjoint_suite(std::size_t trials, std::uint64_t seed);
/// K vec(M) = vec(M^T) and K^T K = I for random shapes.
SuiteResult commutation_suite(std::size_t trials, std::uint64_t seed);
/// Fast and direct R_u(U) and R_u(w) agree to 1e-8 relative Frobenius.
SuiteResult lemma1_suite(std::size_t trials, std::uint64_t seed);
/// w^H R_u(U) w = tr(U R_u(w) U^H) to 1e-10.
SuiteResult appendix_a_suite(std::size_t trials, std::uint64_t seed);
/// Short designs on random scenarios; no objective sequence may decrease.
SuiteResult monotonicity_suite(std::size_t trials, std::uint64_t seed);

/// All five suites; `trials` is the per-suite count (the design suite uses trials/4, at least 1).
std::vector<SuiteResult> run_validation(std::size_t trials, std::uint64_t seed);

}  // namespace mimostap
