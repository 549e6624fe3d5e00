#pragma once

/// \file evaluation.hpp
/// True output SINR, optimal filters, Doppler sweeps and the exhaustive oracle.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mimostap/covariance.hpp"

namespace mimostap {

double to_db(double linear);

/// |alpha_t|^2 v_t(s)^H R_u(s)^{-1} v_t(s), via a Cholesky solve.
double true_sinr(const CovarianceModel& model, const CVector& s);

/// w = R_u(s)^{-1} v_t(s). With `mvdr` the filter is scaled so w^H v_t = 1,
/// otherwise it has unit norm.
FilterVector optimal_filter(const CovarianceModel& model, const CVector& s, bool mvdr = false);

struct SweepSpec {
    std::vector<double> doppler_grid;  ///< normalized Doppler, each in [-0.5, 0.5]
    CVector waveform;
    std::string label;
};

struct SweepPoint {
    double doppler = 0.0;
    double sinr_db = 0.0;
};

/// True SINR with the target Doppler replaced by each grid value; the
/// interference covariance is factored once since it does not depend on it.
std::vector<SweepPoint> doppler_sweep(const CovarianceModel& model, const SweepSpec& sweep);

/// Evenly spaced grid of `count` points on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

inline constexpr std::uint64_t kOracleLimit = std::uint64_t{1} << 20;

struct OracleOptions {
    /// Enumerate only waveforms whose first phase index is 0 (global phase
    /// invariance makes the rest redundant).
    bool fix_first_phase = false;
    std::size_t threads = 1;
};

struct OracleReport {
    std::vector<std::uint32_t> best_indices;
    unsigned alphabet_size = 0;
    double best_sinr = 0.0;
    std::uint64_t enumerated = 0;
    double runtime_s = 0.0;
};

/// Number of waveforms an exhaustive search would visit, or 0 past kOracleLimit.
std::uint64_t oracle_instance_size(std::size_t code_size, unsigned alphabet_size);

/// Enumerates every D-ary polyphase waveform and returns the true-SINR argmax
/// (lowest enumeration index on ties). Throws std::length_error past kOracleLimit.
OracleReport exhaustive_oracle(const CovarianceModel& model, unsigned alphabet_size,
                               const OracleOptions& options = {});

}  // namespace mimostap
