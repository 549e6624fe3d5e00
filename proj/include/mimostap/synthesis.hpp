#pragma once

/// \file synthesis.hpp
/// Randomized synthesis of polyphase waveforms from a relaxed design.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mimostap/covariance.hpp"

namespace mimostap {

/// Constant-modulus waveform with phases on the D-ary grid {0, 2pi/D, ...}.
/// Indices use the same stacking as s (index l*N_T + n).
struct PolyphaseWaveform {
    std::vector<std::uint32_t> phase_indices;
    unsigned alphabet_size = 2;
    double amplitude = 1.0;

    CVector signal() const;
    bool operator==(const PolyphaseWaveform&) const = default;
};

/// amplitude * exp(j * 2pi * index / D); multiples of pi/2 are exact.
cplx polyphase_entry(std::uint32_t index, unsigned alphabet_size, double amplitude);

/// Nearest grid index of `arg` after mapping it to [0, 2pi); half-way ties round up.
std::uint32_t quantize_phase(double arg, unsigned alphabet_size);

struct CandidatePool {
    std::vector<PolyphaseWaveform> candidates;
    std::uint64_t draws_seed = 0;
};

/// Draws chi ~ CN(0, I_r), maps it through U^H and quantizes every phase.
/// The Gaussian draws depend only on the seed and rank, so pools drawn with the
/// same seed at different D quantize identical underlying vectors.
CandidatePool draw_candidates(const WaveformFactor& u_star, std::size_t n_draws,
                              unsigned alphabet_size, std::uint64_t seed);

struct Selection {
    std::size_t index = 0;
    PolyphaseWaveform waveform;
    double score = 0.0;
    std::vector<double> scores;
};

/// argmax of s^H Q_t(w) s / s^H R_u(w) s over the pool (first index on ties).
Selection select_method1(const CandidatePool& pool, const CovarianceModel& model,
                         const FilterVector& w_star);

/// argmax of the true SINR over the pool (first index on ties).
Selection select_method2(const CandidatePool& pool, const CovarianceModel& model,
                         std::size_t threads = 1);

/// Barker-13 baseline: S = conj(a_T(theta_t)) b^T scaled to total energy e_t.
/// Throws std::invalid_argument unless L = 13.
CVector barker_waveform(const Scenario& scenario);

inline constexpr int kBarker13[13] = {1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1};

}  // namespace mimostap
