#pragma once

/// \file optimizer.hpp
/// Cyclic waveform/filter design: closed-form filter step, Dinkelbach
/// fractional step and the minorization-maximization inner solver.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mimostap/covariance.hpp"

namespace mimostap {

/// floor(sqrt(L*N_T + 1)) - 1, clamped to at least 1.
std::size_t default_rank(std::size_t code_size);

struct OptimizerConfig {
    std::size_t rank = 0;  ///< 0 selects default_rank()
    double eps_outer = 1e-3;
    double eps_dinkelbach = 1e-3;
    double eps_mm = 1e-6;
    std::size_t max_outer = 200;
    std::size_t max_dinkelbach = 50;
    std::size_t max_mm = 500;
    std::uint64_t seed = 0;
    /// Wall-clock timings are recorded as zero when false (byte-stable output).
    bool record_timing = true;

    std::size_t resolved_rank(std::size_t code_size) const;
    void validate(std::size_t code_size) const;
};

/// Objective histories. mm_objectives[n][k] is the MM sequence of Dinkelbach
/// iteration k in outer iteration n.
struct RunTrace {
    std::vector<double> outer_objectives;
    std::vector<std::vector<double>> dinkelbach_objectives;
    std::vector<std::vector<std::vector<double>>> mm_objectives;
    /// ||K||_2 * e_t for each MM sequence: a bound on |tr(U K U^H)| over the feasible set.
    std::vector<std::vector<double>> mm_scales;
    std::vector<double> wall_times;
    /// Largest |tr(U K U^H)| / tr(U Q_t(w) U^H) seen at Dinkelbach entries.
    double max_entry_residual = 0.0;
    /// Largest column-norm violation max_l | ||u_l||^2 - p_s | / p_s over all iterates.
    double max_feasibility_error = 0.0;
};

struct DesignOutput {
    WaveformFactor factor;
    FilterVector filter;
    double relaxed_sinr = 0.0;  ///< linear, includes |alpha_t|^2
    bool converged = false;
    RunTrace trace;

    double relaxed_sinr_db() const;
};

struct GeneralizedEigenpair {
    double value = 0.0;
    CVector vector;
};

/// Largest eigenpair of Q v = lambda R v for Hermitian Q and Hermitian PD R.
/// Throws NumericalError when R does not factor.
GeneralizedEigenpair largest_generalized_eigpair(const CMatrix& Q, const CMatrix& R);

/// Same problem for Q = F F^H, solved through the r x r matrix F^H R^{-1} F.
GeneralizedEigenpair largest_generalized_eigpair_lowrank(const CMatrix& F, const CMatrix& R);

/// Unit-norm filter maximizing w^H Q_t(U) w / w^H R_u(U) w.
FilterVector filter_step(const CovarianceModel& model, const WaveformFactor& u);

struct MmResult {
    WaveformFactor factor;
    std::vector<double> objectives;  ///< tr(U K U^H), starting at the initial point
    double scale = 0.0;              ///< ||K||_2 * e_t
};

/// Maximizes tr(U K U^H) subject to ||u_l||^2 = p_s by minorization-maximization.
MmResult mm_quadratic_maximize(const CMatrix& K, WaveformFactor u0, double eps_mm,
                               std::size_t max_mm);

struct DinkelbachResult {
    WaveformFactor factor;
    std::vector<double> ratios;                    ///< x^(n,0), x^(n,1), ...
    std::vector<std::vector<double>> mm_objectives;
    std::vector<double> mm_scales;
    double max_entry_residual = 0.0;
    double max_feasibility_error = 0.0;
};

/// Maximizes tr(U Q_t(w) U^H) / tr(U R_u(w) U^H) for a fixed filter.
DinkelbachResult dinkelbach_u_step(const CovarianceModel& model, const FilterVector& w,
                                   WaveformFactor u0, const OptimizerConfig& cfg);

/// Full alternating design from a seeded random start.
DesignOutput cyclic_design(const CovarianceModel& model, const OptimizerConfig& cfg);

/// Same, from a caller-supplied feasible starting factor.
DesignOutput cyclic_design(const CovarianceModel& model, const OptimizerConfig& cfg,
                           WaveformFactor initial);

}  // namespace mimostap
