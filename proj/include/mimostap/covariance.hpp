#pragma once

/// \file covariance.hpp
/// Structured target/clutter operators and interference covariance assembly.
///
/// Layout conventions used throughout the library:
///   * waveform  s = vec(S), S is N_T x L: index l*N_T + n
///   * snapshot  y stacks pulses, then fast-time samples, then receive elements:
///               index (m*L + l)*N_R + r
/// The clutter operator of ring p and azimuth k is
///   V_{c,p,k} = d(omega) (x) J_p^T (x) a_R a_T^T
/// and is only ever applied blockwise, never formed densely.

#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "mimostap/model.hpp"

namespace mimostap {

/// Raised when a covariance that must be positive definite fails to factor.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Fast-time shift J_p of order L, stored as its offset.
/// (J_p x)_i = x_{i+p}; (J_p^T x)_i = x_{i-p}; out-of-range entries are zero.
struct ShiftMatrix {
    std::size_t order = 0;
    int offset = 0;

    CVector apply(const CVector& x) const;
    CVector apply_transpose(const CVector& x) const;
    /// Dense form, for oracles only.
    CMatrix dense() const;
};

/// Permutation K with K vec(M) = vec(M^T) for every rows x cols matrix M.
class CommutationPermutation {
  public:
    CommutationPermutation(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    /// source[i] is the input index that lands at output position i.
    const std::vector<std::size_t>& source() const { return source_; }

    CVector apply(const CVector& v) const;
    CVector apply_transpose(const CVector& v) const;
    CMatrix dense() const;

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> source_;
};

/// Relaxed waveform covariance factor U_s (r x L*N_T); every column has
/// squared norm equal to the chip power p_s.
class WaveformFactor {
  public:
    WaveformFactor() = default;
    WaveformFactor(CMatrix entries, double chip_power);

    /// i.i.d. complex Gaussian entries with columns rescaled onto the constraint.
    static WaveformFactor random(std::size_t rank, std::size_t code_size, double chip_power,
                                 std::mt19937_64& rng);
    /// Rank-one factor U = s^H, so that U^H U = s s^H.
    static WaveformFactor from_waveform(const CVector& s);

    const CMatrix& entries() const { return entries_; }
    CMatrix& entries() { return entries_; }
    double chip_power() const { return chip_power_; }
    std::size_t rank() const { return static_cast<std::size_t>(entries_.rows()); }
    std::size_t code_size() const { return static_cast<std::size_t>(entries_.cols()); }

    /// max_l | ||u_l||^2 - p_s |
    double feasibility_error() const;
    /// Rescale every column onto the constraint.
    void normalize_columns();

  private:
    CMatrix entries_;
    double chip_power_ = 0.0;
};

struct FilterVector {
    CVector entries;
};

/// Clutter tables that do not depend on the waveform or filter.
/// tilde[p] = sum_k sigma^2 vt vt^H with vt = d (x) a_T (x) a_R
/// breve[p] = sum_k sigma^2 conj(vb) vb^T with vb = d (x) a_R (x) a_T
/// Index p runs over rings -P..P as p + P.
struct ClutterSpectralTables {
    std::size_t m_pulses = 0;
    std::size_t n_tx = 0;
    std::size_t n_rx = 0;
    std::size_t ring_halfwidth = 0;
    std::vector<CMatrix> tilde;
    std::vector<CMatrix> breve;
};

ClutterSpectralTables precompute_spectral_tables(const Scenario& scenario);

enum class CovariancePath { Auto, Fast, Direct };

/// True when the Kronecker-structured (table based) assembly is expected to be
/// cheaper than summing patch outer products.
bool prefer_fast_covariance(const Scenario& scenario);

// Stand-alone operator applications that derive steering on the fly.
CVector apply_vt(const Scenario& scenario, const CVector& s);
CVector apply_vt_adjoint(const Scenario& scenario, const CVector& w);
CVector apply_vc(const Scenario& scenario, const ClutterPatch& patch, const CVector& s);
CVector apply_vc_adjoint(const Scenario& scenario, const ClutterPatch& patch, const CVector& w);

/// Precomputed steering, jammer-plus-noise structure and clutter tables for one
/// scenario. Immutable after construction; all members are safe to call
/// concurrently.
class CovarianceModel {
  public:
    explicit CovarianceModel(Scenario scenario, CovariancePath path = CovariancePath::Auto);

    const Scenario& scenario() const { return scenario_; }
    const std::vector<ClutterPatch>& patches() const { return patches_; }
    const ClutterSpectralTables& tables() const { return tables_; }
    CovariancePath path() const { return path_; }
    bool uses_fast_path() const { return fast_; }

    std::size_t code_size() const { return n_code_; }
    std::size_t snapshot_size() const { return n_snap_; }

    CVector apply_vt(const CVector& s) const;
    /// Target operator evaluated at an arbitrary Doppler (radians per pulse).
    CVector apply_vt(const CVector& s, double omega) const;
    CVector apply_vt_adjoint(const CVector& w) const;
    CVector apply_vc(std::size_t patch, const CVector& s) const;
    CVector apply_vc_adjoint(std::size_t patch, const CVector& w) const;

    /// R_Jn = R_J + sigma^2 I in snapshot layout.
    CMatrix jammer_noise_cov() const;
    /// w^H R_Jn w, evaluated blockwise.
    double jammer_noise_quadratic(const CVector& w) const;
    /// beta(w) = w^H R_Jn w / e_t
    double beta(const CVector& w) const;

    CMatrix ru_of_s(const CVector& s) const;
    CMatrix ru_of_u(const WaveformFactor& u) const;
    CMatrix ru_of_u_direct(const WaveformFactor& u) const;
    CMatrix ru_of_u_fast(const WaveformFactor& u) const;
    CMatrix ru_of_u_fast(const ClutterSpectralTables& tables, const WaveformFactor& u) const;

    CMatrix ru_of_w(const FilterVector& w) const;
    CMatrix ru_of_w_direct(const FilterVector& w) const;
    CMatrix ru_of_w_fast(const FilterVector& w) const;
    CMatrix ru_of_w_fast(const ClutterSpectralTables& tables, const FilterVector& w) const;

    /// Q_t(U) = V_t U^H U V_t^H, dense.
    CMatrix qt_of_u(const WaveformFactor& u) const;
    /// V_t U^H (snapshot_size x r); Q_t(U) = F F^H.
    CMatrix qt_factor_of_u(const WaveformFactor& u) const;
    /// q = V_t^H w; Q_t(w) = q q^H.
    CVector qt_factor_of_w(const FilterVector& w) const;

  private:
    void check_tables(const ClutterSpectralTables& tables) const;

    Scenario scenario_;
    CovariancePath path_;
    bool fast_ = false;
    std::size_t n_code_ = 0;
    std::size_t n_snap_ = 0;
    std::vector<ClutterPatch> patches_;
    std::vector<CVector> patch_tx_;
    std::vector<CVector> patch_rx_;
    std::vector<CVector> patch_doppler_;
    CVector target_tx_;
    CVector target_rx_;
    CVector target_doppler_;
    CMatrix jammer_rx_;  // N_R x N_R spatial jammer covariance
    ClutterSpectralTables tables_;
};

/// Average a matrix with its adjoint.
void hermitian_symmetrize(CMatrix& m);

}  // namespace mimostap
