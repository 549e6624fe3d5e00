#include "mimostap/covariance.hpp"

#include <algorithm>
#include <cmath>

namespace mimostap {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

struct Dims {
    Index n_tx, n_rx, code_length, m_pulses;
};

Dims dims_of(const Scenario& s) {
    return {idx(s.geometry.n_tx), idx(s.geometry.n_rx), idx(s.pulses.code_length),
            idx(s.pulses.m_pulses)};
}

// (d (x) J_p^T (x) a_R a_T^T) s, blockwise.
CVector structured_apply(const Dims& dm, const CVector& a_tx, const CVector& a_rx,
                         const CVector& d, int ring, const CVector& s) {
    if (s.size() != dm.code_length * dm.n_tx)
        throw std::invalid_argument("waveform length must equal L*N_T");
    const Index L = dm.code_length;
    CVector beam(L);
    for (Index l = 0; l < L; ++l)
        beam[l] = a_tx.conjugate().dot(s.segment(l * dm.n_tx, dm.n_tx));
    CVector out = CVector::Zero(L * dm.m_pulses * dm.n_rx);
    for (Index m = 0; m < dm.m_pulses; ++m) {
        for (Index l = 0; l < L; ++l) {
            const Index src = l - ring;
            if (src < 0 || src >= L) continue;
            out.segment((m * L + l) * dm.n_rx, dm.n_rx) = (d[m] * beam[src]) * a_rx;
        }
    }
    return out;
}

// (d^H (x) J_p (x) conj(a_T) a_R^H) w, blockwise.
CVector structured_adjoint(const Dims& dm, const CVector& a_tx, const CVector& a_rx,
                           const CVector& d, int ring, const CVector& w) {
    const Index L = dm.code_length;
    if (w.size() != L * dm.m_pulses * dm.n_rx)
        throw std::invalid_argument("filter length must equal L*M*N_R");
    CVector out = CVector::Zero(L * dm.n_tx);
    const CVector a_tx_conj = a_tx.conjugate();
    for (Index l = 0; l < L; ++l) {
        const Index src = l + ring;
        if (src < 0 || src >= L) continue;
        cplx acc = 0.0;
        for (Index m = 0; m < dm.m_pulses; ++m)
            acc += std::conj(d[m]) * a_rx.dot(w.segment((m * L + src) * dm.n_rx, dm.n_rx));
        out.segment(l * dm.n_tx, dm.n_tx) = acc * a_tx_conj;
    }
    return out;
}

// Accumulates sum_j g_j g_j^H into the lower triangle of `acc` from columns
// streamed in fixed-size chunks.
class GramAccumulator {
  public:
    GramAccumulator(Index order, Index chunk = 256)
        : acc_(CMatrix::Zero(order, order)), chunk_(order, chunk) {}

    void push(const CVector& g) {
        chunk_.col(filled_++) = g;
        if (filled_ == chunk_.cols()) flush();
    }

    CMatrix finish() {
        flush();
        CMatrix full = acc_.selfadjointView<Eigen::Lower>();
        return full;
    }

  private:
    void flush() {
        if (filled_ == 0) return;
        acc_.selfadjointView<Eigen::Lower>().rankUpdate(chunk_.leftCols(filled_));
        filled_ = 0;
    }

    CMatrix acc_;
    CMatrix chunk_;
    Index filled_ = 0;
};

}  // namespace

void hermitian_symmetrize(CMatrix& m) {
    CMatrix adj = m.adjoint();
    m = 0.5 * (m + adj);
}

// ---------------------------------------------------------------- ShiftMatrix

CVector ShiftMatrix::apply(const CVector& x) const {
    const Index n = idx(order);
    CVector out = CVector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        const Index j = i + offset;
        if (j >= 0 && j < n) out[i] = x[j];
    }
    return out;
}

CVector ShiftMatrix::apply_transpose(const CVector& x) const {
    const Index n = idx(order);
    CVector out = CVector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        const Index j = i - offset;
        if (j >= 0 && j < n) out[i] = x[j];
    }
    return out;
}

CMatrix ShiftMatrix::dense() const {
    const Index n = idx(order);
    CMatrix j = CMatrix::Zero(n, n);
    for (Index r = 0; r < n; ++r) {
        const Index c = r + offset;
        if (c >= 0 && c < n) j(r, c) = 1.0;
    }
    return j;
}

// ----------------------------------------------------- CommutationPermutation

CommutationPermutation::CommutationPermutation(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), source_(rows * cols) {
    // vec(M)[c*rows + r] = M(r, c) lands at vec(M^T)[r*cols + c].
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) source_[r * cols + c] = c * rows + r;
}

CVector CommutationPermutation::apply(const CVector& v) const {
    if (static_cast<std::size_t>(v.size()) != source_.size())
        throw std::invalid_argument("commutation permutation size mismatch");
    CVector out(v.size());
    for (std::size_t i = 0; i < source_.size(); ++i) out[idx(i)] = v[idx(source_[i])];
    return out;
}

CVector CommutationPermutation::apply_transpose(const CVector& v) const {
    if (static_cast<std::size_t>(v.size()) != source_.size())
        throw std::invalid_argument("commutation permutation size mismatch");
    CVector out(v.size());
    for (std::size_t i = 0; i < source_.size(); ++i) out[idx(source_[i])] = v[idx(i)];
    return out;
}

CMatrix CommutationPermutation::dense() const {
    const Index n = idx(source_.size());
    CMatrix k = CMatrix::Zero(n, n);
    for (std::size_t i = 0; i < source_.size(); ++i) k(idx(i), idx(source_[i])) = 1.0;
    return k;
}

// ------------------------------------------------------------- WaveformFactor

WaveformFactor::WaveformFactor(CMatrix entries, double chip_power)
    : entries_(std::move(entries)), chip_power_(chip_power) {
    if (!(chip_power_ > 0.0)) throw std::invalid_argument("chip power must be > 0");
}

WaveformFactor WaveformFactor::random(std::size_t rank, std::size_t code_size, double chip_power,
                                      std::mt19937_64& rng) {
    if (rank < 1 || rank > code_size) throw std::invalid_argument("rank must lie in [1, L*N_T]");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMatrix u(idx(rank), idx(code_size));
    for (Index c = 0; c < u.cols(); ++c)
        for (Index r = 0; r < u.rows(); ++r) u(r, c) = cplx(normal(rng), normal(rng));
    WaveformFactor f(std::move(u), chip_power);
    f.normalize_columns();
    return f;
}

WaveformFactor WaveformFactor::from_waveform(const CVector& s) {
    const double ps = s.squaredNorm() / static_cast<double>(s.size());
    return WaveformFactor(s.adjoint(), ps);
}

double WaveformFactor::feasibility_error() const {
    double worst = 0.0;
    for (Index c = 0; c < entries_.cols(); ++c)
        worst = std::max(worst, std::abs(entries_.col(c).squaredNorm() - chip_power_));
    return worst;
}

void WaveformFactor::normalize_columns() {
    const double amp = std::sqrt(chip_power_);
    for (Index c = 0; c < entries_.cols(); ++c) {
        const double n = entries_.col(c).norm();
        if (n > 0.0) entries_.col(c) *= amp / n;
    }
}

// ------------------------------------------------------------ tables & paths

ClutterSpectralTables precompute_spectral_tables(const Scenario& scenario) {
    const Dims dm = dims_of(scenario);
    const double lambda = scenario.pulses.wavelength_m();
    const Index order = dm.m_pulses * dm.n_tx * dm.n_rx;
    const auto patches = enumerate_clutter_patches(scenario);

    ClutterSpectralTables t;
    t.m_pulses = scenario.pulses.m_pulses;
    t.n_tx = scenario.geometry.n_tx;
    t.n_rx = scenario.geometry.n_rx;
    t.ring_halfwidth = scenario.clutter.ring_halfwidth;

    const int P = static_cast<int>(scenario.clutter.ring_halfwidth);
    for (int p = -P; p <= P; ++p) {
        GramAccumulator tilde(order);
        GramAccumulator breve(order);
        for (const auto& patch : patches) {
            if (patch.ring != p || patch.power == 0.0) continue;
            const CVector a_tx = steering_tx(scenario.geometry, lambda, patch.theta);
            const CVector a_rx = steering_rx(scenario.geometry, lambda, patch.theta);
            const CVector d = temporal_steering(scenario.pulses.m_pulses, patch.omega);
            const double amp = std::sqrt(patch.power);
            CVector vt(order), vb(order);
            for (Index m = 0; m < dm.m_pulses; ++m)
                for (Index n = 0; n < dm.n_tx; ++n)
                    for (Index r = 0; r < dm.n_rx; ++r) {
                        const cplx v = amp * d[m] * a_tx[n] * a_rx[r];
                        vt[(m * dm.n_tx + n) * dm.n_rx + r] = v;
                        vb[(m * dm.n_rx + r) * dm.n_tx + n] = std::conj(v);
                    }
            tilde.push(vt);
            breve.push(vb);
        }
        t.tilde.push_back(tilde.finish());
        t.breve.push_back(breve.finish());
    }
    return t;
}

bool prefer_fast_covariance(const Scenario& scenario) {
    // Per ring and per factor row, summing patch outer products costs about
    // N_c (L M N_R)^2 while the table form costs M^2 L N_T N_R^3 (N_T + L).
    const double nc = static_cast<double>(scenario.clutter.patches_per_ring);
    const double L = static_cast<double>(scenario.pulses.code_length);
    const double nt = static_cast<double>(scenario.geometry.n_tx);
    const double nr = static_cast<double>(scenario.geometry.n_rx);
    return nc * L > nt * nr * (nt + L);
}

// ---------------------------------------------------- stand-alone operators

namespace {

struct PatchSteering {
    CVector a_tx, a_rx, d;
};

PatchSteering steering_for(const Scenario& sc, double theta, double omega) {
    const double lambda = sc.pulses.wavelength_m();
    return {steering_tx(sc.geometry, lambda, theta), steering_rx(sc.geometry, lambda, theta),
            temporal_steering(sc.pulses.m_pulses, omega)};
}

}  // namespace

CVector apply_vt(const Scenario& scenario, const CVector& s) {
    const auto st = steering_for(scenario, scenario.target.doa_rad, scenario.target.omega());
    return structured_apply(dims_of(scenario), st.a_tx, st.a_rx, st.d, 0, s);
}

CVector apply_vt_adjoint(const Scenario& scenario, const CVector& w) {
    const auto st = steering_for(scenario, scenario.target.doa_rad, scenario.target.omega());
    return structured_adjoint(dims_of(scenario), st.a_tx, st.a_rx, st.d, 0, w);
}

CVector apply_vc(const Scenario& scenario, const ClutterPatch& patch, const CVector& s) {
    const auto st = steering_for(scenario, patch.theta, patch.omega);
    return structured_apply(dims_of(scenario), st.a_tx, st.a_rx, st.d, patch.ring, s);
}

CVector apply_vc_adjoint(const Scenario& scenario, const ClutterPatch& patch, const CVector& w) {
    const auto st = steering_for(scenario, patch.theta, patch.omega);
    return structured_adjoint(dims_of(scenario), st.a_tx, st.a_rx, st.d, patch.ring, w);
}

// ------------------------------------------------------------ CovarianceModel

CovarianceModel::CovarianceModel(Scenario scenario, CovariancePath path)
    : scenario_(std::move(scenario)), path_(path) {
    scenario_.validate();
    n_code_ = scenario_.code_size();
    n_snap_ = scenario_.snapshot_size();
    fast_ = path_ == CovariancePath::Fast ||
            (path_ == CovariancePath::Auto && prefer_fast_covariance(scenario_));

    patches_ = enumerate_clutter_patches(scenario_);
    for (const auto& p : patches_) {
        auto st = steering_for(scenario_, p.theta, p.omega);
        patch_tx_.push_back(std::move(st.a_tx));
        patch_rx_.push_back(std::move(st.a_rx));
        patch_doppler_.push_back(std::move(st.d));
    }
    auto tgt = steering_for(scenario_, scenario_.target.doa_rad, scenario_.target.omega());
    target_tx_ = std::move(tgt.a_tx);
    target_rx_ = std::move(tgt.a_rx);
    target_doppler_ = std::move(tgt.d);

    const Index nr = idx(scenario_.geometry.n_rx);
    jammer_rx_ = CMatrix::Zero(nr, nr);
    for (const auto& j : scenario_.jammers.jammers) {
        const CVector a = steering_rx(scenario_.geometry, scenario_.pulses.wavelength_m(), j.doa_rad);
        jammer_rx_ += j.power * (a * a.adjoint());
    }
    if (fast_) tables_ = precompute_spectral_tables(scenario_);
}

CVector CovarianceModel::apply_vt(const CVector& s) const {
    return structured_apply(dims_of(scenario_), target_tx_, target_rx_, target_doppler_, 0, s);
}

CVector CovarianceModel::apply_vt(const CVector& s, double omega) const {
    const CVector d = temporal_steering(scenario_.pulses.m_pulses, omega);
    return structured_apply(dims_of(scenario_), target_tx_, target_rx_, d, 0, s);
}

CVector CovarianceModel::apply_vt_adjoint(const CVector& w) const {
    return structured_adjoint(dims_of(scenario_), target_tx_, target_rx_, target_doppler_, 0, w);
}

CVector CovarianceModel::apply_vc(std::size_t patch, const CVector& s) const {
    return structured_apply(dims_of(scenario_), patch_tx_.at(patch), patch_rx_[patch],
                            patch_doppler_[patch], patches_[patch].ring, s);
}

CVector CovarianceModel::apply_vc_adjoint(std::size_t patch, const CVector& w) const {
    return structured_adjoint(dims_of(scenario_), patch_tx_.at(patch), patch_rx_[patch],
                              patch_doppler_[patch], patches_[patch].ring, w);
}

CMatrix CovarianceModel::jammer_noise_cov() const {
    const Index nr = idx(scenario_.geometry.n_rx);
    const Index blocks = idx(scenario_.pulses.code_length * scenario_.pulses.m_pulses);
    CMatrix r = CMatrix::Zero(idx(n_snap_), idx(n_snap_));
    const CMatrix block = jammer_rx_ + scenario_.noise_power * CMatrix::Identity(nr, nr);
    for (Index b = 0; b < blocks; ++b) r.block(b * nr, b * nr, nr, nr) = block;
    return r;
}

double CovarianceModel::jammer_noise_quadratic(const CVector& w) const {
    if (w.size() != idx(n_snap_)) throw std::invalid_argument("filter length must equal L*M*N_R");
    const Index nr = idx(scenario_.geometry.n_rx);
    double acc = scenario_.noise_power * w.squaredNorm();
    for (Index b = 0; b < w.size() / nr; ++b) {
        const auto seg = w.segment(b * nr, nr);
        acc += std::real(seg.dot(jammer_rx_ * seg));
    }
    return acc;
}

double CovarianceModel::beta(const CVector& w) const {
    return jammer_noise_quadratic(w) / scenario_.total_energy;
}

CMatrix CovarianceModel::ru_of_s(const CVector& s) const {
    if (s.size() != idx(n_code_)) throw std::invalid_argument("waveform length must equal L*N_T");
    return ru_of_u(WaveformFactor(s.adjoint(), scenario_.chip_power()));
}

CMatrix CovarianceModel::ru_of_u(const WaveformFactor& u) const {
    return fast_ ? ru_of_u_fast(u) : ru_of_u_direct(u);
}

CMatrix CovarianceModel::ru_of_u_direct(const WaveformFactor& u) const {
    if (u.code_size() != n_code_) throw std::invalid_argument("factor width must equal L*N_T");
    const CMatrix& U = u.entries();
    GramAccumulator gram(idx(n_snap_));
    for (std::size_t k = 0; k < patches_.size(); ++k) {
        if (patches_[k].power == 0.0) continue;
        const double amp = std::sqrt(patches_[k].power);
        for (Index i = 0; i < U.rows(); ++i) {
            const CVector c = U.row(i).adjoint();
            gram.push(amp * apply_vc(k, c));
        }
    }
    CMatrix r = gram.finish();
    r += jammer_noise_cov();
    hermitian_symmetrize(r);
    return r;
}

void CovarianceModel::check_tables(const ClutterSpectralTables& t) const {
    if (t.m_pulses != scenario_.pulses.m_pulses || t.n_tx != scenario_.geometry.n_tx ||
        t.n_rx != scenario_.geometry.n_rx || t.ring_halfwidth != scenario_.clutter.ring_halfwidth ||
        t.tilde.size() != scenario_.clutter.ring_count() ||
        t.breve.size() != scenario_.clutter.ring_count())
        throw std::invalid_argument("spectral tables do not match the scenario");
}

CMatrix CovarianceModel::ru_of_u_fast(const WaveformFactor& u) const {
    if (!fast_) return ru_of_u_fast(precompute_spectral_tables(scenario_), u);
    return ru_of_u_fast(tables_, u);
}

CMatrix CovarianceModel::ru_of_u_fast(const ClutterSpectralTables& tables,
                                      const WaveformFactor& u) const {
    check_tables(tables);
    if (u.code_size() != n_code_) throw std::invalid_argument("factor width must equal L*N_T");
    const Dims dm = dims_of(scenario_);
    const Index L = dm.code_length, nt = dm.n_tx, nr = dm.n_rx, M = dm.m_pulses;
    const Index in_blk = nt * nr;  // per-pulse block of the tables
    const Index out_blk = L * nr;  // per-pulse block of the snapshot
    const CMatrix& U = u.entries();
    const int P = static_cast<int>(scenario_.clutter.ring_halfwidth);

    CMatrix acc = CMatrix::Zero(idx(n_snap_), idx(n_snap_));
    CMatrix G(out_blk, in_blk);
    CMatrix Y(idx(n_snap_), M * in_blk);
    for (int p = -P; p <= P; ++p) {
        const CMatrix& table = tables.tilde[static_cast<std::size_t>(p + P)];
        for (Index i = 0; i < U.rows(); ++i) {
            // G = (C_l J_p)^T (x) I_{N_R}, with vec(C_l) = conj(row i of U).
            G.setZero();
            bool any = false;
            for (Index j = 0; j < L; ++j) {
                const Index src = j - p;
                if (src < 0 || src >= L) continue;
                any = true;
                for (Index n = 0; n < nt; ++n) {
                    const cplx c = std::conj(U(i, src * nt + n));
                    for (Index r = 0; r < nr; ++r) G(j * nr + r, n * nr + r) = c;
                }
            }
            if (!any) continue;
            for (Index m = 0; m < M; ++m)
                Y.middleRows(m * out_blk, out_blk).noalias() =
                    G * table.middleRows(m * in_blk, in_blk);
            const CMatrix Gh = G.adjoint();
            for (Index m = 0; m < M; ++m)
                acc.middleCols(m * out_blk, out_blk).noalias() +=
                    Y.middleCols(m * in_blk, in_blk) * Gh;
        }
    }
    acc += jammer_noise_cov();
    hermitian_symmetrize(acc);
    return acc;
}

CMatrix CovarianceModel::ru_of_w(const FilterVector& w) const {
    return fast_ ? ru_of_w_fast(w) : ru_of_w_direct(w);
}

CMatrix CovarianceModel::ru_of_w_direct(const FilterVector& w) const {
    if (w.entries.size() != idx(n_snap_))
        throw std::invalid_argument("filter length must equal L*M*N_R");
    if (w.entries.squaredNorm() == 0.0) throw std::invalid_argument("filter must be nonzero");
    GramAccumulator gram(idx(n_code_));
    for (std::size_t k = 0; k < patches_.size(); ++k) {
        if (patches_[k].power == 0.0) continue;
        gram.push(std::sqrt(patches_[k].power) * apply_vc_adjoint(k, w.entries));
    }
    CMatrix r = gram.finish();
    r.diagonal().array() += beta(w.entries);
    hermitian_symmetrize(r);
    return r;
}

CMatrix CovarianceModel::ru_of_w_fast(const FilterVector& w) const {
    if (!fast_) return ru_of_w_fast(precompute_spectral_tables(scenario_), w);
    return ru_of_w_fast(tables_, w);
}

CMatrix CovarianceModel::ru_of_w_fast(const ClutterSpectralTables& tables,
                                      const FilterVector& w) const {
    check_tables(tables);
    if (w.entries.size() != idx(n_snap_))
        throw std::invalid_argument("filter length must equal L*M*N_R");
    if (w.entries.squaredNorm() == 0.0) throw std::invalid_argument("filter must be nonzero");
    const Dims dm = dims_of(scenario_);
    const Index L = dm.code_length, nt = dm.n_tx, nr = dm.n_rx, M = dm.m_pulses;

    // vec(W_hat) = (I_M (x) K) w, W_hat is L x (M N_R).
    const CommutationPermutation K(scenario_.geometry.n_rx, scenario_.pulses.code_length);
    CMatrix w_hat(L, M * nr);
    for (Index m = 0; m < M; ++m) {
        const CVector block = K.apply(w.entries.segment(m * L * nr, L * nr));
        w_hat.middleCols(m * nr, nr) = Eigen::Map<const CMatrix>(block.data(), L, nr);
    }

    const int P = static_cast<int>(scenario_.clutter.ring_halfwidth);
    CMatrix acc = CMatrix::Zero(idx(n_code_), idx(n_code_));
    CMatrix Wt(L * nt, M * nr * nt);
    for (int p = -P; p <= P; ++p) {
        // W_tilde_p = (J_p W_hat) (x) I_{N_T}
        Wt.setZero();
        bool any = false;
        for (Index l = 0; l < L; ++l) {
            const Index src = l + p;
            if (src < 0 || src >= L) continue;
            any = true;
            for (Index c = 0; c < M * nr; ++c)
                for (Index n = 0; n < nt; ++n) Wt(l * nt + n, c * nt + n) = w_hat(src, c);
        }
        if (!any) continue;
        acc.noalias() += Wt * tables.breve[static_cast<std::size_t>(p + P)] * Wt.adjoint();
    }
    acc.diagonal().array() += beta(w.entries);
    hermitian_symmetrize(acc);
    return acc;
}

CMatrix CovarianceModel::qt_factor_of_u(const WaveformFactor& u) const {
    if (u.code_size() != n_code_) throw std::invalid_argument("factor width must equal L*N_T");
    const CMatrix& U = u.entries();
    CMatrix f(idx(n_snap_), U.rows());
    for (Index i = 0; i < U.rows(); ++i) f.col(i) = apply_vt(CVector(U.row(i).adjoint()));
    return f;
}

CMatrix CovarianceModel::qt_of_u(const WaveformFactor& u) const {
    const CMatrix f = qt_factor_of_u(u);
    CMatrix q = f * f.adjoint();
    hermitian_symmetrize(q);
    return q;
}

CVector CovarianceModel::qt_factor_of_w(const FilterVector& w) const {
    return apply_vt_adjoint(w.entries);
}

}  // namespace mimostap
