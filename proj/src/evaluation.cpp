#include "mimostap/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mimostap/parallel.hpp"
#include "mimostap/synthesis.hpp"

namespace mimostap {

namespace {

Eigen::LLT<CMatrix> factor_interference(const CMatrix& R) {
    Eigen::LLT<CMatrix> llt(R);
    if (llt.info() != Eigen::Success)
        throw NumericalError("interference covariance is not positive definite");
    return llt;
}

}  // namespace

double to_db(double linear) { return 10.0 * std::log10(linear); }

double true_sinr(const CovarianceModel& model, const CVector& s) {
    const auto llt = factor_interference(model.ru_of_s(s));
    const CVector v = model.apply_vt(s);
    const CVector x = llt.solve(v);
    return model.scenario().target.amplitude_power * v.dot(x).real();
}

FilterVector optimal_filter(const CovarianceModel& model, const CVector& s, bool mvdr) {
    if (s.squaredNorm() == 0.0) throw std::invalid_argument("waveform must be nonzero");
    const auto llt = factor_interference(model.ru_of_s(s));
    const CVector v = model.apply_vt(s);
    CVector w = llt.solve(v);
    if (mvdr)
        w /= std::conj(w.dot(v));  // (v^H R^{-1} v)^{-1} is real; keeps w^H v = 1
    else
        w.normalize();
    return {std::move(w)};
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    for (std::size_t i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

std::vector<SweepPoint> doppler_sweep(const CovarianceModel& model, const SweepSpec& sweep) {
    for (double f : sweep.doppler_grid)
        if (std::abs(f) > 0.5) throw std::invalid_argument("Doppler grid must lie within [-0.5, 0.5]");
    const auto llt = factor_interference(model.ru_of_s(sweep.waveform));
    const double gain = model.scenario().target.amplitude_power;
    std::vector<SweepPoint> out;
    out.reserve(sweep.doppler_grid.size());
    for (double f : sweep.doppler_grid) {
        const CVector v = model.apply_vt(sweep.waveform, 2.0 * kPi * f);
        out.push_back({f, to_db(gain * v.dot(llt.solve(v)).real())});
    }
    return out;
}

std::uint64_t oracle_instance_size(std::size_t code_size, unsigned alphabet_size) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < code_size; ++i) {
        total *= alphabet_size;
        if (total > kOracleLimit) return 0;
    }
    return total;
}

OracleReport exhaustive_oracle(const CovarianceModel& model, unsigned alphabet_size,
                               const OracleOptions& options) {
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be >= 2");
    const std::size_t n = model.code_size();
    const std::uint64_t total = oracle_instance_size(n, alphabet_size);
    if (total == 0)
        throw std::length_error("exhaustive search exceeds 2^20 waveforms (D^(L*N_T) too large)");
    const auto t0 = std::chrono::steady_clock::now();

    const std::uint64_t count = options.fix_first_phase ? total / alphabet_size : total;
    const double amp = std::sqrt(model.scenario().chip_power());
    // Enumeration index e maps to digits in base D, least significant digit at
    // position n-1, so the first chip varies slowest.
    auto indices_of = [&](std::uint64_t e) {
        std::vector<std::uint32_t> idx(n, 0);
        for (std::size_t i = n; i-- > 0 && e > 0;) {
            idx[i] = static_cast<std::uint32_t>(e % alphabet_size);
            e /= alphabet_size;
        }
        return idx;
    };

    std::vector<double> values(count);
    parallel_for(count, options.threads, [&](std::size_t e) {
        PolyphaseWaveform wf{indices_of(e), alphabet_size, amp};
        values[e] = true_sinr(model, wf.signal());
    });

    std::uint64_t best = 0;
    for (std::uint64_t e = 1; e < count; ++e)
        if (values[e] > values[best]) best = e;

    OracleReport rep;
    rep.best_indices = indices_of(best);
    rep.alphabet_size = alphabet_size;
    rep.best_sinr = values[best];
    rep.enumerated = count;
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace mimostap
