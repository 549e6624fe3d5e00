#include "mimostap/synthesis.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "mimostap/evaluation.hpp"
#include "mimostap/parallel.hpp"

namespace mimostap {

cplx polyphase_entry(std::uint32_t index, unsigned alphabet_size, double amplitude) {
    const std::uint64_t k = index % alphabet_size;
    if ((4 * k) % alphabet_size == 0) {
        switch ((4 * k) / alphabet_size) {
            case 0: return {amplitude, 0.0};
            case 1: return {0.0, amplitude};
            case 2: return {-amplitude, 0.0};
            default: return {0.0, -amplitude};
        }
    }
    return std::polar(amplitude, 2.0 * kPi * static_cast<double>(k) / alphabet_size);
}

std::uint32_t quantize_phase(double arg, unsigned alphabet_size) {
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be >= 2");
    double a = std::fmod(arg, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a -= 2.0 * kPi;
    const double step = 2.0 * kPi / alphabet_size;
    const auto level = static_cast<std::uint64_t>(std::floor(a / step + 0.5));
    return static_cast<std::uint32_t>(level % alphabet_size);
}

CVector PolyphaseWaveform::signal() const {
    CVector s(static_cast<Eigen::Index>(phase_indices.size()));
    for (std::size_t i = 0; i < phase_indices.size(); ++i)
        s[static_cast<Eigen::Index>(i)] = polyphase_entry(phase_indices[i], alphabet_size, amplitude);
    return s;
}

CandidatePool draw_candidates(const WaveformFactor& u_star, std::size_t n_draws,
                              unsigned alphabet_size, std::uint64_t seed) {
    if (n_draws < 1) throw std::invalid_argument("number of draws must be >= 1");
    if (alphabet_size < 2) throw std::invalid_argument("alphabet size must be >= 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const CMatrix& U = u_star.entries();
    const double amp = std::sqrt(u_star.chip_power());

    CandidatePool pool;
    pool.draws_seed = seed;
    pool.candidates.reserve(n_draws);
    CVector chi(U.rows());
    for (std::size_t n = 0; n < n_draws; ++n) {
        for (Eigen::Index i = 0; i < chi.size(); ++i) chi[i] = cplx(normal(rng), normal(rng));
        const CVector mixed = U.adjoint() * chi;
        PolyphaseWaveform wf;
        wf.alphabet_size = alphabet_size;
        wf.amplitude = amp;
        wf.phase_indices.resize(static_cast<std::size_t>(mixed.size()));
        for (Eigen::Index i = 0; i < mixed.size(); ++i)
            wf.phase_indices[static_cast<std::size_t>(i)] = quantize_phase(std::arg(mixed[i]), alphabet_size);
        pool.candidates.push_back(std::move(wf));
    }
    return pool;
}

namespace {

Selection pick_best(const CandidatePool& pool, std::vector<double> scores) {
    Selection sel;
    sel.index = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[sel.index]) sel.index = i;
    sel.score = scores[sel.index];
    sel.waveform = pool.candidates[sel.index];
    sel.scores = std::move(scores);
    return sel;
}

}  // namespace

Selection select_method1(const CandidatePool& pool, const CovarianceModel& model,
                         const FilterVector& w_star) {
    if (pool.candidates.empty()) throw std::invalid_argument("candidate pool is empty");
    const CVector q = model.qt_factor_of_w(w_star);
    const CMatrix R = model.ru_of_w(w_star);
    std::vector<double> scores;
    scores.reserve(pool.candidates.size());
    for (const auto& c : pool.candidates) {
        const CVector s = c.signal();
        scores.push_back(std::norm(q.dot(s)) / s.dot(R * s).real());
    }
    return pick_best(pool, std::move(scores));
}

Selection select_method2(const CandidatePool& pool, const CovarianceModel& model,
                         std::size_t threads) {
    if (pool.candidates.empty()) throw std::invalid_argument("candidate pool is empty");
    std::vector<double> scores(pool.candidates.size());
    parallel_for(scores.size(), threads,
                 [&](std::size_t i) { scores[i] = true_sinr(model, pool.candidates[i].signal()); });
    return pick_best(pool, std::move(scores));
}

CVector barker_waveform(const Scenario& scenario) {
    const std::size_t L = scenario.pulses.code_length;
    if (L != 13) throw std::invalid_argument("the Barker baseline requires code_length = 13");
    const std::size_t nt = scenario.geometry.n_tx;
    const CVector a_tx =
        steering_tx(scenario.geometry, scenario.pulses.wavelength_m(), scenario.target.doa_rad);
    const double amp = std::sqrt(scenario.chip_power());
    CVector s(static_cast<Eigen::Index>(L * nt));
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t n = 0; n < nt; ++n)
            s[static_cast<Eigen::Index>(l * nt + n)] =
                amp * kBarker13[l] * std::conj(a_tx[static_cast<Eigen::Index>(n)]);
    return s;
}

}  // namespace mimostap
