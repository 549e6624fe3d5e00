#include "mimostap/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace mimostap {

namespace {

using Index = Eigen::Index;

double quadratic_trace(const CMatrix& U, const CMatrix& K) {
    return (U * K).cwiseProduct(U.conjugate()).sum().real();
}

Eigen::LLT<CMatrix> factor_pd(const CMatrix& R) {
    Eigen::LLT<CMatrix> llt(R);
    if (llt.info() != Eigen::Success)
        throw NumericalError("interference covariance is not positive definite (Cholesky failed)");
    const auto diag = llt.matrixLLT().diagonal().real();
    if (!(diag.minCoeff() > 0.0) || !diag.allFinite())
        throw NumericalError("interference covariance is not positive definite (Cholesky failed)");
    return llt;
}

}  // namespace

std::size_t default_rank(std::size_t code_size) {
    const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(code_size + 1))));
    return root > 1 ? root - 1 : 1;
}

std::size_t OptimizerConfig::resolved_rank(std::size_t code_size) const {
    return rank == 0 ? default_rank(code_size) : rank;
}

void OptimizerConfig::validate(std::size_t code_size) const {
    if (!(eps_outer > 0.0) || !(eps_dinkelbach > 0.0) || !(eps_mm > 0.0))
        throw std::invalid_argument("optimizer tolerances must be > 0");
    const std::size_t r = resolved_rank(code_size);
    if (r < 1 || r > code_size) throw std::invalid_argument("rank must lie in [1, L*N_T]");
    if (max_outer < 1 || max_dinkelbach < 1 || max_mm < 1)
        throw std::invalid_argument("iteration caps must be >= 1");
}

double DesignOutput::relaxed_sinr_db() const { return 10.0 * std::log10(relaxed_sinr); }

GeneralizedEigenpair largest_generalized_eigpair(const CMatrix& Q, const CMatrix& R) {
    if (Q.rows() != Q.cols() || R.rows() != R.cols() || Q.rows() != R.rows())
        throw std::invalid_argument("generalized eigenproblem needs square matrices of equal order");
    const auto llt = factor_pd(R);
    const auto Lo = llt.matrixL();
    // C = L^{-1} Q L^{-H}
    const CMatrix X = Lo.solve(Q);
    CMatrix C = Lo.solve(CMatrix(X.adjoint())).adjoint();
    hermitian_symmetrize(C);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(C);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
    const Index top = C.rows() - 1;
    GeneralizedEigenpair out;
    out.value = es.eigenvalues()[top];
    out.vector = llt.matrixU().solve(CVector(es.eigenvectors().col(top)));
    out.vector.normalize();
    return out;
}

GeneralizedEigenpair largest_generalized_eigpair_lowrank(const CMatrix& F, const CMatrix& R) {
    if (R.rows() != R.cols() || F.rows() != R.rows())
        throw std::invalid_argument("low-rank generalized eigenproblem dimension mismatch");
    const auto llt = factor_pd(R);
    const CMatrix Y = llt.matrixL().solve(F);
    CMatrix small = Y.adjoint() * Y;
    hermitian_symmetrize(small);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(small);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
    const Index top = small.rows() - 1;
    GeneralizedEigenpair out;
    out.value = es.eigenvalues()[top];
    out.vector = llt.matrixU().solve(CVector(Y * es.eigenvectors().col(top)));
    out.vector.normalize();
    return out;
}

FilterVector filter_step(const CovarianceModel& model, const WaveformFactor& u) {
    const CMatrix F = model.qt_factor_of_u(u);
    const CMatrix R = model.ru_of_u(u);
    return {largest_generalized_eigpair_lowrank(F, R).vector};
}

MmResult mm_quadratic_maximize(const CMatrix& K, WaveformFactor u0, double eps_mm,
                               std::size_t max_mm) {
    if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != u0.code_size())
        throw std::invalid_argument("MM: K order must equal L*N_T");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(K, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
    const double k_min = es.eigenvalues().minCoeff();
    const double k_max = es.eigenvalues().maxCoeff();
    const double k_norm = std::max(std::abs(k_min), std::abs(k_max));
    const double margin = 1e-12 * k_norm;

    CMatrix k_pos = K;
    k_pos.diagonal().array() -= (k_min - margin);
    const double k_pos_norm = k_max - k_min + margin;

    const double ps = u0.chip_power();
    const double amp = std::sqrt(ps);
    const double energy = ps * static_cast<double>(u0.code_size());
    const double tie = 1e-14 * amp * k_pos_norm;
    const double floor_scale = 1e-14 * std::max(k_norm, 1e-300) * energy;

    MmResult res{std::move(u0), {}, k_norm * energy};
    CMatrix& U = res.factor.entries();
    double f = quadratic_trace(U, K);
    res.objectives.push_back(f);
    CMatrix B(U.rows(), U.cols());
    for (std::size_t j = 0; j < max_mm; ++j) {
        B.noalias() = U * k_pos;
        for (Index l = 0; l < U.cols(); ++l) {
            const double nb = B.col(l).norm();
            if (nb > tie) U.col(l) = (amp / nb) * B.col(l);
        }
        const double f_new = quadratic_trace(U, K);
        res.objectives.push_back(f_new);
        const double scale = std::max({std::abs(f_new), std::abs(f), floor_scale});
        const bool done = std::abs(f_new - f) <= eps_mm * scale;
        f = f_new;
        if (done) break;
    }
    return res;
}

DinkelbachResult dinkelbach_u_step(const CovarianceModel& model, const FilterVector& w,
                                   WaveformFactor u0, const OptimizerConfig& cfg) {
    const CVector q = model.qt_factor_of_w(w);
    const CMatrix R = model.ru_of_w(w);
    const CMatrix Qt = q * q.adjoint();
    const double ps = u0.chip_power();

    auto ratio = [&](const CMatrix& U, double& numerator) {
        numerator = (U * q).squaredNorm();
        const double den = quadratic_trace(U, R);
        if (!(den > 0.0)) throw NumericalError("Dinkelbach denominator is not positive");
        return numerator / den;
    };

    DinkelbachResult res{std::move(u0), {}, {}, {}, 0.0, 0.0};
    double num = 0.0;
    double x = ratio(res.factor.entries(), num);
    res.ratios.push_back(x);
    res.max_feasibility_error = res.factor.feasibility_error() / ps;
    for (std::size_t k = 0; k < cfg.max_dinkelbach; ++k) {
        CMatrix K = Qt - x * R;
        hermitian_symmetrize(K);
        if (num > 0.0)
            res.max_entry_residual = std::max(
                res.max_entry_residual, std::abs(quadratic_trace(res.factor.entries(), K)) / num);
        auto mm = mm_quadratic_maximize(K, std::move(res.factor), cfg.eps_mm, cfg.max_mm);
        res.factor = std::move(mm.factor);
        res.mm_objectives.push_back(std::move(mm.objectives));
        res.mm_scales.push_back(mm.scale);
        res.max_feasibility_error =
            std::max(res.max_feasibility_error, res.factor.feasibility_error() / ps);
        const double x_new = ratio(res.factor.entries(), num);
        res.ratios.push_back(x_new);
        const bool done = (x_new - x) / x_new < cfg.eps_dinkelbach;
        x = x_new;
        if (done) break;
    }
    return res;
}

DesignOutput cyclic_design(const CovarianceModel& model, const OptimizerConfig& cfg) {
    cfg.validate(model.code_size());
    std::mt19937_64 rng(cfg.seed);
    auto u0 = WaveformFactor::random(cfg.resolved_rank(model.code_size()), model.code_size(),
                                     model.scenario().chip_power(), rng);
    return cyclic_design(model, cfg, std::move(u0));
}

DesignOutput cyclic_design(const CovarianceModel& model, const OptimizerConfig& cfg,
                           WaveformFactor initial) {
    cfg.validate(model.code_size());
    if (initial.code_size() != model.code_size())
        throw std::invalid_argument("initial factor width must equal L*N_T");
    using clock = std::chrono::steady_clock;

    DesignOutput out;
    out.factor = std::move(initial);
    RunTrace& tr = out.trace;
    double g_prev = 0.0;
    for (std::size_t n = 0; n < cfg.max_outer; ++n) {
        const auto t0 = clock::now();
        DinkelbachResult dk;
        try {
            out.filter = filter_step(model, out.factor);
            dk = dinkelbach_u_step(model, out.filter, std::move(out.factor), cfg);
        } catch (const NumericalError& e) {
            throw NumericalError("outer iteration " + std::to_string(n) + ": " + e.what());
        }
        if (n == 0) {
            g_prev = dk.ratios.front();
            tr.outer_objectives.push_back(g_prev);
        }
        out.factor = std::move(dk.factor);
        const double g = dk.ratios.back();
        tr.outer_objectives.push_back(g);
        tr.dinkelbach_objectives.push_back(std::move(dk.ratios));
        tr.mm_objectives.push_back(std::move(dk.mm_objectives));
        tr.mm_scales.push_back(std::move(dk.mm_scales));
        tr.max_entry_residual = std::max(tr.max_entry_residual, dk.max_entry_residual);
        tr.max_feasibility_error = std::max(tr.max_feasibility_error, dk.max_feasibility_error);
        tr.wall_times.push_back(
            cfg.record_timing ? std::chrono::duration<double>(clock::now() - t0).count() : 0.0);
        const bool done = (g - g_prev) / g <= cfg.eps_outer;
        g_prev = g;
        if (done) {
            out.converged = true;
            break;
        }
    }
    out.relaxed_sinr = model.scenario().target.amplitude_power * g_prev;
    return out;
}

}  // namespace mimostap
