#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimostap/evaluation.hpp"
#include "mimostap/io.hpp"
#include "mimostap/optimizer.hpp"
#include "mimostap/synthesis.hpp"
#include "mimostap/validation.hpp"

namespace py = pybind11;
using namespace mimostap;

namespace {

CovariancePath parse_path(const std::string& s) {
    if (s == "auto") return CovariancePath::Auto;
    if (s == "on" || s == "fast") return CovariancePath::Fast;
    if (s == "off" || s == "direct") return CovariancePath::Direct;
    throw std::invalid_argument("fast_cov must be 'auto', 'on' or 'off'");
}

py::dict trace_dict(const RunTrace& tr) {
    py::dict d;
    d["outer"] = tr.outer_objectives;
    d["dinkelbach"] = tr.dinkelbach_objectives;
    d["mm"] = tr.mm_objectives;
    d["wall_times"] = tr.wall_times;
    d["monotonicity_violations"] = count_monotonicity_violations(tr);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MIMO radar polyphase waveform design for STAP";

    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_static("reference", &Scenario::reference)
        .def_static("from_json", [](const std::string& text) { return scenario_from_json(json::parse(text)); })
        .def_static("load", [](const std::string& path) { return load_scenario(path); })
        .def("to_json", [](const Scenario& s) { return scenario_to_json(s).dump(); })
        .def_property_readonly("code_size", &Scenario::code_size)
        .def_property_readonly("snapshot_size", &Scenario::snapshot_size)
        .def_property_readonly("chip_power", &Scenario::chip_power)
        .def_property(
            "target_doppler", [](const Scenario& s) { return s.target.normalized_doppler; },
            [](Scenario& s, double f) {
                s.target.normalized_doppler = f;
                s.target.validate();
            })
        .def("__repr__", [](const Scenario& s) {
            return "<Scenario N_T=" + std::to_string(s.geometry.n_tx) + " N_R=" + std::to_string(s.geometry.n_rx) +
                   " L=" + std::to_string(s.pulses.code_length) + " M=" + std::to_string(s.pulses.m_pulses) + ">";
        });

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_readwrite("rank", &OptimizerConfig::rank)
        .def_readwrite("eps_outer", &OptimizerConfig::eps_outer)
        .def_readwrite("eps_dinkelbach", &OptimizerConfig::eps_dinkelbach)
        .def_readwrite("eps_mm", &OptimizerConfig::eps_mm)
        .def_readwrite("max_outer", &OptimizerConfig::max_outer)
        .def_readwrite("max_dinkelbach", &OptimizerConfig::max_dinkelbach)
        .def_readwrite("max_mm", &OptimizerConfig::max_mm)
        .def_readwrite("seed", &OptimizerConfig::seed)
        .def_readwrite("record_timing", &OptimizerConfig::record_timing);

    py::class_<CovarianceModel>(m, "CovarianceModel")
        .def(py::init([](const Scenario& s, const std::string& fast_cov) {
                 return CovarianceModel(s, parse_path(fast_cov));
             }),
             py::arg("scenario"), py::arg("fast_cov") = "auto")
        .def_property_readonly("uses_fast_path", &CovarianceModel::uses_fast_path)
        .def_property_readonly("scenario", &CovarianceModel::scenario)
        .def("apply_vt", py::overload_cast<const CVector&>(&CovarianceModel::apply_vt, py::const_))
        .def("apply_vt_adjoint", &CovarianceModel::apply_vt_adjoint)
        .def("ru_of_s", &CovarianceModel::ru_of_s)
        .def("ru_of_u",
             [](const CovarianceModel& m, const CMatrix& U, bool fast) {
                 const WaveformFactor u(U, m.scenario().chip_power());
                 return fast ? m.ru_of_u_fast(u) : m.ru_of_u_direct(u);
             },
             py::arg("U"), py::arg("fast") = true)
        .def("ru_of_w",
             [](const CovarianceModel& m, const CVector& w, bool fast) {
                 const FilterVector f{w};
                 return fast ? m.ru_of_w_fast(f) : m.ru_of_w_direct(f);
             },
             py::arg("w"), py::arg("fast") = true)
        .def("jammer_noise_cov", &CovarianceModel::jammer_noise_cov);

    py::class_<DesignOutput>(m, "Design")
        .def_property_readonly("factor", [](const DesignOutput& d) { return d.factor.entries(); })
        .def_property_readonly("filter", [](const DesignOutput& d) { return d.filter.entries; })
        .def_readonly("relaxed_sinr", &DesignOutput::relaxed_sinr)
        .def_property_readonly("relaxed_sinr_db", &DesignOutput::relaxed_sinr_db)
        .def_readonly("converged", &DesignOutput::converged)
        .def_property_readonly("trace", [](const DesignOutput& d) { return trace_dict(d.trace); });

    m.def("default_rank", &default_rank, py::arg("code_size"));
    m.def("to_db", &to_db);

    m.def("design",
          [](const CovarianceModel& model, const OptimizerConfig& cfg) {
              py::gil_scoped_release release;
              return cyclic_design(model, cfg);
          },
          py::arg("model"), py::arg("config") = OptimizerConfig{},
          "Cyclic relaxed design (filter step, Dinkelbach step, MM inner solver).");

    m.def("synthesize",
          [](const CovarianceModel& model, const DesignOutput& d, unsigned alphabet, std::size_t draws,
             std::uint64_t seed, int selection, std::size_t threads) {
              Selection sel;
              {
                  py::gil_scoped_release release;
                  const auto pool = draw_candidates(d.factor, draws, alphabet, seed);
                  sel = selection == 1 ? select_method1(pool, model, d.filter)
                                       : select_method2(pool, model, threads);
              }
              py::dict out;
              out["phase_indices"] = sel.waveform.phase_indices;
              out["signal"] = sel.waveform.signal();
              out["index"] = sel.index;
              out["score"] = sel.score;
              out["scores"] = sel.scores;
              return out;
          },
          py::arg("model"), py::arg("design"), py::arg("alphabet") = 2, py::arg("draws") = 100,
          py::arg("seed") = 0, py::arg("selection") = 2, py::arg("threads") = 1,
          "Randomized synthesis of a polyphase waveform from a relaxed design.");

    m.def("true_sinr", &true_sinr, py::arg("model"), py::arg("s"));
    m.def("barker_waveform", &barker_waveform, py::arg("scenario"));

    m.def("doppler_sweep",
          [](const CovarianceModel& model, const CVector& s, const std::vector<double>& grid) {
              std::vector<double> db;
              for (const auto& p : doppler_sweep(model, {grid, s, ""})) db.push_back(p.sinr_db);
              return db;
          },
          py::arg("model"), py::arg("s"), py::arg("grid"), "True SINR in dB at each normalized Doppler.");

    m.def("exhaustive_oracle",
          [](const CovarianceModel& model, unsigned alphabet, bool fix_first_phase, std::size_t threads) {
              OracleReport rep;
              {
                  py::gil_scoped_release release;
                  rep = exhaustive_oracle(model, alphabet, {fix_first_phase, threads});
              }
              py::dict out;
              out["best_indices"] = rep.best_indices;
              out["best_sinr"] = rep.best_sinr;
              out["enumerated"] = rep.enumerated;
              return out;
          },
          py::arg("model"), py::arg("alphabet") = 2, py::arg("fix_first_phase") = false, py::arg("threads") = 1);

    m.def("validate",
          [](std::size_t trials, std::uint64_t seed) {
              py::list out;
              for (const auto& r : run_validation(trials, seed)) {
                  py::dict d;
                  d["name"] = r.name;
                  d["trials"] = r.trials;
                  d["failures"] = r.failures;
                  d["worst"] = r.worst;
                  d["tolerance"] = r.tolerance;
                  out.append(d);
              }
              return out;
          },
          py::arg("trials") = 20, py::arg("seed") = 0);
}
