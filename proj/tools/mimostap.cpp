// Command-line front end: design, sweep, validate and oracle subcommands.

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mimostap/evaluation.hpp"
#include "mimostap/io.hpp"
#include "mimostap/optimizer.hpp"
#include "mimostap/synthesis.hpp"
#include "mimostap/validation.hpp"

namespace fs = std::filesystem;
using namespace mimostap;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Reported with exit code 2: unreadable inputs, bad flags, oversized instances.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string scenario;
    std::size_t rank = 0;
    std::string alphabet = "2";
    std::uint64_t seed = 0;
    std::size_t draws = 100;
    int selection = 2;
    std::string fast_cov = "auto";
    std::size_t threads = 1;
    bool deterministic = false;
    std::string out = ".";
};

struct LoadedScenario {
    Scenario scenario;
    std::string hash;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

LoadedScenario load(const std::string& path) {
    if (path.empty()) throw UsageError("--scenario is required");
    if (!fs::is_regular_file(path)) throw UsageError("scenario file not found: " + path);
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
    try {
        return {scenario_from_json(j), git_blob_hash(text)};
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

CovariancePath parse_path(const std::string& flag) {
    if (flag == "on") return CovariancePath::Fast;
    if (flag == "off") return CovariancePath::Direct;
    return CovariancePath::Auto;
}

std::vector<unsigned> parse_alphabet(const std::string& list) {
    std::vector<unsigned> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        unsigned d = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (ec != std::errc{} || p != tok.data() + tok.size() || d < 2)
            throw UsageError("--alphabet expects a comma list of integers >= 2, got '" + list + "'");
        out.push_back(d);
    }
    if (out.empty()) throw UsageError("--alphabet is empty");
    return out;
}

std::vector<double> parse_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0;
    long long count = -1;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
        throw UsageError("--grid expects lo:hi:count, got '" + spec + "'");
    if (count <= 0) throw UsageError("Doppler grid is empty");
    if (std::abs(lo) > 0.5 || std::abs(hi) > 0.5)
        throw UsageError("Doppler grid must lie within [-0.5, 0.5]");
    return linear_grid(lo, hi, static_cast<std::size_t>(count));
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

json manifest(const std::string& sub, const CommonOptions& o, const LoadedScenario* sc,
              const OptimizerConfig* cfg, const std::string& started) {
    json m = {{"subcommand", sub},
              {"seed", o.seed},
              {"output_dir", o.out},
              {"deterministic", o.deterministic},
              {"threads", o.threads}};
    if (sc) {
        m["scenario_path"] = o.scenario;
        m["scenario_hash"] = sc->hash;
    }
    if (cfg) m["config"] = optimizer_config_to_json(*cfg);
    if (!o.deterministic) {
        m["started_utc"] = started;
        m["finished_utc"] = utc_now();
    }
    return m;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

double seconds_since(std::chrono::steady_clock::time_point t0, bool deterministic) {
    if (deterministic) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_design(const CommonOptions& o) {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const LoadedScenario sc = load(o.scenario);
    const auto alphabet = parse_alphabet(o.alphabet);
    if (o.selection != 1 && o.selection != 2) throw UsageError("--selection must be 1 or 2");
    if (o.draws < 1) throw UsageError("--draws must be >= 1");

    OptimizerConfig cfg;
    cfg.rank = o.rank;
    cfg.seed = o.seed;
    cfg.record_timing = !o.deterministic;
    try {
        cfg.validate(sc.scenario.code_size());
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const fs::path out = prepare_out(o.out);
    const CovarianceModel model(sc.scenario, parse_path(o.fast_cov));
    const DesignOutput design = cyclic_design(model, cfg);
    const double design_time = seconds_since(t0, o.deterministic);
    const ArtifactStamp stamp{o.seed, sc.hash};
    write_file(out / "trace.csv", trace_csv(design.trace, stamp));

    json synth = json::array();
    for (unsigned d : alphabet) {
        const auto ts = std::chrono::steady_clock::now();
        const CandidatePool pool = draw_candidates(design.factor, o.draws, d, o.seed);
        const Selection pick = o.selection == 1 ? select_method1(pool, model, design.filter)
                                                : select_method2(pool, model, o.threads);
        const double sinr = o.selection == 2 ? pick.score : true_sinr(model, pick.waveform.signal());
        write_file(out / ("waveform_D" + std::to_string(d) + ".csv"),
                   waveform_csv(pick.waveform, sc.scenario.geometry.n_tx, stamp));
        synth.push_back({{"alphabet", d},
                         {"selection", o.selection},
                         {"candidate_index", pick.index},
                         {"sinr_db", to_db(sinr)},
                         {"runtime_s", seconds_since(ts, o.deterministic)}});
        std::cout << "D=" << d << " synthesized SINR " << to_db(sinr) << " dB\n";
    }

    json report = {{"seed", o.seed},
                   {"scenario_hash", sc.hash},
                   {"rank", cfg.resolved_rank(model.code_size())},
                   {"fast_covariance", model.uses_fast_path()},
                   {"relaxed_sinr_db", design.relaxed_sinr_db()},
                   {"converged", design.converged},
                   {"outer_iterations", design.trace.wall_times.size()},
                   {"design_runtime_s", design_time},
                   {"draws", o.draws},
                   {"synthesized", synth}};
    write_json(out / "report.json", report);
    write_json(out / "manifest.json", manifest("design", o, &sc, &cfg, started));
    std::cout << "relaxed SINR " << design.relaxed_sinr_db() << " dB ("
              << (design.converged ? "converged" : "iteration cap") << ")\n";
    return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& waveform, const std::string& grid_spec) {
    const std::string started = utc_now();
    const LoadedScenario sc = load(o.scenario);
    const auto grid = parse_grid(grid_spec);
    CVector s;
    std::string label;
    if (waveform == "barker") {
        try {
            s = barker_waveform(sc.scenario);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        label = "barker";
    } else {
        if (!fs::is_regular_file(waveform)) throw UsageError("waveform file not found: " + waveform);
        PolyphaseWaveform wf;
        try {
            wf = parse_waveform_csv(read_file(waveform));
        } catch (const std::exception& e) {
            throw UsageError(waveform + ": " + e.what());
        }
        if (wf.phase_indices.size() != sc.scenario.code_size())
            throw UsageError("waveform length does not match L*N_T of the scenario");
        s = wf.signal();
        label = fs::path(waveform).stem().string();
    }
    const fs::path out = prepare_out(o.out);
    const CovarianceModel model(sc.scenario, parse_path(o.fast_cov));
    const auto points = doppler_sweep(model, {grid, s, label});
    write_file(out / "sweep.csv", sweep_csv(points, label, {o.seed, sc.hash}));
    write_json(out / "manifest.json", manifest("sweep", o, &sc, nullptr, started));
    std::cout << "wrote " << points.size() << " sweep points to " << (out / "sweep.csv").string() << '\n';
    return 0;
}

int cmd_validate(const CommonOptions& o, std::size_t trials) {
    const std::string started = utc_now();
    if (trials < 1) throw UsageError("--trials must be >= 1");
    const auto results = run_validation(trials, o.seed);
    bool ok = true;
    json suites = json::array();
    for (const auto& r : results) {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.trials << " trials, "
                  << r.failures << " failures, worst " << r.worst << " (tol " << r.tolerance << ")\n";
        ok = ok && r.passed();
        suites.push_back({{"name", r.name},
                          {"trials", r.trials},
                          {"failures", r.failures},
                          {"worst", r.worst},
                          {"tolerance", r.tolerance}});
    }
    if (o.out != ".") {
        const fs::path out = prepare_out(o.out);
        write_json(out / "validate.json", {{"seed", o.seed}, {"suites", suites}});
        write_json(out / "manifest.json", manifest("validate", o, nullptr, nullptr, started));
    }
    return ok ? 0 : 1;
}

int cmd_oracle(const CommonOptions& o, const std::string& design_report, bool fix_first) {
    const std::string started = utc_now();
    const LoadedScenario sc = load(o.scenario);
    const unsigned d = parse_alphabet(o.alphabet).front();
    if (oracle_instance_size(sc.scenario.code_size(), d) == 0)
        throw UsageError("instance too large for exhaustive search: " + std::to_string(d) + "^" +
                         std::to_string(sc.scenario.code_size()) + " exceeds 2^20 waveforms");
    const fs::path out = prepare_out(o.out);
    const CovarianceModel model(sc.scenario, parse_path(o.fast_cov));
    const OracleReport rep = exhaustive_oracle(model, d, {fix_first, o.threads});
    json j = oracle_report_to_json(rep, !o.deterministic);
    j["seed"] = o.seed;
    j["scenario_hash"] = sc.hash;
    if (!design_report.empty()) {
        if (!fs::is_regular_file(design_report)) {
            std::cerr << "design report not found: " << design_report << "; gap omitted\n";
        } else {
            const json dr = json::parse(read_file(design_report));
            for (const auto& entry : dr.value("synthesized", json::array()))
                if (entry.value("alphabet", 0u) == d) {
                    const double gap = to_db(rep.best_sinr) - entry.at("sinr_db").get<double>();
                    j["gap_db"] = gap;
                    std::cout << "gap to synthesized waveform " << gap << " dB\n";
                }
        }
    }
    write_json(out / "oracle.json", j);
    write_json(out / "manifest.json", manifest("oracle", o, &sc, nullptr, started));
    std::cout << "exhaustive optimum " << to_db(rep.best_sinr) << " dB over " << rep.enumerated
              << " waveforms\n";
    return 0;
}

void add_common(CLI::App* app, CommonOptions& o, bool scenario) {
    if (scenario) app->add_option("--scenario", o.scenario, "Scenario JSON file");
    app->add_option("--seed", o.seed, "RNG seed");
    app->add_option("--fast-cov", o.fast_cov, "Covariance assembly path")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    app->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--deterministic", o.deterministic, "Omit timings and timestamps from outputs");
    app->add_option("--out", o.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MIMO radar polyphase waveform design for STAP"};
    app.require_subcommand(1);
    CommonOptions o;
    std::string waveform = "barker", grid = "-0.5:0.5:101", design_report;
    std::size_t trials = 20;
    bool fix_first = false;

    auto* design = app.add_subcommand("design", "Relaxed design plus polyphase synthesis");
    add_common(design, o, true);
    design->add_option("--rank", o.rank, "Factor rank (0 = default)");
    design->add_option("--alphabet", o.alphabet, "Comma list of alphabet sizes D");
    design->add_option("--draws", o.draws, "Randomization draws per D");
    design->add_option("--selection", o.selection, "Selection rule")->check(CLI::IsMember({1, 2}));

    auto* sweep = app.add_subcommand("sweep", "SINR versus normalized target Doppler");
    add_common(sweep, o, true);
    sweep->add_option("--waveform", waveform, "Waveform CSV or 'barker'");
    sweep->add_option("--grid", grid, "lo:hi:count");

    auto* validate = app.add_subcommand("validate", "Randomized property suites");
    add_common(validate, o, false);
    validate->add_option("--trials", trials, "Trials per suite");

    auto* oracle = app.add_subcommand("oracle", "Exhaustive search over a small alphabet");
    add_common(oracle, o, true);
    oracle->add_option("--alphabet", o.alphabet, "Alphabet size D");
    oracle->add_option("--design", design_report, "report.json from a design run");
    oracle->add_flag("--fix-first-phase", fix_first, "Pin the first chip to phase 0");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (design->parsed()) return cmd_design(o);
        if (sweep->parsed()) return cmd_sweep(o, waveform, grid);
        if (validate->parsed()) return cmd_validate(o, trials);
        return cmd_oracle(o, design_report, fix_first);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
