#include "mimostap/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace mimostap {

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<double> degrees_to_radians(const std::vector<double>& deg) {
    std::vector<double> out;
    out.reserve(deg.size());
    for (double d : deg) out.push_back(deg_to_rad(d));
    return out;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("scenario document must be a JSON object");
    Scenario s;
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        get_if(g, "n_tx", s.geometry.n_tx);
        get_if(g, "n_rx", s.geometry.n_rx);
        get_if(g, "d_tx", s.geometry.d_tx);
        get_if(g, "d_rx", s.geometry.d_rx);
    }
    if (j.contains("pulses")) {
        const auto& p = j.at("pulses");
        get_if(p, "m_pulses", s.pulses.m_pulses);
        get_if(p, "prf_hz", s.pulses.prf_hz);
        get_if(p, "code_length", s.pulses.code_length);
        get_if(p, "carrier_hz", s.pulses.carrier_hz);
        get_if(p, "bandwidth_hz", s.pulses.bandwidth_hz);
    }
    if (j.contains("target")) {
        const auto& t = j.at("target");
        if (t.contains("doa_deg")) s.target.doa_rad = deg_to_rad(t.at("doa_deg").get<double>());
        get_if(t, "normalized_doppler", s.target.normalized_doppler);
        get_if(t, "amplitude_power", s.target.amplitude_power);
        get_if(t, "range_m", s.target.range_m);
    }
    if (j.contains("clutter")) {
        const auto& c = j.at("clutter");
        get_if(c, "ring_halfwidth", s.clutter.ring_halfwidth);
        get_if(c, "patches_per_ring", s.clutter.patches_per_ring);
        if (c.contains("patch_power")) {
            const auto& pp = c.at("patch_power");
            if (pp.is_array())
                s.clutter.patch_power = pp.get<std::vector<double>>();
            else
                s.clutter.uniform_patch_power = pp.get<double>();
        }
        get_if(c, "platform_speed_mps", s.clutter.platform_speed_mps);
        get_if(c, "platform_height_m", s.clutter.platform_height_m);
        if (c.contains("azimuth_grid_deg"))
            s.clutter.azimuth_grid_rad =
                degrees_to_radians(c.at("azimuth_grid_deg").get<std::vector<double>>());
    }
    get_if(j, "noise_power", s.noise_power);
    get_if(j, "total_energy", s.total_energy);
    if (j.contains("jammers")) {
        for (const auto& jm : j.at("jammers")) {
            Jammer jam;
            jam.doa_rad = deg_to_rad(jm.at("doa_deg").get<double>());
            if (jm.contains("power"))
                jam.power = jm.at("power").get<double>();
            else if (jm.contains("jnr_db"))
                jam.power = s.noise_power * std::pow(10.0, jm.at("jnr_db").get<double>() / 10.0);
            else
                throw std::invalid_argument("jammer entry needs \"power\" or \"jnr_db\"");
            s.jammers.jammers.push_back(jam);
        }
    }
    s.validate();
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["geometry"] = {{"n_tx", s.geometry.n_tx},
                     {"n_rx", s.geometry.n_rx},
                     {"d_tx", s.geometry.d_tx},
                     {"d_rx", s.geometry.d_rx}};
    j["pulses"] = {{"m_pulses", s.pulses.m_pulses},
                   {"prf_hz", s.pulses.prf_hz},
                   {"code_length", s.pulses.code_length},
                   {"carrier_hz", s.pulses.carrier_hz},
                   {"bandwidth_hz", s.pulses.bandwidth_hz}};
    j["target"] = {{"doa_deg", rad_to_deg(s.target.doa_rad)},
                   {"normalized_doppler", s.target.normalized_doppler},
                   {"amplitude_power", s.target.amplitude_power},
                   {"range_m", s.target.range_m}};
    json c = {{"ring_halfwidth", s.clutter.ring_halfwidth},
              {"patches_per_ring", s.clutter.patches_per_ring},
              {"platform_speed_mps", s.clutter.platform_speed_mps},
              {"platform_height_m", s.clutter.platform_height_m}};
    if (s.clutter.patch_power.empty())
        c["patch_power"] = s.clutter.uniform_patch_power;
    else
        c["patch_power"] = s.clutter.patch_power;
    if (!s.clutter.azimuth_grid_rad.empty()) {
        std::vector<double> deg;
        for (double r : s.clutter.azimuth_grid_rad) deg.push_back(rad_to_deg(r));
        c["azimuth_grid_deg"] = deg;
    }
    j["clutter"] = c;
    j["jammers"] = json::array();
    for (const auto& jm : s.jammers.jammers)
        j["jammers"].push_back({{"doa_deg", rad_to_deg(jm.doa_rad)}, {"power", jm.power}});
    j["noise_power"] = s.noise_power;
    j["total_energy"] = s.total_energy;
    return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

OptimizerConfig optimizer_config_from_json(const json& j, OptimizerConfig cfg) {
    get_if(j, "rank", cfg.rank);
    get_if(j, "eps_outer", cfg.eps_outer);
    get_if(j, "eps_dinkelbach", cfg.eps_dinkelbach);
    get_if(j, "eps_mm", cfg.eps_mm);
    get_if(j, "max_outer", cfg.max_outer);
    get_if(j, "max_dinkelbach", cfg.max_dinkelbach);
    get_if(j, "max_mm", cfg.max_mm);
    get_if(j, "seed", cfg.seed);
    return cfg;
}

json optimizer_config_to_json(const OptimizerConfig& cfg) {
    return {{"rank", cfg.rank},
            {"eps_outer", cfg.eps_outer},
            {"eps_dinkelbach", cfg.eps_dinkelbach},
            {"eps_mm", cfg.eps_mm},
            {"max_outer", cfg.max_outer},
            {"max_dinkelbach", cfg.max_dinkelbach},
            {"max_mm", cfg.max_mm},
            {"seed", cfg.seed}};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << contents;
}

std::string git_blob_hash(const std::string& contents) {
    const std::string header = "blob " + std::to_string(contents.size()) + '\0';
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, contents.data(), contents.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

std::string stamp_lines(const ArtifactStamp& stamp) {
    return "# seed=" + std::to_string(stamp.seed) + " scenario_hash=" + stamp.scenario_hash + "\n";
}

}  // namespace

std::string trace_csv(const RunTrace& trace, const ArtifactStamp& stamp) {
    std::ostringstream out;
    out << stamp_lines(stamp);
    out << "outer_iter,dinkelbach_iter,mm_iter,objective,wall_time_s\n";
    for (std::size_t n = 0; n < trace.outer_objectives.size(); ++n) {
        const double wall = n == 0 ? 0.0 : trace.wall_times.at(n - 1);
        out << n << ",,," << format_double(trace.outer_objectives[n]) << ','
            << format_double(wall) << '\n';
    }
    for (std::size_t n = 0; n < trace.dinkelbach_objectives.size(); ++n) {
        const auto& xs = trace.dinkelbach_objectives[n];
        for (std::size_t k = 0; k < xs.size(); ++k)
            out << n << ',' << k << ",," << format_double(xs[k]) << ",\n";
        const auto& mms = trace.mm_objectives[n];
        for (std::size_t k = 0; k < mms.size(); ++k)
            for (std::size_t j = 0; j < mms[k].size(); ++j)
                out << n << ',' << k << ',' << j << ',' << format_double(mms[k][j]) << ",\n";
    }
    return out.str();
}

std::string waveform_csv(const PolyphaseWaveform& wf, std::size_t n_tx, const ArtifactStamp& stamp) {
    if (n_tx == 0 || wf.phase_indices.size() % n_tx != 0)
        throw std::invalid_argument("waveform length is not a multiple of N_T");
    const std::size_t L = wf.phase_indices.size() / n_tx;
    std::ostringstream out;
    out << stamp_lines(stamp);
    out << "# alphabet=" << wf.alphabet_size << " amplitude=" << format_double(wf.amplitude)
        << " n_tx=" << n_tx << " code_length=" << L << '\n';
    for (std::size_t n = 0; n < n_tx; ++n) {
        for (std::size_t l = 0; l < L; ++l) {
            const std::uint32_t k = wf.phase_indices[l * n_tx + n];
            const double rad = 2.0 * kPi * static_cast<double>(k) / wf.alphabet_size;
            out << (l ? "," : "") << k << ',' << format_double(rad);
        }
        out << '\n';
    }
    return out.str();
}

PolyphaseWaveform parse_waveform_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    PolyphaseWaveform wf;
    wf.alphabet_size = 0;
    std::vector<std::vector<std::uint32_t>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream kv(line.substr(1));
            std::string tok;
            while (kv >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "alphabet") wf.alphabet_size = static_cast<unsigned>(std::stoul(val));
                if (key == "amplitude") wf.amplitude = std::stod(val);
            }
            continue;
        }
        std::vector<std::uint32_t> row;
        std::istringstream cells(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(cells, cell, ',')) {
            if (col++ % 2 == 0) row.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || wf.alphabet_size < 2)
        throw std::invalid_argument("waveform CSV needs an '# alphabet=D' header and data rows");
    const std::size_t nt = rows.size(), L = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != L) throw std::invalid_argument("waveform CSV rows differ in length");
    wf.phase_indices.resize(nt * L);
    for (std::size_t n = 0; n < nt; ++n)
        for (std::size_t l = 0; l < L; ++l) {
            if (rows[n][l] >= wf.alphabet_size)
                throw std::invalid_argument("waveform CSV phase index out of range");
            wf.phase_indices[l * nt + n] = rows[n][l];
        }
    return wf;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& label,
                      const ArtifactStamp& stamp) {
    std::ostringstream out;
    out << stamp_lines(stamp);
    out << "f_t,sinr_db,waveform_label\n";
    for (const auto& p : points)
        out << format_double(p.doppler) << ',' << format_double(p.sinr_db) << ',' << label << '\n';
    return out.str();
}

json oracle_report_to_json(const OracleReport& rep, bool include_runtime) {
    json j = {{"alphabet_size", rep.alphabet_size},
              {"best_indices", rep.best_indices},
              {"best_sinr", rep.best_sinr},
              {"best_sinr_db", to_db(rep.best_sinr)},
              {"enumerated", rep.enumerated}};
    j["runtime_s"] = include_runtime ? rep.runtime_s : 0.0;
    return j;
}

void write_matrix_dump(const std::filesystem::path& path, const CMatrix& m) {
    static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double pair[2] = {m(r, c).real(), m(r, c).imag()};
            out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
        }
}

}  // namespace mimostap
