#pragma once

/// \file io.hpp
/// Scenario/config JSON, CSV artifacts and content hashing.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "mimostap/evaluation.hpp"
#include "mimostap/optimizer.hpp"
#include "mimostap/synthesis.hpp"

namespace mimostap {

using json = nlohmann::json;

/// Angles are degrees in JSON and radians in memory. Missing keys keep the
/// defaults of Scenario{}; jammers may give either "power" or "jnr_db".
Scenario scenario_from_json(const json& j);
json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

OptimizerConfig optimizer_config_from_json(const json& j, OptimizerConfig base = {});
json optimizer_config_to_json(const OptimizerConfig& cfg);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

/// SHA-1 of "blob <size>\0<contents>", as git computes object ids.
std::string git_blob_hash(const std::string& contents);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Provenance written at the top of every CSV as "# key=value ..." lines.
struct ArtifactStamp {
    std::uint64_t seed = 0;
    std::string scenario_hash;
};

/// Columns: outer_iter,dinkelbach_iter,mm_iter,objective,wall_time_s.
/// Outer rows leave the inner indices blank; inner rows leave wall_time_s blank.
std::string trace_csv(const RunTrace& trace, const ArtifactStamp& stamp);

/// One row per transmit antenna; per chip two columns: phase index and radians.
std::string waveform_csv(const PolyphaseWaveform& wf, std::size_t n_tx, const ArtifactStamp& stamp);
PolyphaseWaveform parse_waveform_csv(const std::string& text);

/// Columns: f_t,sinr_db,waveform_label.
std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& label,
                      const ArtifactStamp& stamp);

json oracle_report_to_json(const OracleReport& rep, bool include_runtime = true);

/// Raw row-major dump of a complex matrix as little-endian float64 (re, im) pairs.
void write_matrix_dump(const std::filesystem::path& path, const CMatrix& m);

}  // namespace mimostap
