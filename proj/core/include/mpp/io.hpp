#pragma once

// Text file formats. All parsers throw Error(ParseError) with a line number
// (or Error(InvalidConfig) when a well-formed file violates a domain rule).
//
//   config / policy / manifest   "key = value" lines, '#' comments, format_version = 1
//   task / result                one JSON document
//   samples                      "t hx hy hz sx sy sz" per line, '#' comments
//   log / frames                 newline-delimited JSON: header line, then one record
//                                per line; numbers carry 9 significant digits

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mpp/engine.hpp"
#include "mpp/simulate.hpp"
#include "mpp/tasks.hpp"

namespace mpp {

inline constexpr int kFormatVersion = 1;

std::string serialize_config(const TechniqueConfig& cfg);
TechniqueConfig parse_config(std::string_view text);
/// FNV-1a 64 of the serialized config, 16 hex digits.
std::string config_hash(const TechniqueConfig& cfg);

std::string serialize_policy(const ControllerPolicy& policy);
ControllerPolicy parse_policy(std::string_view text);

std::string serialize_task(const TaskSpec& task);
TaskSpec parse_task(std::string_view text);

std::string serialize_samples(const std::vector<HandSample>& samples);
/// Does not check timestamp order; the engine does. `lines`, when given,
/// receives the 1-based line number of each returned sample.
std::vector<HandSample> parse_samples(std::string_view text, std::vector<std::size_t>* lines = nullptr);

std::string serialize_log(const TrajectoryLog& log);
TrajectoryLog parse_log(std::string_view text);

std::string serialize_frames(const TechniqueConfig& cfg, const std::vector<FrameOutput>& frames);
std::vector<FrameOutput> parse_frames(std::string_view text);

std::string serialize_result(const TaskResult& result);
TaskResult parse_result(std::string_view text);

struct RunManifest {
    std::string label = "run";
    std::filesystem::path config;
    std::filesystem::path task;
    std::filesystem::path policy;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path output_dir = "out";
    TremorModel tremor;  ///< seed field is replaced by each entry of `seeds`
    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// Relative paths stay as written. resolve_paths() anchors the input files
/// (config, task, policy) at the manifest's directory; output_dir is left
/// relative to the working directory.
std::string serialize_manifest(const RunManifest& m);
RunManifest parse_manifest(std::string_view text);
RunManifest resolve_paths(RunManifest m, const std::filesystem::path& base_dir);

/// Shortest decimal that parses back to exactly x.
std::string format_exact(double x);
/// x printed with 9 significant digits.
std::string format_sig9(double x);
/// x rounded to what format_sig9 writes.
double quantize9(double x);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mpp
