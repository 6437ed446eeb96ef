#pragma once

// Command implementations behind the `mpp` executable. Everything here is
// callable in-process so tests can drive the tool without spawning it.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpp/engine.hpp"
#include "mpp/io.hpp"
#include "mpp/simulate.hpp"
#include "mpp/tasks.hpp"

namespace mpp::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIncomplete = 3 };

/// A manifest with its referenced files loaded and validated.
struct LoadedManifest {
    std::filesystem::path path;
    RunManifest manifest;  ///< input paths resolved against the manifest directory
    TechniqueConfig config;
    TaskSpec task;
    ControllerPolicy policy;
};

/// Throws Error(InvalidConfig) naming the missing or unreadable file, or
/// Error(ParseError) prefixed with the file name.
LoadedManifest load_manifest(const std::filesystem::path& path);

TrajectoryLog simulate_seed(const LoadedManifest& m, std::uint64_t seed);

/// Like evaluate(), but a button run without a hit yields an incomplete
/// result instead of an exception.
TaskResult evaluate_lenient(const TrajectoryLog& log, const TaskSpec& task);

struct CompareColumn {
    std::string label;
    std::string technique;
    std::vector<TaskResult> per_seed;
    double mean = 0.0;  ///< over complete seeds; NaN when none completed
    int incomplete = 0;
};

struct Comparison {
    TaskKind task = TaskKind::Buttons;
    Metric metric = Metric::TotalTime;
    std::vector<std::uint64_t> seeds;
    std::vector<CompareColumn> columns;
};

/// Needs at least two manifests over the same task and seed list; throws
/// Error(InvalidConfig) otherwise. Simulations run on up to `jobs` threads
/// (0 = hardware concurrency); the result does not depend on `jobs`.
Comparison compare(const std::vector<LoadedManifest>& manifests, unsigned jobs = 0);

std::string comparison_table(const Comparison& c);
std::string comparison_json(const Comparison& c);
std::string result_table(const TaskResult& r);

/// Writes the shipped configs, policies, tasks, manifests and samples
/// under `dir`. Output is byte-for-byte reproducible.
void generate_fixtures(const std::filesystem::path& dir);

/// Entry point. Returns one of the ExitCode values.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpp::cli
