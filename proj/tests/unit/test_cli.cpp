#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "mpp/fixtures.hpp"
#include "mpp/io.hpp"

using namespace mpp;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = MPP_FIXTURE_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("mpp-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome mpp_run(std::vector<std::string> args) {
    args.insert(args.begin(), "mpp");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string manifest_at(const fs::path& dir, const std::string& label, const std::string& cfg,
                        const std::string& task, const std::string& policy, const std::vector<std::uint64_t>& seeds) {
    RunManifest m;
    m.label = label;
    m.config = kFixtures / "configs" / cfg;
    m.task = task.find('/') == std::string::npos ? kFixtures / "tasks" / task : fs::path(task);
    m.policy = kFixtures / "policies" / policy;
    m.seeds = seeds;
    m.output_dir = dir / "out";
    const fs::path p = dir / (label + ".manifest");
    write_file_atomic(p, serialize_manifest(m));
    return p.string();
}

}  // namespace

TEST_CASE("gen-fixtures reproduces the shipped fixtures byte for byte") {
    TempDir tmp;
    REQUIRE(mpp_run({"gen-fixtures", tmp.path.string()}).code == cli::kExitOk);
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(tmp.path)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), tmp.path);
        CAPTURE(rel.string());
        REQUIRE(fs::exists(kFixtures / rel));
        CHECK(read_file(entry.path()) == read_file(kFixtures / rel));
        ++files;
    }
    std::size_t shipped = 0;
    for (const auto& entry : fs::recursive_directory_iterator(kFixtures)) shipped += entry.is_regular_file();
    CHECK(files == shipped);
}

TEST_CASE("shipped fixtures parse") {
    for (const auto& entry : fs::directory_iterator(kFixtures / "manifests")) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(cli::load_manifest(entry.path()));
    }
}

TEST_CASE("simulate: demo manifest, determinism, errors") {
    TempDir tmp;
    const auto demo = (kFixtures / "manifests" / "demo.manifest").string();
    const auto a = mpp_run({"simulate", demo, "-o", (tmp.path / "a").string()});
    REQUIRE(a.code == cli::kExitOk);
    CHECK(a.out.find("demo") != std::string::npos);
    REQUIRE(fs::exists(tmp.path / "a" / "demo-s1.log"));
    REQUIRE(fs::exists(tmp.path / "a" / "demo-s1.result.json"));
    REQUIRE(mpp_run({"simulate", demo, "-o", (tmp.path / "b").string()}).code == cli::kExitOk);
    CHECK(read_file(tmp.path / "a" / "demo-s1.log") == read_file(tmp.path / "b" / "demo-s1.log"));

    const auto result = parse_result(read_file(tmp.path / "a" / "demo-s1.result.json"));
    CHECK(result.complete);
    const auto re = mpp_run({"metrics", (tmp.path / "a" / "demo-s1.log").string(),
                             (kFixtures / "tasks" / "task1.json").string(), "-o", (tmp.path / "r.json").string()});
    CHECK(re.code == cli::kExitOk);
    CHECK(parse_result(read_file(tmp.path / "r.json")) == result);

    const auto missing = manifest_at(tmp.path, "missing", "HA.cfg", (tmp.path / "nope.json").string(),
                                     "two_phase.policy", {1});
    const auto m = mpp_run({"simulate", missing});
    CHECK(m.code == cli::kExitConfig);
    CHECK(m.err.find("nope.json") != std::string::npos);

    const auto timeouts = manifest_at(tmp.path, "coarse", "HA.cfg", "task1.json", "fixed_coarse.policy", {1});
    CHECK(mpp_run({"simulate", timeouts}).code == cli::kExitIncomplete);
    CHECK(fs::exists(tmp.path / "out" / "coarse-s1.log"));
}

TEST_CASE("replay") {
    TempDir tmp;
    const auto cfg = (kFixtures / "configs" / "HR.cfg").string();

    write_file_atomic(tmp.path / "empty.samples", "");
    const auto empty = mpp_run({"replay", (tmp.path / "empty.samples").string(), "-c", cfg});
    CHECK(empty.code == cli::kExitOk);
    CHECK(parse_frames(empty.out).empty());

    write_file_atomic(tmp.path / "back.samples", "0 0.2 1.5 0.4 0 1.4 0\n# note\n0.1 0.2 1.5 0.4 0 1.4 0\n0.05 0.2 1.5 0.4 0 1.4 0\n");
    const auto back = mpp_run({"replay", (tmp.path / "back.samples").string(), "-c", cfg});
    CHECK(back.code == cli::kExitConfig);
    CHECK(back.err.find("line 4") != std::string::npos);

    write_file_atomic(tmp.path / "bad.samples", "0 0.2 1.5 0.4 0 1.4\n");
    const auto bad = mpp_run({"replay", (tmp.path / "bad.samples").string(), "-c", cfg});
    CHECK(bad.code == cli::kExitConfig);
    CHECK(bad.err.find("line 1") != std::string::npos);

    const auto samples = kFixtures / "samples" / "flex_stretch.samples";
    const auto ok = mpp_run({"replay", samples.string(), "-c", cfg, "-o", (tmp.path / "f.frames").string()});
    CHECK(ok.code == cli::kExitOk);
    CHECK(parse_frames(read_file(tmp.path / "f.frames")).size() == parse_samples(read_file(samples)).size());
}

TEST_CASE("metrics") {
    TempDir tmp;
    // Trailing a LR track by 15 px.
    TaskSpec task;
    task.kind = TaskKind::HitMoving;
    task.tracks = {{TrackDirection::LR, {500, 540}, {1500, 540}, 200.0, 15.0}};
    TrajectoryLog log;
    log.config = fixtures::technique("HA");
    log.task = TaskKind::HitMoving;
    log.records.emplace_back(LogEvent{EventKind::RunStart, 0.0, 0, {}});
    for (int i = 0; i <= 150; ++i) {
        FrameOutput f;
        f.t = i / 30.0;
        f.pointer = task.tracks[0].position_at(f.t) - Vec2{15.0, 0.0};
        log.records.emplace_back(f);
    }
    log.records.emplace_back(LogEvent{EventKind::RunEnd, 5.0, 0, {}});
    write_file_atomic(tmp.path / "t3.json", serialize_task(task));
    write_file_atomic(tmp.path / "t3.log", serialize_log(log));
    const auto r = mpp_run({"metrics", (tmp.path / "t3.log").string(), (tmp.path / "t3.json").string(), "-o",
                            (tmp.path / "t3.result.json").string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(parse_result(read_file(tmp.path / "t3.result.json")).aggregate == doctest::Approx(15.0).epsilon(0.5 / 15));
    CHECK(r.out.find("minimal_error") != std::string::npos);

    const auto mismatch = mpp_run({"metrics", (tmp.path / "t3.log").string(), (kFixtures / "tasks" / "task1.json").string()});
    CHECK(mismatch.code == cli::kExitConfig);
}

TEST_CASE("compare") {
    TempDir tmp;
    const auto ha = manifest_at(tmp.path, "HA", "HA.cfg", "task3.json", "two_phase.policy", {1, 2, 3});
    const auto ha2 = manifest_at(tmp.path, "HA2", "HA.cfg", "task3.json", "two_phase.policy", {1, 2, 3});
    const auto base = manifest_at(tmp.path, "base", "baseline.cfg", "task3.json", "fixed_coarse.policy", {1, 2, 3});
    const auto other = manifest_at(tmp.path, "t1", "HA.cfg", "task1.json", "two_phase.policy", {1, 2, 3});
    const auto seeds = manifest_at(tmp.path, "seeds", "HA.cfg", "task3.json", "two_phase.policy", {1, 2});

    const auto json_path = (tmp.path / "cmp.json").string();
    const auto c = mpp_run({"compare", ha, ha2, base, "--json", json_path, "-j", "3"});
    REQUIRE(c.code == cli::kExitOk);
    CHECK(c.out.find("HA2") != std::string::npos);
    const auto j = nlohmann::json::parse(read_file(json_path));
    CHECK(j["columns"].size() == 3);
    CHECK(j["columns"][0]["per_seed"] == j["columns"][1]["per_seed"]);
    CHECK(j["metric"] == "minimal_error");

    std::vector<cli::LoadedManifest> ms{cli::load_manifest(ha), cli::load_manifest(base)};
    const auto serial = cli::compare(ms, 1);
    const auto parallel = cli::compare(ms, 4);
    CHECK(cli::comparison_json(serial) == cli::comparison_json(parallel));

    CHECK(mpp_run({"compare", ha}).code == cli::kExitConfig);
    CHECK(mpp_run({"compare", ha, other}).code == cli::kExitConfig);
    CHECK(mpp_run({"compare", ha, seeds}).code == cli::kExitConfig);
}

TEST_CASE("usage") {
    CHECK(mpp_run({}).code == cli::kExitConfig);
    CHECK(mpp_run({"frobnicate"}).code == cli::kExitConfig);
    CHECK(mpp_run({"simulate"}).code == cli::kExitConfig);
    const auto help = mpp_run({"--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("gen-fixtures") != std::string::npos);
    const auto version = mpp_run({"--version"});
    CHECK(version.code == cli::kExitOk);
    CHECK(version.out.find("file format 1") != std::string::npos);
}
