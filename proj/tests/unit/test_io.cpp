#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "mpp/error.hpp"
#include "mpp/fixtures.hpp"
#include "mpp/io.hpp"

using namespace mpp;

namespace {

template <typename Fn>
std::string error_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

TechniqueConfig odd_config() {
    auto c = fixtures::technique("VR");
    c.scheme = PrecisionScheme::nonlinear({{0.0, 1.0}, {0.1 + 1e-17, 1.5}, {0.7, 7.25}, {1.0, 20.0}});
    c.volume.vertical = {0.75, 1.85};
    c.display = {1920, 1200};
    c.clutch = {7, 0.4, 2, ClutchInequality::Above};
    c.feedback = {33.3, 0.02};
    c.gain_base = 1234.5678;
    c.smoothing_alpha = 1.0 / 3.0;
    c.prediction_lead = 2.0;
    c.speed_threshold = 777.0;
    c.hysteresis_margin = 0.0;
    return c;
}

}  // namespace

TEST_CASE("config round-trip") {
    for (const auto& c : {fixtures::technique("VA"), fixtures::technique("VR"), fixtures::technique("HA"),
                          fixtures::technique("HR"), fixtures::baseline(), odd_config()}) {
        const std::string text = serialize_config(c);
        const auto back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
        CHECK(config_hash(back) == config_hash(c));
    }
    auto lin = fixtures::technique("HA");
    lin.scheme = PrecisionScheme::default_linear();
    CHECK(parse_config(serialize_config(lin)) == lin);
    CHECK(config_hash(fixtures::technique("HA")) != config_hash(fixtures::technique("HR")));
    CHECK(config_hash(fixtures::technique("HA")).size() == 16);
}

TEST_CASE("config parse errors") {
    const std::string good = serialize_config(fixtures::technique("HA"));
    CHECK(error_of([&] { parse_config(good + "bogus = 1\n"); }).find("bogus") != std::string::npos);
    CHECK(error_of([&] { parse_config("format_version = 2\n"); }).find("version") != std::string::npos);
    CHECK_FALSE(error_of([&] { parse_config("technique = HA\n"); }).empty());
    std::string bad = good;
    bad.replace(bad.find("gain_base = 3840"), 16, "gain_base = abc");
    CHECK(error_of([&] { parse_config(bad); }).find("line") != std::string::npos);
    std::string neg = good;
    neg.replace(neg.find("gain_base = 3840"), 16, "gain_base = -5");
    CHECK_THROWS_AS(parse_config(neg), Error);
    CHECK_THROWS_AS(parse_config(good + "gain_base = 1\n"), Error);  // duplicate key
}

TEST_CASE("technique code must agree with mapping and adjustment") {
    std::string text = serialize_config(fixtures::technique("HA"));
    text.replace(text.find("technique = HA"), 14, "technique = VR");
    CHECK_THROWS_AS(parse_config(text), Error);
}

TEST_CASE("policy and manifest round-trip") {
    for (const auto& p : {fixtures::two_phase(), fixtures::fixed_coarse(), fixtures::tracking()}) {
        CHECK(parse_policy(serialize_policy(p)) == p);
    }
    RunManifest m;
    m.label = "t3-HA";
    m.config = "../configs/HA.cfg";
    m.task = "tasks/task3.json";
    m.policy = "/abs/two_phase.policy";
    m.seeds = {1, 2, 30};
    m.output_dir = "out/x";
    m.tremor.amplitude = 0.0031;
    CHECK(parse_manifest(serialize_manifest(m)) == m);
    RunManifest defaults;
    defaults.config = "c.cfg";
    defaults.task = "t.json";
    defaults.policy = "p.policy";
    CHECK(parse_manifest(serialize_manifest(defaults)) == defaults);

    const auto r = resolve_paths(m, "/data/manifests");
    CHECK(r.config == std::filesystem::path("/data/manifests/../configs/HA.cfg"));
    CHECK(r.policy == std::filesystem::path("/abs/two_phase.policy"));
    CHECK(r.output_dir == m.output_dir);

    CHECK_THROWS_AS(parse_manifest("format_version = 1\nconfig = a\ntask = b\n"), Error);
    CHECK_THROWS_AS(parse_manifest(serialize_manifest(m) + "seedz = 1\n"), Error);
}

TEST_CASE("task round-trip") {
    for (const auto& t : {fixtures::buttons(), fixtures::erase(), fixtures::moving(TaskKind::HitMoving),
                          fixtures::moving(TaskKind::TrackMoving, {}, 500.0, 95.5, 12.0)}) {
        const std::string text = serialize_task(t);
        CHECK(parse_task(text) == t);
        CHECK(serialize_task(parse_task(text)) == text);
    }
    CHECK_THROWS_AS(parse_task("{\"format\":\"mpp-task\",\"version\":1,\"kind\":\"nope\"}"), Error);
    CHECK_THROWS_AS(parse_task("{ not json"), Error);
}

TEST_CASE("samples round-trip and errors") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<HandSample> s;
    for (int i = 0; i < 200; ++i) s.push_back({i / 30.0 + 1e-13 * u(rng), {u(rng), u(rng), u(rng)}, {u(rng), 1.4, 0}});
    CHECK(parse_samples(serialize_samples(s)) == s);
    CHECK(parse_samples("").empty());

    std::vector<std::size_t> lines;
    const auto with_comments = parse_samples("# header\n\n0 1 2 3 4 5 6\n# x\n1 1 2 3 4 5 6\n", &lines);
    CHECK(with_comments.size() == 2);
    CHECK(lines == std::vector<std::size_t>{3, 5});
    CHECK(error_of([] { parse_samples("0 1 2 3 4 5 6\n1 2 3\n"); }).find("line 2") != std::string::npos);
    CHECK(error_of([] { parse_samples("0 1 2 3 4 5 nan\n"); }).find("line 1") != std::string::npos);
}

TEST_CASE("log round-trip on the 9-digit grid") {
    TremorModel tremor;
    const auto task = fixtures::buttons();
    const auto log = run_controller(task, fixtures::technique("HR"), fixtures::two_phase(), tremor);
    const std::string text = serialize_log(log);
    const auto back = parse_log(text);
    CHECK(back.config == log.config);
    CHECK(back.task == log.task);
    CHECK(back.records.size() == log.records.size());
    CHECK(serialize_log(back) == text);
    CHECK(parse_log(serialize_log(back)) == back);

    // Values move by at most the 9-digit rounding.
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        if (const auto* f = std::get_if<FrameOutput>(&log.records[i])) {
            const auto& g = std::get<FrameOutput>(back.records[i]);
            CHECK(g.pointer.x == quantize9(f->pointer.x));
            CHECK(std::abs(g.pointer.x - f->pointer.x) <= 1e-8 * std::max(1.0, std::abs(f->pointer.x)));
            CHECK(g.frozen == f->frozen);
            CHECK(g.feedback.rings.has_value() == f->feedback.rings.has_value());
        }
    }
    const auto first_line = text.substr(0, text.find('\n'));
    CHECK(first_line.find(config_hash(log.config)) != std::string::npos);
    CHECK(first_line.find("\"version\":1") != std::string::npos);

    CHECK_THROWS_AS(parse_log(text + "{\"type\":\"frame\"}\n"), Error);
    CHECK(error_of([&] { parse_log(text.substr(0, text.find('\n') + 1) + "garbage\n"); }).find("line 2") !=
          std::string::npos);
}

TEST_CASE("frames and result round-trip") {
    const auto cfg = fixtures::technique("VA");
    Engine e(cfg);
    std::vector<FrameOutput> frames;
    for (int i = 0; i < 50; ++i) frames.push_back(e.step({i / 30.0, {0.3 * std::sin(i * 0.2), 1.0 + 0.01 * i, 0.5}, {}}));
    const std::string text = serialize_frames(cfg, frames);
    const auto back = parse_frames(text);
    CHECK(back.size() == frames.size());
    CHECK(serialize_frames(cfg, back) == text);
    CHECK(parse_frames(serialize_frames(cfg, {})).empty());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : {TaskResult{Metric::TotalTime, {1500.25, 2500.0}, 4000.25, true},
                          TaskResult{Metric::MinimalError, {1.0, nan, 2.0, 3.0}, nan, false},
                          TaskResult{Metric::CompletionTime, {nan}, nan, false}}) {
        CHECK(parse_result(serialize_result(r)) == r);
    }
}

TEST_CASE("number formatting") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.123, -0.0, 5e-324}) CHECK(std::strtod(format_exact(x).c_str(), nullptr) == x);
    CHECK(format_sig9(1.0 / 3.0) == "0.333333333");
    CHECK(quantize9(1.0 / 3.0) == 0.333333333);
    CHECK(quantize9(quantize9(2.0 / 7.0)) == quantize9(2.0 / 7.0));
}
