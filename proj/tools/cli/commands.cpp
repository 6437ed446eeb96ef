#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpp/error.hpp"
#include "mpp/fixtures.hpp"

namespace mpp::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reads and parses one input file; parse errors get the file name in front.
template <typename T, typename Parse>
T load(const fs::path& path, Parse&& parse) {
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::InvalidConfig, "no such file: '" + path.string() + "'");
    const std::string text = read_file(path);
    try {
        return parse(text);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

std::string cell(double x) {
    if (std::isnan(x)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

json num(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

// Concatenates primitives, each starting one sample period after the last.
void append(std::vector<HandSample>& out, MotionPrimitive p) {
    if (!out.empty()) p.t0 = out.back().t + 1.0 / p.sample_rate;
    auto s = gen_primitive(p);
    out.insert(out.end(), s.begin(), s.end());
}

std::vector<HandSample> demo_samples() {
    const Point3 shoulder{0.0, 1.4, 0.0};
    const Point3 out_a = shoulder + Point3{0.25, 0.05, 0.45};
    const Point3 in_a = shoulder + Point3{0.25 * 0.4, 0.05 * 0.4, 0.45 * 0.4};
    const Point3 out_b = shoulder + Point3{-0.2, 0.1, 0.5};
    std::vector<HandSample> s;
    append(s, {PrimitiveKind::Hold, out_a, out_a, shoulder, 0.5});
    append(s, {PrimitiveKind::RadialShift, out_a, in_a, shoulder, 1.0});
    append(s, {PrimitiveKind::MinJerk, in_a, out_b, shoulder, 1.0});
    append(s, {PrimitiveKind::Hold, out_b, out_b, shoulder, 0.5});
    TremorModel tremor;
    tremor.seed = 7;
    return add_tremor(std::move(s), tremor);
}

// --- subcommands -------------------------------------------------------------

int cmd_simulate(const fs::path& manifest_path, const std::string& out_override, std::ostream& out) {
    const LoadedManifest m = load_manifest(manifest_path);
    const fs::path dir = out_override.empty() ? m.manifest.output_dir : fs::path(out_override);
    bool incomplete = false;
    out << m.manifest.label << " (" << m.config.technique() << ", " << to_string(m.task.kind) << ")\n";
    for (auto seed : m.manifest.seeds) {
        const std::string stem = m.manifest.label + "-s" + std::to_string(seed);
        const std::string log_text = serialize_log(simulate_seed(m, seed));
        write_file_atomic(dir / (stem + ".log"), log_text);

        // Score what was written, not the in-memory log.
        const TaskResult r = evaluate_lenient(parse_log(log_text), m.task);
        write_file_atomic(dir / (stem + ".result.json"), serialize_result(r));
        incomplete = incomplete || !r.complete;
        out << "  seed " << seed << ": " << (r.complete ? cell(r.aggregate) + " " + r.unit() : "incomplete") << "  -> "
            << (dir / (stem + ".log")).string() << '\n';
    }
    return incomplete ? kExitIncomplete : kExitOk;
}

int cmd_replay(const fs::path& samples_path, const fs::path& config_path, const std::string& out_path,
               std::ostream& out) {
    const TechniqueConfig cfg = load<TechniqueConfig>(config_path, parse_config);
    std::vector<std::size_t> lines;
    const auto samples =
        load<std::vector<HandSample>>(samples_path, [&](std::string_view t) { return parse_samples(t, &lines); });

    Engine engine(cfg);
    std::vector<FrameOutput> frames;
    frames.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        try {
            frames.push_back(engine.step(samples[i]));
        } catch (const Error& e) {
            throw Error(e.code(), samples_path.string() + ": line " + std::to_string(lines[i]) + ": " + e.detail());
        }
    }
    const std::string text = serialize_frames(cfg, frames);
    if (out_path.empty()) {
        out << text;
    } else {
        write_file_atomic(out_path, text);
    }
    return kExitOk;
}

int cmd_metrics(const fs::path& log_path, const fs::path& task_path, const std::string& out_path,
                std::ostream& out) {
    const TrajectoryLog log = load<TrajectoryLog>(log_path, parse_log);
    const TaskSpec task = load<TaskSpec>(task_path, parse_task);
    if (log.task != task.kind) {
        throw Error(ErrorCode::InvalidConfig, "log is for task '" + std::string(to_string(log.task)) +
                                                  "' but the task file describes '" + to_string(task.kind) + "'");
    }
    const TaskResult r = evaluate_lenient(log, task);
    out << result_table(r);
    if (!out_path.empty()) write_file_atomic(out_path, serialize_result(r));
    return r.complete ? kExitOk : kExitIncomplete;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& json_path, unsigned jobs,
                std::ostream& out) {
    if (paths.size() < 2) throw Error(ErrorCode::InvalidConfig, "compare needs at least two manifests");
    std::vector<LoadedManifest> ms;
    for (const auto& p : paths) ms.push_back(load_manifest(p));
    const Comparison c = compare(ms, jobs);
    out << comparison_table(c);
    if (!json_path.empty()) write_file_atomic(json_path, comparison_json(c));
    const bool incomplete =
        std::any_of(c.columns.begin(), c.columns.end(), [](const CompareColumn& col) { return col.incomplete > 0; });
    return incomplete ? kExitIncomplete : kExitOk;
}

int cmd_gen_fixtures(const fs::path& dir, std::ostream& out) {
    generate_fixtures(dir);
    out << "fixtures written to " << dir.string() << '\n';
    return kExitOk;
}

}  // namespace

LoadedManifest load_manifest(const fs::path& path) {
    LoadedManifest m;
    m.path = path;
    m.manifest = resolve_paths(load<RunManifest>(path, parse_manifest), path.parent_path());
    m.config = load<TechniqueConfig>(m.manifest.config, parse_config);
    m.task = load<TaskSpec>(m.manifest.task, parse_task);
    m.policy = load<ControllerPolicy>(m.manifest.policy, parse_policy);
    if (m.config.display != m.task.display) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": config and task disagree on the display size");
    }
    return m;
}

TrajectoryLog simulate_seed(const LoadedManifest& m, std::uint64_t seed) {
    TremorModel tremor = m.manifest.tremor;
    tremor.seed = seed;
    return run_controller(m.task, m.config, m.policy, tremor);
}

TaskResult evaluate_lenient(const TrajectoryLog& log, const TaskSpec& task) {
    try {
        return evaluate(log, task);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::IncompleteRun) throw;
        return {metric_for(task.kind), std::vector<double>(task.run_count(), kNaN), kNaN, false};
    }
}

Comparison compare(const std::vector<LoadedManifest>& ms, unsigned jobs) {
    if (ms.size() < 2) throw Error(ErrorCode::InvalidConfig, "compare needs at least two manifests");
    for (const auto& m : ms) {
        if (m.task != ms.front().task) {
            throw Error(ErrorCode::InvalidConfig, "incompatible tasks: '" + m.manifest.task.string() + "' differs from '" +
                                                      ms.front().manifest.task.string() + "'");
        }
        if (m.manifest.seeds != ms.front().manifest.seeds) {
            throw Error(ErrorCode::InvalidConfig,
                        "seed lists differ between '" + m.path.string() + "' and '" + ms.front().path.string() + "'");
        }
    }

    Comparison c;
    c.task = ms.front().task.kind;
    c.metric = metric_for(c.task);
    c.seeds = ms.front().manifest.seeds;
    const std::size_t n_seeds = c.seeds.size();
    const std::size_t n_jobs = ms.size() * n_seeds;

    std::vector<TaskResult> results(n_jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n_jobs; k = next++) {
            const auto& m = ms[k / n_seeds];
            results[k] = evaluate_lenient(simulate_seed(m, c.seeds[k % n_seeds]), m.task);
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(jobs, n_jobs); ++w) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();

    for (std::size_t i = 0; i < ms.size(); ++i) {
        CompareColumn col;
        col.label = ms[i].manifest.label;
        col.technique = ms[i].config.technique();
        double sum = 0.0;
        int done = 0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const TaskResult& r = results[i * n_seeds + s];
            col.per_seed.push_back(r);
            if (r.complete) {
                sum += r.aggregate;
                ++done;
            } else {
                ++col.incomplete;
            }
        }
        col.mean = done ? sum / done : kNaN;
        c.columns.push_back(std::move(col));
    }
    return c;
}

std::string comparison_table(const Comparison& c) {
    std::size_t w = 10;
    for (const auto& col : c.columns) w = std::max(w, col.label.size() + 2);
    std::ostringstream os;
    os << to_string(c.task) << ": " << to_string(c.metric) << " (" << TaskResult{c.metric, {}, 0.0, true}.unit()
       << ")\n";
    os << pad("seed", 8);
    for (const auto& col : c.columns) os << pad(col.label, w);
    os << '\n';
    for (std::size_t s = 0; s < c.seeds.size(); ++s) {
        os << pad(std::to_string(c.seeds[s]), 8);
        for (const auto& col : c.columns) os << pad(cell(col.per_seed[s].aggregate), w);
        os << '\n';
    }
    os << pad("mean", 8);
    for (const auto& col : c.columns) os << pad(cell(col.mean), w);
    os << '\n';
    for (const auto& col : c.columns) {
        if (col.incomplete) os << col.label << ": " << col.incomplete << " incomplete seed(s) left out of the mean\n";
    }
    return os.str();
}

std::string comparison_json(const Comparison& c) {
    json j;
    j["format"] = "mpp-compare";
    j["version"] = kFormatVersion;
    j["task"] = to_string(c.task);
    j["metric"] = to_string(c.metric);
    j["unit"] = TaskResult{c.metric, {}, 0.0, true}.unit();
    j["seeds"] = c.seeds;
    j["columns"] = json::array();
    for (const auto& col : c.columns) {
        json jc;
        jc["label"] = col.label;
        jc["technique"] = col.technique;
        jc["mean"] = num(col.mean);
        jc["incomplete"] = col.incomplete;
        jc["per_seed"] = json::array();
        for (const auto& r : col.per_seed) jc["per_seed"].push_back(num(r.aggregate));
        j["columns"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

std::string result_table(const TaskResult& r) {
    std::ostringstream os;
    os << to_string(r.metric) << " (" << r.unit() << ")\n";
    for (std::size_t i = 0; i < r.per_run.size(); ++i) {
        os << pad("run " + std::to_string(i), 10) << pad(cell(r.per_run[i]), 12) << '\n';
    }
    os << pad("total", 10) << pad(r.complete ? cell(r.aggregate) : "incomplete", 12) << '\n';
    return os.str();
}

void generate_fixtures(const fs::path& dir) {
    const char* codes[] = {"VA", "VR", "HA", "HR"};
    for (const char* code : codes) {
        write_file_atomic(dir / "configs" / (std::string(code) + ".cfg"), serialize_config(fixtures::technique(code)));
    }
    write_file_atomic(dir / "configs" / "baseline.cfg", serialize_config(fixtures::baseline()));

    write_file_atomic(dir / "policies" / "two_phase.policy", serialize_policy(fixtures::two_phase()));
    write_file_atomic(dir / "policies" / "fixed_coarse.policy", serialize_policy(fixtures::fixed_coarse()));
    write_file_atomic(dir / "policies" / "tracking.policy", serialize_policy(fixtures::tracking()));

    write_file_atomic(dir / "tasks" / "task1.json", serialize_task(fixtures::buttons()));
    write_file_atomic(dir / "tasks" / "task2.json", serialize_task(fixtures::erase()));
    write_file_atomic(dir / "tasks" / "task3.json", serialize_task(fixtures::moving(TaskKind::HitMoving)));
    write_file_atomic(dir / "tasks" / "task4.json", serialize_task(fixtures::moving(TaskKind::TrackMoving)));

    const char* labels[] = {"baseline", "VA", "VR", "HA", "HR"};
    for (int t = 1; t <= 4; ++t) {
        for (const char* label : labels) {
            const bool base = std::string(label) == "baseline";
            RunManifest m;
            m.label = "t" + std::to_string(t) + "-" + label;
            m.config = fs::path("..") / "configs" / (std::string(label) + ".cfg");
            m.task = fs::path("..") / "tasks" / ("task" + std::to_string(t) + ".json");
            m.policy = fs::path("..") / "policies" /
                       (base ? "fixed_coarse.policy" : t == 4 ? "tracking.policy" : "two_phase.policy");
            m.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
            m.output_dir = "out";
            write_file_atomic(dir / "manifests" / (m.label + ".manifest"), serialize_manifest(m));
        }
    }
    RunManifest demo;
    demo.label = "demo";
    demo.config = fs::path("..") / "configs" / "HA.cfg";
    demo.task = fs::path("..") / "tasks" / "task1.json";
    demo.policy = fs::path("..") / "policies" / "two_phase.policy";
    write_file_atomic(dir / "manifests" / "demo.manifest", serialize_manifest(demo));

    write_file_atomic(dir / "samples" / "flex_stretch.samples", serialize_samples(demo_samples()));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-precision mid-air pointing: simulation, replay and metrics", "mpp"};
    app.set_version_flag("--version", std::string("mpp 1.0.0 (file format ") + std::to_string(kFormatVersion) + ")");
    app.require_subcommand(1);

    std::string manifest, sim_out;
    auto* sim = app.add_subcommand("simulate", "Run a manifest through the scripted controller; write logs and results");
    sim->add_option("manifest", manifest, "Run manifest")->required();
    sim->add_option("-o,--out", sim_out, "Output directory (overrides the manifest's output_dir)");

    std::string samples, config, replay_out;
    auto* rep = app.add_subcommand("replay", "Run a recorded hand-sample file through the engine");
    rep->add_option("samples", samples, "Sample file (t hx hy hz sx sy sz per line)")->required();
    rep->add_option("-c,--config", config, "Technique config")->required();
    rep->add_option("-o,--out", replay_out, "Frames file (default: stdout)");

    std::string log_path, task_path, result_out;
    auto* met = app.add_subcommand("metrics", "Score a trajectory log against a task");
    met->add_option("log", log_path, "Trajectory log")->required();
    met->add_option("task", task_path, "Task file")->required();
    met->add_option("-o,--out", result_out, "Result JSON file");

    std::vector<std::string> manifests;
    std::string cmp_json;
    unsigned jobs = 0;
    auto* cmp = app.add_subcommand("compare", "Simulate several manifests on the same task and tabulate the metric");
    cmp->add_option("manifests", manifests, "Two or more run manifests")->required();
    cmp->add_option("--json", cmp_json, "Also write the table as JSON");
    cmp->add_option("-j,--jobs", jobs, "Worker threads (0 = all cores)");

    std::string fixture_dir = "fixtures";
    auto* gen = app.add_subcommand("gen-fixtures", "Write the default configs, policies, tasks and manifests");
    gen->add_option("dir", fixture_dir, "Destination directory");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();  // program name
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "mpp: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(manifest, sim_out, out);
        if (*rep) return cmd_replay(samples, config, replay_out, out);
        if (*met) return cmd_metrics(log_path, task_path, result_out, out);
        if (*cmp) return cmd_compare(manifests, cmp_json, jobs, out);
        if (*gen) return cmd_gen_fixtures(fixture_dir, out);
    } catch (const Error& e) {
        err << "mpp: " << e.what() << '\n';
        return e.code() == ErrorCode::IncompleteRun ? kExitIncomplete : kExitConfig;
    } catch (const std::exception& e) {
        err << "mpp: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace mpp::cli
