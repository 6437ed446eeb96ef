#include "mpp/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mpp/error.hpp"

namespace mpp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

struct RunSlice {
    int run = 0;
    double t_start = 0.0;
    double t_end = kNaN;
    bool timed_out = false;
    std::vector<const FrameOutput*> frames;
    std::vector<const LogEvent*> selects;
};

std::vector<RunSlice> slice_runs(const TrajectoryLog& log) {
    std::vector<RunSlice> runs;
    RunSlice* open = nullptr;
    for (const auto& rec : log.records) {
        if (const auto* f = std::get_if<FrameOutput>(&rec)) {
            if (open) open->frames.push_back(f);
            continue;
        }
        const auto& ev = std::get<LogEvent>(rec);
        switch (ev.kind) {
            case EventKind::RunStart:
                runs.push_back({ev.run, ev.t, kNaN, false, {}, {}});
                open = &runs.back();
                break;
            case EventKind::Select:
                if (open) open->selects.push_back(&ev);
                break;
            case EventKind::RunEnd:
            case EventKind::Timeout:
                if (open) {
                    open->t_end = ev.t;
                    open->timed_out = ev.kind == EventKind::Timeout;
                }
                open = nullptr;
                break;
        }
    }
    return runs;
}

const RunSlice* find_run(const std::vector<RunSlice>& runs, int index) {
    for (const auto& r : runs) {
        if (r.run == index) return &r;
    }
    return nullptr;
}

double mean(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

bool is_inside(Vec2 p, const DisplayGeometry& d) { return d.contains(p); }

void require_kind(const TrajectoryLog& log, const TaskSpec& spec, TaskKind kind) {
    require(spec.kind == kind, std::string("task spec is ") + to_string(spec.kind) + ", expected " + to_string(kind));
    require(log.task == kind, std::string("log was recorded for ") + to_string(log.task) + ", expected " +
                                  to_string(kind));
}

// Shared scan for the moving-object tasks: calls fn(frame, object, weight)
// for every frame of the track's run.
template <typename Fn>
bool for_each_track_frame(const RunSlice& run, const Track& track, Fn&& fn) {
    if (run.frames.empty()) return false;
    for (std::size_t i = 0; i < run.frames.size(); ++i) {
        const FrameOutput& f = *run.frames[i];
        const double next_t = i + 1 < run.frames.size() ? run.frames[i + 1]->t
                              : std::isnan(run.t_end)   ? f.t
                                                        : std::max(run.t_end, f.t);
        fn(f, track.position_at(f.t - run.t_start), next_t - f.t);
    }
    return true;
}

}  // namespace

const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::Buttons: return "buttons";
        case TaskKind::Erase: return "erase";
        case TaskKind::HitMoving: return "hit_moving";
        case TaskKind::TrackMoving: return "track_moving";
    }
    return "?";
}

const char* to_string(TrackDirection d) {
    switch (d) {
        case TrackDirection::UD: return "UD";
        case TrackDirection::DU: return "DU";
        case TrackDirection::LR: return "LR";
        case TrackDirection::RL: return "RL";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::RunStart: return "run_start";
        case EventKind::RunEnd: return "run_end";
        case EventKind::Select: return "select";
        case EventKind::Timeout: return "timeout";
    }
    return "?";
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::TotalTime: return "total_time";
        case Metric::CompletionTime: return "completion_time";
        case Metric::MinimalError: return "minimal_error";
        case Metric::AverageError: return "average_error";
    }
    return "?";
}

Metric metric_for(TaskKind kind) {
    switch (kind) {
        case TaskKind::Buttons: return Metric::TotalTime;
        case TaskKind::Erase: return Metric::CompletionTime;
        case TaskKind::HitMoving: return Metric::MinimalError;
        case TaskKind::TrackMoving: return Metric::AverageError;
    }
    return Metric::TotalTime;
}

std::string TaskResult::unit() const {
    return metric == Metric::TotalTime || metric == Metric::CompletionTime ? "ms" : "px";
}

bool operator==(const TaskResult& a, const TaskResult& b) {
    auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    if (a.metric != b.metric || a.complete != b.complete || !same(a.aggregate, b.aggregate)) return false;
    return std::equal(a.per_run.begin(), a.per_run.end(), b.per_run.begin(), b.per_run.end(), same);
}

Vec2 Track::unit() const {
    const Vec2 d = end - start;
    const double n = d.norm();
    return {d.x / n, d.y / n};
}

Vec2 Track::position_at(double elapsed) const {
    const double travelled = std::clamp(elapsed * speed, 0.0, length());
    return start + travelled * unit();
}

std::size_t TaskSpec::run_count() const {
    switch (kind) {
        case TaskKind::Buttons: return runs.size();
        case TaskKind::Erase: return 1;
        case TaskKind::HitMoving:
        case TaskKind::TrackMoving: return tracks.size();
    }
    return 0;
}

void TaskSpec::validate() const {
    require(display.width >= 1.0 && display.height >= 1.0, "task display must be at least 1x1 px");
    switch (kind) {
        case TaskKind::Buttons:
            require(!runs.empty(), "buttons task needs at least one run");
            for (std::size_t r = 0; r < runs.size(); ++r) {
                const auto& run = runs[r];
                const std::string where = "run " + std::to_string(r) + ": ";
                require(!run.buttons.empty(), where + "no buttons");
                require(run.target >= 0 && run.target < static_cast<int>(run.buttons.size()),
                        where + "target index out of range");
                require(is_inside(run.start, display), where + "start outside display");
                for (const auto& b : run.buttons) {
                    require(b.w > 0.0 && b.h > 0.0, where + "button with empty size");
                    require(is_inside({b.x, b.y}, display) && is_inside({b.x + b.w, b.y + b.h}, display),
                            where + "button outside display");
                }
            }
            break;
        case TaskKind::Erase:
            require(!polylines.empty(), "erase task needs at least one polyline");
            require(eraser_radius > 0.0, "eraser radius must be > 0");
            require(is_inside(start, display), "erase start outside display");
            for (const auto& line : polylines) {
                require(!line.empty(), "empty polyline");
                for (const auto& p : line) require(is_inside(p, display), "polyline vertex outside display");
            }
            break;
        case TaskKind::HitMoving:
        case TaskKind::TrackMoving:
            require(!tracks.empty(), "moving-object task needs at least one track");
            for (std::size_t i = 0; i < tracks.size(); ++i) {
                const auto& tr = tracks[i];
                const std::string where = "track " + std::to_string(i) + ": ";
                require(tr.speed > 0.0 && tr.radius > 0.0, where + "speed and radius must be > 0");
                require(tr.length() > 0.0, where + "start equals end");
                require(is_inside(tr.start, display) && is_inside(tr.end, display), where + "outside display");
                const Vec2 d = tr.end - tr.start;
                const bool ok = (tr.direction == TrackDirection::UD && d.y > 0.0) ||
                                (tr.direction == TrackDirection::DU && d.y < 0.0) ||
                                (tr.direction == TrackDirection::LR && d.x > 0.0) ||
                                (tr.direction == TrackDirection::RL && d.x < 0.0);
                require(ok, where + "direction label disagrees with start/end");
            }
            break;
    }
}

void TrajectoryLog::validate() const {
    double last_t = -std::numeric_limits<double>::infinity();
    bool in_run = false;
    int expected_run = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string where = "record " + std::to_string(i) + ": ";
        if (const auto* f = std::get_if<FrameOutput>(&records[i])) {
            if (!(f->t > last_t)) throw Error(ErrorCode::ParseError, where + "frame timestamps must increase");
            last_t = f->t;
            continue;
        }
        const auto& ev = std::get<LogEvent>(records[i]);
        switch (ev.kind) {
            case EventKind::RunStart:
                if (in_run) throw Error(ErrorCode::ParseError, where + "run_start inside an open run");
                if (ev.run != expected_run) throw Error(ErrorCode::ParseError, where + "runs out of order");
                in_run = true;
                break;
            case EventKind::RunEnd:
            case EventKind::Timeout:
                if (!in_run || ev.run != expected_run) {
                    throw Error(ErrorCode::ParseError, where + "run end without matching run_start");
                }
                in_run = false;
                ++expected_run;
                break;
            case EventKind::Select:
                if (!in_run) throw Error(ErrorCode::ParseError, where + "select outside a run");
                break;
        }
    }
}

bool TrajectoryLog::timed_out() const {
    return std::any_of(records.begin(), records.end(), [](const LogRecord& r) {
        const auto* ev = std::get_if<LogEvent>(&r);
        return ev && ev->kind == EventKind::Timeout;
    });
}

int topmost_button(const ButtonRun& run, Vec2 p) {
    for (int i = static_cast<int>(run.buttons.size()) - 1; i >= 0; --i) {
        if (run.buttons[static_cast<std::size_t>(i)].contains(p)) return i;
    }
    return -1;
}

TaskResult eval_task1(const TrajectoryLog& log, const TaskSpec& spec) {
    require_kind(log, spec, TaskKind::Buttons);
    const auto runs = slice_runs(log);
    TaskResult res{Metric::TotalTime, {}, 0.0, true};
    for (std::size_t r = 0; r < spec.runs.size(); ++r) {
        const RunSlice* run = find_run(runs, static_cast<int>(r));
        double hit_t = kNaN;
        if (run) {
            for (const LogEvent* sel : run->selects) {
                if (topmost_button(spec.runs[r], sel->pointer) == spec.runs[r].target) {
                    hit_t = sel->t;
                    break;
                }
            }
        }
        if (std::isnan(hit_t)) throw Error(ErrorCode::IncompleteRun, "run " + std::to_string(r) + " has no hit");
        res.per_run.push_back((hit_t - run->t_start) * 1000.0);
        res.aggregate += res.per_run.back();
    }
    return res;
}

TaskResult eval_task2(const TrajectoryLog& log, const TaskSpec& spec) {
    require_kind(log, spec, TaskKind::Erase);
    const auto vertices = discretize(spec.polylines);
    std::vector<char> erased(vertices.size(), 0);
    std::size_t remaining = vertices.size();
    const double r2 = spec.eraser_radius * spec.eraser_radius;

    // With run markers present, frames before the first run start are setup
    // motion and erase nothing.
    const bool has_start = std::any_of(log.records.begin(), log.records.end(), [](const LogRecord& rec) {
        const auto* ev = std::get_if<LogEvent>(&rec);
        return ev && ev->kind == EventKind::RunStart;
    });
    std::optional<double> t0;
    for (const auto& rec : log.records) {
        if (const auto* ev = std::get_if<LogEvent>(&rec)) {
            if (ev->kind == EventKind::RunStart && !t0) t0 = ev->t;
            continue;
        }
        if (has_start && !t0) continue;
        const auto& f = std::get<FrameOutput>(rec);
        if (!t0) t0 = f.t;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (erased[i]) continue;
            const Vec2 d = vertices[i] - f.pointer;
            if (d.x * d.x + d.y * d.y <= r2) {
                erased[i] = 1;
                --remaining;
            }
        }
        if (remaining == 0) {
            const double ms = (f.t - *t0) * 1000.0;
            return {Metric::CompletionTime, {ms}, ms, true};
        }
    }
    return {Metric::CompletionTime, {kNaN}, kNaN, false};
}

TaskResult eval_task3(const TrajectoryLog& log, const TaskSpec& spec) {
    require_kind(log, spec, TaskKind::HitMoving);
    const auto runs = slice_runs(log);
    TaskResult res{Metric::MinimalError, {}, kNaN, true};
    for (std::size_t k = 0; k < spec.tracks.size(); ++k) {
        const Track& track = spec.tracks[k];
        const RunSlice* run = find_run(runs, static_cast<int>(k));
        double best = std::numeric_limits<double>::infinity();
        if (run) {
            const Vec2 dir = track.unit();
            for_each_track_frame(*run, track, [&](const FrameOutput& f, Vec2 object, double) {
                const Vec2 rel = f.pointer - object;
                if (rel.x * dir.x + rel.y * dir.y > 0.0) return;  // ahead of the object
                best = std::min(best, rel.norm());
            });
        }
        res.per_run.push_back(std::isinf(best) ? kNaN : best);
        if (std::isinf(best)) res.complete = false;
    }
    if (res.complete && !res.per_run.empty()) res.aggregate = mean(res.per_run);
    return res;
}

TaskResult eval_task4(const TrajectoryLog& log, const TaskSpec& spec) {
    require_kind(log, spec, TaskKind::TrackMoving);
    const auto runs = slice_runs(log);
    TaskResult res{Metric::AverageError, {}, kNaN, true};
    for (std::size_t k = 0; k < spec.tracks.size(); ++k) {
        const RunSlice* run = find_run(runs, static_cast<int>(k));
        double weighted = 0.0, total_w = 0.0, plain = 0.0;
        std::size_t n = 0;
        if (run) {
            for_each_track_frame(*run, spec.tracks[k], [&](const FrameOutput& f, Vec2 object, double w) {
                const double d = (f.pointer - object).norm();
                weighted += d * w;
                total_w += w;
                plain += d;
                ++n;
            });
        }
        double value = kNaN;
        if (n > 0) value = total_w > 0.0 ? weighted / total_w : plain / static_cast<double>(n);
        res.per_run.push_back(value);
        if (n == 0) res.complete = false;
    }
    if (res.complete && !res.per_run.empty()) res.aggregate = mean(res.per_run);
    return res;
}

TaskResult evaluate(const TrajectoryLog& log, const TaskSpec& spec) {
    require(log.task == spec.kind, std::string("log was recorded for ") + to_string(log.task) +
                                       " but the task file describes " + to_string(spec.kind));
    switch (spec.kind) {
        case TaskKind::Buttons: return eval_task1(log, spec);
        case TaskKind::Erase: return eval_task2(log, spec);
        case TaskKind::HitMoving: return eval_task3(log, spec);
        case TaskKind::TrackMoving: return eval_task4(log, spec);
    }
    return {};
}

double fitts_id(double distance, double width) {
    require(width > 0.0 && distance >= 0.0, "fitts_id needs width > 0 and distance >= 0");
    return std::log2(distance / width + 1.0);
}

std::vector<Vec2> discretize(const std::vector<std::vector<Vec2>>& polylines, double max_step) {
    std::vector<Vec2> out;
    for (const auto& line : polylines) {
        if (line.empty()) continue;
        out.push_back(line.front());
        for (std::size_t i = 1; i < line.size(); ++i) {
            const Vec2 a = line[i - 1];
            const Vec2 d = line[i] - a;
            const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(d.norm() / max_step)));
            for (std::size_t k = 1; k <= pieces; ++k) {
                out.push_back(a + (static_cast<double>(k) / static_cast<double>(pieces)) * d);
            }
        }
    }
    return out;
}

}  // namespace mpp
