#pragma once

// Evaluation tasks and their measures:
//   Buttons      total time to hit the designated button, summed over runs (ms)
//   Erase        time until every vertex of the graph has been erased (ms)
//   HitMoving    per-track minimal cursor-object distance, approached from behind (px)
//   TrackMoving  per-track time-weighted mean cursor-object distance (px)

#include <string>
#include <variant>
#include <vector>

#include "mpp/engine.hpp"

namespace mpp {

enum class TaskKind { Buttons, Erase, HitMoving, TrackMoving };
enum class TrackDirection { UD, DU, LR, RL };

struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool contains(Vec2 p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }
    Vec2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// One TASK 1 run. Later buttons are drawn on top of earlier ones.
struct ButtonRun {
    std::vector<Rect> buttons;
    int target = 0;
    Vec2 start;
    friend bool operator==(const ButtonRun&, const ButtonRun&) = default;
};

struct Track {
    TrackDirection direction = TrackDirection::LR;
    Vec2 start;
    Vec2 end;
    double speed = 100.0;  ///< px/s
    double radius = 10.0;  ///< px

    Vec2 unit() const;
    double length() const { return (end - start).norm(); }
    double duration() const { return length() / speed; }
    /// Object centre `elapsed` seconds after the run started; parks at `end`.
    Vec2 position_at(double elapsed) const;
    friend bool operator==(const Track&, const Track&) = default;
};

struct TaskSpec {
    TaskKind kind = TaskKind::Buttons;
    DisplayGeometry display;
    std::vector<ButtonRun> runs;                 ///< Buttons
    std::vector<std::vector<Vec2>> polylines;    ///< Erase
    double eraser_radius = 20.0;                 ///< Erase
    Vec2 start;                                  ///< Erase: initial cursor
    std::vector<Track> tracks;                   ///< HitMoving / TrackMoving

    /// Number of runs the task consists of (tracks count as runs).
    std::size_t run_count() const;
    /// Throws Error(InvalidConfig).
    void validate() const;
    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

enum class EventKind { RunStart, RunEnd, Select, Timeout };

struct LogEvent {
    EventKind kind = EventKind::RunStart;
    double t = 0.0;
    int run = 0;
    Vec2 pointer;  ///< meaningful for Select
    friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

using LogRecord = std::variant<FrameOutput, LogEvent>;

struct TrajectoryLog {
    TechniqueConfig config;
    TaskKind task = TaskKind::Buttons;
    std::vector<LogRecord> records;

    /// Strictly increasing frame timestamps and properly nested run markers.
    /// Throws Error(ParseError).
    void validate() const;
    bool timed_out() const;
    friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

enum class Metric { TotalTime, CompletionTime, MinimalError, AverageError };

struct TaskResult {
    Metric metric = Metric::TotalTime;
    std::vector<double> per_run;  ///< NaN marks an undefined run
    double aggregate = 0.0;       ///< NaN when incomplete
    bool complete = true;

    std::string unit() const;
    friend bool operator==(const TaskResult& a, const TaskResult& b);
};

/// Throws Error(IncompleteRun) when a run has no successful selection.
TaskResult eval_task1(const TrajectoryLog& log, const TaskSpec& spec);
TaskResult eval_task2(const TrajectoryLog& log, const TaskSpec& spec);
TaskResult eval_task3(const TrajectoryLog& log, const TaskSpec& spec);
TaskResult eval_task4(const TrajectoryLog& log, const TaskSpec& spec);
/// Dispatches on spec.kind; throws Error(InvalidConfig) when log.task differs.
TaskResult evaluate(const TrajectoryLog& log, const TaskSpec& spec);

/// Index of the topmost button containing p, or -1.
int topmost_button(const ButtonRun& run, Vec2 p);

/// Shannon index of difficulty, log2(D/W + 1) bits.
double fitts_id(double distance, double width);

/// Vertices of the polylines resampled at arc-length steps of at most max_step px.
std::vector<Vec2> discretize(const std::vector<std::vector<Vec2>>& polylines, double max_step = 1.0);

Metric metric_for(TaskKind kind);
const char* to_string(TaskKind k);
const char* to_string(TrackDirection d);
const char* to_string(EventKind k);
const char* to_string(Metric m);

}  // namespace mpp
