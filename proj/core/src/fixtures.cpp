#include "mpp/fixtures.hpp"

#include <cmath>
#include <numbers>

#include "mpp/error.hpp"

namespace mpp::fixtures {

TechniqueConfig technique(const std::string& code) {
    if (code.size() != 2 || (code[0] != 'V' && code[0] != 'H') || (code[1] != 'A' && code[1] != 'R')) {
        throw Error(ErrorCode::InvalidConfig, "unknown technique '" + code + "' (expected VA, VR, HA or HR)");
    }
    TechniqueConfig cfg;
    cfg.adjustment = code[0] == 'V' ? Adjustment::Vertical : Adjustment::Horizontal;
    cfg.mapping = code[1] == 'A' ? Mapping::Absolute : Mapping::Relative;
    return cfg;
}

TechniqueConfig baseline() {
    TechniqueConfig cfg = technique("VA");
    cfg.scheme = PrecisionScheme::segmented({{0.0, 1.0}});
    return cfg;
}

ControllerPolicy two_phase() { return ControllerPolicy{}; }

ControllerPolicy fixed_coarse() {
    ControllerPolicy p;
    p.strategy = ControllerPolicy::Strategy::Fixed;
    p.h_fixed = p.h_coarse;
    return p;
}

ControllerPolicy tracking() {
    ControllerPolicy p;
    p.h_fine = 0.5;
    return p;
}

TaskSpec buttons(const DisplayGeometry& display) {
    const double W = display.width;
    const double H = display.height;
    const Vec2 targets[] = {{0.5 * W, 0.5 * H}, {0.25 * W, 0.25 * H}, {0.75 * W, 0.25 * H},
                            {0.25 * W, 0.75 * H}, {0.75 * W, 0.75 * H}};
    const double sizes[] = {40.0, 24.0, 12.0, 8.0, 4.0};

    TaskSpec task;
    task.kind = TaskKind::Buttons;
    task.display = display;
    for (int r = 0; r < 5; ++r) {
        const double s = sizes[r];
        const bool overlapping = r % 2 == 1;
        const double pitch = overlapping ? 0.75 * s : 2.0 * s;
        ButtonRun run;
        for (int gy = -1; gy <= 1; ++gy) {
            for (int gx = -1; gx <= 1; ++gx) {
                const Vec2 c = targets[r] + Vec2{gx * pitch, gy * pitch};
                run.buttons.push_back({c.x - 0.5 * s, c.y - 0.5 * s, s, s});
            }
        }
        run.target = 4;
        run.start = r == 0 ? Vec2{0.25 * W, 0.5 * H} : Vec2{W - targets[r].x, H - targets[r].y};
        task.runs.push_back(std::move(run));
    }
    return task;
}

TaskSpec erase(const DisplayGeometry& display) {
    const double W = display.width;
    const double H = display.height;
    TaskSpec task;
    task.kind = TaskKind::Erase;
    task.display = display;
    task.eraser_radius = 25.0;
    task.start = {0.1 * W, 0.1 * H};

    std::vector<Vec2> curve;
    constexpr int kPoints = 240;
    for (int i = 0; i <= kPoints; ++i) {
        const double t = 2.0 * std::numbers::pi * i / kPoints;
        curve.push_back({0.5 * W + 0.15 * W * std::sin(3.0 * t + 0.5 * std::numbers::pi),
                         0.5 * H + 0.3 * H * std::sin(2.0 * t)});
    }
    task.polylines.push_back(std::move(curve));
    task.polylines.push_back({{0.2 * W, 0.2 * H}, {0.3 * W, 0.8 * H}});
    task.polylines.push_back({{0.7 * W, 0.8 * H}, {0.8 * W, 0.2 * H}, {0.85 * W, 0.5 * H}});
    return task;
}

TaskSpec moving(TaskKind kind, const DisplayGeometry& display, double length, double speed, double radius) {
    if (kind != TaskKind::HitMoving && kind != TaskKind::TrackMoving) {
        throw Error(ErrorCode::InvalidConfig, "moving-object fixture needs hit_moving or track_moving");
    }
    const Vec2 c = 0.5 * display.size();
    const double half = 0.5 * length;
    TaskSpec task;
    task.kind = kind;
    task.display = display;
    task.tracks = {
        {TrackDirection::UD, c - Vec2{0.0, half}, c + Vec2{0.0, half}, speed, radius},
        {TrackDirection::DU, c + Vec2{0.0, half}, c - Vec2{0.0, half}, speed, radius},
        {TrackDirection::LR, c - Vec2{half, 0.0}, c + Vec2{half, 0.0}, speed, radius},
        {TrackDirection::RL, c + Vec2{half, 0.0}, c - Vec2{half, 0.0}, speed, radius},
    };
    return task;
}

}  // namespace mpp::fixtures
