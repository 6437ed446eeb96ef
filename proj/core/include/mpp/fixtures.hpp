#pragma once

// Shipped presets: the four techniques, the fixed-precision absolute
// baseline, controller policies, and generated layouts for the four tasks.

#include <string>

#include "mpp/engine.hpp"
#include "mpp/simulate.hpp"
#include "mpp/tasks.hpp"

namespace mpp::fixtures {

/// "VA", "VR", "HA" or "HR" with default parameters and the segmented
/// {1, 4, 16} scheme. Throws Error(InvalidConfig) for other codes.
TechniqueConfig technique(const std::string& code);

/// Fixed-precision absolute mapping (H = 1 everywhere): a stand-in for a
/// conventional hand-as-mouse pointer.
TechniqueConfig baseline();

ControllerPolicy two_phase();
/// Stays at the coarsest precision.
ControllerPolicy fixed_coarse();
/// Two-phase with the middle band as the fine level, for following moving
/// objects that would leave the finest absolute area.
ControllerPolicy tracking();

/// Five runs; the target sits at the centre or near one of the four
/// quadrant centres, surrounded by a grid of distractors. Runs alternate
/// between separated and overlapping layouts and shrink the target size.
TaskSpec buttons(const DisplayGeometry& display = {});

/// A Lissajous curve plus two straight strokes.
TaskSpec erase(const DisplayGeometry& display = {});

/// Four tracks through the display centre in the order UD, DU, LR, RL.
TaskSpec moving(TaskKind kind, const DisplayGeometry& display = {}, double length = 600.0, double speed = 120.0,
                double radius = 15.0);

}  // namespace mpp::fixtures
