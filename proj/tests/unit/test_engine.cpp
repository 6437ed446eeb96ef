#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mpp/engine.hpp"
#include "mpp/error.hpp"
#include "mpp/fixtures.hpp"
#include "mpp/simulate.hpp"

using namespace mpp;
using std::numbers::pi;

namespace {

const Point3 kShoulder{0.0, 1.4, 0.0};

Point3 on_ray(double az, double el, double r) {
    return kShoulder + r * Point3{std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
}

std::vector<HandSample> chain(std::initializer_list<MotionPrimitive> parts) {
    std::vector<HandSample> out;
    for (MotionPrimitive p : parts) {
        if (!out.empty()) p.t0 = out.back().t + 1.0 / p.sample_rate;
        p.shoulder = kShoulder;
        const auto s = gen_primitive(p);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

std::vector<FrameOutput> run(const TechniqueConfig& cfg, const std::vector<HandSample>& samples) {
    Engine e(cfg);
    std::vector<FrameOutput> out;
    for (const auto& s : samples) out.push_back(e.step(s));
    return out;
}

}  // namespace

TEST_CASE("first absolute frame centres the area") {
    const auto cfg = fixtures::baseline();
    Engine e(cfg);
    const auto f = e.step({0.0, neutral_hand(cfg, kShoulder), kShoulder});
    CHECK(f.H == 1.0);
    CHECK(f.pointer.x == doctest::Approx(1920.0));
    CHECK(f.pointer.y == doctest::Approx(540.0));
}

TEST_CASE("rebase examples") {
    const DisplayGeometry d;
    const MappedArea full{{0, 0}, {3840, 1080}};
    const auto r = rebase_absolute(full, {0.5, 0.5}, {1920, 540}, 4.0, d);
    CHECK(r.area.size.x == 960.0);
    CHECK(r.area.size.y == 270.0);
    CHECK(r.area.origin.x == 1440.0);
    CHECK(r.area.origin.y == 405.0);
    CHECK_FALSE(r.clamped);

    const auto unity = rebase_absolute(r.area, {0.3, 0.8}, {1500, 500}, 1.0, d);
    CHECK(unity.area.origin == Vec2{0, 0});
    CHECK(unity.area.size == Vec2{3840, 1080});

    const auto corner = rebase_absolute(full, {0.1, 0.1}, {1000, 400}, 4.0, d);
    CHECK(corner.area.origin.x + 0.1 * corner.area.size.x == doctest::Approx(1000.0));
    CHECK(corner.area.origin.y + 0.1 * corner.area.size.y == doctest::Approx(400.0));

    const auto edge = rebase_absolute(full, {0.5, 0.5}, {10, 10}, 4.0, d);
    CHECK(edge.clamped);
    CHECK(edge.area.origin == Vec2{0, 0});
}

TEST_CASE("clutch detection") {
    const ClutchParams p;
    std::vector<HandSample> vertical, horizontal, still;
    for (int i = 0; i < 6; ++i) {
        vertical.push_back({i * 0.1, {0.1, 1.0 + 0.02 * i, 0.5}, kShoulder});
        horizontal.push_back({i * 0.1, {0.1 + 0.02 * i, 1.0, 0.5}, kShoulder});
        still.push_back({i * 0.1, {0.1, 1.0, 0.5}, kShoulder});
    }
    CHECK(detect_clutch(vertical, p, Adjustment::Vertical, false));
    CHECK_FALSE(detect_clutch(horizontal, p, Adjustment::Vertical, true));
    CHECK(detect_clutch(still, p, Adjustment::Vertical, true));
    CHECK_FALSE(detect_clutch(still, p, Adjustment::Vertical, false));

    ClutchParams above = p;
    above.inequality = ClutchInequality::Above;
    CHECK_FALSE(detect_clutch(vertical, above, Adjustment::Vertical, false));
    CHECK(detect_clutch(horizontal, above, Adjustment::Vertical, false));

    std::vector<HandSample> radial;
    for (int i = 0; i < 6; ++i) radial.push_back({i * 0.1, on_ray(0.3, 0.1, 0.6 - 0.05 * i), kShoulder});
    CHECK(detect_clutch(radial, p, Adjustment::Horizontal, false));
}

TEST_CASE("relative displacement") {
    const DisplayGeometry d;
    CHECK(apply_relative({100, 100}, {0.3, 0.2}, 1.0, 3840, true, d) == Vec2{100, 100});
    const Vec2 moved = apply_relative({100, 100}, {0.01, 0.0}, 4.0, 2000.0, false, d);
    CHECK(moved.x == doctest::Approx(105.0).epsilon(1e-15));
    CHECK(moved.y == 100.0);
    const Vec2 a = apply_relative({1000, 500}, {0.02, -0.01}, 2.0, 3840, false, d);
    const Vec2 b = apply_relative({1000, 500}, {0.02, -0.01}, 4.0, 3840, false, d);
    CHECK((b.x - 1000) * 2 == doctest::Approx(a.x - 1000));
    CHECK((b.y - 500) * 2 == doctest::Approx(a.y - 500));
    CHECK(apply_relative({3800, 10}, {1.0, -1.0}, 1.0, 3840, false, d) == Vec2{3840, 0});
}

TEST_CASE("feedback") {
    const auto cfg = fixtures::technique("HR");
    FrameOutput a;
    a.t = 0.0;
    a.pointer = {500, 500};
    a.H = 4.0;
    FrameOutput b = a;
    b.t = 1.0 / 30.0;

    const FrameOutput still[] = {a, b};
    const auto fs = compute_feedback(still, cfg);
    CHECK_FALSE(fs.rings);
    CHECK(fs.prediction_end == b.pointer);
    CHECK(fs.circle_radius == doctest::Approx(40.0 * 4.0 / 16.0));
    CHECK_FALSE(fs.circle_clutching);

    b.pointer = {510, 500};
    b.frozen = true;
    const FrameOutput slow[] = {a, b};
    const auto f2 = compute_feedback(slow, cfg);
    CHECK(f2.prediction_end.x == doctest::Approx(520.0));
    CHECK(f2.prediction_end.y == doctest::Approx(500.0));
    CHECK(f2.circle_clutching);
    CHECK_FALSE(f2.rings);  // 300 px/s

    b.pointer = {540, 500};
    const FrameOutput fast[] = {a, b};
    const auto f3 = compute_feedback(fast, cfg);
    REQUIRE(f3.rings);
    CHECK(f3.rings->pos_now == b.pointer);
    CHECK(f3.rings->pos_prev == a.pointer);
    CHECK(f3.rings->thickness == doctest::Approx(0.01 * 1200.0));

    const FrameOutput only[] = {a};
    const auto f4 = compute_feedback(only, cfg);
    CHECK_FALSE(f4.rings);
    CHECK(f4.prediction_end == a.pointer);
}

TEST_CASE("timestamps must increase") {
    Engine e(fixtures::technique("VA"));
    e.step({0.0, {0, 1.2, 0.5}, kShoulder});
    CHECK_THROWS_AS(e.step({0.0, {0, 1.2, 0.5}, kShoulder}), Error);
    CHECK_THROWS_AS(e.step({-1.0, {0, 1.2, 0.5}, kShoulder}), Error);
    CHECK_THROWS_AS(e.step({std::nan(""), {0, 1.2, 0.5}, kShoulder}), Error);
    Engine fresh(fixtures::technique("VA"));
    CHECK_THROWS_AS(fresh.step({std::nan(""), {0, 1.2, 0.5}, kShoulder}), Error);
}

TEST_CASE("degenerate samples repeat the previous output") {
    Engine e(fixtures::technique("HR"));
    const auto a = e.step({0.0, on_ray(0.1, 0.1, 0.4), kShoulder});
    const auto b = e.step({0.1, kShoulder, kShoulder});
    CHECK(b.t == 0.1);
    CHECK(b.pointer == a.pointer);
    CHECK(b.H == a.H);
    const auto c = e.step({0.2, {std::nan(""), 0, 0}, kShoulder});
    CHECK(c.pointer == a.pointer);
}

TEST_CASE("pointer stays on the display for random input") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> c(-2.0, 3.0);
    std::uniform_real_distribution<double> dt(0.001, 0.1);
    for (const char* code : {"VA", "VR", "HA", "HR"}) {
        Engine e(fixtures::technique(code));
        double t = 0.0;
        for (int i = 0; i < 25000; ++i) {
            t += dt(rng);
            const auto f = e.step({t, {c(rng), c(rng), c(rng)}, {c(rng) * 0.1, 1.4, c(rng) * 0.1}});
            REQUIRE(e.config().display.contains(f.pointer));
        }
    }
}

TEST_CASE("frozen frames keep the pointer and output is deterministic") {
    auto cfg = fixtures::technique("VR");
    TremorModel tremor;
    tremor.amplitude = 0.004;
    const auto samples = add_tremor(chain({{PrimitiveKind::MinJerk, {-0.2, 1.0, 0.3}, {0.2, 1.0, 0.6}, {}, 1.0},
                                           {PrimitiveKind::VerticalShift, {0.2, 1.0, 0.6}, {0.2, 1.6, 0.6}, {}, 1.0},
                                           {PrimitiveKind::MinJerk, {0.2, 1.6, 0.6}, {-0.1, 1.6, 0.4}, {}, 1.0}}),
                                    tremor);
    const auto a = run(cfg, samples);
    const auto b = run(cfg, samples);
    CHECK(a == b);
    int frozen = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i].frozen) {
            ++frozen;
            CHECK(a[i].pointer == a[i - 1].pointer);
        }
    }
    CHECK(frozen > 10);
}

TEST_CASE("radial motion leaves uv and the absolute pointer unchanged") {
    for (const char* code : {"HA", "HR"}) {
        const auto cfg = fixtures::technique(code);
        const Point3 out = on_ray(0.4, 0.2, 0.62);
        const Point3 in = on_ray(0.4, 0.2, 0.18);
        const auto f = run(cfg, chain({{PrimitiveKind::Hold, in, in, {}, 0.3},
                                       {PrimitiveKind::RadialShift, in, out, {}, 1.0},
                                       {PrimitiveKind::RadialShift, out, in, {}, 1.0}}));
        double max_H = 0.0;
        for (const auto& fr : f) {
            CHECK(std::abs(fr.uv.u - f.front().uv.u) < 1e-9);
            CHECK(std::abs(fr.uv.v - f.front().uv.v) < 1e-9);
            CHECK(std::abs(fr.pointer.x - f.front().pointer.x) < 1e-9);
            CHECK(std::abs(fr.pointer.y - f.front().pointer.y) < 1e-9);
            max_H = std::max(max_H, fr.H);
        }
        CHECK(max_H == 16.0);
    }
}

TEST_CASE("relative gain is linear in the hand displacement") {
    auto cfg = fixtures::technique("VR");
    cfg.smoothing_alpha = 1.0;
    cfg.scheme = PrecisionScheme::segmented({{0.0, 4.0}});
    for (double s : {0.25, 0.5, 2.0}) {
        Engine one(cfg), scaled(cfg);
        const Point3 base{0.0, 1.2, 0.5};
        const Point3 step{0.03, 0.0, -0.02};
        one.step({0.0, base, kShoulder});
        scaled.step({0.0, base, kShoulder});
        const auto p0 = one.last_output()->pointer;
        const auto p1 = one.step({0.1, base + step, kShoulder}).pointer;
        const auto ps = scaled.step({0.1, base + s * step, kShoulder}).pointer;
        CHECK(std::abs((ps.x - p0.x) - s * (p1.x - p0.x)) < 1e-9);
        CHECK(std::abs((ps.y - p0.y) - s * (p1.y - p0.y)) < 1e-9);
    }
}

// Scripted HA trajectory: coarse approach that lands 30 px right and 12 px
// low of a 4 px target, a radial stretch to the finest band, then a fine
// correction on the sphere. Every frame is recomputed here from the pipeline
// definition and compared with the engine.
TEST_CASE("three-phase HA trajectory against a hand-traced pipeline") {
    auto cfg = fixtures::technique("HA");
    cfg.smoothing_alpha = 1.0;
    cfg.hysteresis_margin = 0.0;
    const auto& vol = cfg.volume;
    const Vec2 target{2500.0, 300.0};
    const double W = cfg.display.width, Hd = cfg.display.height;

    auto angles_for = [&](double u, double v) {
        return std::pair{vol.azimuth.lo + u * vol.azimuth.span(), vol.elevation.lo + v * vol.elevation.span()};
    };
    const auto [az1, el1] = angles_for((target.x + 30.0) / W, 1.0 - (target.y + 12.0) / Hd);
    const double r_coarse = 0.2, r_fine = 0.62;

    // Where the fine area lands after the stretch, and the angles that put
    // the pointer on the target inside it.
    const Vec2 p1{target.x + 30.0, target.y + 12.0};
    const Vec2 size16{W / 16.0, Hd / 16.0};
    const Vec2 frac1{p1.x / W, p1.y / Hd};
    const Vec2 origin16{p1.x - frac1.x * size16.x, p1.y - frac1.y * size16.y};
    const auto [az3, el3] = angles_for((target.x - origin16.x) / size16.x, 1.0 - (target.y - origin16.y) / size16.y);

    const Point3 start = on_ray(0.0, 0.1, r_coarse);
    const Point3 coarse = on_ray(az1, el1, r_coarse);
    const Point3 stretched = on_ray(az1, el1, r_fine);
    const Point3 fine = on_ray(az3, el3, r_fine);
    const auto samples = chain({{PrimitiveKind::MinJerk, start, coarse, {}, 1.0},
                                {PrimitiveKind::Hold, coarse, coarse, {}, 0.2},
                                {PrimitiveKind::RadialShift, coarse, stretched, {}, 0.6},
                                {PrimitiveKind::MinJerk, stretched, fine, {}, 0.6},
                                {PrimitiveKind::Hold, fine, fine, {}, 0.2}});

    // Reference pipeline.
    double H = 0.0;
    Vec2 origin, size, pointer;
    bool first = true;
    Engine engine(cfg);
    for (const auto& s : samples) {
        const Point3 d = s.hand - s.shoulder;
        const double r = d.norm();
        const double h = std::clamp((r - vol.radial.lo) / vol.radial.span(), 0.0, 1.0);
        const double H_now = h < 1.0 / 3.0 ? 1.0 : h < 2.0 / 3.0 ? 4.0 : 16.0;
        const double u = std::clamp((std::atan2(d.x, d.z) - vol.azimuth.lo) / vol.azimuth.span(), 0.0, 1.0);
        const double v = std::clamp((std::asin(d.y / r) - vol.elevation.lo) / vol.elevation.span(), 0.0, 1.0);
        const Vec2 frac{u, 1.0 - v};
        if (first) {
            size = {W / H_now, Hd / H_now};
            origin = {(W - size.x) / 2, (Hd - size.y) / 2};
            pointer = {origin.x + frac.x * size.x, origin.y + frac.y * size.y};
            first = false;
        } else if (H_now != H) {
            size = {W / H_now, Hd / H_now};
            const Vec2 want{pointer.x - frac.x * size.x, pointer.y - frac.y * size.y};
            origin = {std::clamp(want.x, 0.0, W - size.x), std::clamp(want.y, 0.0, Hd - size.y)};
            if (!(origin == want)) pointer = {origin.x + frac.x * size.x, origin.y + frac.y * size.y};
        } else {
            pointer = {origin.x + frac.x * size.x, origin.y + frac.y * size.y};
        }
        H = H_now;

        const auto out = engine.step(s);
        CHECK(out.H == H);
        CHECK(std::abs(out.pointer.x - pointer.x) < 1e-9);
        CHECK(std::abs(out.pointer.y - pointer.y) < 1e-9);
    }
    const Vec2 end = engine.last_output()->pointer;
    CHECK(H == 16.0);
    CHECK(std::abs(end.x - target.x) < 2.0);
    CHECK(std::abs(end.y - target.y) < 2.0);
}

TEST_CASE("warp keeps the absolute area consistent") {
    const auto cfg = fixtures::technique("HA");
    Engine e(cfg);
    e.step({0.0, on_ray(0.2, 0.1, 0.55), kShoulder});
    e.warp_pointer({700, 300});
    const auto f = e.step({0.1, on_ray(0.2, 0.1, 0.55), kShoulder});
    CHECK(f.pointer.x == doctest::Approx(700.0));
    CHECK(f.pointer.y == doctest::Approx(300.0));
    CHECK_FALSE(f.feedback.rings);
}

TEST_CASE("config validation") {
    auto cfg = fixtures::technique("VR");
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.technique() == "VR");
    cfg.gain_base = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = fixtures::technique("VR");
    cfg.clutch.min_pairs = 6;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = fixtures::technique("VR");
    cfg.smoothing_alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = fixtures::technique("VR");
    cfg.display.width = 0.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_THROWS_AS(fixtures::technique("XX"), Error);
}
