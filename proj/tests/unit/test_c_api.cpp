#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "mpp/c_api.h"
#include "mpp/fixtures.hpp"
#include "mpp/io.hpp"
#include "mpp/simulate.hpp"

using namespace mpp;

namespace {

std::vector<HandSample> stream() {
    const Point3 shoulder{0.0, 1.4, 0.0};
    std::vector<HandSample> out;
    for (int i = 0; i < 300; ++i) {
        const double t = i / 60.0;
        out.push_back({t, shoulder + Point3{0.25 * std::sin(1.1 * t), 0.15 * std::sin(0.6 * t), 0.2 + 0.4 * std::fabs(std::sin(0.3 * t))},
                       shoulder});
    }
    TremorModel tremor;
    tremor.seed = 11;
    return add_tremor(out, tremor);
}

}  // namespace

TEST_CASE("boundary frames and checksum match an offline replay") {
    const auto samples = stream();
    for (const char* code : {"VA", "VR", "HA", "HR"}) {
        CAPTURE(code);
        const auto cfg = fixtures::technique(code);
        char err[256] = "";
        mpp_engine* e = mpp_engine_create(serialize_config(cfg).c_str(), err, sizeof err);
        REQUIRE(e != nullptr);

        Engine offline(cfg);
        std::vector<FrameOutput> frames;
        for (const auto& s : samples) {
            const double hand[3] = {s.hand.x, s.hand.y, s.hand.z};
            const double shoulder[3] = {s.shoulder.x, s.shoulder.y, s.shoulder.z};
            mpp_frame f{};
            REQUIRE(mpp_engine_step(e, s.t, hand, shoulder, &f) == MPP_OK);
            frames.push_back(offline.step(s));
            const auto& o = frames.back();
            CHECK(f.x == o.pointer.x);
            CHECK(f.y == o.pointer.y);
            CHECK(f.H == o.H);
            CHECK((f.frozen != 0) == o.frozen);
            CHECK((f.has_rings != 0) == o.feedback.rings.has_value());
            CHECK(f.circle_radius == o.feedback.circle_radius);
        }
        CHECK(mpp_engine_checksum(e) == frames_checksum(frames));
        // Checksum survives the 9-digit log format.
        CHECK(frames_checksum(parse_frames(serialize_frames(cfg, frames))) == frames_checksum(frames));
        mpp_engine_destroy(e);
    }
}

TEST_CASE("boundary errors") {
    char err[128] = "";
    CHECK(mpp_engine_create("format_version = 1\nbogus = 1\n", err, sizeof err) == nullptr);
    CHECK(std::string(err).find("bogus") != std::string::npos);
    CHECK(mpp_engine_create(nullptr, nullptr, 0) == nullptr);

    mpp_engine* e = mpp_engine_create(serialize_config(fixtures::technique("HR")).c_str(), nullptr, 0);
    REQUIRE(e != nullptr);
    const double hand[3] = {0.1, 1.4, 0.4};
    const double shoulder[3] = {0.0, 1.4, 0.0};
    mpp_frame f{};
    CHECK(mpp_engine_step(e, 1.0, hand, shoulder, &f) == MPP_OK);
    CHECK(mpp_engine_step(e, 0.5, hand, shoulder, &f) == MPP_ERR_TIMESTAMP);
    char msg[256];
    mpp_engine_last_error(e, msg, sizeof msg);
    CHECK(std::string(msg).find("NonMonotonicTimestamp") != std::string::npos);
    CHECK(mpp_engine_step(e, 2.0, nullptr, shoulder, &f) == MPP_ERR_ARGUMENT);
    CHECK(mpp_engine_warp(e, 100.0, 200.0) == MPP_OK);
    CHECK(mpp_engine_step(e, 2.0, hand, shoulder, &f) == MPP_OK);
    CHECK(f.x == doctest::Approx(100.0));
    CHECK(f.y == doctest::Approx(200.0));
    mpp_engine_destroy(e);
    mpp_engine_destroy(nullptr);
    CHECK(std::string(mpp_version()) == "1.0.0");
}
