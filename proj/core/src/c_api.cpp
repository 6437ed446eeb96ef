#include "mpp/c_api.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "mpp/error.hpp"
#include "mpp/io.hpp"

struct mpp_engine {
    mpp::Engine engine;
    std::uint64_t checksum = mpp::kChecksumSeed;
    std::string last_error;
};

namespace mpp {

namespace {

std::uint64_t fold(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fold(std::uint64_t h, double x) {
    x = quantize9(x);
    if (x == 0.0) x = 0.0;  // -0 and +0 hash alike
    return fold(h, &x, sizeof x);
}

void copy_message(const std::string& msg, char* buf, std::size_t len) {
    if (!buf || len == 0) return;
    const std::size_t n = std::min(msg.size(), len - 1);
    std::memcpy(buf, msg.data(), n);
    buf[n] = '\0';
}

}  // namespace

std::uint64_t frames_checksum_step(std::uint64_t state, const FrameOutput& f) {
    state = fold(state, f.pointer.x);
    state = fold(state, f.pointer.y);
    state = fold(state, f.H);
    const unsigned char frozen = f.frozen ? 1 : 0;
    return fold(state, &frozen, 1);
}

std::uint64_t frames_checksum(std::span<const FrameOutput> frames) {
    std::uint64_t h = kChecksumSeed;
    for (const auto& f : frames) h = frames_checksum_step(h, f);
    return h;
}

}  // namespace mpp

extern "C" {

mpp_engine* mpp_engine_create(const char* config_text, char* err, size_t err_len) {
    if (!config_text) {
        mpp::copy_message("config text is null", err, err_len);
        return nullptr;
    }
    try {
        auto cfg = mpp::parse_config(config_text);
        return new mpp_engine{mpp::Engine(std::move(cfg)), mpp::kChecksumSeed, {}};
    } catch (const std::exception& e) {
        mpp::copy_message(e.what(), err, err_len);
        return nullptr;
    }
}

void mpp_engine_destroy(mpp_engine* engine) { delete engine; }

int mpp_engine_step(mpp_engine* engine, double t, const double hand[3], const double shoulder[3], mpp_frame* out) {
    if (!engine || !hand || !shoulder || !out) return MPP_ERR_ARGUMENT;
    try {
        const auto f = engine->engine.step({t, {hand[0], hand[1], hand[2]}, {shoulder[0], shoulder[1], shoulder[2]}});
        engine->checksum = mpp::frames_checksum_step(engine->checksum, f);
        const auto& fb = f.feedback;
        *out = mpp_frame{f.t,
                         f.pointer.x,
                         f.pointer.y,
                         f.frozen ? 1 : 0,
                         f.saturated ? 1 : 0,
                         f.h,
                         f.H,
                         fb.circle_radius,
                         fb.circle_clutching ? 1 : 0,
                         fb.rings ? 1 : 0,
                         fb.rings ? fb.rings->pos_now.x : 0.0,
                         fb.rings ? fb.rings->pos_now.y : 0.0,
                         fb.rings ? fb.rings->pos_prev.x : 0.0,
                         fb.rings ? fb.rings->pos_prev.y : 0.0,
                         fb.rings ? fb.rings->thickness : 0.0,
                         fb.prediction_end.x,
                         fb.prediction_end.y};
        engine->last_error.clear();
        return MPP_OK;
    } catch (const mpp::Error& e) {
        engine->last_error = e.what();
        return e.code() == mpp::ErrorCode::NonMonotonicTimestamp ? MPP_ERR_TIMESTAMP : MPP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        engine->last_error = e.what();
        return MPP_ERR_INTERNAL;
    }
}

int mpp_engine_warp(mpp_engine* engine, double x, double y) {
    if (!engine) return MPP_ERR_ARGUMENT;
    engine->engine.warp_pointer({x, y});
    return MPP_OK;
}

uint64_t mpp_engine_checksum(const mpp_engine* engine) { return engine ? engine->checksum : 0; }

void mpp_engine_last_error(const mpp_engine* engine, char* buf, size_t len) {
    mpp::copy_message(engine ? engine->last_error : std::string("null engine"), buf, len);
}

const char* mpp_version(void) { return "1.0.0"; }

}  // extern "C"
