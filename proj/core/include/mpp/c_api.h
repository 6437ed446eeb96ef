#ifndef MPP_C_API_H
#define MPP_C_API_H

/* C boundary to the engine for foreign callers (the browser demo compiles
 * this to WebAssembly). The caller owns every buffer; nothing here retains
 * pointers passed in. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mpp_engine mpp_engine;

/* Status codes. Negative values are engine errors. */
enum {
    MPP_OK = 0,
    MPP_ERR_TIMESTAMP = -1,
    MPP_ERR_ARGUMENT = -2,
    MPP_ERR_INTERNAL = -3
};

typedef struct mpp_frame {
    double t;
    double x, y; /* pointer, px */
    int frozen;
    int saturated;
    double h;
    double H;
    double circle_radius;
    int circle_clutching;
    int has_rings;
    double ring_now_x, ring_now_y;
    double ring_prev_x, ring_prev_y;
    double ring_thickness;
    double prediction_x, prediction_y;
} mpp_frame;

/* Parses a config in the cli text format. Returns NULL on failure and
 * writes a message into err (if err_len > 0). */
mpp_engine* mpp_engine_create(const char* config_text, char* err, size_t err_len);
void mpp_engine_destroy(mpp_engine* engine);

/* hand and shoulder are {x, y, z} in meters. */
int mpp_engine_step(mpp_engine* engine, double t, const double hand[3], const double shoulder[3], mpp_frame* out);
int mpp_engine_warp(mpp_engine* engine, double x, double y);

/* Running checksum over every frame produced so far; equals
 * mpp::frames_checksum() over an offline replay of the same samples. */
uint64_t mpp_engine_checksum(const mpp_engine* engine);

/* Copies the last error message (may be empty). */
void mpp_engine_last_error(const mpp_engine* engine, char* buf, size_t len);

const char* mpp_version(void);

#ifdef __cplusplus
}

#include <span>

#include "mpp/engine.hpp"

namespace mpp {

/// FNV-1a over the 9-digit-quantized pointer, H and frozen flag of each frame.
std::uint64_t frames_checksum(std::span<const FrameOutput> frames);
std::uint64_t frames_checksum_step(std::uint64_t state, const FrameOutput& frame);
inline constexpr std::uint64_t kChecksumSeed = 0xcbf29ce484222325ULL;

}  // namespace mpp
#endif

#endif
