#pragma once

#include <cstdint>

namespace hirise {

// Axis-aligned box in pixel coordinates, (x, y) top-left, w columns by h rows.
// class_id is carried through unmodified for bookkeeping; it never affects
// any count.
struct RoiBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    int class_id = 0;

    [[nodiscard]] std::int64_t area() const {
        return static_cast<std::int64_t>(w) * static_cast<std::int64_t>(h);
    }
    bool operator==(const RoiBox&) const = default;
};

[[nodiscard]] inline bool box_within(const RoiBox& b, int width, int height) {
    return b.x >= 0 && b.y >= 0 && b.w >= 1 && b.h >= 1 &&
           b.x + b.w <= width && b.y + b.h <= height;
}

// Clamps b into [0, width) x [0, height), shrinking the extent as needed.
// Returns false (and leaves b degenerate) when nothing remains.
inline bool clamp_box(RoiBox& b, int width, int height) {
    if (b.x < 0) { b.w += b.x; b.x = 0; }
    if (b.y < 0) { b.h += b.y; b.y = 0; }
    if (b.x >= width || b.y >= height || b.w <= 0 || b.h <= 0) return false;
    if (b.x + b.w > width) b.w = width - b.x;
    if (b.y + b.h > height) b.h = height - b.y;
    return b.w > 0 && b.h > 0;
}

// Messages and reports count whole bytes; a trailing partial byte is padded.
// Exact (no padding) whenever the sample width is a multiple of 8.
[[nodiscard]] inline constexpr std::int64_t bits_to_bytes(std::int64_t bits) {
    return (bits + 7) / 8;
}

// Reports use decimal kilobytes throughout: 1 kB = 1000 B.
[[nodiscard]] inline constexpr double to_kilobytes(std::int64_t bytes) {
    return static_cast<double>(bytes) / 1000.0;
}

}  // namespace hirise
