#pragma once

// Middlebury .flo container and random 3x3 patch extraction.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "flowtopo/common.hpp"

namespace flowtopo {

inline constexpr float kFloMagic = 202021.25f;
inline constexpr std::int64_t kMaxFieldDim = 100000;
inline constexpr double kDefaultSentinelCutoff = 1e9;

// W x H grid of (u, v) flow vectors, row-major, interleaved, pixels/frame.
struct FlowField {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<float> data; // 2 * width * height floats: u then v per pixel

    float u(std::int32_t row, std::int32_t col) const {
        return data[2 * (static_cast<std::size_t>(row) * width + col)];
    }
    float v(std::int32_t row, std::int32_t col) const {
        return data[2 * (static_cast<std::size_t>(row) * width + col) + 1];
    }
    float& u(std::int32_t row, std::int32_t col) {
        return data[2 * (static_cast<std::size_t>(row) * width + col)];
    }
    float& v(std::int32_t row, std::int32_t col) {
        return data[2 * (static_cast<std::size_t>(row) * width + col) + 1];
    }
};

inline void validate_field(const FlowField& f) {
    if (f.width <= 0 || f.height <= 0)
        fail(errc::non_positive_dims, "flow field dimensions must be positive");
    if (f.width > kMaxFieldDim || f.height > kMaxFieldDim)
        fail(errc::invalid_value, "flow field dimensions exceed sanity bound");
    std::size_t expect = 2u * static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height);
    if (f.data.size() != expect)
        fail(errc::invalid_value, "flow field data length does not match dimensions");
}

struct PatchProvenance {
    std::int32_t field = -1; // index into the source collection, -1 for synthetic
    std::int32_t row = -1;   // top-left anchor
    std::int32_t col = -1;
};

// 3x3 flow patch as an 18-vector (u1..u9, v1..v9). Pixel indices run down
// the columns: 1,2,3 is the first column, 4,5,6 the second, 7,8,9 the third.
struct RawPatch {
    std::array<double, 18> vec{};
    PatchProvenance origin;
};

namespace detail {

inline std::uint32_t load_le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_le32(std::uint32_t v, std::uint8_t* p) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

inline float load_le_f32(const std::uint8_t* p) { return std::bit_cast<float>(load_le32(p)); }

inline void store_le_f32(float v, std::uint8_t* p) { store_le32(std::bit_cast<std::uint32_t>(v), p); }

} // namespace detail

// Parses the little-endian .flo layout: float magic 202021.25, int32 width,
// int32 height, then height*width (u, v) float pairs row-major. Rejects
// non-finite flow values outright; Sintel-style large sentinels are kept and
// handled at patch-sampling time.
inline FlowField read_flo(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) fail(errc::truncated, "flo header incomplete");
    float magic = detail::load_le_f32(bytes.data());
    if (!(magic == kFloMagic)) fail(errc::bad_magic, "flo magic mismatch");
    auto w = static_cast<std::int32_t>(detail::load_le32(bytes.data() + 4));
    auto h = static_cast<std::int32_t>(detail::load_le32(bytes.data() + 8));
    if (w <= 0 || h <= 0) fail(errc::non_positive_dims, "flo dimensions must be positive");
    if (w > kMaxFieldDim || h > kMaxFieldDim)
        fail(errc::invalid_value, "flo dimensions exceed sanity bound");

    std::size_t count = 2u * static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    std::size_t payload = 4u * count;
    if (bytes.size() < 12 + payload) fail(errc::truncated, "flo payload shorter than header implies");
    if (bytes.size() > 12 + payload) fail(errc::truncated, "flo payload has trailing bytes");

    FlowField field;
    field.width = w;
    field.height = h;
    field.data.resize(count);
    const std::uint8_t* p = bytes.data() + 12;
    for (std::size_t i = 0; i < count; ++i, p += 4) {
        float value = detail::load_le_f32(p);
        if (!std::isfinite(value)) fail(errc::invalid_value, "flo contains non-finite flow value");
        field.data[i] = value;
    }
    return field;
}

inline std::vector<std::uint8_t> write_flo(const FlowField& field) {
    validate_field(field);
    for (float value : field.data)
        if (!std::isfinite(value)) fail(errc::invalid_value, "flow field contains non-finite value");

    std::vector<std::uint8_t> out(12 + 4 * field.data.size());
    detail::store_le_f32(kFloMagic, out.data());
    detail::store_le32(static_cast<std::uint32_t>(field.width), out.data() + 4);
    detail::store_le32(static_cast<std::uint32_t>(field.height), out.data() + 8);
    std::uint8_t* p = out.data() + 12;
    for (float value : field.data) {
        detail::store_le_f32(value, p);
        p += 4;
    }
    return out;
}

// Copies the 3x3 window anchored at (row, col) into the column-major 18-vector.
inline RawPatch extract_patch(const FlowField& field, std::int32_t row, std::int32_t col,
                              std::int32_t field_index = -1) {
    RawPatch patch;
    for (std::int32_t c = 0; c < 3; ++c) {
        for (std::int32_t r = 0; r < 3; ++r) {
            std::size_t k = static_cast<std::size_t>(c) * 3 + r;
            patch.vec[k] = field.u(row + r, col + c);
            patch.vec[k + 9] = field.v(row + r, col + c);
        }
    }
    patch.origin = {field_index, row, col};
    return patch;
}

// Draws n patches uniformly (with replacement) over all valid 3x3 anchors of
// the collection. An anchor is valid when no pixel of its window exceeds the
// sentinel cutoff in magnitude; fields smaller than 3x3 contribute no anchors.
inline std::vector<RawPatch> sample_patches(std::span<const FlowField> fields, std::size_t n,
                                            std::uint64_t seed,
                                            double sentinel_cutoff = kDefaultSentinelCutoff) {
    if (n < 1) fail(errc::invalid_argument, "sample_patches requires n >= 1");

    // An anchor is valid when no pixel of its 3x3 window exceeds the cutoff.
    auto window_clean = [&](const FlowField& f, std::int32_t r, std::int32_t c) {
        for (std::int32_t dr = 0; dr < 3; ++dr)
            for (std::int32_t dc = 0; dc < 3; ++dc) {
                double uu = f.u(r + dr, c + dc), vv = f.v(r + dr, c + dc);
                if (!(std::fabs(uu) <= sentinel_cutoff) || !(std::fabs(vv) <= sentinel_cutoff))
                    return false;
            }
        return true;
    };

    // Counting first keeps memory flat for large collections; drawing then uses
    // field weights plus in-field rejection, which stays uniform over anchors.
    std::vector<std::uint64_t> cumulative;
    cumulative.reserve(fields.size());
    std::uint64_t total_valid = 0;
    for (const FlowField& f : fields) {
        validate_field(f);
        std::uint64_t count = 0;
        if (f.width >= 3 && f.height >= 3)
            for (std::int32_t r = 0; r + 2 < f.height; ++r)
                for (std::int32_t c = 0; c + 2 < f.width; ++c)
                    if (window_clean(f, r, c)) ++count;
        total_valid += count;
        cumulative.push_back(total_valid);
    }
    if (total_valid == 0) fail(errc::no_valid_anchors, "no field offers a valid 3x3 anchor");

    Rng rng(seed);
    std::vector<RawPatch> patches;
    patches.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t t = rng.index(total_valid);
        std::size_t fi = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), t) - cumulative.begin());
        const FlowField& f = fields[fi];
        std::int32_t rows = f.height - 2, cols = f.width - 2;
        for (;;) {
            auto slot = rng.index(static_cast<std::size_t>(rows) * cols);
            std::int32_t r = static_cast<std::int32_t>(slot / cols);
            std::int32_t c = static_cast<std::int32_t>(slot % cols);
            if (window_clean(f, r, c)) {
                patches.push_back(extract_patch(f, r, c, static_cast<std::int32_t>(fi)));
                break;
            }
        }
    }
    return patches;
}

} // namespace flowtopo
