#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "dipolelets/volume.hpp"

namespace dipolelets {

namespace detail {

inline void png_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& payload) {
    png_u32be(out, static_cast<std::uint32_t>(payload.size()));
    const size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = ::crc32(::crc32(0L, Z_NULL, 0), out.data() + crc_start,
                              static_cast<uInt>(out.size() - crc_start));
    png_u32be(out, static_cast<std::uint32_t>(crc));
}

} // namespace detail

/// Encode an 8-bit grayscale image (row-major, top row first) as PNG bytes.
/// Fixed zlib level and filter 0 keep the output byte-deterministic.
inline std::vector<std::uint8_t> png_encode_gray8(std::int64_t width, std::int64_t height,
                                                  const std::vector<std::uint8_t>& pixels) {
    if (width < 1 || height < 1 ||
        pixels.size() != static_cast<size_t>(width) * static_cast<size_t>(height))
        throw ConfigError("png_encode_gray8: pixel buffer does not match dimensions");

    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<size_t>(height) * (static_cast<size_t>(width) + 1));
    for (std::int64_t y = 0; y < height; ++y) {
        raw.push_back(0); // filter: none
        const std::uint8_t* row = pixels.data() + static_cast<size_t>(y * width);
        raw.insert(raw.end(), row, row + width);
    }

    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (::compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError(IoError::Code::write_failed, "png_encode_gray8: deflate failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<std::uint8_t> ihdr;
    detail::png_u32be(ihdr, static_cast<std::uint32_t>(width));
    detail::png_u32be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // grayscale
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::png_chunk(out, "IHDR", ihdr);
    detail::png_chunk(out, "IDAT", compressed);
    detail::png_chunk(out, "IEND", {});
    return out;
}

/// Extract one slice perpendicular to `axis`, clip to the window and map
/// linearly to [0, 255] with round-half-up.
inline std::vector<std::uint8_t> slice_to_gray8(const Volume& v, int axis, std::int64_t index,
                                                double lo, double hi, std::int64_t& width,
                                                std::int64_t& height) {
    if (axis < 0 || axis > 2) throw ConfigError("slice_to_gray8: axis must be 0, 1 or 2");
    if (!(lo < hi)) throw ConfigError("slice_to_gray8: window must satisfy lo < hi");
    const GridSpec& g = v.grid;
    if (index < 0 || index >= g.shape[static_cast<size_t>(axis)])
        throw ConfigError("slice_to_gray8: slice index " + std::to_string(index) +
                          " out of range on axis " + std::to_string(axis));

    // Rows advance along the higher remaining axis so axial slices (axis 2)
    // come out with x horizontal and y vertical.
    const int col_axis = axis == 0 ? 1 : 0;
    const int row_axis = axis == 2 ? 1 : 2;
    width = g.shape[static_cast<size_t>(col_axis)];
    height = g.shape[static_cast<size_t>(row_axis)];

    std::vector<std::uint8_t> pixels(static_cast<size_t>(width) * static_cast<size_t>(height));
    std::array<std::int64_t, 3> c{};
    c[static_cast<size_t>(axis)] = index;
    for (std::int64_t r = 0; r < height; ++r) {
        c[static_cast<size_t>(row_axis)] = r;
        for (std::int64_t q = 0; q < width; ++q) {
            c[static_cast<size_t>(col_axis)] = q;
            double t = (v.at(c[0], c[1], c[2]) - lo) / (hi - lo);
            t = std::clamp(t, 0.0, 1.0);
            pixels[static_cast<size_t>(r * width + q)] =
                static_cast<std::uint8_t>(std::floor(t * 255.0 + 0.5));
        }
    }
    return pixels;
}

/// Write one PNG per requested slice; returns the paths written, in order.
inline std::vector<std::string> render_slices(const Volume& v, int axis,
                                              const std::vector<std::int64_t>& indices, double lo,
                                              double hi, const std::string& path_prefix) {
    static const char* axis_names[3] = {"x", "y", "z"};
    std::vector<std::string> paths;
    for (std::int64_t index : indices) {
        std::int64_t w = 0, h = 0;
        const auto pixels = slice_to_gray8(v, axis, index, lo, hi, w, h);
        const auto bytes = png_encode_gray8(w, h, pixels);
        std::string idx = std::to_string(index);
        while (idx.size() < 3) idx.insert(idx.begin(), '0');
        const std::string path = path_prefix + "_" + axis_names[axis] + idx + ".png";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError(IoError::Code::open_failed, "cannot open for writing: " + path);
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError(IoError::Code::write_failed, "short write: " + path);
        paths.push_back(path);
    }
    return paths;
}

} // namespace dipolelets
