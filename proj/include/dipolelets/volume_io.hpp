#pragma once

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipolelets/volume.hpp"

namespace dipolelets {

static_assert(std::endian::native == std::endian::little,
              "volume container and NIfTI writer assume a little-endian host");

// ---------------------------------------------------------------------------
// Native container: [u32 header length][JSON header][float32 payload]

namespace detail {

inline nlohmann::json volume_header(const GridSpec& g, const char* kind) {
    return nlohmann::json{{"shape", {g.nx(), g.ny(), g.nz()}},
                          {"voxel_size", {g.voxel_size[0], g.voxel_size[1], g.voxel_size[2]}},
                          {"kind", kind},
                          {"order", "xyz"},
                          {"version", 1}};
}

inline void write_container(const std::string& path, const nlohmann::json& header,
                            const std::vector<float>& payload) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Code::open_failed, "cannot open for writing: " + path);
    const std::string h = header.dump();
    const std::uint32_t len = static_cast<std::uint32_t>(h.size());
    f.write(reinterpret_cast<const char*>(&len), 4);
    f.write(h.data(), static_cast<std::streamsize>(h.size()));
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!f) throw IoError(IoError::Code::write_failed, "short write: " + path);
}

struct ContainerData {
    GridSpec grid;
    bool complex = false;
    std::vector<float> payload;
};

inline ContainerData read_container(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Code::open_failed, "cannot open: " + path);
    std::uint32_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 4);
    if (f.gcount() != 4)
        throw IoError(IoError::Code::malformed_header, "missing header length: " + path);
    std::string htext(len, '\0');
    f.read(htext.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::uint32_t>(f.gcount()) != len)
        throw IoError(IoError::Code::malformed_header, "header shorter than declared: " + path);

    nlohmann::json h = nlohmann::json::parse(htext, nullptr, false);
    if (h.is_discarded() || !h.is_object())
        throw IoError(IoError::Code::malformed_header, "header is not valid JSON: " + path);
    for (const char* key : {"shape", "voxel_size", "kind", "order", "version"})
        if (!h.contains(key))
            throw IoError(IoError::Code::malformed_header,
                          std::string("header missing \"") + key + "\": " + path);
    if (h["version"] != 1)
        throw IoError(IoError::Code::version_mismatch,
                      "unsupported container version " + h["version"].dump() + ": " + path);
    if (h["order"] != "xyz")
        throw IoError(IoError::Code::unsupported_feature,
                      "unsupported sample order " + h["order"].dump() + ": " + path);

    ContainerData out;
    const std::string kind = h["kind"].get<std::string>();
    if (kind == "complex")
        out.complex = true;
    else if (kind != "real")
        throw IoError(IoError::Code::unsupported_feature, "unsupported kind \"" + kind + "\": " + path);

    const auto shape = h["shape"];
    const auto voxel = h["voxel_size"];
    if (!shape.is_array() || shape.size() != 3 || !voxel.is_array() || voxel.size() != 3)
        throw IoError(IoError::Code::malformed_header, "shape/voxel_size must have 3 entries: " + path);
    for (int a = 0; a < 3; ++a) {
        out.grid.shape[static_cast<size_t>(a)] = shape[static_cast<size_t>(a)].get<std::int64_t>();
        out.grid.voxel_size[static_cast<size_t>(a)] = voxel[static_cast<size_t>(a)].get<double>();
    }
    try {
        out.grid.validate();
    } catch (const ConfigError& e) {
        throw IoError(IoError::Code::malformed_header, std::string(e.what()) + ": " + path);
    }

    const std::int64_t n = out.grid.num_voxels() * (out.complex ? 2 : 1);
    out.payload.resize(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(out.payload.data()),
           static_cast<std::streamsize>(static_cast<size_t>(n) * sizeof(float)));
    if (f.gcount() != static_cast<std::streamsize>(static_cast<size_t>(n) * sizeof(float)))
        throw IoError(IoError::Code::truncated_payload, "payload shorter than shape implies: " + path);
    return out;
}

} // namespace detail

inline void write_volume(const Volume& v, const std::string& path) {
    std::vector<float> payload(v.data.size());
    for (size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(v.data[i]);
    detail::write_container(path, detail::volume_header(v.grid, "real"), payload);
}

inline void write_volume(const ComplexVolume& v, const std::string& path) {
    std::vector<float> payload(v.data.size() * 2);
    for (size_t i = 0; i < v.data.size(); ++i) {
        payload[2 * i] = static_cast<float>(v.data[i].real());
        payload[2 * i + 1] = static_cast<float>(v.data[i].imag());
    }
    detail::write_container(path, detail::volume_header(v.grid, "complex"), payload);
}

inline Volume read_volume(const std::string& path) {
    detail::ContainerData c = detail::read_container(path);
    if (c.complex)
        throw IoError(IoError::Code::unsupported_feature,
                      "expected a real volume, found complex: " + path);
    Volume v(c.grid);
    for (size_t i = 0; i < c.payload.size(); ++i) v.data[i] = static_cast<double>(c.payload[i]);
    return v;
}

/// Reads either kind; a real container is promoted to complex.
inline ComplexVolume read_complex_volume(const std::string& path) {
    detail::ContainerData c = detail::read_container(path);
    ComplexVolume v(c.grid);
    if (c.complex) {
        for (size_t i = 0; i < v.data.size(); ++i)
            v.data[i] = {static_cast<double>(c.payload[2 * i]),
                         static_cast<double>(c.payload[2 * i + 1])};
    } else {
        for (size_t i = 0; i < v.data.size(); ++i)
            v.data[i] = {static_cast<double>(c.payload[i]), 0.0};
    }
    return v;
}

// ---------------------------------------------------------------------------
// Minimal single-file NIfTI-1 interop (float32/float64, 3D only)

namespace detail {

template <typename T>
inline T header_field(const std::array<char, 348>& h, size_t offset) {
    T v;
    std::memcpy(&v, h.data() + offset, sizeof(T));
    return v;
}

template <typename T>
inline void set_header_field(std::array<char, 348>& h, size_t offset, T v) {
    std::memcpy(h.data() + offset, &v, sizeof(T));
}

} // namespace detail

inline Volume read_nifti_minimal(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Code::open_failed, "cannot open: " + path);
    std::array<char, 348> h{};
    f.read(h.data(), 348);
    if (f.gcount() != 348)
        throw IoError(IoError::Code::malformed_header, "file shorter than a NIfTI-1 header: " + path);

    const std::int32_t sizeof_hdr = detail::header_field<std::int32_t>(h, 0);
    if (sizeof_hdr != 348) {
        if (sizeof_hdr == 1543569408) // 348 byte-swapped
            throw IoError(IoError::Code::unsupported_feature,
                          "big-endian NIfTI not supported (sizeof_hdr byte-swapped): " + path);
        throw IoError(IoError::Code::malformed_header, "sizeof_hdr is not 348: " + path);
    }
    const char* magic = h.data() + 344;
    if (std::memcmp(magic, "n+1", 4) != 0) {
        if (std::memcmp(magic, "ni1", 4) == 0)
            throw IoError(IoError::Code::unsupported_feature,
                          "two-file NIfTI (magic \"ni1\") not supported: " + path);
        throw IoError(IoError::Code::malformed_header, "bad NIfTI magic: " + path);
    }

    const std::int16_t dim0 = detail::header_field<std::int16_t>(h, 40);
    if (dim0 != 3)
        throw IoError(IoError::Code::unsupported_feature,
                      "only 3D volumes supported, dim[0] = " + std::to_string(dim0) + ": " + path);
    const std::int16_t datatype = detail::header_field<std::int16_t>(h, 70);
    if (datatype != 16 && datatype != 64)
        throw IoError(IoError::Code::unsupported_feature,
                      "only float32/float64 supported, datatype = " + std::to_string(datatype) +
                          ": " + path);

    GridSpec g;
    for (int a = 0; a < 3; ++a) {
        g.shape[static_cast<size_t>(a)] =
            detail::header_field<std::int16_t>(h, 40 + 2 * static_cast<size_t>(a + 1));
        const float pd = detail::header_field<float>(h, 76 + 4 * static_cast<size_t>(a + 1));
        g.voxel_size[static_cast<size_t>(a)] = pd > 0.0f ? static_cast<double>(pd) : 1.0;
    }
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw IoError(IoError::Code::malformed_header, std::string(e.what()) + ": " + path);
    }

    const float vox_offset = detail::header_field<float>(h, 108);
    if (vox_offset < 348.0f)
        throw IoError(IoError::Code::malformed_header, "vox_offset below header size: " + path);
    const float scl_slope = detail::header_field<float>(h, 112);
    const float scl_inter = detail::header_field<float>(h, 116);

    f.seekg(static_cast<std::streamoff>(vox_offset));
    Volume v(g);
    const size_t n = static_cast<size_t>(g.num_voxels());
    if (datatype == 16) {
        std::vector<float> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 4));
        if (f.gcount() != static_cast<std::streamsize>(n * 4))
            throw IoError(IoError::Code::truncated_payload, "NIfTI payload truncated: " + path);
        for (size_t i = 0; i < n; ++i) v.data[i] = static_cast<double>(buf[i]);
    } else {
        std::vector<double> buf(n);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 8));
        if (f.gcount() != static_cast<std::streamsize>(n * 8))
            throw IoError(IoError::Code::truncated_payload, "NIfTI payload truncated: " + path);
        v.data = std::move(buf);
    }
    if (scl_slope != 0.0f)
        for (auto& x : v.data)
            x = static_cast<double>(scl_slope) * x + static_cast<double>(scl_inter);
    return v;
}

inline void write_nifti_minimal(const Volume& v, const std::string& path) {
    std::array<char, 348> h{};
    detail::set_header_field<std::int32_t>(h, 0, 348);
    h[38] = 'r'; // regular
    detail::set_header_field<std::int16_t>(h, 40, 3);
    for (int a = 0; a < 3; ++a)
        detail::set_header_field<std::int16_t>(
            h, 40 + 2 * static_cast<size_t>(a + 1),
            static_cast<std::int16_t>(v.grid.shape[static_cast<size_t>(a)]));
    for (size_t a = 4; a <= 7; ++a) detail::set_header_field<std::int16_t>(h, 40 + 2 * a, 1);
    detail::set_header_field<std::int16_t>(h, 70, 16); // float32
    detail::set_header_field<std::int16_t>(h, 72, 32); // bitpix
    detail::set_header_field<float>(h, 76, 1.0f);
    for (int a = 0; a < 3; ++a)
        detail::set_header_field<float>(h, 76 + 4 * static_cast<size_t>(a + 1),
                                        static_cast<float>(v.grid.voxel_size[static_cast<size_t>(a)]));
    detail::set_header_field<float>(h, 108, 352.0f); // vox_offset
    detail::set_header_field<float>(h, 112, 1.0f);   // scl_slope
    detail::set_header_field<float>(h, 116, 0.0f);   // scl_inter
    h[123] = 2; // xyzt_units: millimetres
    std::memcpy(h.data() + 344, "n+1", 4);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(IoError::Code::open_failed, "cannot open for writing: " + path);
    f.write(h.data(), 348);
    const std::array<char, 4> ext{};
    f.write(ext.data(), 4);
    std::vector<float> buf(v.data.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(v.data[i]);
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 4));
    if (!f) throw IoError(IoError::Code::write_failed, "short write: " + path);
}

} // namespace dipolelets
