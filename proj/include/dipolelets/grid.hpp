#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dipolelets/errors.hpp"

namespace dipolelets {

/// Regular 3D sampling grid. Shape entries must be >= 4, voxel sizes in mm.
struct GridSpec {
    std::array<std::int64_t, 3> shape{0, 0, 0};
    std::array<double, 3> voxel_size{1.0, 1.0, 1.0};

    std::int64_t nx() const { return shape[0]; }
    std::int64_t ny() const { return shape[1]; }
    std::int64_t nz() const { return shape[2]; }
    std::int64_t num_voxels() const { return shape[0] * shape[1] * shape[2]; }

    // Canonical memory order is x-fastest: data[i + nx*(j + ny*k)].
    std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return i + shape[0] * (j + shape[1] * k);
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (shape[a] < 4)
                throw ConfigError("GridSpec: shape[" + std::to_string(a) + "] = " +
                                  std::to_string(shape[a]) + " is below the minimum of 4");
            if (!(voxel_size[a] > 0.0))
                throw ConfigError("GridSpec: voxel_size[" + std::to_string(a) + "] must be > 0");
        }
    }

    bool operator==(const GridSpec& o) const = default;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw ConfigError(std::string(what) + ": grid mismatch");
}

/// Per-axis frequency coordinates in cycles/mm, FFT layout (index 0 is DC,
/// indices above (n-1)/2 wrap to negative frequencies).
struct FreqGrid {
    GridSpec grid;
    std::array<std::vector<double>, 3> coords;

    double freq(int axis, std::int64_t k) const { return coords[axis][static_cast<size_t>(k)]; }
};

inline FreqGrid make_freq_grid(const GridSpec& grid) {
    grid.validate();
    FreqGrid fg;
    fg.grid = grid;
    for (int a = 0; a < 3; ++a) {
        const std::int64_t n = grid.shape[a];
        const double scale = 1.0 / (static_cast<double>(n) * grid.voxel_size[a]);
        fg.coords[a].resize(static_cast<size_t>(n));
        for (std::int64_t k = 0; k < n; ++k) {
            const std::int64_t ks = (k <= (n - 1) / 2) ? k : k - n;
            fg.coords[a][static_cast<size_t>(k)] = static_cast<double>(ks) * scale;
        }
    }
    return fg;
}

} // namespace dipolelets
