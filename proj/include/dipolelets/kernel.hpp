#pragma once

#include <array>
#include <cmath>

#include "dipolelets/grid.hpp"
#include "dipolelets/window.hpp"

namespace dipolelets {

/// Unit dipole kernel D(xi) = 1/3 - xi_z^2/|xi|^2 on the discrete frequency
/// grid, evaluated from physical-unit frequencies so anisotropic voxels keep
/// the cone geometry correct. The xi = 0 bin takes `dc_value` (default 0,
/// which makes the forward model mean-free).
inline SpectralWindow dipole_kernel(const FreqGrid& fg, double dc_value = 0.0) {
    SpectralWindow w(fg.grid);
    std::int64_t idx = 0;
    for (std::int64_t k = 0; k < fg.grid.nz(); ++k) {
        const double fz = fg.freq(2, k);
        for (std::int64_t j = 0; j < fg.grid.ny(); ++j) {
            const double fy = fg.freq(1, j);
            for (std::int64_t i = 0; i < fg.grid.nx(); ++i, ++idx) {
                const double fx = fg.freq(0, i);
                const double r2 = fx * fx + fy * fy + fz * fz;
                w[idx] = (r2 == 0.0) ? dc_value : (1.0 / 3.0 - fz * fz / r2);
            }
        }
    }
    w.range_min = -2.0 / 3.0;
    w.range_max = 1.0 / 3.0;
    return w;
}

/// |D(xi)| per bin: the cone-proximity coordinate that indexes the angular
/// windows. Values in [0, 2/3]; zero exactly on the magic cone.
inline SpectralWindow cone_distance_proxy(const FreqGrid& fg, double dc_value = 0.0) {
    SpectralWindow w = dipole_kernel(fg, dc_value);
    for (auto& v : w.data) v = std::abs(v);
    w.range_min = 0.0;
    w.range_max = 2.0 / 3.0;
    return w;
}

/// z-axis STI forward multipliers for (chi33, chi13, chi23):
///   B = D.chi33_hat - (xi_z xi_x/|xi|^2).chi13_hat - (xi_z xi_y/|xi|^2).chi23_hat
/// DC bins are 0; the chi33 multiplier equals dipole_kernel with dc 0.
/// The cross multipliers are odd in xi_x (resp. xi_y) and xi_z, so on even
/// axes the Nyquist plane aliases +-1/2 ambiguously; those bins take the
/// symmetrized value 0, which keeps real inputs mapping to real outputs.
inline std::array<SpectralWindow, 3> sti_forward_multipliers(const FreqGrid& fg) {
    std::array<SpectralWindow, 3> m{SpectralWindow(fg.grid), SpectralWindow(fg.grid),
                                    SpectralWindow(fg.grid)};
    const auto nyquist = [&](int axis, std::int64_t k) {
        const std::int64_t n = fg.grid.shape[static_cast<size_t>(axis)];
        return n % 2 == 0 && k == n / 2;
    };
    std::int64_t idx = 0;
    for (std::int64_t k = 0; k < fg.grid.nz(); ++k) {
        const double fz = fg.freq(2, k);
        const bool nz = nyquist(2, k);
        for (std::int64_t j = 0; j < fg.grid.ny(); ++j) {
            const double fy = fg.freq(1, j);
            const bool ny = nyquist(1, j);
            for (std::int64_t i = 0; i < fg.grid.nx(); ++i, ++idx) {
                const double fx = fg.freq(0, i);
                const bool nx = nyquist(0, i);
                const double r2 = fx * fx + fy * fy + fz * fz;
                if (r2 == 0.0) continue;
                m[0][idx] = 1.0 / 3.0 - fz * fz / r2;
                if (!nx && !nz) m[1][idx] = -fz * fx / r2;
                if (!ny && !nz) m[2][idx] = -fz * fy / r2;
            }
        }
    }
    for (auto& w : m) w.update_range_hint();
    return m;
}

} // namespace dipolelets
