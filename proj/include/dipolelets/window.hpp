#pragma once

#include <algorithm>
#include <vector>

#include "dipolelets/volume.hpp"

namespace dipolelets {

/// Real-valued multiplier on the FFT frequency grid. Band windows stay in
/// [0,1]; kernel evaluations use the full range hint.
struct SpectralWindow {
    GridSpec grid;
    std::vector<double> data;
    double range_min = 0.0;
    double range_max = 1.0;

    SpectralWindow() = default;
    explicit SpectralWindow(const GridSpec& g, double fill = 0.0)
        : grid(g), data(static_cast<size_t>(g.num_voxels()), fill) {}

    double& operator[](std::int64_t idx) { return data[static_cast<size_t>(idx)]; }
    double operator[](std::int64_t idx) const { return data[static_cast<size_t>(idx)]; }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    void update_range_hint() {
        if (data.empty()) return;
        auto [lo, hi] = std::minmax_element(data.begin(), data.end());
        range_min = *lo;
        range_max = *hi;
    }

    double max_value() const {
        double m = 0.0;
        for (double v : data) m = std::max(m, v);
        return m;
    }
};

inline SpectralWindow hadamard(const SpectralWindow& a, const SpectralWindow& b) {
    require_same_grid(a.grid, b.grid, "window product");
    SpectralWindow r = a;
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] *= b.data[i];
    r.update_range_hint();
    return r;
}

/// Window samples as a real Volume, for export and inspection.
inline Volume window_as_volume(const SpectralWindow& w) {
    Volume v(w.grid);
    v.data = w.data;
    return v;
}

} // namespace dipolelets
