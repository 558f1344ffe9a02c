#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "dipolelets/grid.hpp"

namespace dipolelets {

/// Dense 3D field over a GridSpec, x-fastest order. T is double or
/// std::complex<double>. Public operations treat fields as values; share
/// read-only copies freely across threads.
template <typename T>
struct Field3 {
    GridSpec grid;
    std::vector<T> data;

    Field3() = default;
    explicit Field3(const GridSpec& g, T fill = T{})
        : grid(g), data(static_cast<size_t>(g.num_voxels()), fill) {
        g.validate();
    }

    T& at(std::int64_t i, std::int64_t j, std::int64_t k) {
        return data[static_cast<size_t>(grid.index(i, j, k))];
    }
    const T& at(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return data[static_cast<size_t>(grid.index(i, j, k))];
    }
    T& operator[](std::int64_t idx) { return data[static_cast<size_t>(idx)]; }
    const T& operator[](std::int64_t idx) const { return data[static_cast<size_t>(idx)]; }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
};

using Volume = Field3<double>;
using ComplexVolume = Field3<std::complex<double>>;
/// A ComplexVolume whose samples live on the FFT frequency grid.
using Spectrum = ComplexVolume;

template <typename T>
double l2_norm(const Field3<T>& f) {
    double s = 0.0;
    for (const auto& v : f.data) s += std::norm(std::complex<double>(v));
    return std::sqrt(s);
}

inline double l2_norm(const Volume& f) {
    double s = 0.0;
    for (double v : f.data) s += v * v;
    return std::sqrt(s);
}

template <typename T>
double linf_norm(const Field3<T>& f) {
    double m = 0.0;
    for (const auto& v : f.data) m = std::max(m, std::abs(v));
    return m;
}

struct VolumeStats {
    double l2_norm = 0.0;
    double linf_norm = 0.0;
    double mean = 0.0;
};

inline VolumeStats volume_stats(const Volume& v) {
    VolumeStats s;
    s.l2_norm = l2_norm(v);
    s.linf_norm = linf_norm(v);
    s.mean = v.data.empty() ? 0.0
                            : std::accumulate(v.data.begin(), v.data.end(), 0.0) /
                                  static_cast<double>(v.data.size());
    return s;
}

template <typename T>
bool all_finite(const Field3<T>& f) {
    for (const auto& v : f.data) {
        const std::complex<double> c(v);
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    }
    return true;
}

template <typename T>
void require_finite(const Field3<T>& f, const char* what) {
    if (!all_finite(f)) throw NumericError(std::string(what) + ": non-finite sample");
}

// Voxelwise helpers used throughout the solvers.

inline Volume operator+(const Volume& a, const Volume& b) {
    require_same_grid(a.grid, b.grid, "volume add");
    Volume r = a;
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
    return r;
}

inline Volume operator-(const Volume& a, const Volume& b) {
    require_same_grid(a.grid, b.grid, "volume sub");
    Volume r = a;
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
    return r;
}

inline Volume operator*(double s, const Volume& a) {
    Volume r = a;
    for (auto& v : r.data) v *= s;
    return r;
}

inline Volume hadamard(const Volume& a, const Volume& b) {
    require_same_grid(a.grid, b.grid, "hadamard");
    Volume r = a;
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] *= b.data[i];
    return r;
}

inline void axpy(double alpha, const Volume& x, Volume& y) {
    require_same_grid(x.grid, y.grid, "axpy");
    for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

inline double dot(const Volume& a, const Volume& b) {
    require_same_grid(a.grid, b.grid, "dot");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

} // namespace dipolelets
