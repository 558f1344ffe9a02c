#pragma once

#include <complex>
#include <mutex>

#include <fftw3.h>

#include "dipolelets/window.hpp"

namespace dipolelets {

namespace detail {

// FFTW planning is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place c2c transform of data in x-fastest order. FFTW's last dimension is
// the fastest-varying one, hence the (nz, ny, nx) argument order.
inline void c2c_3d(const GridSpec& g, std::complex<double>* buf, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_3d(static_cast<int>(g.nz()), static_cast<int>(g.ny()),
                                static_cast<int>(g.nx()),
                                reinterpret_cast<fftw_complex*>(buf),
                                reinterpret_cast<fftw_complex*>(buf), sign, FFTW_ESTIMATE);
    }
    if (!plan) throw NumericError("fftw: plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

} // namespace detail

/// Forward DFT, unnormalized, e^{-2pi i xi.x} convention. DC bin = sum of samples.
inline Spectrum fft3(const ComplexVolume& v) {
    Spectrum s;
    s.grid = v.grid;
    s.data = v.data;
    detail::c2c_3d(v.grid, s.data.data(), FFTW_FORWARD);
    return s;
}

inline Spectrum fft3(const Volume& v) {
    ComplexVolume c(v.grid);
    for (size_t i = 0; i < v.data.size(); ++i) c.data[i] = v.data[i];
    return fft3(c);
}

/// Inverse DFT, normalized by 1/N so that ifft3(fft3(v)) == v.
inline ComplexVolume ifft3(const Spectrum& s) {
    ComplexVolume v;
    v.grid = s.grid;
    v.data = s.data;
    detail::c2c_3d(s.grid, v.data.data(), FFTW_BACKWARD);
    const double inv_n = 1.0 / static_cast<double>(s.grid.num_voxels());
    for (auto& x : v.data) x *= inv_n;
    return v;
}

/// Inverse DFT of a (nearly) Hermitian spectrum, returned as a real volume.
/// Imaginary residue above `residue_tol` (relative L2) is a numerical error.
inline Volume ifft3_real(const Spectrum& s, double residue_tol = 1e-9) {
    const ComplexVolume c = ifft3(s);
    double total = 0.0, imag = 0.0;
    for (const auto& x : c.data) {
        total += std::norm(x);
        imag += x.imag() * x.imag();
    }
    if (total > 0.0 && std::sqrt(imag) > residue_tol * std::sqrt(total))
        throw NumericError("ifft3_real: imaginary residue " + std::to_string(std::sqrt(imag / total)) +
                           " exceeds tolerance; spectrum is not Hermitian-symmetric");
    Volume v(s.grid);
    for (size_t i = 0; i < v.data.size(); ++i) v.data[i] = c.data[i].real();
    return v;
}

/// F^{-1}(w . F v): the multiplier sandwich realizing every band coefficient.
/// Real input with a real even window yields real output.
inline Volume apply_multiplier(const Volume& v, const SpectralWindow& w) {
    require_same_grid(v.grid, w.grid, "apply_multiplier");
    Spectrum s = fft3(v);
    for (std::int64_t i = 0; i < s.size(); ++i) s[i] *= w[i];
    return ifft3_real(s);
}

inline ComplexVolume apply_multiplier(const ComplexVolume& v, const SpectralWindow& w) {
    require_same_grid(v.grid, w.grid, "apply_multiplier");
    Spectrum s = fft3(v);
    for (std::int64_t i = 0; i < s.size(); ++i) s[i] *= w[i];
    return ifft3(s);
}

/// Zero-pad odd axes up to the next even length (window symmetry tests are
/// cleaner on even grids). Even axes pass through.
inline Volume pad_to_next_even(const Volume& v) {
    GridSpec g = v.grid;
    for (int a = 0; a < 3; ++a)
        if (g.shape[a] % 2 != 0) ++g.shape[a];
    if (g == v.grid) return v;
    Volume out(g);
    for (std::int64_t k = 0; k < v.grid.nz(); ++k)
        for (std::int64_t j = 0; j < v.grid.ny(); ++j)
            for (std::int64_t i = 0; i < v.grid.nx(); ++i)
                out.at(i, j, k) = v.at(i, j, k);
    return out;
}

/// Max relative deviation from Hermitian symmetry data[k] = conj(data[-k mod n]).
inline double hermitian_asymmetry(const Spectrum& s) {
    const auto& g = s.grid;
    double worst = 0.0, scale = 0.0;
    for (const auto& x : s.data) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    for (std::int64_t k = 0; k < g.nz(); ++k)
        for (std::int64_t j = 0; j < g.ny(); ++j)
            for (std::int64_t i = 0; i < g.nx(); ++i) {
                const std::int64_t im = (g.nx() - i) % g.nx();
                const std::int64_t jm = (g.ny() - j) % g.ny();
                const std::int64_t km = (g.nz() - k) % g.nz();
                const auto d = s.at(i, j, k) - std::conj(s.at(im, jm, km));
                worst = std::max(worst, std::abs(d));
            }
    return worst / scale;
}

} // namespace dipolelets
