#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dipolelets/fft.hpp"
#include "dipolelets/kernel.hpp"

namespace dipolelets {

enum class ShapeKind { sphere, ellipsoid, cylinder, slab };

/// One piecewise-constant shape. Positions and sizes are in voxel units
/// (fractional centers allowed); voxelization is center-in-shape.
struct ShapeSpec {
    ShapeKind kind = ShapeKind::sphere;
    std::array<double, 3> center{0, 0, 0};
    double radius = 0.0;                  // sphere, cylinder
    std::array<double, 3> half_size{0, 0, 0}; // ellipsoid, slab
    int axis = 2;                         // cylinder axis
    double half_length = 0.0;             // cylinder extent along axis
    double value = 0.0;                   // ppm (shapes add voxelwise)
};

struct PhantomRecipe {
    std::vector<ShapeSpec> chi33;
    std::vector<ShapeSpec> chi13;
    std::vector<ShapeSpec> chi23;
    std::vector<ShapeSpec> roi; // union defines the mask; empty -> all ones
    std::string description;
};

struct Phantom {
    Volume chi33;
    std::optional<Volume> chi13;
    std::optional<Volume> chi23;
    Volume mask;
    std::string description;
};

namespace detail {

inline bool shape_contains(const ShapeSpec& s, double x, double y, double z) {
    const double dx = x - s.center[0], dy = y - s.center[1], dz = z - s.center[2];
    switch (s.kind) {
        case ShapeKind::sphere:
            return dx * dx + dy * dy + dz * dz <= s.radius * s.radius;
        case ShapeKind::ellipsoid: {
            const double ex = dx / s.half_size[0], ey = dy / s.half_size[1],
                         ez = dz / s.half_size[2];
            return ex * ex + ey * ey + ez * ez <= 1.0;
        }
        case ShapeKind::cylinder: {
            const double d[3] = {dx, dy, dz};
            const int a = s.axis, b = (s.axis + 1) % 3, c = (s.axis + 2) % 3;
            return std::abs(d[a]) <= s.half_length &&
                   d[b] * d[b] + d[c] * d[c] <= s.radius * s.radius;
        }
        case ShapeKind::slab:
            return std::abs(dx) <= s.half_size[0] && std::abs(dy) <= s.half_size[1] &&
                   std::abs(dz) <= s.half_size[2];
    }
    return false;
}

inline void shape_bounds(const ShapeSpec& s, std::array<double, 3>& lo, std::array<double, 3>& hi) {
    std::array<double, 3> ext{0, 0, 0};
    switch (s.kind) {
        case ShapeKind::sphere: ext = {s.radius, s.radius, s.radius}; break;
        case ShapeKind::ellipsoid: ext = s.half_size; break;
        case ShapeKind::cylinder: {
            ext = {s.radius, s.radius, s.radius};
            ext[static_cast<size_t>(s.axis)] = s.half_length;
            break;
        }
        case ShapeKind::slab: ext = s.half_size; break;
    }
    for (int a = 0; a < 3; ++a) {
        lo[static_cast<size_t>(a)] = s.center[static_cast<size_t>(a)] - ext[static_cast<size_t>(a)];
        hi[static_cast<size_t>(a)] = s.center[static_cast<size_t>(a)] + ext[static_cast<size_t>(a)];
    }
}

inline void rasterize(Volume& vol, const std::vector<ShapeSpec>& shapes, bool binary,
                      const char* field) {
    const GridSpec& g = vol.grid;
    for (const ShapeSpec& s : shapes) {
        std::array<double, 3> lo, hi;
        shape_bounds(s, lo, hi);
        for (int a = 0; a < 3; ++a)
            if (lo[static_cast<size_t>(a)] < -0.5 ||
                hi[static_cast<size_t>(a)] > static_cast<double>(g.shape[static_cast<size_t>(a)]) - 0.5)
                throw ConfigError(std::string("make_phantom: ") + field +
                                  " shape extends outside the grid on axis " + std::to_string(a));
        // Voxel centers sit at integer coordinates.
        for (std::int64_t k = 0; k < g.nz(); ++k)
            for (std::int64_t j = 0; j < g.ny(); ++j)
                for (std::int64_t i = 0; i < g.nx(); ++i)
                    if (shape_contains(s, static_cast<double>(i), static_cast<double>(j),
                                       static_cast<double>(k))) {
                        if (binary)
                            vol.at(i, j, k) = 1.0;
                        else
                            vol.at(i, j, k) += s.value;
                    }
    }
}

} // namespace detail

inline Phantom make_phantom(const GridSpec& grid, const PhantomRecipe& recipe) {
    grid.validate();
    Phantom p;
    p.description = recipe.description;
    p.chi33 = Volume(grid);
    detail::rasterize(p.chi33, recipe.chi33, false, "chi33");
    if (!recipe.chi13.empty()) {
        p.chi13 = Volume(grid);
        detail::rasterize(*p.chi13, recipe.chi13, false, "chi13");
    }
    if (!recipe.chi23.empty()) {
        p.chi23 = Volume(grid);
        detail::rasterize(*p.chi23, recipe.chi23, false, "chi23");
    }
    if (recipe.roi.empty()) {
        p.mask = Volume(grid, 1.0);
    } else {
        p.mask = Volume(grid);
        detail::rasterize(p.mask, recipe.roi, true, "roi");
    }
    return p;
}

/// Brain-like default: ellipsoid ROI, paramagnetic/diamagnetic spheres at
/// +-0.1 ppm, one vein-like cylinder at +0.3 ppm. Sizes scale with the grid.
inline PhantomRecipe default_head_recipe(const GridSpec& grid) {
    const double nx = static_cast<double>(grid.nx());
    const double ny = static_cast<double>(grid.ny());
    const double nz = static_cast<double>(grid.nz());
    const std::array<double, 3> c{(nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0};

    PhantomRecipe r;
    r.description = "default-head";
    ShapeSpec roi;
    roi.kind = ShapeKind::ellipsoid;
    roi.center = c;
    roi.half_size = {0.42 * nx, 0.42 * ny, 0.38 * nz};
    r.roi.push_back(roi);

    auto sphere = [&](double fx, double fy, double fz, double fr, double value) {
        ShapeSpec s;
        s.kind = ShapeKind::sphere;
        s.center = {c[0] + fx * nx, c[1] + fy * ny, c[2] + fz * nz};
        s.radius = fr * std::min({nx, ny, nz});
        s.value = value;
        return s;
    };
    r.chi33.push_back(sphere(-0.16, -0.10, 0.05, 0.085, 0.1));
    r.chi33.push_back(sphere(0.15, 0.12, -0.06, 0.075, -0.1));
    r.chi33.push_back(sphere(0.10, -0.14, 0.10, 0.055, 0.1));
    r.chi33.push_back(sphere(-0.08, 0.16, -0.12, 0.065, -0.1));

    ShapeSpec vein;
    vein.kind = ShapeKind::cylinder;
    vein.center = {c[0] + 0.05 * nx, c[1] + 0.02 * ny, c[2]};
    vein.axis = 2;
    vein.radius = std::max(1.5, 0.035 * std::min({nx, ny, nz}));
    vein.half_length = 0.30 * nz;
    vein.value = 0.3;
    r.chi33.push_back(vein);
    return r;
}

/// psi0 = F^{-1}(D . F chi): the dipole-compatible forward phase.
inline Volume forward_dipole(const Volume& chi, double dc_value = 0.0) {
    const FreqGrid fg = make_freq_grid(chi.grid);
    return apply_multiplier(chi, dipole_kernel(fg, dc_value));
}

/// Full z-axis STI forward model; reduces to forward_dipole when the tensor
/// cross-terms are zero or absent.
inline Volume forward_sti_z(const Phantom& p) {
    const FreqGrid fg = make_freq_grid(p.chi33.grid);
    const auto mult = sti_forward_multipliers(fg);
    Spectrum acc = fft3(p.chi33);
    for (std::int64_t i = 0; i < acc.size(); ++i) acc[i] *= mult[0][i];
    if (p.chi13) {
        require_same_grid(p.chi33.grid, p.chi13->grid, "forward_sti_z chi13");
        Spectrum s = fft3(*p.chi13);
        for (std::int64_t i = 0; i < acc.size(); ++i) acc[i] += mult[1][i] * s[i];
    }
    if (p.chi23) {
        require_same_grid(p.chi33.grid, p.chi23->grid, "forward_sti_z chi23");
        Spectrum s = fft3(*p.chi23);
        for (std::int64_t i = 0; i < acc.size(); ++i) acc[i] += mult[2][i] * s[i];
    }
    return ifft3_real(acc);
}

/// Localized phase offset: a ball in voxel space (radius 0 = single voxel)
/// added to psi, probing unwrap-like jumps.
struct OffsetSpec {
    std::array<std::int64_t, 3> center{0, 0, 0};
    double radius = 0.0;
    double value = M_PI;
};

struct CorruptionSpec {
    std::optional<double> noise_snr = 100.0; // nullopt -> no noise
    std::vector<OffsetSpec> offsets;
    std::uint64_t seed = 0;

    void validate() const {
        if (noise_snr && !(*noise_snr > 0.0))
            throw ConfigError("CorruptionSpec: noise_snr must be > 0");
        for (const auto& o : offsets)
            if (o.radius < 0.0) throw ConfigError("CorruptionSpec: offset radius must be >= 0");
    }
};

/// Offsets first, then complex Gaussian noise on s = e^{i psi} with sigma =
/// 1/SNR per component, returned as arg(s + n). Bit-reproducible under a
/// fixed seed. Without noise the offsets are added directly (no wrap).
inline Volume corrupt(const Volume& psi, const CorruptionSpec& spec) {
    spec.validate();
    Volume out = psi;
    const GridSpec& g = out.grid;
    for (const auto& o : spec.offsets) {
        for (int a = 0; a < 3; ++a) {
            const std::int64_t cc = o.center[static_cast<size_t>(a)];
            if (cc < 0 || cc >= g.shape[static_cast<size_t>(a)])
                throw ConfigError("corrupt: offset center outside grid");
        }
        const std::int64_t r = static_cast<std::int64_t>(std::floor(o.radius));
        for (std::int64_t dk = -r; dk <= r; ++dk)
            for (std::int64_t dj = -r; dj <= r; ++dj)
                for (std::int64_t di = -r; di <= r; ++di) {
                    if (static_cast<double>(di * di + dj * dj + dk * dk) > o.radius * o.radius)
                        continue;
                    const std::int64_t i = o.center[0] + di, j = o.center[1] + dj,
                                       k = o.center[2] + dk;
                    if (i < 0 || i >= g.nx() || j < 0 || j >= g.ny() || k < 0 || k >= g.nz())
                        continue;
                    out.at(i, j, k) += o.value;
                }
    }
    if (spec.noise_snr) {
        const double sigma = 1.0 / *spec.noise_snr;
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> gauss(0.0, sigma);
        for (auto& v : out.data) {
            const std::complex<double> s = std::polar(1.0, v);
            const double nr = gauss(rng);
            const double ni = gauss(rng);
            v = std::arg(s + std::complex<double>(nr, ni));
        }
    }
    require_finite(out, "corrupt");
    return out;
}

} // namespace dipolelets
