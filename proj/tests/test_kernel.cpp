#include <catch_amalgamated.hpp>

#include "dipolelets/kernel.hpp"

using namespace dipolelets;

namespace {

FreqGrid cube8() { return make_freq_grid(GridSpec{{8, 8, 8}, {1.0, 1.0, 1.0}}); }

double kernel_at(const SpectralWindow& w, std::int64_t i, std::int64_t j, std::int64_t k) {
    return w[w.grid.index(i, j, k)];
}

} // namespace

TEST_CASE("dipole kernel hits its closed-form values", "[kernel]") {
    const SpectralWindow d = dipole_kernel(cube8());

    // Pure z direction: the deepest negative lobe.
    REQUIRE(kernel_at(d, 0, 0, 1) == Catch::Approx(-2.0 / 3.0).margin(1e-14));
    REQUIRE(kernel_at(d, 0, 0, 3) == Catch::Approx(-2.0 / 3.0).margin(1e-14));
    // In-plane direction: the positive plateau.
    REQUIRE(kernel_at(d, 1, 0, 0) == Catch::Approx(1.0 / 3.0).margin(1e-14));
    REQUIRE(kernel_at(d, 0, 2, 0) == Catch::Approx(1.0 / 3.0).margin(1e-14));
    // The diagonal sits exactly on the zero cone.
    REQUIRE(kernel_at(d, 1, 1, 1) == Catch::Approx(0.0).margin(1e-14));
    // Mixed x/z direction.
    REQUIRE(kernel_at(d, 1, 0, 1) == Catch::Approx(-1.0 / 6.0).margin(1e-14));
}

TEST_CASE("dipole kernel DC bin takes the configured value", "[kernel]") {
    REQUIRE(dipole_kernel(cube8())[0] == 0.0);
    REQUIRE(dipole_kernel(cube8(), 0.7)[0] == 0.7);
    REQUIRE(dipole_kernel(cube8(), -1.0 / 3.0)[0] == Catch::Approx(-1.0 / 3.0));
}

TEST_CASE("dipole kernel depends only on direction", "[kernel]") {
    const SpectralWindow d = dipole_kernel(cube8());
    // Integer multiples of a bin share its direction.
    REQUIRE(kernel_at(d, 1, 0, 1) == Catch::Approx(kernel_at(d, 2, 0, 2)).margin(1e-12));
    REQUIRE(kernel_at(d, 1, 1, 1) == Catch::Approx(kernel_at(d, 3, 3, 3)).margin(1e-12));
    REQUIRE(kernel_at(d, 0, 1, 1) == Catch::Approx(kernel_at(d, 0, 3, 3)).margin(1e-12));
}

TEST_CASE("dipole kernel is even under index reflection", "[kernel]") {
    const GridSpec g{{8, 6, 10}, {1.0, 1.2, 0.8}};
    const SpectralWindow d = dipole_kernel(make_freq_grid(g));
    for (std::int64_t k = 0; k < g.nz(); ++k)
        for (std::int64_t j = 0; j < g.ny(); ++j)
            for (std::int64_t i = 0; i < g.nx(); ++i) {
                const double a = d[g.index(i, j, k)];
                const double b = d[g.index((g.nx() - i) % g.nx(), (g.ny() - j) % g.ny(),
                                           (g.nz() - k) % g.nz())];
                REQUIRE(a == Catch::Approx(b).margin(1e-14));
            }
}

TEST_CASE("dipole kernel range stays within its lobes", "[kernel]") {
    const SpectralWindow d = dipole_kernel(make_freq_grid(GridSpec{{12, 7, 9}, {0.7, 1.0, 1.4}}));
    for (double v : d.data) {
        REQUIRE(v >= -2.0 / 3.0 - 1e-14);
        REQUIRE(v <= 1.0 / 3.0 + 1e-14);
    }
}

TEST_CASE("anisotropic voxels keep the cone in physical coordinates", "[kernel]") {
    // Doubling the z voxel halves the z frequency: bin (1,0,1) then points in
    // the same physical direction as bin (2,0,1) on the isotropic grid.
    const SpectralWindow iso = dipole_kernel(make_freq_grid(GridSpec{{8, 8, 8}, {1.0, 1.0, 1.0}}));
    const SpectralWindow aniso =
        dipole_kernel(make_freq_grid(GridSpec{{8, 8, 8}, {1.0, 1.0, 2.0}}));
    REQUIRE(kernel_at(aniso, 1, 0, 1) == Catch::Approx(kernel_at(iso, 2, 0, 1)).margin(1e-14));
    REQUIRE(kernel_at(aniso, 0, 0, 1) == Catch::Approx(-2.0 / 3.0).margin(1e-14));
    REQUIRE(kernel_at(aniso, 1, 0, 0) == Catch::Approx(1.0 / 3.0).margin(1e-14));
}

TEST_CASE("cone distance proxy is the kernel magnitude", "[kernel]") {
    const FreqGrid fg = cube8();
    const SpectralWindow d = dipole_kernel(fg);
    const SpectralWindow p = cone_distance_proxy(fg);
    for (std::int64_t i = 0; i < d.size(); ++i) {
        REQUIRE(p[i] == Catch::Approx(std::abs(d[i])).margin(1e-15));
        REQUIRE(p[i] >= 0.0);
        REQUIRE(p[i] <= 2.0 / 3.0 + 1e-14);
    }
    REQUIRE(p[p.grid.index(1, 1, 1)] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("z-axis tensor multipliers hit their closed-form values", "[kernel]") {
    const auto m = sti_forward_multipliers(cube8());
    const GridSpec& g = m[0].grid;

    // In-plane bin: only the chi33 term survives.
    REQUIRE(m[0][g.index(1, 0, 0)] == Catch::Approx(1.0 / 3.0).margin(1e-14));
    REQUIRE(m[1][g.index(1, 0, 0)] == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(m[2][g.index(1, 0, 0)] == Catch::Approx(0.0).margin(1e-14));

    // Pure z bin: cross terms vanish there too.
    REQUIRE(m[0][g.index(0, 0, 1)] == Catch::Approx(-2.0 / 3.0).margin(1e-14));
    REQUIRE(m[1][g.index(0, 0, 1)] == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(m[2][g.index(0, 0, 1)] == Catch::Approx(0.0).margin(1e-14));

    // Mixed x/z bin activates the chi13 channel.
    REQUIRE(m[0][g.index(1, 0, 1)] == Catch::Approx(-1.0 / 6.0).margin(1e-14));
    REQUIRE(m[1][g.index(1, 0, 1)] == Catch::Approx(-0.5).margin(1e-14));
    REQUIRE(m[2][g.index(1, 0, 1)] == Catch::Approx(0.0).margin(1e-14));

    // Mixed y/z bin activates the chi23 channel symmetrically.
    REQUIRE(m[1][g.index(0, 1, 1)] == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(m[2][g.index(0, 1, 1)] == Catch::Approx(-0.5).margin(1e-14));

    // DC is zero in all three channels.
    for (const auto& w : m) REQUIRE(w[0] == 0.0);
}

TEST_CASE("the chi33 multiplier is the dipole kernel", "[kernel]") {
    const FreqGrid fg = make_freq_grid(GridSpec{{8, 6, 4}, {1.0, 1.5, 1.0}});
    const SpectralWindow d = dipole_kernel(fg);
    const auto m = sti_forward_multipliers(fg);
    for (std::int64_t i = 0; i < d.size(); ++i)
        REQUIRE(m[0][i] == Catch::Approx(d[i]).margin(1e-15));
}
