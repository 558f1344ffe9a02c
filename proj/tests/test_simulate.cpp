#include <catch_amalgamated.hpp>

#include "dipolelets/simulate.hpp"

#include "oracles.hpp"

using namespace dipolelets;

namespace {

std::int64_t count_nonzero(const Volume& v) {
    std::int64_t n = 0;
    for (double x : v.data) n += x != 0.0 ? 1 : 0;
    return n;
}

} // namespace

TEST_CASE("an empty recipe yields a zero phantom with a full mask", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    const Phantom p = make_phantom(g, PhantomRecipe{});
    REQUIRE(l2_norm(p.chi33) == 0.0);
    REQUIRE_FALSE(p.chi13.has_value());
    REQUIRE_FALSE(p.chi23.has_value());
    for (double v : p.mask.data) REQUIRE(v == 1.0);
}

TEST_CASE("sphere voxel counts match the analytic volume", "[simulate]") {
    const GridSpec g{{32, 32, 32}, {1.0, 1.0, 1.0}};
    PhantomRecipe r;
    ShapeSpec s;
    s.kind = ShapeKind::sphere;
    s.center = {15.5, 15.5, 15.5};
    s.radius = 8.0;
    s.value = 1.0;
    r.chi33.push_back(s);
    const Phantom p = make_phantom(g, r);
    const double analytic = 4.0 / 3.0 * M_PI * 8.0 * 8.0 * 8.0;
    const double counted = static_cast<double>(count_nonzero(p.chi33));
    REQUIRE(std::abs(counted - analytic) < 0.15 * analytic);
}

TEST_CASE("small shapes rasterize to exact voxel sets", "[simulate]") {
    const GridSpec g{{12, 12, 12}, {1.0, 1.0, 1.0}};

    SECTION("radius-2 ball holds 33 voxels") {
        PhantomRecipe r;
        ShapeSpec s;
        s.kind = ShapeKind::sphere;
        s.center = {6.0, 6.0, 6.0};
        s.radius = 2.0;
        s.value = 0.5;
        r.chi33.push_back(s);
        const Phantom p = make_phantom(g, r);
        REQUIRE(count_nonzero(p.chi33) == 33);
        REQUIRE(p.chi33.at(6, 6, 6) == 0.5);
        REQUIRE(p.chi33.at(8, 6, 6) == 0.5);
        REQUIRE(p.chi33.at(9, 6, 6) == 0.0);
    }
    SECTION("half-size-1.5 slab is a 3x3x3 box") {
        PhantomRecipe r;
        ShapeSpec s;
        s.kind = ShapeKind::slab;
        s.center = {6.0, 6.0, 6.0};
        s.half_size = {1.5, 1.5, 1.5};
        s.value = 1.0;
        r.chi33.push_back(s);
        REQUIRE(count_nonzero(make_phantom(g, r).chi33) == 27);
    }
    SECTION("cylinder along y collects disc times length") {
        PhantomRecipe r;
        ShapeSpec s;
        s.kind = ShapeKind::cylinder;
        s.center = {6.0, 6.0, 6.0};
        s.axis = 1;
        s.radius = 1.0; // 5-voxel disc
        s.half_length = 2.0;
        s.value = 1.0;
        r.chi33.push_back(s);
        const Phantom p = make_phantom(g, r);
        REQUIRE(count_nonzero(p.chi33) == 25);
        REQUIRE(p.chi33.at(6, 8, 6) == 1.0);
        REQUIRE(p.chi33.at(6, 9, 6) == 0.0);
    }
    SECTION("ellipsoid respects per-axis half sizes") {
        PhantomRecipe r;
        ShapeSpec s;
        s.kind = ShapeKind::ellipsoid;
        s.center = {6.0, 6.0, 6.0};
        s.half_size = {3.0, 1.0, 1.0};
        s.value = 1.0;
        r.chi33.push_back(s);
        const Phantom p = make_phantom(g, r);
        REQUIRE(p.chi33.at(9, 6, 6) == 1.0);
        REQUIRE(p.chi33.at(6, 7, 6) == 1.0);
        REQUIRE(p.chi33.at(6, 6, 7) == 1.0);
        REQUIRE(p.chi33.at(8, 7, 6) == 0.0);
    }
}

TEST_CASE("overlapping shapes add their values", "[simulate]") {
    const GridSpec g{{12, 12, 12}, {1.0, 1.0, 1.0}};
    PhantomRecipe r;
    ShapeSpec a;
    a.kind = ShapeKind::sphere;
    a.center = {5.0, 6.0, 6.0};
    a.radius = 2.0;
    a.value = 0.3;
    ShapeSpec b = a;
    b.center = {7.0, 6.0, 6.0};
    b.value = 0.4;
    r.chi33 = {a, b};
    const Phantom p = make_phantom(g, r);
    REQUIRE(p.chi33.at(6, 6, 6) == Catch::Approx(0.7)); // inside both
    REQUIRE(p.chi33.at(3, 6, 6) == Catch::Approx(0.3)); // only the first
    REQUIRE(p.chi33.at(9, 6, 6) == Catch::Approx(0.4)); // only the second
}

TEST_CASE("shapes escaping the grid are rejected with the axis named", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    PhantomRecipe r;
    ShapeSpec s;
    s.kind = ShapeKind::sphere;
    s.center = {4.0, 4.0, 6.5};
    s.radius = 2.0;
    s.value = 1.0;
    r.chi33.push_back(s);
    REQUIRE_THROWS_WITH(make_phantom(g, r),
                        Catch::Matchers::ContainsSubstring("chi33") &&
                            Catch::Matchers::ContainsSubstring("axis 2"));

    PhantomRecipe roi_bad;
    ShapeSpec e;
    e.kind = ShapeKind::ellipsoid;
    e.center = {4.0, 4.0, 4.0};
    e.half_size = {6.0, 2.0, 2.0};
    roi_bad.roi.push_back(e);
    REQUIRE_THROWS_WITH(make_phantom(g, roi_bad),
                        Catch::Matchers::ContainsSubstring("roi") &&
                            Catch::Matchers::ContainsSubstring("axis 0"));
}

TEST_CASE("the default head recipe builds at several sizes", "[simulate]") {
    for (std::int64_t n : {16, 32, 48}) {
        const GridSpec g{{n, n, n}, {1.0, 1.0, 1.0}};
        const Phantom p = make_phantom(g, default_head_recipe(g));
        REQUIRE(count_nonzero(p.mask) > 0);
        REQUIRE(count_nonzero(p.chi33) > 0);
        REQUIRE(p.description == "default-head");
        // The susceptibility sources sit inside the mask.
        for (std::int64_t i = 0; i < p.chi33.size(); ++i)
            if (p.chi33[i] != 0.0) REQUIRE(p.mask[i] == 1.0);
    }
}

TEST_CASE("forward model kills zero and constant susceptibility", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    REQUIRE(l2_norm(forward_dipole(Volume(g))) == 0.0);
    REQUIRE(l2_norm(forward_dipole(Volume(g, 1.3))) < 1e-12);
}

TEST_CASE("forward model equals direct convolution with the kernel", "[simulate][oracle]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    const Volume chi = oracles::random_volume(g, 83);
    const Volume psi = forward_dipole(chi);

    const SpectralWindow d = dipole_kernel(make_freq_grid(g));
    Spectrum ds(g);
    for (std::int64_t i = 0; i < ds.size(); ++i) ds[i] = d[i];
    const Volume kernel = ifft3_real(ds);
    const Volume direct = oracles::circular_convolution(chi, kernel);
    REQUIRE(oracles::rel_l2_diff(psi, direct) < 1e-10);
}

TEST_CASE("forward spectra vanish along the cone", "[simulate]") {
    const GridSpec g{{16, 16, 16}, {1.0, 1.0, 1.0}};
    const Phantom p = make_phantom(g, default_head_recipe(g));
    const Spectrum s = fft3(forward_dipole(p.chi33));
    const SpectralWindow absD = cone_distance_proxy(make_freq_grid(g));
    double smax = 0.0;
    for (const auto& x : s.data) smax = std::max(smax, std::abs(x));
    for (std::int64_t i = 0; i < s.size(); ++i)
        if (absD[i] < 1e-3) REQUIRE(std::abs(s[i]) < 2e-3 * smax);
}

TEST_CASE("tensor forward reduces to the scalar forward without cross terms", "[simulate]") {
    const GridSpec g{{12, 10, 8}, {1.0, 1.0, 1.0}};
    Phantom p;
    p.chi33 = oracles::random_volume(g, 89);
    p.chi13 = Volume(g);
    p.chi23 = Volume(g);
    p.mask = Volume(g, 1.0);
    const Volume via_sti = forward_sti_z(p);
    const Volume via_dipole = forward_dipole(p.chi33);
    REQUIRE(oracles::max_abs_diff(via_sti, via_dipole) < 1e-12);
}

TEST_CASE("cross terms inject energy onto the cone", "[simulate]") {
    const GridSpec g{{16, 16, 16}, {1.0, 1.0, 1.0}};
    Phantom p;
    p.chi33 = Volume(g);
    p.chi13 = Volume(g);
    (*p.chi13).at(8, 8, 8) = 1.0;
    p.mask = Volume(g, 1.0);
    const Spectrum s = fft3(forward_sti_z(p));
    // On-cone bin with xi_x xi_z != 0: the diagonal direction.
    const std::int64_t on_cone = g.index(1, 1, 1);
    REQUIRE(std::abs(s[on_cone]) > 0.1);
    // Same bin carries nothing when only chi33 is present.
    Phantom q;
    q.chi33 = Volume(g);
    q.chi33.at(8, 8, 8) = 1.0;
    q.mask = Volume(g, 1.0);
    const Spectrum sq = fft3(forward_dipole(q.chi33));
    REQUIRE(std::abs(sq[on_cone]) < 1e-12);
}

TEST_CASE("flipping a cross term flips its contribution", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    Phantom p;
    p.chi33 = oracles::random_volume(g, 91);
    p.chi13 = oracles::random_volume(g, 92);
    p.mask = Volume(g, 1.0);
    const Volume base = forward_dipole(p.chi33);
    const Volume plus = forward_sti_z(p);
    for (auto& v : p.chi13->data) v = -v;
    const Volume minus = forward_sti_z(p);
    // (plus - base) and (minus - base) are the cross contributions.
    Volume sum = plus + minus;
    axpy(-2.0, base, sum);
    REQUIRE(l2_norm(sum) < 1e-11);
}

TEST_CASE("corruption validation", "[simulate]") {
    CorruptionSpec bad_snr;
    bad_snr.noise_snr = 0.0;
    REQUIRE_THROWS_AS(bad_snr.validate(), ConfigError);
    CorruptionSpec bad_radius;
    bad_radius.offsets.push_back({{0, 0, 0}, -1.0, 1.0});
    REQUIRE_THROWS_AS(bad_radius.validate(), ConfigError);
    CorruptionSpec ok;
    REQUIRE_NOTHROW(ok.validate());
}

TEST_CASE("a single-voxel offset changes exactly one voxel", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    const Volume psi = oracles::random_volume(g, 97);
    CorruptionSpec spec;
    spec.noise_snr.reset();
    spec.offsets.push_back({{2, 3, 4}, 0.0, M_PI});
    const Volume out = corrupt(psi, spec);
    std::int64_t changed = 0;
    for (std::int64_t i = 0; i < psi.size(); ++i)
        if (out[i] != psi[i]) ++changed;
    REQUIRE(changed == 1);
    REQUIRE(out.at(2, 3, 4) == Catch::Approx(psi.at(2, 3, 4) + M_PI).margin(1e-15));
}

TEST_CASE("a ball offset covers the discrete ball", "[simulate]") {
    const GridSpec g{{12, 12, 12}, {1.0, 1.0, 1.0}};
    CorruptionSpec spec;
    spec.noise_snr.reset();
    spec.offsets.push_back({{6, 6, 6}, 2.0, 1.0});
    const Volume out = corrupt(Volume(g), spec);
    REQUIRE(count_nonzero(out) == 33);
}

TEST_CASE("offsets clip at the grid edge but their centers must be inside", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    CorruptionSpec edge;
    edge.noise_snr.reset();
    edge.offsets.push_back({{0, 0, 0}, 2.0, 1.0});
    REQUIRE_NOTHROW(corrupt(Volume(g), edge));

    CorruptionSpec outside;
    outside.noise_snr.reset();
    outside.offsets.push_back({{8, 0, 0}, 0.0, 1.0});
    REQUIRE_THROWS_AS(corrupt(Volume(g), outside), ConfigError);
    CorruptionSpec negative;
    negative.noise_snr.reset();
    negative.offsets.push_back({{0, -1, 0}, 0.0, 1.0});
    REQUIRE_THROWS_AS(corrupt(Volume(g), negative), ConfigError);
}

TEST_CASE("huge SNR reduces corruption to the identity", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    Volume psi = oracles::random_volume(g, 101);
    for (auto& v : psi.data) v *= 0.5; // keep away from the wrap at pi
    CorruptionSpec spec;
    spec.noise_snr = 1e12;
    REQUIRE(oracles::max_abs_diff(corrupt(psi, spec), psi) < 1e-6);
}

TEST_CASE("noise standard deviation tracks one over SNR", "[simulate]") {
    const GridSpec g{{32, 32, 32}, {1.0, 1.0, 1.0}};
    CorruptionSpec spec;
    spec.noise_snr = 100.0;
    spec.seed = 7;
    const Volume out = corrupt(Volume(g), spec);
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean /= static_cast<double>(out.size());
    double var = 0.0;
    for (double v : out.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.size() - 1);
    const double sd = std::sqrt(var);
    REQUIRE(sd > 0.009);
    REQUIRE(sd < 0.011);
}

TEST_CASE("corruption is reproducible per seed and changes across seeds", "[simulate]") {
    const GridSpec g{{8, 8, 8}, {1.0, 1.0, 1.0}};
    const Volume psi = oracles::random_volume(g, 103);
    CorruptionSpec spec;
    spec.noise_snr = 50.0;
    spec.seed = 42;
    const Volume a = corrupt(psi, spec);
    const Volume b = corrupt(psi, spec);
    REQUIRE(oracles::max_abs_diff(a, b) == 0.0);

    spec.seed = 43;
    const Volume c = corrupt(psi, spec);
    REQUIRE(oracles::max_abs_diff(a, c) > 0.0);
}
