// Acceptance gate: twelve end-to-end properties of the library, each printed
// as a single PASS/FAIL line with the measured values. Exits nonzero if any
// criterion fails. Runs without a test framework so the output stays a plain
// twelve-line report.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dipolelets/dipolelets.hpp"

#include "oracles.hpp"

using namespace dipolelets;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// Shared sweep for criteria 1-4: twenty random volumes across grid shapes and
// radial/angular configurations, decomposed and reassembled once.
struct SweepResults {
    bool ran = false;
    int configs = 0;
    int bands_checked = 0;
    double worst_recon_rel = 0.0;
    double worst_pu = 0.0;
    double worst_band_excess = -1.0; // max over detail bands of ||band|| - ||f||
    double worst_loc_ratio = 0.0;    // out-of-support spectral peak / band peak
    double seconds = 0.0;
    std::string error;
};

SweepResults run_sweep() {
    SweepResults r;
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec shapes[3] = {
        GridSpec{{16, 16, 16}, {1, 1, 1}},
        GridSpec{{15, 17, 16}, {1, 1, 1}},
        GridSpec{{32, 32, 32}, {1, 1, 1}},
    };
    for (int v = 0; v < 20; ++v) {
        const GridSpec& g = shapes[v % 3];
        RadialConfig rcfg;
        rcfg.levels = v % 4;
        AngularConfig acfg;
        switch ((v / 4) % 4) {
            case 0: break; // no angular split
            case 1:
                acfg.deltas = {0.1};
                acfg.epsilons = {0.02};
                break;
            case 2: acfg = AngularConfig::defaults(); break;
            case 3:
                acfg.deltas = {0.04, 0.10, 0.20};
                acfg.epsilons = {0.02, 0.02, 0.02};
                break;
        }
        const BandSet bs = build_bandset(make_freq_grid(g), rcfg, acfg);
        const Volume f = oracles::random_volume(g, 1000 + static_cast<std::uint64_t>(v));
        const double f_l2 = l2_norm(f);

        const Decomposition d = analyze(f, bs);
        const Volume rec = synthesize(d);
        r.worst_recon_rel = std::max(r.worst_recon_rel, oracles::rel_l2_diff(rec, f));
        r.worst_pu = std::max(r.worst_pu, bs.pu_residual);

        for (const auto& [idx, band] : d.bands)
            r.worst_band_excess = std::max(r.worst_band_excess, l2_norm(band) - f_l2);

        auto check_localization = [&](const SpectralWindow& w, const Volume& band) {
            const Spectrum s = fft3(band);
            double band_peak = 0.0, outside_peak = 0.0;
            for (std::int64_t i = 0; i < s.size(); ++i) {
                const double mag = std::abs(s[i]);
                band_peak = std::max(band_peak, mag);
                if (w[i] < 1e-10) outside_peak = std::max(outside_peak, mag);
            }
            if (band_peak > 0.0)
                r.worst_loc_ratio = std::max(r.worst_loc_ratio, outside_peak / band_peak);
            ++r.bands_checked;
        };
        for (const auto& [idx, win] : bs.combined) check_localization(win, d.band(idx));
        check_localization(bs.coarse, d.coarse);
        ++r.configs;
    }
    r.seconds = seconds_since(t0);
    r.ran = true;
    return r;
}

SweepResults& sweep() {
    static SweepResults r = [] {
        SweepResults out;
        try {
            out = run_sweep();
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        return out;
    }();
    return r;
}

int g_failures = 0;

template <typename F>
void criterion(int num, const char* name, F&& fn) {
    std::ostringstream detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
        ok = false;
    }
    if (!ok) ++g_failures;
    std::printf("%s %2d. %s (%s)\n", ok ? "PASS" : "FAIL", num, name, detail.str().c_str());
    std::fflush(stdout);
}

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace

int main() {
    criterion(1, "every analyze/synthesize round trip is exact", [](std::ostringstream& d) {
        const SweepResults& r = sweep();
        if (!r.ran) {
            d << "sweep failed: " << r.error;
            return false;
        }
        d << "20 configs, worst rel err " << fmt(r.worst_recon_rel) << ", " << fmt(r.seconds)
          << " s";
        return r.worst_recon_rel < 1e-10 && r.seconds < 60.0;
    });

    criterion(2, "windows sum to one on every grid", [](std::ostringstream& d) {
        const SweepResults& r = sweep();
        if (!r.ran) {
            d << "sweep failed: " << r.error;
            return false;
        }
        d << "worst residual " << fmt(r.worst_pu);
        return r.worst_pu < 1e-10;
    });

    criterion(3, "no detail band amplifies the input", [](std::ostringstream& d) {
        const SweepResults& r = sweep();
        if (!r.ran) {
            d << "sweep failed: " << r.error;
            return false;
        }
        d << "worst l2 excess " << fmt(r.worst_band_excess);
        return r.worst_band_excess <= 0.0;
    });

    criterion(4, "band spectra vanish off their windows", [](std::ostringstream& d) {
        const SweepResults& r = sweep();
        if (!r.ran) {
            d << "sweep failed: " << r.error;
            return false;
        }
        d << r.bands_checked << " bands, worst off-support ratio " << fmt(r.worst_loc_ratio);
        return r.worst_loc_ratio < 1e-8;
    });

    criterion(5, "cone-supported energy lands only in near bands", [](std::ostringstream& d) {
        const auto t0 = std::chrono::steady_clock::now();
        const GridSpec g{{32, 32, 32}, {1, 1, 1}};
        const Phantom ph = make_phantom(g, default_head_recipe(g));
        const Volume psi0 = forward_dipole(ph.chi33);

        const FreqGrid fg = make_freq_grid(g);
        const SpectralWindow dk = dipole_kernel(fg);
        Spectrum s = fft3(oracles::random_volume(g, 77));
        for (std::int64_t i = 0; i < s.size(); ++i)
            if (std::abs(dk[i]) > 0.01) s[i] = 0.0;
        Volume pert = ifft3_real(s);
        const double scale = 0.5 * l2_norm(psi0) / l2_norm(pert);
        for (auto& x : pert.data) x *= scale;
        Volume sum = psi0;
        axpy(1.0, pert, sum);

        const BandSet bs = build_bandset(fg, RadialConfig{}, AngularConfig::defaults());
        const Decomposition da = analyze(psi0, bs);
        const Decomposition db = analyze(sum, bs);

        double far_rel = 0.0, far_disc = 0.0;
        double near_a = 0.0, near_b = 0.0;
        for (const auto& [idx, band_a] : da.bands) {
            const Volume& band_b = db.band(idx);
            if (idx.angle >= 1) {
                far_rel = std::max(far_rel, oracles::rel_l2_diff(band_b, band_a));
                Volume diff = band_b;
                axpy(-1.0, band_a, diff);
                const double n = l2_norm(diff);
                far_disc += n * n;
            } else {
                const double na = l2_norm(band_a), nb = l2_norm(band_b);
                near_a += na * na;
                near_b += nb * nb;
            }
        }
        const double near_gain = near_b - near_a;
        const double secs = seconds_since(t0);
        d << "far rel " << fmt(far_rel) << ", near gain " << fmt(near_gain) << " vs far disc "
          << fmt(far_disc) << ", " << fmt(secs) << " s";
        return far_rel < 1e-8 && near_gain >= 10.0 * far_disc && secs < 30.0;
    });

    criterion(6, "tensor cross-terms raise near-cone energy", [](std::ostringstream& d) {
        const GridSpec g{{32, 32, 32}, {1, 1, 1}};
        PhantomRecipe recipe = default_head_recipe(g);
        recipe.chi13 = recipe.chi33; // cross-term with the same amplitude
        const Phantom ph = make_phantom(g, recipe);
        const BandSet bs = build_bandset(make_freq_grid(g), RadialConfig{}, AngularConfig::defaults());
        const auto sel = bs.near_cone_selection();
        const double e_sti = streak_energy(forward_sti_z(ph), bs, sel);
        const double e_dip = streak_energy(forward_dipole(ph.chi33), bs, sel);
        const double ratio = e_sti / e_dip;
        d << "ratio " << fmt(ratio);
        return ratio >= 2.0;
    });

    criterion(7, "a point offset lights up the energy map at its voxel", [](std::ostringstream& d) {
        double worst_dist = 0.0;
        const std::array<std::array<std::int64_t, 4>, 2> cases = {{
            {32, 19, 12, 17},
            {48, 28, 18, 25},
        }};
        for (const auto& c : cases) {
            const GridSpec g{{c[0], c[0], c[0]}, {1, 1, 1}};
            const Phantom ph = make_phantom(g, default_head_recipe(g));
            CorruptionSpec cs;
            cs.noise_snr = std::nullopt;
            cs.offsets.push_back(OffsetSpec{{c[1], c[2], c[3]}, 0.0, M_PI});
            const Volume psi = corrupt(forward_dipole(ph.chi33), cs);

            const BandSet bs =
                build_bandset(make_freq_grid(g), RadialConfig{}, AngularConfig::defaults());
            const Volume map =
                band_energy_map(analyze(psi, bs), bs.near_cone_selection()).map;
            std::int64_t best = 0;
            for (std::int64_t i = 1; i < map.size(); ++i)
                if (map.data[static_cast<size_t>(i)] > map.data[static_cast<size_t>(best)])
                    best = i;
            const std::int64_t bx = best % g.nx();
            const std::int64_t by = (best / g.nx()) % g.ny();
            const std::int64_t bz = best / (g.nx() * g.ny());
            const double dist = std::sqrt(static_cast<double>(
                (bx - c[1]) * (bx - c[1]) + (by - c[2]) * (by - c[2]) + (bz - c[3]) * (bz - c[3])));
            worst_dist = std::max(worst_dist, dist);
        }
        d << "worst argmax distance " << fmt(worst_dist) << " voxels";
        return worst_dist <= 2.0;
    });

    criterion(8, "near-cone weights improve weighted TV", [](std::ostringstream& d) {
        const auto t0 = std::chrono::steady_clock::now();
        const GridSpec g{{48, 48, 48}, {1, 1, 1}};
        const Phantom ph = make_phantom(g, default_head_recipe(g));
        const Volume psi0 = forward_dipole(ph.chi33);
        const BandSet bs =
            build_bandset(make_freq_grid(g), RadialConfig{}, AngularConfig::defaults());
        TvConfig tv;
        tv.lambda = 0.3;
        tv.rho = 3.0;
        tv.max_iters = 60;
        const Volume ones(g, 1.0);

        bool all = true;
        for (std::uint64_t seed : {1, 2, 3}) {
            CorruptionSpec cs;
            cs.offsets = default_offsets(g);
            cs.seed = seed;
            const Volume psi = corrupt(psi0, cs);
            WeightConfig wc;
            wc.selection = bs.near_cone_selection();
            const Volume w = make_weight(analyze(psi, bs), wc).weight;

            const auto [chi_w, rep_w] = admm_weighted_tv(psi, w, tv);
            const auto [chi_1, rep_1] = admm_weighted_tv(psi, ones, tv);
            const double rmse_w = rmse(chi_w, ph.chi33, ph.mask);
            const double rmse_1 = rmse(chi_1, ph.chi33, ph.mask);
            const double xsim_w = xsim(chi_w, ph.chi33, ph.mask);
            const double xsim_1 = xsim(chi_1, ph.chi33, ph.mask);
            const bool ok = rmse_w < rmse_1 && xsim_w > xsim_1;
            all = all && ok;
            d << "seed " << seed << ": rmse " << fmt(rmse_w) << (rmse_w < rmse_1 ? " < " : " >= ")
              << fmt(rmse_1) << ", xsim " << fmt(xsim_w) << (xsim_w > xsim_1 ? " > " : " <= ")
              << fmt(xsim_1) << "; ";
        }
        const double secs = seconds_since(t0);
        d << fmt(secs) << " s";
        return all && secs < 300.0;
    });

    criterion(9, "band boxes cut streak energy at matched iterations", [](std::ostringstream& d) {
        const GridSpec g{{32, 32, 32}, {1, 1, 1}};
        const Phantom ph = make_phantom(g, default_head_recipe(g));
        CorruptionSpec cs;
        cs.offsets = default_offsets(g);
        cs.seed = 5;
        const Volume psi = corrupt(forward_dipole(ph.chi33), cs);
        const BandSet bs =
            build_bandset(make_freq_grid(g), RadialConfig{}, AngularConfig::defaults());
        WeightConfig wc;
        wc.selection = bs.near_cone_selection();
        const Volume w = make_weight(analyze(psi, bs), wc).weight;

        BandRegConfig reg = dyadic_bandreg_config(bs, 1e-3, 0.05);
        reg.max_iters = 40;
        reg.tol = 1e-12;
        BandRegConfig off;
        off.max_iters = 40;
        off.tol = 1e-12;

        const auto [chi_reg, rep_reg] = band_regularized_descent(psi, w, bs, reg);
        const auto [chi_off, rep_off] = band_regularized_descent(psi, w, bs, off);
        const auto sel = bs.near_cone_selection();
        const double streak_reg = streak_energy(chi_reg, bs, sel);
        const double streak_off = streak_energy(chi_off, bs, sel);
        const double rmse_reg = rmse(chi_reg, ph.chi33, ph.mask);
        const double rmse_off = rmse(chi_off, ph.chi33, ph.mask);
        d << "streak " << fmt(streak_reg) << " vs " << fmt(streak_off) << ", rmse " << fmt(rmse_reg)
          << " vs " << fmt(rmse_off) << ", iters " << rep_reg.iterations << "/"
          << rep_off.iterations;
        return rep_reg.iterations == rep_off.iterations && streak_reg < streak_off &&
               rmse_reg <= 1.1 * rmse_off;
    });

    criterion(10, "descent gradient matches finite differences", [](std::ostringstream& d) {
        const GridSpec g{{8, 8, 8}, {1, 1, 1}};
        const BandSet bs = [&] {
            RadialConfig rcfg;
            rcfg.levels = 1;
            return build_bandset(make_freq_grid(g), rcfg, AngularConfig::defaults());
        }();
        Volume w = oracles::random_volume(g, 21);
        for (auto& x : w.data) x = 0.5 * (x + 1.0);
        const SpectralWindow alpha =
            bandreg_alpha_window(bs, dyadic_bandreg_config(bs, 0.5, 1.0).alphas);
        const Volume psi = oracles::random_volume(g, 22);
        const Volume chi = oracles::random_volume(g, 23);
        const Volume grad = bandreg_gradient(chi, psi, w, alpha, BandRegFidelity::nonlinear_exp);

        const double eps = 1e-5;
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            Volume dir = oracles::random_volume(g, 3000 + static_cast<std::uint64_t>(k));
            const double n = l2_norm(dir);
            for (auto& x : dir.data) x /= n;
            Volume plus = chi, minus = chi;
            axpy(eps, dir, plus);
            axpy(-eps, dir, minus);
            const double fd =
                (bandreg_objective(plus, psi, w, alpha, BandRegFidelity::nonlinear_exp) -
                 bandreg_objective(minus, psi, w, alpha, BandRegFidelity::nonlinear_exp)) /
                (2.0 * eps);
            const double gv = dot(grad, dir);
            worst = std::max(worst, std::abs(fd - gv) / std::max(std::abs(fd), 1e-8));
        }
        d << "worst rel err " << fmt(worst) << " over 10 directions";
        return worst < 1e-4;
    });

    criterion(11, "fft and multiplier match the direct oracles", [](std::ostringstream& d) {
        const GridSpec g{{8, 8, 8}, {1, 1, 1}};
        const Volume f = oracles::random_volume(g, 4242);

        const Spectrum fast = fft3(f);
        const Spectrum slow = oracles::dft3_reference(f);
        double num = 0.0, den = 0.0;
        for (std::int64_t i = 0; i < fast.size(); ++i) {
            num += std::norm(fast[i] - slow[i]);
            den += std::norm(slow[i]);
        }
        const double fft_rel = std::sqrt(num / den);

        const SpectralWindow dk = dipole_kernel(make_freq_grid(g));
        Spectrum ks(g);
        for (std::int64_t i = 0; i < ks.size(); ++i) ks[i] = dk[i];
        const Volume kernel_spatial = ifft3_real(ks);
        const Volume fast_conv = apply_multiplier(f, dk);
        const Volume slow_conv = oracles::circular_convolution(f, kernel_spatial);
        const double conv_rel = oracles::rel_l2_diff(fast_conv, slow_conv);

        d << "fft rel " << fmt(fft_rel) << ", conv rel " << fmt(conv_rel);
        return fft_rel < 1e-10 && conv_rel < 1e-10;
    });

    criterion(12, "pipeline reruns bit-identically and files round-trip", [](std::ostringstream& d) {
        const fs::path tmp = fs::temp_directory_path() / "dipolelets_acceptance";
        fs::remove_all(tmp);
        fs::create_directories(tmp);

        RunConfig cfg = RunConfig::defaults();
        cfg.grid = GridSpec{{16, 16, 16}, {1, 1, 1}};
        cfg.corruption.offsets = default_offsets(cfg.grid);
        cfg.radial.levels = 2;
        cfg.tv.max_iters = 4;
        cfg.tv.cg_max_iters = 30;
        cfg.seed = 11;
        cfg.output = (tmp / "run").string();

        const PipelineResult r1 = run_pipeline(cfg);
        std::map<std::string, std::vector<char>> first;
        for (const std::string& rel : r1.artifacts)
            first[rel] = file_bytes(fs::path(r1.out_dir) / rel);
        first["manifest.json"] = file_bytes(fs::path(r1.out_dir) / "manifest.json");

        const PipelineResult r2 = run_pipeline(cfg);
        int mismatched = 0;
        for (const auto& [rel, bytes] : first)
            if (file_bytes(fs::path(r2.out_dir) / rel) != bytes) ++mismatched;

        const GridSpec vg{{12, 10, 8}, {0.9, 1.1, 1.25}};
        const Volume v = oracles::random_float_volume(vg, 99);
        const std::string vol_path = (tmp / "roundtrip.dlvol").string();
        write_volume(v, vol_path);
        const Volume back = read_volume(vol_path);
        const bool vol_exact = back.grid == v.grid && oracles::max_abs_diff(back, v) == 0.0;

        const std::string nii_path = (tmp / "roundtrip.nii").string();
        write_nifti_minimal(v, nii_path);
        const Volume nback = read_nifti_minimal(nii_path);
        bool nii_ok = nback.grid.shape == v.grid.shape &&
                      oracles::max_abs_diff(nback, v) == 0.0;
        for (int a = 0; a < 3; ++a)
            nii_ok = nii_ok && nback.grid.voxel_size[static_cast<size_t>(a)] ==
                                   static_cast<double>(static_cast<float>(
                                       v.grid.voxel_size[static_cast<size_t>(a)]));

        d << first.size() << " artifacts, " << mismatched << " mismatched; container "
          << (vol_exact ? "exact" : "DIFFERS") << ", nifti " << (nii_ok ? "exact" : "DIFFERS");
        fs::remove_all(tmp);
        return mismatched == 0 && first.size() >= 10 && vol_exact && nii_ok;
    });

    std::printf("%s: %d of 12 criteria passed\n", g_failures == 0 ? "OK" : "FAILURES",
                12 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
