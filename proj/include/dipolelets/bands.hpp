#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <string>
#include <vector>

#include "dipolelets/kernel.hpp"

namespace dipolelets {

enum class RadialProfile { raised_cosine, gaussian };
enum class EtaKind { smoothstep, erf };

/// Radial (starlet-style) configuration: detail scales j = 0..J plus one
/// coarse band J+1. base_cutoff is Phi_1's transition end in cycles/voxel.
struct RadialConfig {
    int levels = 3; // J
    RadialProfile profile = RadialProfile::raised_cosine;
    double base_cutoff = 0.25;

    void validate() const {
        if (levels < 0) throw ConfigError("RadialConfig: levels (J) must be >= 0");
        if (!(base_cutoff > 0.0) || base_cutoff > 0.5)
            throw ConfigError("RadialConfig: base_cutoff must lie in (0, 0.5]");
    }
};

/// Cone-proximity thresholds 0 < delta_0 < ... < delta_{M-1} <= 1/3 with
/// transition widths epsilon_m. An empty threshold list collapses to the
/// single angular window == 1 (plain starlet).
struct AngularConfig {
    std::vector<double> deltas;   // delta_0 .. delta_{M-1}
    std::vector<double> epsilons; // epsilon_0 .. epsilon_{M-1}
    EtaKind eta = EtaKind::smoothstep;

    int num_thresholds() const { return static_cast<int>(deltas.size()); } // M
    int num_windows() const { return num_thresholds() + 1; }               // M + 1

    void validate() const {
        if (deltas.size() != epsilons.size())
            throw ConfigError("AngularConfig: deltas and epsilons must have equal length");
        double prev = 0.0;
        for (size_t m = 0; m < deltas.size(); ++m) {
            if (!(deltas[m] > prev))
                throw ConfigError("AngularConfig: thresholds must satisfy 0 < delta_0 < ... ascending");
            if (deltas[m] > 1.0 / 3.0 + 1e-15)
                throw ConfigError("AngularConfig: thresholds must not exceed 1/3");
            if (!(epsilons[m] > 0.0))
                throw ConfigError("AngularConfig: transition widths must be > 0");
            prev = deltas[m];
        }
    }

    static AngularConfig defaults() {
        AngularConfig c;
        c.deltas = {0.05, 0.15};
        c.epsilons = {0.02, 0.02};
        return c;
    }
};

/// Band address: scale in 0..J for detail bands, scale == J+1 for the coarse
/// band (angle must then be 0).
struct BandIndex {
    int scale = 0;
    int angle = 0;
    auto operator<=>(const BandIndex&) const = default;
};

inline std::string band_name(const BandIndex& b) {
    return "j" + std::to_string(b.scale) + "m" + std::to_string(b.angle);
}

namespace detail {

/// Quintic smoothstep mapped from [-1,1]: exactly 0 below -1, exactly 1
/// above +1, eta(0) = 1/2. Compact transitions make band supports exact.
inline double eta_smoothstep(double t) {
    const double u = std::clamp(0.5 * (t + 1.0), 0.0, 1.0);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

inline double eta_erf(double t) { return 0.5 * (1.0 + std::erf(t)); }

inline double eta_eval(EtaKind kind, double t) {
    return kind == EtaKind::smoothstep ? eta_smoothstep(t) : eta_erf(t);
}

/// Phi_1 profile at radial coordinate r (cycles/voxel). raised_cosine: 1 up
/// to c/2, cosine falloff to 0 at c. gaussian: exp(-ln2 (r/c)^2), half power
/// at r = c.
inline double phi1_profile(RadialProfile p, double base_cutoff, double r) {
    if (p == RadialProfile::raised_cosine) {
        const double half = 0.5 * base_cutoff;
        if (r <= half) return 1.0;
        if (r >= base_cutoff) return 0.0;
        const double t = (r - half) / half;
        return 0.5 * (1.0 + std::cos(M_PI * t));
    }
    const double q = r / base_cutoff;
    return std::exp(-M_LN2 * q * q);
}

/// Phi_j(r) = Phi_1(2^{j-1} r) for j >= 1; Phi_0 == 1.
inline double phi_j(RadialProfile p, double base_cutoff, int j, double r) {
    if (j <= 0) return 1.0;
    return phi1_profile(p, base_cutoff, std::ldexp(r, j - 1));
}

/// Radial coordinate per bin in cycles/voxel: |(kx/nx, ky/ny, kz/nz)| with
/// signed FFT indices. Voxel size cancels by construction.
inline std::vector<double> radial_coordinate(const GridSpec& g) {
    std::vector<double> r(static_cast<size_t>(g.num_voxels()));
    std::int64_t idx = 0;
    for (std::int64_t k = 0; k < g.nz(); ++k) {
        const std::int64_t kz = (k <= (g.nz() - 1) / 2) ? k : k - g.nz();
        const double uz = static_cast<double>(kz) / static_cast<double>(g.nz());
        for (std::int64_t j = 0; j < g.ny(); ++j) {
            const std::int64_t ky = (j <= (g.ny() - 1) / 2) ? j : j - g.ny();
            const double uy = static_cast<double>(ky) / static_cast<double>(g.ny());
            for (std::int64_t i = 0; i < g.nx(); ++i, ++idx) {
                const std::int64_t kx = (i <= (g.nx() - 1) / 2) ? i : i - g.nx();
                const double ux = static_cast<double>(kx) / static_cast<double>(g.nx());
                r[static_cast<size_t>(idx)] = std::sqrt(ux * ux + uy * uy + uz * uz);
            }
        }
    }
    return r;
}

} // namespace detail

struct RadialFilters {
    std::vector<SpectralWindow> psi; // Psi_0 .. Psi_J
    SpectralWindow coarse;           // Phi_{J+1}
    std::vector<std::string> warnings;
};

/// Build Psi_j = Phi_j - Phi_{j+1} >= 0 and the coarse residual Phi_{J+1}.
/// The telescoping definition makes Phi_{J+1} + sum_j Psi_j == 1 structural.
inline RadialFilters radial_filters(const FreqGrid& fg, const RadialConfig& cfg) {
    cfg.validate();
    const GridSpec& g = fg.grid;
    const std::vector<double> r = detail::radial_coordinate(g);
    RadialFilters out;

    const int J = cfg.levels;
    double min_bin = 1.0;
    for (int a = 0; a < 3; ++a) min_bin = std::min(min_bin, 1.0 / static_cast<double>(g.shape[a]));
    const double finest_transition = 0.5 * cfg.base_cutoff * std::ldexp(1.0, -J);
    if (finest_transition < min_bin)
        out.warnings.push_back("radial profile transition at scale " + std::to_string(J) +
                               " (" + std::to_string(finest_transition) +
                               " cycles/voxel) is narrower than one frequency bin (" +
                               std::to_string(min_bin) + ")");

    out.psi.reserve(static_cast<size_t>(J) + 1);
    std::vector<double> phi_curr(r.size()), phi_next(r.size());
    for (size_t i = 0; i < r.size(); ++i)
        phi_curr[i] = detail::phi_j(cfg.profile, cfg.base_cutoff, 0, r[i]);
    for (int j = 0; j <= J; ++j) {
        for (size_t i = 0; i < r.size(); ++i)
            phi_next[i] = detail::phi_j(cfg.profile, cfg.base_cutoff, j + 1, r[i]);
        SpectralWindow psi(g);
        for (size_t i = 0; i < r.size(); ++i) psi.data[i] = phi_curr[i] - phi_next[i];
        psi.update_range_hint();
        out.psi.push_back(std::move(psi));
        phi_curr.swap(phi_next);
    }
    out.coarse = SpectralWindow(g);
    out.coarse.data = phi_curr;
    out.coarse.update_range_hint();
    return out;
}

/// Angular partition from cone-proximity discs A_m = eta((delta_m - |D|)/eps_m):
/// W_0 = A_0, W_m = A_m - A_{m-1}, W_M = 1 - A_{M-1}, clamped at 0 and
/// normalized to sum to 1 at every bin. Window 0 hugs the cone, window M is
/// the far field.
inline std::vector<SpectralWindow> angular_windows(const FreqGrid& fg, const AngularConfig& cfg,
                                                   const SpectralWindow& absD) {
    cfg.validate();
    require_same_grid(fg.grid, absD.grid, "angular_windows");
    const int M = cfg.num_thresholds();
    const std::int64_t n = absD.grid.num_voxels();

    std::vector<SpectralWindow> w(static_cast<size_t>(M) + 1);
    for (auto& win : w) win = SpectralWindow(absD.grid);

    std::vector<double> disc_prev(static_cast<size_t>(n), 0.0); // A_{-1} == 0
    std::vector<double> disc(static_cast<size_t>(n));
    for (int m = 0; m <= M; ++m) {
        if (m == M) {
            std::fill(disc.begin(), disc.end(), 1.0); // A_M == 1
        } else {
            for (std::int64_t i = 0; i < n; ++i)
                disc[static_cast<size_t>(i)] =
                    detail::eta_eval(cfg.eta, (cfg.deltas[static_cast<size_t>(m)] - absD[i]) /
                                                  cfg.epsilons[static_cast<size_t>(m)]);
        }
        for (std::int64_t i = 0; i < n; ++i)
            w[static_cast<size_t>(m)][i] =
                std::max(0.0, disc[static_cast<size_t>(i)] - disc_prev[static_cast<size_t>(i)]);
        disc_prev.swap(disc);
    }

    for (std::int64_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int m = 0; m <= M; ++m) sum += w[static_cast<size_t>(m)][i];
        if (sum < 1e-8)
            throw ConfigError("angular_windows: raw window sum " + std::to_string(sum) +
                              " at bin " + std::to_string(i) +
                              " leaves a spectral gap; adjust eta/epsilon");
        for (int m = 0; m <= M; ++m) w[static_cast<size_t>(m)][i] /= sum;
    }
    for (auto& win : w) win.update_range_hint();
    return w;
}

/// The full Dipole-let window family: radial scales, per-scale angular
/// partitions, combined windows W_{j,m} = Psi_j W_m^{(j)}, and the coarse
/// band (never split angularly). pu_residual certifies the reconstruction
/// identity.
struct BandSet {
    GridSpec grid;
    RadialConfig radial_config;
    std::vector<AngularConfig> angular_configs; // one per detail scale

    std::vector<SpectralWindow> radial; // Psi_0 .. Psi_J
    SpectralWindow coarse;              // Phi_{J+1}
    std::vector<std::vector<SpectralWindow>> angular;
    std::vector<std::pair<BandIndex, SpectralWindow>> combined;

    double pu_residual = 0.0;
    std::vector<std::string> warnings;
    std::string id;

    int num_scales() const { return static_cast<int>(radial.size()); } // J + 1
    int coarse_scale() const { return num_scales(); }                  // J + 1
    int num_angles(int scale) const {
        return static_cast<int>(angular[static_cast<size_t>(scale)].size());
    }

    bool is_coarse(const BandIndex& b) const { return b.scale == coarse_scale(); }

    /// All detail band indices plus the coarse index, analysis order.
    std::vector<BandIndex> band_indices(bool include_coarse = true) const {
        std::vector<BandIndex> out;
        for (const auto& [idx, win] : combined) out.push_back(idx);
        if (include_coarse) out.push_back(BandIndex{coarse_scale(), 0});
        return out;
    }

    const SpectralWindow& window(const BandIndex& b) const {
        if (is_coarse(b)) {
            if (b.angle != 0) throw ConfigError("BandSet: coarse band has a single angle (0)");
            return coarse;
        }
        for (const auto& [idx, win] : combined)
            if (idx == b) return win;
        throw ConfigError("BandSet: no band " + band_name(b));
    }

    /// Near-cone selection: angular window 0 at every detail scale.
    std::vector<BandIndex> near_cone_selection() const {
        std::vector<BandIndex> out;
        for (int j = 0; j < num_scales(); ++j) out.push_back(BandIndex{j, 0});
        return out;
    }
};

inline BandSet build_bandset(const FreqGrid& fg, const RadialConfig& rcfg,
                             std::vector<AngularConfig> acfgs) {
    rcfg.validate();
    if (acfgs.empty()) acfgs.push_back(AngularConfig::defaults());
    // A single config replicates across scales; otherwise one per scale.
    if (static_cast<int>(acfgs.size()) == 1)
        acfgs.resize(static_cast<size_t>(rcfg.levels) + 1, acfgs.front());
    if (static_cast<int>(acfgs.size()) != rcfg.levels + 1)
        throw ConfigError("build_bandset: need 1 or J+1 angular configs, got " +
                          std::to_string(acfgs.size()));

    BandSet bs;
    bs.grid = fg.grid;
    bs.radial_config = rcfg;
    bs.angular_configs = acfgs;

    RadialFilters rf = radial_filters(fg, rcfg);
    bs.radial = std::move(rf.psi);
    bs.coarse = std::move(rf.coarse);
    bs.warnings = std::move(rf.warnings);

    const SpectralWindow absD = cone_distance_proxy(fg);
    for (size_t j = 0; j < bs.radial.size(); ++j)
        bs.angular.push_back(angular_windows(fg, acfgs[j], absD));

    for (int j = 0; j < bs.num_scales(); ++j)
        for (int m = 0; m < bs.num_angles(j); ++m)
            bs.combined.emplace_back(BandIndex{j, m},
                                     hadamard(bs.radial[static_cast<size_t>(j)],
                                              bs.angular[static_cast<size_t>(j)][static_cast<size_t>(m)]));

    // Partition-of-unity certificate over every bin.
    const std::int64_t n = fg.grid.num_voxels();
    double residual = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double sum = bs.coarse[i];
        for (const auto& [idx, win] : bs.combined) sum += win[i];
        residual = std::max(residual, std::abs(1.0 - sum));
    }
    bs.pu_residual = residual;

    bs.id = "J" + std::to_string(rcfg.levels);
    for (const auto& c : acfgs) bs.id += "_M" + std::to_string(c.num_thresholds());
    bs.id += "_g" + std::to_string(fg.grid.nx()) + "x" + std::to_string(fg.grid.ny()) + "x" +
             std::to_string(fg.grid.nz());
    return bs;
}

inline BandSet build_bandset(const FreqGrid& fg, const RadialConfig& rcfg,
                             const AngularConfig& acfg) {
    return build_bandset(fg, rcfg, std::vector<AngularConfig>{acfg});
}

/// Leakage of each combined window outside its nominal cone-proximity tube
/// Gamma_m = [delta_{m-1}-eps_{m-1}, delta_m+eps_m]. A report, not an
/// assertion; compact-support eta keeps every entry below 1e-8.
struct BandSupportReport {
    struct Entry {
        BandIndex band;
        double tube_lo = 0.0;
        double tube_hi = 0.0;
        double leakage = 0.0;
    };
    std::vector<Entry> entries;
    double max_leakage = 0.0;

    bool pass(double tol = 1e-8) const { return max_leakage < tol; }
};

inline BandSupportReport band_support_report(const BandSet& bs, const SpectralWindow& absD) {
    require_same_grid(bs.grid, absD.grid, "band_support_report");
    BandSupportReport rep;
    for (const auto& [idx, win] : bs.combined) {
        const AngularConfig& cfg = bs.angular_configs[static_cast<size_t>(idx.scale)];
        const int M = cfg.num_thresholds();
        const int m = idx.angle;
        BandSupportReport::Entry e;
        e.band = idx;
        e.tube_lo = (m == 0) ? -std::numeric_limits<double>::infinity()
                             : cfg.deltas[static_cast<size_t>(m - 1)] -
                                   cfg.epsilons[static_cast<size_t>(m - 1)];
        e.tube_hi = (m == M) ? std::numeric_limits<double>::infinity()
                             : cfg.deltas[static_cast<size_t>(m)] +
                                   cfg.epsilons[static_cast<size_t>(m)];
        for (std::int64_t i = 0; i < absD.grid.num_voxels(); ++i) {
            if (absD[i] >= e.tube_lo && absD[i] <= e.tube_hi) continue;
            e.leakage = std::max(e.leakage, win[i]);
        }
        rep.max_leakage = std::max(rep.max_leakage, e.leakage);
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace dipolelets
