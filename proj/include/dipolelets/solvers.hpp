#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dipolelets/bands.hpp"
#include "dipolelets/kernel.hpp"
#include "dipolelets/transform.hpp"

namespace dipolelets {

struct SolverReport {
    int iterations = 0;
    std::vector<double> objective_trace;
    double final_residual = 0.0;
    double timing_seconds = 0.0;
    bool converged = false;
    std::map<std::string, double> extras;
};

// ---------------------------------------------------------------------------
// TKD

struct TkdConfig {
    double h = 0.1;

    void validate() const {
        if (!(h > 0.0 && h <= 2.0 / 3.0))
            throw ConfigError("TkdConfig: h must lie in (0, 2/3]");
    }
};

/// Truncated k-space division: divide by the dipole kernel where it is safely
/// away from zero, drop everything else (DC included).
inline Volume tkd(const Volume& psi, const TkdConfig& cfg = {}) {
    cfg.validate();
    const FreqGrid fg = make_freq_grid(psi.grid);
    const SpectralWindow d = dipole_kernel(fg);
    Spectrum s = fft3(psi);
    for (std::int64_t i = 0; i < s.size(); ++i)
        s[i] = std::abs(d[i]) >= cfg.h ? s[i] / d[i] : 0.0;
    return ifft3_real(s);
}

// ---------------------------------------------------------------------------
// Discrete gradient / divergence (forward differences, periodic boundary)

inline std::array<Volume, 3> grad_forward(const Volume& f) {
    const GridSpec& g = f.grid;
    std::array<Volume, 3> out{Volume(g), Volume(g), Volume(g)};
    for (std::int64_t k = 0; k < g.nz(); ++k)
        for (std::int64_t j = 0; j < g.ny(); ++j)
            for (std::int64_t i = 0; i < g.nx(); ++i) {
                const double c = f.at(i, j, k);
                out[0].at(i, j, k) = f.at((i + 1) % g.nx(), j, k) - c;
                out[1].at(i, j, k) = f.at(i, (j + 1) % g.ny(), k) - c;
                out[2].at(i, j, k) = f.at(i, j, (k + 1) % g.nz()) - c;
            }
    return out;
}

/// Adjoint pairing: <grad f, z> = <f, -div z>.
inline Volume div_backward(const std::array<Volume, 3>& z) {
    const GridSpec& g = z[0].grid;
    require_same_grid(g, z[1].grid, "div_backward");
    require_same_grid(g, z[2].grid, "div_backward");
    Volume out(g);
    for (std::int64_t k = 0; k < g.nz(); ++k)
        for (std::int64_t j = 0; j < g.ny(); ++j)
            for (std::int64_t i = 0; i < g.nx(); ++i) {
                const std::int64_t im = (i + g.nx() - 1) % g.nx();
                const std::int64_t jm = (j + g.ny() - 1) % g.ny();
                const std::int64_t km = (k + g.nz() - 1) % g.nz();
                out.at(i, j, k) = z[0].at(i, j, k) - z[0].at(im, j, k) +
                                  z[1].at(i, j, k) - z[1].at(i, jm, k) +
                                  z[2].at(i, j, k) - z[2].at(i, j, km);
            }
    return out;
}

/// Eigenvalues of -div(grad) on the periodic grid.
inline SpectralWindow laplacian_spectrum(const GridSpec& grid) {
    SpectralWindow w(grid);
    std::int64_t idx = 0;
    for (std::int64_t k = 0; k < grid.nz(); ++k)
        for (std::int64_t j = 0; j < grid.ny(); ++j)
            for (std::int64_t i = 0; i < grid.nx(); ++i, ++idx) {
                const double cx = std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(grid.nx()));
                const double cy = std::cos(2.0 * M_PI * static_cast<double>(j) / static_cast<double>(grid.ny()));
                const double cz = std::cos(2.0 * M_PI * static_cast<double>(k) / static_cast<double>(grid.nz()));
                w.data[static_cast<size_t>(idx)] = 6.0 - 2.0 * (cx + cy + cz);
            }
    w.range_min = 0.0;
    w.range_max = 12.0;
    return w;
}

// ---------------------------------------------------------------------------
// Weighted-TV ADMM

struct TvConfig {
    double lambda = 1e-4;
    double rho = 1e-3; // 10x lambda by default
    int max_iters = 50;
    double tol = 1e-4;
    bool isotropic = false;
    double cg_tol = 1e-8;
    int cg_max_iters = 100;

    void validate() const {
        if (!(lambda > 0.0)) throw ConfigError("TvConfig: lambda must be > 0");
        if (!(rho > 0.0)) throw ConfigError("TvConfig: rho must be > 0");
        if (max_iters < 1) throw ConfigError("TvConfig: max_iters must be >= 1");
        if (!(tol > 0.0)) throw ConfigError("TvConfig: tol must be > 0");
        if (!(cg_tol > 0.0) || cg_max_iters < 1)
            throw ConfigError("TvConfig: invalid inner CG parameters");
    }
};

namespace detail {

inline double tv_value(const std::array<Volume, 3>& gchi, bool isotropic) {
    double tv = 0.0;
    if (isotropic) {
        for (std::int64_t i = 0; i < gchi[0].size(); ++i)
            tv += std::sqrt(gchi[0][i] * gchi[0][i] + gchi[1][i] * gchi[1][i] +
                            gchi[2][i] * gchi[2][i]);
    } else {
        for (int a = 0; a < 3; ++a)
            for (std::int64_t i = 0; i < gchi[0].size(); ++i)
                tv += std::abs(gchi[static_cast<size_t>(a)][i]);
    }
    return tv;
}

} // namespace detail

/// ADMM on  min  ||W (F^{-1} D F chi - psi)||_2^2 + lambda ||grad chi||_1
/// with the splitting z = grad chi. The chi update solves
///   (2 A' W^2 A + rho grad' grad) chi = 2 A' W^2 psi + rho grad'(z - u),
/// diagonal in Fourier space for constant W, by conjugate gradient otherwise.
inline std::pair<Volume, SolverReport> admm_weighted_tv(const Volume& psi, const Volume& w,
                                                        const TvConfig& cfg = {}) {
    cfg.validate();
    require_same_grid(psi.grid, w.grid, "admm_weighted_tv");
    for (double v : w.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError("admm_weighted_tv: weight must lie in [0, 1]");

    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec& g = psi.grid;
    const FreqGrid fg = make_freq_grid(g);
    const SpectralWindow d = dipole_kernel(fg);

    double wmin = w.data[0], wmax = w.data[0];
    for (double v : w.data) {
        wmin = std::min(wmin, v);
        wmax = std::max(wmax, v);
    }
    const bool constant_w = (wmin == wmax);

    Volume w2(g);
    for (std::int64_t i = 0; i < w2.size(); ++i) w2[i] = w.data[static_cast<size_t>(i)] * w.data[static_cast<size_t>(i)];

    const auto apply_a = [&](const Volume& x) { return apply_multiplier(x, d); };

    // Constant part of the chi-step right-hand side.
    Volume aw2psi = apply_a(hadamard(w2, psi));

    Volume chi(g);
    std::array<Volume, 3> z{Volume(g), Volume(g), Volume(g)};
    std::array<Volume, 3> u{Volume(g), Volume(g), Volume(g)};

    // Precomputed Fourier denominator for the constant-weight path.
    std::vector<double> denom;
    if (constant_w) {
        const SpectralWindow lap = laplacian_spectrum(g);
        denom.resize(static_cast<size_t>(d.size()));
        for (std::int64_t i = 0; i < d.size(); ++i)
            denom[static_cast<size_t>(i)] = 2.0 * wmin * wmin * d[i] * d[i] + cfg.rho * lap[i];
    }

    SolverReport report;
    std::int64_t cg_total = 0;
    double rel_update = 0.0;

    for (int it = 0; it < cfg.max_iters; ++it) {
        // chi-step
        std::array<Volume, 3> zmu{z[0] - u[0], z[1] - u[1], z[2] - u[2]};
        Volume rhs = aw2psi;
        {
            Volume gd = div_backward(zmu);
            for (std::int64_t i = 0; i < rhs.size(); ++i)
                rhs[i] = 2.0 * rhs[i] - cfg.rho * gd[i];
        }
        Volume chi_prev = chi;
        if (constant_w) {
            Spectrum rh = fft3(rhs);
            for (std::int64_t i = 0; i < rh.size(); ++i)
                rh[i] = denom[static_cast<size_t>(i)] > 0.0 ? rh[i] / denom[static_cast<size_t>(i)]
                                                            : 0.0;
            chi = ifft3_real(rh, 1e-6);
        } else {
            const auto apply_normal = [&](const Volume& x) {
                Volume ax = apply_a(x);
                for (std::int64_t i = 0; i < ax.size(); ++i) ax[i] *= w2[i];
                Volume nx = apply_a(ax);
                Volume lap = div_backward(grad_forward(x));
                for (std::int64_t i = 0; i < nx.size(); ++i)
                    nx[i] = 2.0 * nx[i] - cfg.rho * lap[i];
                return nx;
            };
            // Warm-started CG.
            Volume x = chi;
            Volume r = rhs - apply_normal(x);
            Volume p = r;
            double rs = dot(r, r);
            const double bnorm = l2_norm(rhs);
            const double stop = cfg.cg_tol * (bnorm > 0.0 ? bnorm : 1.0);
            int cg_it = 0;
            while (cg_it < cfg.cg_max_iters && std::sqrt(rs) > stop) {
                Volume ap = apply_normal(p);
                const double alpha = rs / dot(p, ap);
                axpy(alpha, p, x);
                axpy(-alpha, ap, r);
                const double rs_new = dot(r, r);
                const double beta = rs_new / rs;
                for (std::int64_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
                rs = rs_new;
                ++cg_it;
            }
            cg_total += cg_it;
            chi = x;
        }

        // z-step: soft threshold on grad chi + u
        std::array<Volume, 3> gchi = grad_forward(chi);
        const double thr = cfg.lambda / cfg.rho;
        if (cfg.isotropic) {
            for (std::int64_t i = 0; i < chi.size(); ++i) {
                double vx = gchi[0][i] + u[0][i];
                double vy = gchi[1][i] + u[1][i];
                double vz = gchi[2][i] + u[2][i];
                const double n = std::sqrt(vx * vx + vy * vy + vz * vz);
                const double scale = n > thr ? 1.0 - thr / n : 0.0;
                z[0][i] = scale * vx;
                z[1][i] = scale * vy;
                z[2][i] = scale * vz;
            }
        } else {
            for (int a = 0; a < 3; ++a)
                for (std::int64_t i = 0; i < chi.size(); ++i) {
                    const double v = gchi[static_cast<size_t>(a)][i] + u[static_cast<size_t>(a)][i];
                    z[static_cast<size_t>(a)][i] =
                        v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
                }
        }

        // dual update
        for (int a = 0; a < 3; ++a)
            for (std::int64_t i = 0; i < chi.size(); ++i)
                u[static_cast<size_t>(a)][i] += gchi[static_cast<size_t>(a)][i] - z[static_cast<size_t>(a)][i];

        // objective trace
        {
            Volume resid = apply_a(chi) - psi;
            double fid = 0.0;
            for (std::int64_t i = 0; i < resid.size(); ++i) {
                const double wr = w.data[static_cast<size_t>(i)] * resid[i];
                fid += wr * wr;
            }
            report.objective_trace.push_back(fid + cfg.lambda * detail::tv_value(gchi, cfg.isotropic));
        }

        report.iterations = it + 1;
        const double base = l2_norm(chi_prev);
        rel_update = l2_norm(chi - chi_prev) / (base > 0.0 ? base : 1.0);
        if (it > 0 && rel_update < cfg.tol) {
            report.converged = true;
            break;
        }
    }

    report.final_residual = rel_update;
    report.extras["cg_iterations_total"] = static_cast<double>(cg_total);
    report.extras["chi_step_fourier"] = constant_w ? 1.0 : 0.0;
    report.timing_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(chi), std::move(report)};
}

// ---------------------------------------------------------------------------
// Band-regularized projected descent

enum class BandRegFidelity { nonlinear_exp, linear };

struct BandRegConfig {
    std::map<BandIndex, double> alphas; // l2 penalty per band
    std::map<BandIndex, double> betas;  // l-inf box per band, +inf = unconstrained
    double step = 1.0;
    int max_iters = 100;
    double tol = 1e-6;
    BandRegFidelity fidelity = BandRegFidelity::nonlinear_exp;
    std::optional<Volume> init;
    // Terminal feasibility polish: repeat the clip-resynthesize sweep on the
    // final iterate until the worst band excess drops under target*beta.
    double polish_target_ratio = 0.09;
    int polish_max_sweeps = 200;

    void validate(const BandSet& bs) const {
        if (!(step > 0.0)) throw ConfigError("BandRegConfig: step must be > 0");
        if (max_iters < 1) throw ConfigError("BandRegConfig: max_iters must be >= 1");
        if (!(tol > 0.0)) throw ConfigError("BandRegConfig: tol must be > 0");
        if (!(polish_target_ratio >= 0.0) || polish_max_sweeps < 0)
            throw ConfigError("BandRegConfig: invalid projection polish parameters");
        for (const auto& [idx, a] : alphas) {
            if (!(a >= 0.0)) throw ConfigError("BandRegConfig: alpha must be >= 0");
            bs.window(idx);
        }
        for (const auto& [idx, b] : betas) {
            if (!(b >= 0.0)) throw ConfigError("BandRegConfig: beta must be >= 0 or infinite");
            bs.window(idx);
        }
    }
};

/// Dyadic weight schedule over the near-cone bands: alpha and beta are halved
/// at each finer scale. The coarse band is left untouched.
inline BandRegConfig dyadic_bandreg_config(const BandSet& bs, double alpha0, double beta0) {
    BandRegConfig cfg;
    for (const BandIndex& idx : bs.near_cone_selection()) {
        const double f = std::ldexp(1.0, -idx.scale);
        cfg.alphas[idx] = alpha0 * f;
        cfg.betas[idx] = beta0 * f;
    }
    return cfg;
}

/// Sum of alpha-weighted squared band windows; the Fourier multiplier of the
/// l2 regularizer's gradient.
inline SpectralWindow bandreg_alpha_window(const BandSet& bs,
                                           const std::map<BandIndex, double>& alphas) {
    SpectralWindow acc(bs.grid);
    for (const auto& [idx, a] : alphas) {
        const SpectralWindow& w = bs.window(idx);
        for (std::int64_t i = 0; i < acc.size(); ++i) acc.data[static_cast<size_t>(i)] += a * w[i] * w[i];
    }
    acc.update_range_hint();
    return acc;
}

/// Smooth part of the band-regularized objective.
/// nonlinear_exp: sum W^2 |e^{i phi} - e^{i psi}|^2 = sum W^2 (2 - 2 cos(phi - psi)),
/// linear:        sum (W (phi - psi))^2,  with phi the forward-modeled phase.
inline double bandreg_objective(const Volume& chi, const Volume& psi, const Volume& w,
                                const SpectralWindow& alpha_window, BandRegFidelity fidelity) {
    const FreqGrid fg = make_freq_grid(chi.grid);
    const SpectralWindow d = dipole_kernel(fg);
    const Spectrum chi_hat = fft3(chi);
    Spectrum phi_hat = chi_hat;
    for (std::int64_t i = 0; i < phi_hat.size(); ++i) phi_hat[i] *= d[i];
    const Volume phi = ifft3_real(phi_hat, 1e-6);

    double obj = 0.0;
    for (std::int64_t i = 0; i < phi.size(); ++i) {
        const double ww = w[i] * w[i];
        const double delta = phi[i] - psi[i];
        obj += fidelity == BandRegFidelity::nonlinear_exp ? ww * (2.0 - 2.0 * std::cos(delta))
                                                          : ww * delta * delta;
    }
    const double n = static_cast<double>(chi.size());
    double reg = 0.0;
    for (std::int64_t i = 0; i < chi_hat.size(); ++i)
        reg += alpha_window[i] * std::norm(chi_hat[i]);
    return obj + reg / (2.0 * n);
}

/// Gradient of bandreg_objective with respect to chi.
inline Volume bandreg_gradient(const Volume& chi, const Volume& psi, const Volume& w,
                               const SpectralWindow& alpha_window, BandRegFidelity fidelity) {
    const FreqGrid fg = make_freq_grid(chi.grid);
    const SpectralWindow d = dipole_kernel(fg);
    const Spectrum chi_hat = fft3(chi);
    Spectrum phi_hat = chi_hat;
    for (std::int64_t i = 0; i < phi_hat.size(); ++i) phi_hat[i] *= d[i];
    const Volume phi = ifft3_real(phi_hat, 1e-6);

    Volume inner(chi.grid);
    for (std::int64_t i = 0; i < inner.size(); ++i) {
        const double ww = w[i] * w[i];
        const double delta = phi[i] - psi[i];
        inner[i] = fidelity == BandRegFidelity::nonlinear_exp ? 2.0 * ww * std::sin(delta)
                                                              : 2.0 * ww * delta;
    }
    Spectrum gh = fft3(inner);
    for (std::int64_t i = 0; i < gh.size(); ++i)
        gh[i] = gh[i] * d[i] + alpha_window[i] * chi_hat[i];
    return ifft3_real(gh, 1e-6);
}

/// Clip the constrained bands to their boxes and resynthesize. Approximate
/// projection; exact when the transform has a single angular band per scale.
inline Volume bandreg_project(const Volume& chi, const BandSet& bs,
                              const std::map<BandIndex, double>& betas) {
    bool any = false;
    for (const auto& [idx, b] : betas)
        if (std::isfinite(b)) any = true;
    if (!any) return chi;

    Decomposition d = analyze(chi, bs);
    const auto clip = [](Volume& v, double b) {
        for (auto& x : v.data) x = std::clamp(x, -b, b);
    };
    for (auto& [idx, band] : d.bands) {
        auto it = betas.find(idx);
        if (it != betas.end() && std::isfinite(it->second)) clip(band, it->second);
    }
    {
        auto it = betas.find(BandIndex{d.num_scales, 0});
        if (it != betas.end() && std::isfinite(it->second)) clip(d.coarse, it->second);
    }
    return synthesize(d);
}

/// One sweep only recovers the in-band fraction of each clipped spike, so a
/// single pass can leave the re-analyzed bands well outside their boxes.
/// Iterating the same sweep contracts the excess geometrically; this runs
/// until the worst excess/beta ratio reaches target_ratio or the budget ends.
inline Volume bandreg_project_iterated(Volume chi, const BandSet& bs,
                                       const std::map<BandIndex, double>& betas,
                                       double target_ratio, int max_sweeps,
                                       int* sweeps_used = nullptr) {
    if (sweeps_used) *sweeps_used = 0;
    bool any = false;
    for (const auto& [idx, b] : betas)
        if (std::isfinite(b)) any = true;
    if (!any) return chi;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        Decomposition d = analyze(chi, bs);
        double worst = 0.0;
        const auto excess_ratio = [&](const Volume& band, double b) {
            const double excess = std::max(0.0, linf_norm(band) - b);
            if (excess == 0.0) return 0.0;
            return b > 0.0 ? excess / b : std::numeric_limits<double>::infinity();
        };
        for (const auto& [idx, band] : d.bands) {
            auto it = betas.find(idx);
            if (it != betas.end() && std::isfinite(it->second))
                worst = std::max(worst, excess_ratio(band, it->second));
        }
        {
            auto it = betas.find(BandIndex{d.num_scales, 0});
            if (it != betas.end() && std::isfinite(it->second))
                worst = std::max(worst, excess_ratio(d.coarse, it->second));
        }
        if (worst <= target_ratio) break;

        const auto clip = [](Volume& v, double b) {
            for (auto& x : v.data) x = std::clamp(x, -b, b);
        };
        for (auto& [idx, band] : d.bands) {
            auto it = betas.find(idx);
            if (it != betas.end() && std::isfinite(it->second)) clip(band, it->second);
        }
        {
            auto it = betas.find(BandIndex{d.num_scales, 0});
            if (it != betas.end() && std::isfinite(it->second)) clip(d.coarse, it->second);
        }
        chi = synthesize(d);
        if (sweeps_used) *sweeps_used = sweep + 1;
    }
    return chi;
}

struct BandLeakage {
    double tau = 0.0;       // worst absolute excess over the box after projection
    double tau_ratio = 0.0; // worst excess relative to the band's beta
};

inline BandLeakage bandreg_leakage(const Volume& chi, const BandSet& bs,
                                   const std::map<BandIndex, double>& betas) {
    BandLeakage out;
    bool any = false;
    for (const auto& [idx, b] : betas)
        if (std::isfinite(b)) any = true;
    if (!any) return out;

    const Decomposition d = analyze(chi, bs);
    const auto account = [&](const Volume& band, double b) {
        const double excess = std::max(0.0, linf_norm(band) - b);
        out.tau = std::max(out.tau, excess);
        if (b > 0.0)
            out.tau_ratio = std::max(out.tau_ratio, excess / b);
        else if (excess > 0.0)
            out.tau_ratio = std::numeric_limits<double>::infinity();
    };
    for (const auto& [idx, band] : d.bands) {
        auto it = betas.find(idx);
        if (it != betas.end() && std::isfinite(it->second)) account(band, it->second);
    }
    {
        auto it = betas.find(BandIndex{d.num_scales, 0});
        if (it != betas.end() && std::isfinite(it->second)) account(d.coarse, it->second);
    }
    return out;
}

/// Projected gradient descent on the band-regularized objective. Step halving
/// on objective increase (12 tries, then the step is taken anyway); hard abort
/// when the objective blows past 10x its initial value. The returned iterate
/// gets a final feasibility polish (iterated projection sweeps); the objective
/// trace covers the descent loop, extras carry the post-polish objective.
inline std::pair<Volume, SolverReport> band_regularized_descent(const Volume& psi, const Volume& w,
                                                                const BandSet& bs,
                                                                const BandRegConfig& cfg) {
    cfg.validate(bs);
    require_same_grid(psi.grid, w.grid, "band_regularized_descent");
    require_same_grid(psi.grid, bs.grid, "band_regularized_descent");

    const auto t0 = std::chrono::steady_clock::now();
    const SpectralWindow alpha_window = bandreg_alpha_window(bs, cfg.alphas);

    Volume chi = cfg.init ? *cfg.init : Volume(psi.grid);
    if (cfg.init) require_same_grid(psi.grid, cfg.init->grid, "band_regularized_descent init");
    chi = bandreg_project(chi, bs, cfg.betas);

    SolverReport report;
    double step = cfg.step;
    double obj = bandreg_objective(chi, psi, w, alpha_window, cfg.fidelity);
    const double obj0 = obj;
    report.objective_trace.push_back(obj);

    double rel_update = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const Volume g = bandreg_gradient(chi, psi, w, alpha_window, cfg.fidelity);
        Volume chi_next;
        double obj_next = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Volume cand = chi;
            axpy(-step, g, cand);
            cand = bandreg_project(cand, bs, cfg.betas);
            obj_next = bandreg_objective(cand, psi, w, alpha_window, cfg.fidelity);
            if (obj_next <= obj) {
                chi_next = std::move(cand);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            Volume cand = chi;
            axpy(-step, g, cand);
            chi_next = bandreg_project(cand, bs, cfg.betas);
            obj_next = bandreg_objective(chi_next, psi, w, alpha_window, cfg.fidelity);
        }

        if (obj_next > 10.0 * std::max(obj0, 1e-30))
            throw NumericError("band_regularized_descent: objective diverged (10x initial) at iteration " +
                               std::to_string(it + 1));

        const double base = l2_norm(chi);
        rel_update = l2_norm(chi_next - chi) / (base > 0.0 ? base : 1.0);
        chi = std::move(chi_next);
        obj = obj_next;
        report.objective_trace.push_back(obj);
        report.iterations = it + 1;
        if (rel_update < cfg.tol) {
            report.converged = true;
            break;
        }
    }

    int polish_sweeps = 0;
    chi = bandreg_project_iterated(std::move(chi), bs, cfg.betas, cfg.polish_target_ratio,
                                   cfg.polish_max_sweeps, &polish_sweeps);

    const BandLeakage leak = bandreg_leakage(chi, bs, cfg.betas);
    report.final_residual = rel_update;
    report.extras["projection_leakage_tau"] = leak.tau;
    report.extras["projection_leakage_ratio"] = leak.tau_ratio;
    report.extras["projection_polish_sweeps"] = static_cast<double>(polish_sweeps);
    report.extras["objective_after_polish"] =
        bandreg_objective(chi, psi, w, alpha_window, cfg.fidelity);
    report.extras["final_step"] = step;
    report.timing_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(chi), std::move(report)};
}

} // namespace dipolelets
