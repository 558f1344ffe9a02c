#pragma once

#include <cmath>
#include <vector>

#include "dipolelets/bands.hpp"
#include "dipolelets/fft.hpp"
#include "dipolelets/parallel.hpp"

namespace dipolelets {

namespace detail {

inline void require_roi(const Volume& roi, const GridSpec& grid, const char* where) {
    require_same_grid(roi.grid, grid, where);
    bool any = false;
    for (double v : roi.data) {
        if (v != 0.0 && v != 1.0)
            throw ConfigError(std::string(where) + ": roi must be binary");
        any = any || v == 1.0;
    }
    if (!any) throw ConfigError(std::string(where) + ": roi is empty");
}

} // namespace detail

/// Root-mean-square error as a percentage of the masked ground-truth norm.
inline double rmse(const Volume& est, const Volume& truth, const Volume& roi) {
    require_same_grid(est.grid, truth.grid, "rmse");
    detail::require_roi(roi, est.grid, "rmse");
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < est.size(); ++i) {
        if (roi[i] == 0.0) continue;
        const double e = est[i] - truth[i];
        num += e * e;
        den += truth[i] * truth[i];
    }
    if (den == 0.0) throw ConfigError("rmse: ground truth vanishes on the roi");
    return 100.0 * std::sqrt(num / den);
}

struct XsimParams {
    double k1 = 0.01;
    double k2 = 0.001;
    double data_range = 1.0; // ppm
    double sigma = 1.5;      // voxels
    int radius = 5;

    void validate() const {
        if (!(k1 > 0.0 && k2 > 0.0 && data_range > 0.0 && sigma > 0.0) || radius < 1)
            throw ConfigError("XsimParams: k1, k2, data_range, sigma must be > 0 and radius >= 1");
    }
};

/// Structural-similarity score with susceptibility-adapted constants. Local
/// Gaussian statistics are renormalized over the in-grid, in-roi part of each
/// window; the score is the mean over roi voxels.
inline double xsim(const Volume& est, const Volume& truth, const Volume& roi,
                   const XsimParams& params = {}) {
    params.validate();
    require_same_grid(est.grid, truth.grid, "xsim");
    detail::require_roi(roi, est.grid, "xsim");

    const GridSpec& g = est.grid;
    const double c1 = params.k1 * params.data_range * params.k1 * params.data_range;
    const double c2 = params.k2 * params.data_range * params.k2 * params.data_range;
    const int r = params.radius;
    std::vector<double> g1d(static_cast<size_t>(2 * r + 1));
    for (int t = -r; t <= r; ++t)
        g1d[static_cast<size_t>(t + r)] =
            std::exp(-0.5 * static_cast<double>(t) * static_cast<double>(t) / (params.sigma * params.sigma));

    std::vector<double> ssim_sum(static_cast<size_t>(g.nz()), 0.0);
    std::vector<std::int64_t> ssim_count(static_cast<size_t>(g.nz()), 0);

    parallel_for(g.nz(), [&](std::int64_t k) {
        for (std::int64_t j = 0; j < g.ny(); ++j)
            for (std::int64_t i = 0; i < g.nx(); ++i) {
                if (roi.at(i, j, k) == 0.0) continue;
                double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
                const std::int64_t k0 = std::max<std::int64_t>(0, k - r);
                const std::int64_t k1i = std::min<std::int64_t>(g.nz() - 1, k + r);
                const std::int64_t j0 = std::max<std::int64_t>(0, j - r);
                const std::int64_t j1 = std::min<std::int64_t>(g.ny() - 1, j + r);
                const std::int64_t i0 = std::max<std::int64_t>(0, i - r);
                const std::int64_t i1 = std::min<std::int64_t>(g.nx() - 1, i + r);
                for (std::int64_t qk = k0; qk <= k1i; ++qk) {
                    const double wk = g1d[static_cast<size_t>(qk - k + r)];
                    for (std::int64_t qj = j0; qj <= j1; ++qj) {
                        const double wjk = wk * g1d[static_cast<size_t>(qj - j + r)];
                        for (std::int64_t qi = i0; qi <= i1; ++qi) {
                            if (roi.at(qi, qj, qk) == 0.0) continue;
                            const double w = wjk * g1d[static_cast<size_t>(qi - i + r)];
                            const double x = est.at(qi, qj, qk);
                            const double y = truth.at(qi, qj, qk);
                            sw += w;
                            sx += w * x;
                            sy += w * y;
                            sxx += w * x * x;
                            syy += w * y * y;
                            sxy += w * x * y;
                        }
                    }
                }
                const double mx = sx / sw, my = sy / sw;
                const double vx = std::max(0.0, sxx / sw - mx * mx);
                const double vy = std::max(0.0, syy / sw - my * my);
                const double cxy = sxy / sw - mx * my;
                const double s = ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
                                 ((mx * mx + my * my + c1) * (vx + vy + c2));
                ssim_sum[static_cast<size_t>(k)] += s;
                ssim_count[static_cast<size_t>(k)] += 1;
            }
    });

    double total = 0.0;
    std::int64_t count = 0;
    for (size_t k = 0; k < ssim_sum.size(); ++k) {
        total += ssim_sum[k];
        count += ssim_count[k];
    }
    return total / static_cast<double>(count);
}

/// Fraction of the estimate's energy living in the selected near-cone bands.
inline double streak_energy(const Volume& est, const BandSet& bs,
                            const std::vector<BandIndex>& selection) {
    if (selection.empty()) throw ConfigError("streak_energy: selection must be nonempty");
    require_same_grid(est.grid, bs.grid, "streak_energy");
    const double total = l2_norm(est);
    if (total == 0.0) return 0.0;
    const Spectrum s = fft3(est);
    const double n = static_cast<double>(est.size());
    double acc = 0.0;
    for (const BandIndex& idx : selection) {
        const SpectralWindow& w = bs.window(idx);
        double band = 0.0;
        for (std::int64_t i = 0; i < s.size(); ++i) band += w[i] * w[i] * std::norm(s[i]);
        acc += band / n;
    }
    return std::sqrt(acc) / total;
}

struct MetricReport {
    double rmse_percent = 0.0;
    double xsim = 0.0;
    double streak_energy = 0.0;
    std::int64_t roi_voxels = 0;
};

inline MetricReport evaluate_metrics(const Volume& est, const Volume& truth, const Volume& roi,
                                     const BandSet& bs, const XsimParams& params = {}) {
    MetricReport r;
    r.rmse_percent = rmse(est, truth, roi);
    r.xsim = xsim(est, truth, roi, params);
    r.streak_energy = streak_energy(est, bs, bs.near_cone_selection());
    for (double v : roi.data) r.roi_voxels += v == 1.0 ? 1 : 0;
    return r;
}

} // namespace dipolelets
