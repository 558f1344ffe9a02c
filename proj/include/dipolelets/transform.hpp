#pragma once

#include <utility>
#include <vector>

#include "dipolelets/bands.hpp"
#include "dipolelets/fft.hpp"
#include "dipolelets/parallel.hpp"

namespace dipolelets {

/// Band coefficient volumes D_{j,m}f plus the coarse D_{J+1}f. Undecimated:
/// every band is full resolution, and coarse + sum(bands) reconstructs the
/// input exactly.
struct Decomposition {
    GridSpec grid;
    std::vector<std::pair<BandIndex, Volume>> bands;
    Volume coarse;
    std::string bandset_id;
    int num_scales = 0;
    std::vector<int> angles_per_scale;

    const Volume& band(const BandIndex& b) const {
        if (b.scale == num_scales) {
            if (b.angle != 0) throw ConfigError("Decomposition: coarse band has angle 0");
            return coarse;
        }
        for (const auto& [idx, vol] : bands)
            if (idx == b) return vol;
        throw ConfigError("Decomposition: no band " + band_name(b));
    }

    Volume& band(const BandIndex& b) {
        return const_cast<Volume&>(static_cast<const Decomposition&>(*this).band(b));
    }

    std::vector<BandIndex> band_indices(bool include_coarse = true) const {
        std::vector<BandIndex> out;
        for (const auto& [idx, vol] : bands) out.push_back(idx);
        if (include_coarse) out.push_back(BandIndex{num_scales, 0});
        return out;
    }
};

/// Analysis: one forward FFT of f, one inverse FFT per band. Per-band
/// transforms are independent and run under the worker cap.
inline Decomposition analyze(const Volume& f, const BandSet& bs) {
    require_same_grid(f.grid, bs.grid, "analyze");
    const Spectrum fhat = fft3(f);

    Decomposition d;
    d.grid = f.grid;
    d.bandset_id = bs.id;
    d.num_scales = bs.num_scales();
    for (int j = 0; j < bs.num_scales(); ++j) d.angles_per_scale.push_back(bs.num_angles(j));
    d.bands.resize(bs.combined.size());

    const std::int64_t nbands = static_cast<std::int64_t>(bs.combined.size()) + 1;
    parallel_for(nbands, [&](std::int64_t b) {
        const SpectralWindow& w =
            (b < static_cast<std::int64_t>(bs.combined.size())) ? bs.combined[static_cast<size_t>(b)].second
                                                                : bs.coarse;
        Spectrum s = fhat;
        for (std::int64_t i = 0; i < s.size(); ++i) s[i] *= w[i];
        Volume v = ifft3_real(s);
        if (b < static_cast<std::int64_t>(bs.combined.size()))
            d.bands[static_cast<size_t>(b)] = {bs.combined[static_cast<size_t>(b)].first, std::move(v)};
        else
            d.coarse = std::move(v);
    });
    return d;
}

/// Perfect reconstruction: f = coarse + sum of detail bands, a plain
/// voxelwise sum by the partition of unity.
inline Volume synthesize(const Decomposition& d) {
    if (d.coarse.data.empty()) throw ConfigError("synthesize: missing coarse band");
    int expected = 0;
    for (int m : d.angles_per_scale) expected += m;
    if (static_cast<int>(d.bands.size()) != expected)
        throw ConfigError("synthesize: decomposition holds " + std::to_string(d.bands.size()) +
                          " detail bands, band set expects " + std::to_string(expected));
    Volume out = d.coarse;
    for (const auto& [idx, vol] : d.bands) {
        require_same_grid(out.grid, vol.grid, "synthesize");
        for (std::int64_t i = 0; i < out.size(); ++i) out[i] += vol[i];
    }
    return out;
}

enum class EnergyMode { signed_sum, sum_of_squares };

/// Voxelwise aggregate over selected bands. signed_sum adds raw
/// coefficients; sum_of_squares survives sign cancellation and is the
/// default for weight generation.
struct BandEnergy {
    Volume map;
    EnergyMode mode = EnergyMode::sum_of_squares;
    std::vector<BandIndex> selection;
};

inline BandEnergy band_energy_map(const Decomposition& d, const std::vector<BandIndex>& selection,
                                  EnergyMode mode = EnergyMode::sum_of_squares) {
    if (selection.empty()) throw ConfigError("band_energy_map: empty band selection");
    BandEnergy e;
    e.mode = mode;
    e.selection = selection;
    e.map = Volume(d.grid);
    for (const BandIndex& b : selection) {
        const Volume& v = d.band(b); // throws on unknown index
        if (mode == EnergyMode::signed_sum)
            for (std::int64_t i = 0; i < e.map.size(); ++i) e.map[i] += v[i];
        else
            for (std::int64_t i = 0; i < e.map.size(); ++i) e.map[i] += v[i] * v[i];
    }
    return e;
}

} // namespace dipolelets
