#pragma once

#include <algorithm>
#include <vector>

#include "dipolelets/transform.hpp"

namespace dipolelets {

enum class WeightRescale { reciprocal, linear_complement };

struct WeightConfig {
    std::vector<BandIndex> selection; // near-cone bands feeding the energy map
    EnergyMode mode = EnergyMode::sum_of_squares;
    WeightRescale rescale = WeightRescale::linear_complement;
    double floor = 0.1;
    std::optional<double> threshold = 0.5; // for make_mask convenience

    void validate() const {
        if (selection.empty()) throw ConfigError("WeightConfig: selection must be nonempty");
        if (!(floor >= 0.0 && floor < 1.0))
            throw ConfigError("WeightConfig: floor must lie in [0, 1)");
    }
};

struct WeightResult {
    Volume weight;
    std::vector<std::string> warnings;
};

/// Invert and rescale the selected-band energy map into a data-fidelity
/// weight in [floor, 1]: high band energy pulls the weight toward floor.
inline WeightResult make_weight(const Decomposition& d, const WeightConfig& cfg) {
    cfg.validate();
    const BandEnergy energy = band_energy_map(d, cfg.selection, cfg.mode);
    const Volume& e = energy.map;

    std::vector<double> mag(e.data.size());
    double max_mag = 0.0;
    for (size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::abs(e.data[i]);
        max_mag = std::max(max_mag, mag[i]);
    }

    WeightResult out;
    out.weight = Volume(e.grid);
    if (max_mag == 0.0) {
        std::fill(out.weight.data.begin(), out.weight.data.end(), 1.0);
        out.warnings.push_back("make_weight: band energy is identically zero, weight set to 1");
        return out;
    }

    switch (cfg.rescale) {
        case WeightRescale::linear_complement: {
            for (size_t i = 0; i < mag.size(); ++i)
                out.weight.data[i] = cfg.floor + (1.0 - cfg.floor) * (1.0 - mag[i] / max_mag);
            break;
        }
        case WeightRescale::reciprocal: {
            std::vector<double> sorted = mag;
            std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
            double med = sorted[sorted.size() / 2];
            if (med == 0.0) med = max_mag; // degenerate: mostly-zero energy map
            double lo = 1.0, hi = 0.0;
            std::vector<double>& w = out.weight.data;
            for (size_t i = 0; i < mag.size(); ++i) {
                w[i] = 1.0 / (1.0 + mag[i] / med);
                lo = std::min(lo, w[i]);
                hi = std::max(hi, w[i]);
            }
            // Affine rescale so the range is exactly [floor, 1].
            const double span = hi - lo;
            for (auto& v : w)
                v = span > 0.0 ? cfg.floor + (1.0 - cfg.floor) * (v - lo) / span : 1.0;
            break;
        }
    }
    return out;
}

/// Binary reliability mask: 0 where the weight dips below threshold.
inline Volume make_mask(const Volume& w, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("make_mask: threshold must lie strictly inside (0, 1)");
    Volume mask(w.grid);
    for (size_t i = 0; i < w.data.size(); ++i)
        mask.data[i] = w.data[i] < threshold ? 0.0 : 1.0;
    return mask;
}

} // namespace dipolelets
