#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dipolelets/config.hpp"
#include "dipolelets/render.hpp"
#include "dipolelets/version.hpp"
#include "dipolelets/volume_io.hpp"

namespace dipolelets {

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(std::string("stage ") + name + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(std::string("stage ") + name + ": " + e.what());
    }
}

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError(IoError::Code::open_failed, "cannot open for writing: " + path.string());
    f << j.dump(2) << "\n";
    if (!f) throw IoError(IoError::Code::write_failed, "short write: " + path.string());
}

/// Deterministic display window for renders: the volume's own value range.
inline std::pair<double, double> auto_window(const Volume& v) {
    double lo = v.data[0], hi = v.data[0];
    for (double x : v.data) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!(lo < hi)) {
        lo -= 0.5;
        hi += 0.5;
    }
    return {lo, hi};
}

} // namespace detail

// Wall-clock timing stays on the in-memory report only; the serialized
// artifact must be identical across reruns of the same config and seed.
inline nlohmann::json solver_report_to_json(const SolverReport& r) {
    nlohmann::json extras = nlohmann::json::object();
    for (const auto& [k, v] : r.extras) extras[k] = v;
    return nlohmann::json{{"iterations", r.iterations},
                          {"converged", r.converged},
                          {"final_residual", r.final_residual},
                          {"objective_trace", r.objective_trace},
                          {"extras", extras}};
}

inline nlohmann::json metric_report_to_json(const MetricReport& r) {
    return nlohmann::json{{"rmse_percent", r.rmse_percent},
                          {"xsim", r.xsim},
                          {"streak_energy", r.streak_energy},
                          {"roi_voxels", r.roi_voxels}};
}

/// Write every band of a decomposition as a volume file plus a JSON listing.
/// Returns the relative paths written, listing first.
inline std::vector<std::string> export_decomposition(const Decomposition& d,
                                                     const std::filesystem::path& dir,
                                                     const std::string& prefix = "band") {
    std::filesystem::create_directories(dir);
    std::vector<std::string> rel;
    nlohmann::json listing;
    listing["bandset_id"] = d.bandset_id;
    listing["num_scales"] = d.num_scales;
    listing["angles_per_scale"] = d.angles_per_scale;
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& [idx, vol] : d.bands) {
        const std::string file = prefix + "_" + band_name(idx) + ".dlvol";
        write_volume(vol, (dir / file).string());
        bands.push_back({{"scale", idx.scale}, {"angle", idx.angle}, {"file", file}});
        rel.push_back(file);
    }
    const std::string coarse_file = prefix + "_coarse.dlvol";
    write_volume(d.coarse, (dir / coarse_file).string());
    listing["bands"] = bands;
    listing["coarse"] = coarse_file;
    detail::write_json_file(listing, dir / (prefix + "s.json"));
    rel.push_back(coarse_file);
    rel.push_back(prefix + "s.json");
    return rel;
}

struct PipelineResult {
    RunConfig config;
    std::filesystem::path out_dir;
    MetricReport metrics;
    SolverReport solver_report;
    std::vector<std::string> artifacts; // relative to out_dir, sorted
    std::uint64_t config_hash = 0;
};

/// Run every stage on one configuration: phantom, forward model, corruption,
/// decomposition, weights, reconstruction, metrics, renders, manifest.
inline PipelineResult run_pipeline(const RunConfig& cfg, std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    cfg.validate();
    const auto say = [&](const std::string& line) {
        if (log) (*log) << line << "\n";
    };

    PipelineResult result;
    result.config = cfg;
    result.out_dir = cfg.output;
    result.config_hash = config_hash(cfg);
    fs::create_directories(result.out_dir);
    std::vector<std::string>& artifacts = result.artifacts;

    const auto save = [&](const Volume& v, const std::string& rel) {
        write_volume(v, (result.out_dir / rel).string());
        artifacts.push_back(rel);
    };

    detail::write_json_file(run_config_to_json(cfg), result.out_dir / "config.json");
    artifacts.push_back("config.json");

    // phantom
    const Phantom phantom = detail::stage("phantom", [&] {
        const PhantomRecipe recipe = cfg.phantom ? *cfg.phantom : default_head_recipe(cfg.grid);
        return make_phantom(cfg.grid, recipe);
    });
    say("[phantom] " + (phantom.description.empty() ? std::string("custom") : phantom.description));
    save(phantom.chi33, "chi33.dlvol");
    if (phantom.chi13) save(*phantom.chi13, "chi13.dlvol");
    if (phantom.chi23) save(*phantom.chi23, "chi23.dlvol");
    save(phantom.mask, "roi.dlvol");

    // forward
    const Volume psi0 = detail::stage("forward", [&] {
        return cfg.forward == ForwardModel::dipole ? forward_dipole(phantom.chi33)
                                                   : forward_sti_z(phantom);
    });
    say("[forward] " + std::string(cfg.forward == ForwardModel::dipole ? "dipole" : "sti_z"));
    save(psi0, "psi0.dlvol");

    // corrupt
    const Volume psi = detail::stage("corrupt", [&] {
        CorruptionSpec spec = cfg.corruption;
        spec.seed = cfg.seed;
        return corrupt(psi0, spec);
    });
    say("[corrupt] snr=" +
        (cfg.corruption.noise_snr ? std::to_string(*cfg.corruption.noise_snr) : std::string("none")) +
        " offsets=" + std::to_string(cfg.corruption.offsets.size()));
    save(psi, "psi.dlvol");

    // bands + decomposition
    const BandSet bs = detail::stage("decompose", [&] {
        return build_bandset(make_freq_grid(cfg.grid), cfg.radial, cfg.angular);
    });
    const Decomposition decomp = detail::stage("decompose", [&] { return analyze(psi, bs); });
    say("[decompose] " + bs.id + " pu_residual=" + std::to_string(bs.pu_residual));
    {
        auto rel = export_decomposition(decomp, result.out_dir / "bands");
        for (const auto& r : rel) artifacts.push_back("bands/" + r);
    }

    // weights
    WeightConfig wcfg;
    wcfg.selection = bs.near_cone_selection();
    wcfg.mode = cfg.weights.mode;
    wcfg.rescale = cfg.weights.rescale;
    wcfg.floor = cfg.weights.floor;
    wcfg.threshold = cfg.weights.threshold;
    const WeightResult wres = detail::stage("weights", [&] { return make_weight(decomp, wcfg); });
    for (const auto& warning : wres.warnings) say("[weights] warning: " + warning);
    save(wres.weight, "weight.dlvol");
    {
        const Volume energy = band_energy_map(decomp, wcfg.selection, wcfg.mode).map;
        save(energy, "band_energy.dlvol");
    }
    if (cfg.weights.threshold) {
        const Volume mask = detail::stage(
            "weights", [&] { return make_mask(wres.weight, *cfg.weights.threshold); });
        save(mask, "reliability_mask.dlvol");
    }

    // reconstruction
    Volume chi_est;
    switch (cfg.method) {
        case ReconMethod::tkd:
            chi_est = detail::stage("recon", [&] { return tkd(psi, cfg.tkd); });
            break;
        case ReconMethod::tv: {
            auto [chi, report] =
                detail::stage("recon", [&] { return admm_weighted_tv(psi, wres.weight, cfg.tv); });
            chi_est = std::move(chi);
            result.solver_report = std::move(report);
            break;
        }
        case ReconMethod::bandreg: {
            BandRegConfig bcfg = dyadic_bandreg_config(bs, cfg.bandreg.alpha0, cfg.bandreg.beta0);
            bcfg.step = cfg.bandreg.step;
            bcfg.max_iters = cfg.bandreg.max_iters;
            bcfg.tol = cfg.bandreg.tol;
            bcfg.fidelity = cfg.bandreg.fidelity;
            auto [chi, report] = detail::stage(
                "recon", [&] { return band_regularized_descent(psi, wres.weight, bs, bcfg); });
            chi_est = std::move(chi);
            result.solver_report = std::move(report);
            break;
        }
    }
    say("[recon] method=" + std::string(cfg.method == ReconMethod::tkd ? "tkd"
                                        : cfg.method == ReconMethod::tv ? "tv"
                                                                        : "bandreg") +
        " iters=" + std::to_string(result.solver_report.iterations) +
        " secs=" + std::to_string(result.solver_report.timing_seconds));
    save(chi_est, "chi_est.dlvol");
    detail::write_json_file(solver_report_to_json(result.solver_report),
                            result.out_dir / "solver_report.json");
    artifacts.push_back("solver_report.json");

    // metrics
    result.metrics = detail::stage(
        "metrics", [&] { return evaluate_metrics(chi_est, phantom.chi33, phantom.mask, bs, cfg.xsim); });
    say("[metrics] rmse=" + std::to_string(result.metrics.rmse_percent) +
        "% xsim=" + std::to_string(result.metrics.xsim) +
        " streak=" + std::to_string(result.metrics.streak_energy));
    detail::write_json_file(metric_report_to_json(result.metrics), result.out_dir / "metrics.json");
    artifacts.push_back("metrics.json");

    // renders: mid-axial slices of the key volumes and each band
    detail::stage("render", [&] {
        const fs::path rdir = result.out_dir / "renders";
        fs::create_directories(rdir);
        const std::int64_t mid = cfg.grid.nz() / 2;
        const auto render_one = [&](const Volume& v, const std::string& name) {
            const auto [lo, hi] = detail::auto_window(v);
            const auto paths =
                render_slices(v, 2, {mid}, lo, hi, (rdir / name).string());
            for (const auto& p : paths)
                artifacts.push_back("renders/" + fs::path(p).filename().string());
        };
        render_one(phantom.chi33, "chi33");
        render_one(psi, "psi");
        render_one(wres.weight, "weight");
        render_one(chi_est, "chi_est");
        for (const auto& [idx, vol] : decomp.bands) render_one(vol, "band_" + band_name(idx));
        render_one(decomp.coarse, "band_coarse");
        return 0;
    });

    std::sort(artifacts.begin(), artifacts.end());

    // manifest: everything above, no timestamps
    {
        char hash_hex[17];
        std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                      static_cast<unsigned long long>(result.config_hash));
        nlohmann::json manifest{{"version", version_string()},
                                {"config_hash", hash_hex},
                                {"bandset_id", bs.id},
                                {"artifacts", artifacts}};
        detail::write_json_file(manifest, result.out_dir / "manifest.json");
    }
    say("[done] " + std::to_string(artifacts.size()) + " artifacts in " + result.out_dir.string());
    return result;
}

} // namespace dipolelets
