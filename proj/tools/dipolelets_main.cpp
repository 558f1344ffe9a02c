#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dipolelets/dipolelets.hpp"

namespace {

using namespace dipolelets;

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig::defaults();
    std::ifstream f(path);
    if (!f) throw IoError(IoError::Code::open_failed, "cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
    return parse_run_config(j);
}

void emit_error_json(const std::string& type, const std::string& message,
                     const std::string& code = "") {
    nlohmann::json j{{"error", {{"type", type}, {"message", message}}}};
    if (!code.empty()) j["error"]["code"] = code;
    std::cerr << j.dump() << "\n";
}

struct CommonFlags {
    std::string config_path;
    std::string output;
    std::optional<std::uint64_t> seed;
    bool quiet = false;

    RunConfig resolve() const {
        RunConfig cfg = load_config(config_path);
        if (!output.empty()) cfg.output = output;
        if (seed) cfg.seed = *seed;
        return cfg;
    }
};

BandSet bandset_for(const RunConfig& cfg, const GridSpec& grid) {
    return build_bandset(make_freq_grid(grid), cfg.radial, cfg.angular);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dipole-let multiscale QSM toolkit"};
    app.require_subcommand(1);
    app.fallthrough(true);

    CommonFlags common;
    app.add_option("--config", common.config_path, "Run configuration JSON");
    app.add_option("--output", common.output, "Output directory (overrides config)");
    app.add_option("--seed", common.seed, "Seed (overrides config)");
    app.add_flag("--quiet", common.quiet, "Suppress progress output");

    // phantom
    auto* cmd_phantom = app.add_subcommand("phantom", "Generate the phantom volumes");

    // forward
    auto* cmd_forward = app.add_subcommand("forward", "Apply the forward model to a volume");
    std::string fwd_chi33, fwd_chi13, fwd_chi23, fwd_out = "psi0.dlvol";
    std::string fwd_model = "dipole";
    cmd_forward->add_option("--chi33", fwd_chi33, "chi33 volume file")->required();
    cmd_forward->add_option("--chi13", fwd_chi13, "chi13 volume file");
    cmd_forward->add_option("--chi23", fwd_chi23, "chi23 volume file");
    cmd_forward->add_option("--model", fwd_model, "dipole or sti_z");
    cmd_forward->add_option("--out", fwd_out, "Output phase volume");

    // corrupt
    auto* cmd_corrupt = app.add_subcommand("corrupt", "Add offsets and phase noise");
    std::string cor_in, cor_out = "psi.dlvol";
    cmd_corrupt->add_option("--in", cor_in, "Input phase volume")->required();
    cmd_corrupt->add_option("--out", cor_out, "Output corrupted volume");

    // decompose
    auto* cmd_decompose = app.add_subcommand("decompose", "Band decomposition of a volume");
    std::string dec_in, dec_outdir = "bands";
    cmd_decompose->add_option("--in", dec_in, "Input volume")->required();
    cmd_decompose->add_option("--outdir", dec_outdir, "Output directory for band volumes");

    // weights
    auto* cmd_weights = app.add_subcommand("weights", "Near-cone energy weight for a phase volume");
    std::string wgt_in, wgt_out = "weight.dlvol", wgt_mask_out;
    cmd_weights->add_option("--in", wgt_in, "Input phase volume")->required();
    cmd_weights->add_option("--out", wgt_out, "Output weight volume");
    cmd_weights->add_option("--mask-out", wgt_mask_out, "Also write the binary reliability mask");

    // recon
    auto* cmd_recon = app.add_subcommand("recon", "Reconstruct susceptibility from phase");
    std::string rec_in, rec_weight, rec_out = "chi_est.dlvol", rec_report;
    std::string rec_method;
    cmd_recon->add_option("--in", rec_in, "Input phase volume")->required();
    cmd_recon->add_option("--weight", rec_weight, "Fidelity weight volume (default: uniform)");
    cmd_recon->add_option("--method", rec_method, "tkd, tv or bandreg (overrides config)");
    cmd_recon->add_option("--out", rec_out, "Output susceptibility volume");
    cmd_recon->add_option("--report", rec_report, "Write the solver report JSON here");

    // metrics
    auto* cmd_metrics = app.add_subcommand("metrics", "Evaluate a reconstruction");
    std::string met_est, met_truth, met_roi, met_out;
    cmd_metrics->add_option("--est", met_est, "Estimated volume")->required();
    cmd_metrics->add_option("--truth", met_truth, "Ground-truth volume")->required();
    cmd_metrics->add_option("--roi", met_roi, "Binary ROI volume")->required();
    cmd_metrics->add_option("--out", met_out, "Metric JSON path (default: stdout)");

    // pipeline
    auto* cmd_pipeline = app.add_subcommand("pipeline", "Run every stage end to end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        emit_error_json("usage", e.what());
        return app.exit(e);
    }

    try {
        const RunConfig cfg = common.resolve();

        if (cmd_phantom->parsed()) {
            const PhantomRecipe recipe = cfg.phantom ? *cfg.phantom : default_head_recipe(cfg.grid);
            const Phantom p = make_phantom(cfg.grid, recipe);
            std::filesystem::create_directories(cfg.output);
            const auto out = [&](const std::string& name) {
                return (std::filesystem::path(cfg.output) / name).string();
            };
            write_volume(p.chi33, out("chi33.dlvol"));
            if (p.chi13) write_volume(*p.chi13, out("chi13.dlvol"));
            if (p.chi23) write_volume(*p.chi23, out("chi23.dlvol"));
            write_volume(p.mask, out("roi.dlvol"));
            if (!common.quiet)
                std::cout << "phantom: wrote chi33/roi volumes to " << cfg.output << "\n";
        } else if (cmd_forward->parsed()) {
            Phantom p;
            p.chi33 = read_volume(fwd_chi33);
            if (!fwd_chi13.empty()) p.chi13 = read_volume(fwd_chi13);
            if (!fwd_chi23.empty()) p.chi23 = read_volume(fwd_chi23);
            p.mask = Volume(p.chi33.grid, 1.0);
            Volume psi0;
            if (fwd_model == "dipole")
                psi0 = forward_dipole(p.chi33);
            else if (fwd_model == "sti_z")
                psi0 = forward_sti_z(p);
            else
                throw ConfigError("forward: unknown model \"" + fwd_model + "\"");
            write_volume(psi0, fwd_out);
            if (!common.quiet) std::cout << "forward: wrote " << fwd_out << "\n";
        } else if (cmd_corrupt->parsed()) {
            const Volume psi0 = read_volume(cor_in);
            CorruptionSpec spec = cfg.corruption;
            spec.seed = cfg.seed;
            write_volume(corrupt(psi0, spec), cor_out);
            if (!common.quiet) std::cout << "corrupt: wrote " << cor_out << "\n";
        } else if (cmd_decompose->parsed()) {
            const Volume v = read_volume(dec_in);
            const BandSet bs = bandset_for(cfg, v.grid);
            const Decomposition d = analyze(v, bs);
            const auto rel = export_decomposition(d, dec_outdir);
            if (!common.quiet)
                std::cout << "decompose: wrote " << rel.size() << " files to " << dec_outdir
                          << " (pu_residual " << bs.pu_residual << ")\n";
        } else if (cmd_weights->parsed()) {
            const Volume psi = read_volume(wgt_in);
            const BandSet bs = bandset_for(cfg, psi.grid);
            const Decomposition d = analyze(psi, bs);
            WeightConfig wcfg;
            wcfg.selection = bs.near_cone_selection();
            wcfg.mode = cfg.weights.mode;
            wcfg.rescale = cfg.weights.rescale;
            wcfg.floor = cfg.weights.floor;
            wcfg.threshold = cfg.weights.threshold;
            const WeightResult res = make_weight(d, wcfg);
            for (const auto& warning : res.warnings) std::cerr << "warning: " << warning << "\n";
            write_volume(res.weight, wgt_out);
            if (!wgt_mask_out.empty()) {
                if (!cfg.weights.threshold)
                    throw ConfigError("weights: --mask-out requires a non-null weights.threshold");
                write_volume(make_mask(res.weight, *cfg.weights.threshold), wgt_mask_out);
            }
            if (!common.quiet) std::cout << "weights: wrote " << wgt_out << "\n";
        } else if (cmd_recon->parsed()) {
            const Volume psi = read_volume(rec_in);
            Volume w = rec_weight.empty() ? Volume(psi.grid, 1.0) : read_volume(rec_weight);
            ReconMethod method = cfg.method;
            if (!rec_method.empty()) {
                if (rec_method == "tkd")
                    method = ReconMethod::tkd;
                else if (rec_method == "tv")
                    method = ReconMethod::tv;
                else if (rec_method == "bandreg")
                    method = ReconMethod::bandreg;
                else
                    throw ConfigError("recon: unknown method \"" + rec_method + "\"");
            }
            Volume chi;
            SolverReport report;
            if (method == ReconMethod::tkd) {
                chi = tkd(psi, cfg.tkd);
            } else if (method == ReconMethod::tv) {
                std::tie(chi, report) = admm_weighted_tv(psi, w, cfg.tv);
            } else {
                const BandSet bs = bandset_for(cfg, psi.grid);
                BandRegConfig bcfg =
                    dyadic_bandreg_config(bs, cfg.bandreg.alpha0, cfg.bandreg.beta0);
                bcfg.step = cfg.bandreg.step;
                bcfg.max_iters = cfg.bandreg.max_iters;
                bcfg.tol = cfg.bandreg.tol;
                bcfg.fidelity = cfg.bandreg.fidelity;
                std::tie(chi, report) = band_regularized_descent(psi, w, bs, bcfg);
            }
            write_volume(chi, rec_out);
            if (!rec_report.empty()) {
                std::ofstream f(rec_report);
                if (!f) throw IoError(IoError::Code::open_failed, "cannot open: " + rec_report);
                f << solver_report_to_json(report).dump(2) << "\n";
            }
            if (!common.quiet) std::cout << "recon: wrote " << rec_out << "\n";
        } else if (cmd_metrics->parsed()) {
            const Volume est = read_volume(met_est);
            const Volume truth = read_volume(met_truth);
            const Volume roi = read_volume(met_roi);
            const BandSet bs = bandset_for(cfg, est.grid);
            const MetricReport r = evaluate_metrics(est, truth, roi, bs, cfg.xsim);
            const std::string text = metric_report_to_json(r).dump(2) + "\n";
            if (met_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream f(met_out);
                if (!f) throw IoError(IoError::Code::open_failed, "cannot open: " + met_out);
                f << text;
                if (!common.quiet) std::cout << "metrics: wrote " << met_out << "\n";
            }
        } else if (cmd_pipeline->parsed()) {
            run_pipeline(cfg, common.quiet ? nullptr : &std::cout);
        }
        return 0;
    } catch (const ConfigError& e) {
        emit_error_json("config", e.what());
        return 2;
    } catch (const IoError& e) {
        emit_error_json("io", e.what(), IoError::code_name(e.code()));
        return 3;
    } catch (const NumericError& e) {
        emit_error_json("numeric", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error_json("internal", e.what());
        return 1;
    }
}
