#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipolelets/bands.hpp"
#include "dipolelets/metrics.hpp"
#include "dipolelets/simulate.hpp"
#include "dipolelets/solvers.hpp"
#include "dipolelets/weights.hpp"

namespace dipolelets {

enum class ForwardModel { dipole, sti_z };
enum class ReconMethod { tkd, tv, bandreg };

/// Scalar form of the band-regularized solver settings: the per-band maps are
/// derived from (alpha0, beta0) by the dyadic schedule at run time.
struct BandRegRunConfig {
    double alpha0 = 1e-3;
    double beta0 = 0.05;
    double step = 1.0;
    int max_iters = 60;
    double tol = 1e-6;
    BandRegFidelity fidelity = BandRegFidelity::nonlinear_exp;
};

/// Weight settings without the band selection, which is always the near-cone
/// set of the run's own BandSet.
struct WeightRunConfig {
    EnergyMode mode = EnergyMode::sum_of_squares;
    WeightRescale rescale = WeightRescale::linear_complement;
    double floor = 0.1;
    std::optional<double> threshold = 0.5;
};

struct RunConfig {
    GridSpec grid{{48, 48, 48}, {1.0, 1.0, 1.0}};
    std::optional<PhantomRecipe> phantom; // nullopt: default head recipe
    ForwardModel forward = ForwardModel::dipole;
    CorruptionSpec corruption;
    RadialConfig radial;
    AngularConfig angular = AngularConfig::defaults();
    WeightRunConfig weights;
    ReconMethod method = ReconMethod::tv;
    TkdConfig tkd;
    TvConfig tv;
    BandRegRunConfig bandreg;
    XsimParams xsim;
    std::string output = "out";
    std::uint64_t seed = 0;

    static RunConfig defaults();
    void validate() const;
};

/// Three ball-shaped phase offsets inside the default head ROI, scaled to the
/// grid. The default corruption model pairs these with SNR-100 noise.
inline std::vector<OffsetSpec> default_offsets(const GridSpec& g) {
    const auto at = [&](double fx, double fy, double fz) {
        return std::array<std::int64_t, 3>{
            static_cast<std::int64_t>(std::llround(fx * static_cast<double>(g.nx() - 1))),
            static_cast<std::int64_t>(std::llround(fy * static_cast<double>(g.ny() - 1))),
            static_cast<std::int64_t>(std::llround(fz * static_cast<double>(g.nz() - 1)))};
    };
    std::vector<OffsetSpec> offsets(3);
    offsets[0] = {at(0.38, 0.46, 0.52), 2.0, M_PI};
    offsets[1] = {at(0.60, 0.56, 0.44), 2.0, -M_PI};
    offsets[2] = {at(0.50, 0.36, 0.60), 2.0, M_PI};
    return offsets;
}

inline RunConfig RunConfig::defaults() {
    RunConfig cfg;
    cfg.corruption.noise_snr = 100.0;
    cfg.corruption.offsets = default_offsets(cfg.grid);
    return cfg;
}

inline void RunConfig::validate() const {
    grid.validate();
    corruption.validate();
    radial.validate();
    angular.validate();
    if (!(weights.floor >= 0.0 && weights.floor < 1.0))
        throw ConfigError("weights.floor must lie in [0, 1)");
    if (weights.threshold && !(*weights.threshold > 0.0 && *weights.threshold < 1.0))
        throw ConfigError("weights.threshold must lie strictly inside (0, 1)");
    tkd.validate();
    tv.validate();
    if (!(bandreg.alpha0 >= 0.0)) throw ConfigError("solver.bandreg.alpha0 must be >= 0");
    if (!(bandreg.beta0 >= 0.0)) throw ConfigError("solver.bandreg.beta0 must be >= 0 or infinite");
    if (!(bandreg.step > 0.0)) throw ConfigError("solver.bandreg.step must be > 0");
    if (bandreg.max_iters < 1) throw ConfigError("solver.bandreg.max_iters must be >= 1");
    if (!(bandreg.tol > 0.0)) throw ConfigError("solver.bandreg.tol must be > 0");
    xsim.validate();
    if (output.empty()) throw ConfigError("output directory must be nonempty");
}

// ---------------------------------------------------------------------------
// Strict JSON (de)serialization

namespace cfgdetail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

template <typename T>
T require_as(const json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + " has the wrong type (" + j.dump() + ")");
    }
}

template <typename T>
void read_if(const json& j, const char* key, const std::string& where, T& target) {
    if (j.contains(key)) target = require_as<T>(j.at(key), where + "." + key);
}

template <typename T, size_t N>
void read_array_if(const json& j, const char* key, const std::string& where,
                   std::array<T, N>& target) {
    if (!j.contains(key)) return;
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != N)
        throw ConfigError(where + "." + key + " must be an array of " + std::to_string(N));
    for (size_t i = 0; i < N; ++i)
        target[i] = require_as<T>(a[i], where + "." + key + "[" + std::to_string(i) + "]");
}

template <typename Enum>
Enum parse_enum(const json& j, const std::string& where,
                std::initializer_list<std::pair<const char*, Enum>> table) {
    const std::string s = require_as<std::string>(j, where);
    for (const auto& [name, value] : table)
        if (s == name) return value;
    std::string allowed;
    for (const auto& [name, value] : table) allowed += std::string(allowed.empty() ? "" : ", ") + name;
    throw ConfigError(where + ": unknown value \"" + s + "\" (expected one of: " + allowed + ")");
}

template <typename Enum>
const char* enum_name(Enum e, std::initializer_list<std::pair<const char*, Enum>> table) {
    for (const auto& [name, value] : table)
        if (value == e) return name;
    return "?";
}

inline ShapeSpec parse_shape(const json& j, const std::string& where) {
    ShapeSpec s;
    if (!j.contains("kind")) throw ConfigError(where + " is missing \"kind\"");
    s.kind = parse_enum<ShapeKind>(j.at("kind"), where + ".kind",
                                   {{"sphere", ShapeKind::sphere},
                                    {"ellipsoid", ShapeKind::ellipsoid},
                                    {"cylinder", ShapeKind::cylinder},
                                    {"slab", ShapeKind::slab}});
    switch (s.kind) {
        case ShapeKind::sphere:
            check_keys(j, where, {"kind", "center", "radius", "value"});
            break;
        case ShapeKind::ellipsoid:
        case ShapeKind::slab:
            check_keys(j, where, {"kind", "center", "half_size", "value"});
            break;
        case ShapeKind::cylinder:
            check_keys(j, where, {"kind", "center", "axis", "radius", "half_length", "value"});
            break;
    }
    read_array_if(j, "center", where, s.center);
    read_if(j, "radius", where, s.radius);
    read_array_if(j, "half_size", where, s.half_size);
    read_if(j, "axis", where, s.axis);
    read_if(j, "half_length", where, s.half_length);
    read_if(j, "value", where, s.value);
    if (s.axis < 0 || s.axis > 2) throw ConfigError(where + ".axis must be 0, 1 or 2");
    return s;
}

inline json shape_to_json(const ShapeSpec& s) {
    json j;
    switch (s.kind) {
        case ShapeKind::sphere:
            j = {{"kind", "sphere"}, {"radius", s.radius}};
            break;
        case ShapeKind::ellipsoid:
            j = {{"kind", "ellipsoid"}, {"half_size", s.half_size}};
            break;
        case ShapeKind::cylinder:
            j = {{"kind", "cylinder"}, {"axis", s.axis}, {"radius", s.radius},
                 {"half_length", s.half_length}};
            break;
        case ShapeKind::slab:
            j = {{"kind", "slab"}, {"half_size", s.half_size}};
            break;
    }
    j["center"] = s.center;
    j["value"] = s.value;
    return j;
}

inline std::vector<ShapeSpec> parse_shapes(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of shapes");
    std::vector<ShapeSpec> out;
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_shape(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace cfgdetail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using namespace cfgdetail;
    RunConfig cfg = RunConfig::defaults();
    check_keys(j, "config",
               {"grid", "phantom", "forward", "corruption", "bands", "weights", "solver",
                "metrics", "output", "seed"});

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid", {"shape", "voxel_size"});
        read_array_if(g, "shape", "grid", cfg.grid.shape);
        read_array_if(g, "voxel_size", "grid", cfg.grid.voxel_size);
        // The default corruption offsets track the grid unless overridden below.
        cfg.corruption.offsets = default_offsets(cfg.grid);
    }

    if (j.contains("phantom")) {
        const json& p = j.at("phantom");
        if (p.contains("recipe")) {
            check_keys(p, "phantom", {"recipe"});
            const std::string r = require_as<std::string>(p.at("recipe"), "phantom.recipe");
            if (r != "default_head")
                throw ConfigError("phantom.recipe: unknown recipe \"" + r + "\"");
            cfg.phantom.reset();
        } else {
            check_keys(p, "phantom", {"description", "chi33", "chi13", "chi23", "roi"});
            PhantomRecipe recipe;
            read_if(p, "description", "phantom", recipe.description);
            if (p.contains("chi33")) recipe.chi33 = parse_shapes(p.at("chi33"), "phantom.chi33");
            if (p.contains("chi13")) recipe.chi13 = parse_shapes(p.at("chi13"), "phantom.chi13");
            if (p.contains("chi23")) recipe.chi23 = parse_shapes(p.at("chi23"), "phantom.chi23");
            if (p.contains("roi")) recipe.roi = parse_shapes(p.at("roi"), "phantom.roi");
            cfg.phantom = std::move(recipe);
        }
    }

    if (j.contains("forward")) {
        const json& f = j.at("forward");
        check_keys(f, "forward", {"model"});
        if (f.contains("model"))
            cfg.forward = parse_enum<ForwardModel>(
                f.at("model"), "forward.model",
                {{"dipole", ForwardModel::dipole}, {"sti_z", ForwardModel::sti_z}});
    }

    if (j.contains("corruption")) {
        const json& c = j.at("corruption");
        check_keys(c, "corruption", {"noise_snr", "offsets"});
        if (c.contains("noise_snr")) {
            if (c.at("noise_snr").is_null())
                cfg.corruption.noise_snr.reset();
            else
                cfg.corruption.noise_snr =
                    require_as<double>(c.at("noise_snr"), "corruption.noise_snr");
        }
        if (c.contains("offsets")) {
            const json& arr = c.at("offsets");
            if (!arr.is_array()) throw ConfigError("corruption.offsets must be an array");
            cfg.corruption.offsets.clear();
            for (size_t i = 0; i < arr.size(); ++i) {
                const std::string where = "corruption.offsets[" + std::to_string(i) + "]";
                check_keys(arr[i], where, {"center", "radius", "value"});
                OffsetSpec o;
                read_array_if(arr[i], "center", where, o.center);
                read_if(arr[i], "radius", where, o.radius);
                read_if(arr[i], "value", where, o.value);
                cfg.corruption.offsets.push_back(o);
            }
        }
    }

    if (j.contains("bands")) {
        const json& b = j.at("bands");
        check_keys(b, "bands", {"levels", "profile", "base_cutoff", "angular"});
        read_if(b, "levels", "bands", cfg.radial.levels);
        if (b.contains("profile"))
            cfg.radial.profile = parse_enum<RadialProfile>(
                b.at("profile"), "bands.profile",
                {{"raised_cosine", RadialProfile::raised_cosine},
                 {"gaussian", RadialProfile::gaussian}});
        read_if(b, "base_cutoff", "bands", cfg.radial.base_cutoff);
        if (b.contains("angular")) {
            const json& a = b.at("angular");
            check_keys(a, "bands.angular", {"deltas", "epsilons", "eta"});
            if (a.contains("deltas"))
                cfg.angular.deltas = require_as<std::vector<double>>(a.at("deltas"),
                                                                     "bands.angular.deltas");
            if (a.contains("epsilons"))
                cfg.angular.epsilons = require_as<std::vector<double>>(a.at("epsilons"),
                                                                       "bands.angular.epsilons");
            if (a.contains("eta"))
                cfg.angular.eta = parse_enum<EtaKind>(
                    a.at("eta"), "bands.angular.eta",
                    {{"smoothstep", EtaKind::smoothstep}, {"erf", EtaKind::erf}});
        }
    }

    if (j.contains("weights")) {
        const json& w = j.at("weights");
        check_keys(w, "weights", {"selection", "mode", "rescale", "floor", "threshold"});
        if (w.contains("selection")) {
            const std::string s = require_as<std::string>(w.at("selection"), "weights.selection");
            if (s != "near_cone")
                throw ConfigError("weights.selection: only \"near_cone\" is supported");
        }
        if (w.contains("mode"))
            cfg.weights.mode = parse_enum<EnergyMode>(
                w.at("mode"), "weights.mode",
                {{"signed_sum", EnergyMode::signed_sum},
                 {"sum_of_squares", EnergyMode::sum_of_squares}});
        if (w.contains("rescale"))
            cfg.weights.rescale = parse_enum<WeightRescale>(
                w.at("rescale"), "weights.rescale",
                {{"reciprocal", WeightRescale::reciprocal},
                 {"linear_complement", WeightRescale::linear_complement}});
        read_if(w, "floor", "weights", cfg.weights.floor);
        if (w.contains("threshold")) {
            if (w.at("threshold").is_null())
                cfg.weights.threshold.reset();
            else
                cfg.weights.threshold = require_as<double>(w.at("threshold"), "weights.threshold");
        }
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, "solver", {"method", "tkd", "tv", "bandreg"});
        if (s.contains("method"))
            cfg.method = parse_enum<ReconMethod>(s.at("method"), "solver.method",
                                                 {{"tkd", ReconMethod::tkd},
                                                  {"tv", ReconMethod::tv},
                                                  {"bandreg", ReconMethod::bandreg}});
        if (s.contains("tkd")) {
            check_keys(s.at("tkd"), "solver.tkd", {"h"});
            read_if(s.at("tkd"), "h", "solver.tkd", cfg.tkd.h);
        }
        if (s.contains("tv")) {
            const json& t = s.at("tv");
            check_keys(t, "solver.tv",
                       {"lambda", "rho", "max_iters", "tol", "isotropic", "cg_tol", "cg_max_iters"});
            read_if(t, "lambda", "solver.tv", cfg.tv.lambda);
            read_if(t, "rho", "solver.tv", cfg.tv.rho);
            read_if(t, "max_iters", "solver.tv", cfg.tv.max_iters);
            read_if(t, "tol", "solver.tv", cfg.tv.tol);
            read_if(t, "isotropic", "solver.tv", cfg.tv.isotropic);
            read_if(t, "cg_tol", "solver.tv", cfg.tv.cg_tol);
            read_if(t, "cg_max_iters", "solver.tv", cfg.tv.cg_max_iters);
        }
        if (s.contains("bandreg")) {
            const json& b = s.at("bandreg");
            check_keys(b, "solver.bandreg",
                       {"alpha0", "beta0", "step", "max_iters", "tol", "fidelity"});
            read_if(b, "alpha0", "solver.bandreg", cfg.bandreg.alpha0);
            read_if(b, "beta0", "solver.bandreg", cfg.bandreg.beta0);
            read_if(b, "step", "solver.bandreg", cfg.bandreg.step);
            read_if(b, "max_iters", "solver.bandreg", cfg.bandreg.max_iters);
            read_if(b, "tol", "solver.bandreg", cfg.bandreg.tol);
            if (b.contains("fidelity"))
                cfg.bandreg.fidelity = parse_enum<BandRegFidelity>(
                    b.at("fidelity"), "solver.bandreg.fidelity",
                    {{"nonlinear_exp", BandRegFidelity::nonlinear_exp},
                     {"linear", BandRegFidelity::linear}});
        }
    }

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        check_keys(m, "metrics", {"xsim"});
        if (m.contains("xsim")) {
            const json& x = m.at("xsim");
            check_keys(x, "metrics.xsim", {"k1", "k2", "data_range", "sigma", "radius"});
            read_if(x, "k1", "metrics.xsim", cfg.xsim.k1);
            read_if(x, "k2", "metrics.xsim", cfg.xsim.k2);
            read_if(x, "data_range", "metrics.xsim", cfg.xsim.data_range);
            read_if(x, "sigma", "metrics.xsim", cfg.xsim.sigma);
            read_if(x, "radius", "metrics.xsim", cfg.xsim.radius);
        }
    }

    if (j.contains("output")) cfg.output = require_as<std::string>(j.at("output"), "output");
    if (j.contains("seed")) cfg.seed = require_as<std::uint64_t>(j.at("seed"), "seed");

    cfg.validate();
    return cfg;
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
    using namespace cfgdetail;
    nlohmann::json j;
    j["grid"] = {{"shape", cfg.grid.shape}, {"voxel_size", cfg.grid.voxel_size}};
    if (cfg.phantom) {
        nlohmann::json p;
        p["description"] = cfg.phantom->description;
        nlohmann::json chi33 = nlohmann::json::array(), chi13 = nlohmann::json::array(),
                       chi23 = nlohmann::json::array(), roi = nlohmann::json::array();
        for (const auto& s : cfg.phantom->chi33) chi33.push_back(shape_to_json(s));
        for (const auto& s : cfg.phantom->chi13) chi13.push_back(shape_to_json(s));
        for (const auto& s : cfg.phantom->chi23) chi23.push_back(shape_to_json(s));
        for (const auto& s : cfg.phantom->roi) roi.push_back(shape_to_json(s));
        p["chi33"] = chi33;
        if (!chi13.empty()) p["chi13"] = chi13;
        if (!chi23.empty()) p["chi23"] = chi23;
        p["roi"] = roi;
        j["phantom"] = p;
    } else {
        j["phantom"] = {{"recipe", "default_head"}};
    }
    j["forward"] = {{"model", cfg.forward == ForwardModel::dipole ? "dipole" : "sti_z"}};
    {
        nlohmann::json offs = nlohmann::json::array();
        for (const auto& o : cfg.corruption.offsets)
            offs.push_back({{"center", o.center}, {"radius", o.radius}, {"value", o.value}});
        j["corruption"] = {{"noise_snr", cfg.corruption.noise_snr
                                             ? nlohmann::json(*cfg.corruption.noise_snr)
                                             : nlohmann::json(nullptr)},
                           {"offsets", offs}};
    }
    j["bands"] = {
        {"levels", cfg.radial.levels},
        {"profile", cfg.radial.profile == RadialProfile::raised_cosine ? "raised_cosine" : "gaussian"},
        {"base_cutoff", cfg.radial.base_cutoff},
        {"angular",
         {{"deltas", cfg.angular.deltas},
          {"epsilons", cfg.angular.epsilons},
          {"eta", cfg.angular.eta == EtaKind::smoothstep ? "smoothstep" : "erf"}}}};
    j["weights"] = {
        {"selection", "near_cone"},
        {"mode", cfg.weights.mode == EnergyMode::sum_of_squares ? "sum_of_squares" : "signed_sum"},
        {"rescale", cfg.weights.rescale == WeightRescale::linear_complement ? "linear_complement"
                                                                            : "reciprocal"},
        {"floor", cfg.weights.floor},
        {"threshold",
         cfg.weights.threshold ? nlohmann::json(*cfg.weights.threshold) : nlohmann::json(nullptr)}};
    const char* method = cfg.method == ReconMethod::tkd ? "tkd"
                         : cfg.method == ReconMethod::tv ? "tv"
                                                         : "bandreg";
    j["solver"] = {
        {"method", method},
        {"tkd", {{"h", cfg.tkd.h}}},
        {"tv",
         {{"lambda", cfg.tv.lambda},
          {"rho", cfg.tv.rho},
          {"max_iters", cfg.tv.max_iters},
          {"tol", cfg.tv.tol},
          {"isotropic", cfg.tv.isotropic},
          {"cg_tol", cfg.tv.cg_tol},
          {"cg_max_iters", cfg.tv.cg_max_iters}}},
        {"bandreg",
         {{"alpha0", cfg.bandreg.alpha0},
          {"beta0", cfg.bandreg.beta0},
          {"step", cfg.bandreg.step},
          {"max_iters", cfg.bandreg.max_iters},
          {"tol", cfg.bandreg.tol},
          {"fidelity",
           cfg.bandreg.fidelity == BandRegFidelity::nonlinear_exp ? "nonlinear_exp" : "linear"}}}};
    j["metrics"] = {{"xsim",
                     {{"k1", cfg.xsim.k1},
                      {"k2", cfg.xsim.k2},
                      {"data_range", cfg.xsim.data_range},
                      {"sigma", cfg.xsim.sigma},
                      {"radius", cfg.xsim.radius}}}};
    j["output"] = cfg.output;
    j["seed"] = cfg.seed;
    return j;
}

/// FNV-1a over the canonical (key-sorted, compact) JSON dump.
inline std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string s = run_config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace dipolelets
