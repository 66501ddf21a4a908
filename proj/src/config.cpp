#include "xfphoton/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>

#include "xfphoton/errors.hpp"

namespace xfp {

using nlohmann::json;

double RunConfig::period() const { return 2.0 * std::numbers::pi / rabi_frequency; }

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
    require(j.is_object(), "section '" + section + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        require(allowed.count(k) > 0, "unknown key '" + section + "." + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad type for '" + section + "." + key + "'");
    }
}

void read_number(const json& j, const char* key, double& out, const std::string& section) {
    if (!j.contains(key)) return;
    require(j.at(key).is_number(), "'" + section + "." + key + "' must be a number");
    out = j.at(key).get<double>();
}

}  // namespace

void RunConfig::resolve() {
    try {
        model.validate();
        grid.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    require(rabi_frequency > 0.0, "model.rabi_frequency must be positive");
    require(quantum.dt > 0.0, "quantum.dt must be positive");
    if (quantum.t_final == 0.0) quantum.t_final = period();
    require(quantum.t_final > 0.0, "quantum.t_final must be positive");
    require(quantum.snapshot_stride > 0.0, "quantum.snapshot_stride must be positive");
    steps_per_stride(quantum.dt, quantum.snapshot_stride);
    require(quantum.edge_tolerance > 0.0 && quantum.norm_tolerance > 0.0,
            "quantum tolerances must be positive");
    require(inversion.mask_threshold > 0.0 && inversion.mask_threshold < 1.0,
            "inversion.mask_threshold must lie in (0, 1)");
    require(inversion.stencil_order == 2 || inversion.stencil_order == 4 ||
                inversion.stencil_order == 6,
            "inversion.stencil_order must be 2, 4 or 6");
    require(inversion.singular_window >= 0.0, "inversion.singular_window must be >= 0");
    require(ensemble.n >= 1, "ensemble.n must be at least 1");
    require(ensemble.dt > 0.0, "ensemble.dt must be positive");
    if (ensemble.t_final == 0.0) ensemble.t_final = quantum.t_final;
    require(ensemble.t_final > 0.0, "ensemble.t_final must be positive");
    require(ensemble.observable_stride > 0.0, "ensemble.observable_stride must be positive");
    {
        const double r = ensemble.observable_stride / ensemble.dt;
        require(std::abs(r - std::round(r)) <= 1e-9 * r && std::round(r) >= 1.0,
                "ensemble.observable_stride must be a multiple of ensemble.dt");
    }
    require(ensemble.workers >= 1, "ensemble.workers must be at least 1");
    require(ensemble.rk4_substeps >= 1, "ensemble.rk4_substeps must be at least 1");
    require(ensemble.force_cap >= 0.0, "ensemble.force_cap must be >= 0");
    require(ensemble.density == "histogram" || ensemble.density == "kde",
            "ensemble.density must be 'histogram' or 'kde'");
    require(ensemble.bandwidth >= 0.0, "ensemble.bandwidth must be >= 0");
    for (const auto& m : ensemble.methods) parse_method(m);
    for (const auto& c : qsurf_components)
        require(c == "wbo" || c == "qtdpes", "qsurf component must be 'wbo' or 'qtdpes'");
    require(!output.directory.empty(), "output.directory must not be empty");
    for (double t : output.dump_times) require(t >= 0.0, "output.dump_times must be >= 0");
    for (const auto* f : {&inputs.snapshots, &inputs.surfaces})
        if (!f->empty())
            require(std::filesystem::exists(*f), "input file '" + *f + "' does not exist");
}

PropagationOptions RunConfig::propagation() const {
    PropagationOptions o;
    o.dt = quantum.dt;
    o.t_final = quantum.t_final;
    o.snapshot_stride = quantum.snapshot_stride;
    o.edge_tolerance = quantum.edge_tolerance;
    o.norm_tolerance = quantum.norm_tolerance;
    return o;
}

DensityOptions RunConfig::density_options() const {
    DensityOptions o;
    o.estimator = ensemble.density == "kde" ? DensityEstimator::kde : DensityEstimator::histogram;
    o.bandwidth = ensemble.bandwidth;
    return o;
}

std::filesystem::path RunConfig::output_dir() const {
    std::filesystem::path p(output.directory);
    if (p.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv); root && *root)
            return std::filesystem::path(root) / p;
    }
    return p;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    check_keys(j, "config", {"model", "grid", "quantum", "inversion", "ensemble", "qsurf", "output",
                             "inputs"});
    if (j.contains("model")) {
        const auto& m = j["model"];
        check_keys(m, "model", {"eps_g", "eps_e", "omega_c", "g_coupling", "rabi_frequency"});
        read_number(m, "eps_g", c.model.eps_g, "model");
        read_number(m, "eps_e", c.model.eps_e, "model");
        read_number(m, "omega_c", c.model.omega_c, "model");
        read_number(m, "g_coupling", c.model.g_coupling, "model");
        read_number(m, "rabi_frequency", c.rabi_frequency, "model");
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        check_keys(g, "grid", {"q_min", "q_max", "n_points"});
        read_number(g, "q_min", c.grid.q_min, "grid");
        read_number(g, "q_max", c.grid.q_max, "grid");
        read(g, "n_points", c.grid.n_points, "grid");
    }
    if (j.contains("quantum")) {
        const auto& q = j["quantum"];
        check_keys(q, "quantum",
                   {"dt", "t_final", "snapshot_stride", "edge_tolerance", "norm_tolerance"});
        read_number(q, "dt", c.quantum.dt, "quantum");
        read_number(q, "t_final", c.quantum.t_final, "quantum");
        read_number(q, "snapshot_stride", c.quantum.snapshot_stride, "quantum");
        read_number(q, "edge_tolerance", c.quantum.edge_tolerance, "quantum");
        read_number(q, "norm_tolerance", c.quantum.norm_tolerance, "quantum");
    }
    if (j.contains("inversion")) {
        const auto& v = j["inversion"];
        check_keys(v, "inversion", {"mask_threshold", "stencil_order", "singular_window"});
        read_number(v, "mask_threshold", c.inversion.mask_threshold, "inversion");
        read(v, "stencil_order", c.inversion.stencil_order, "inversion");
        read_number(v, "singular_window", c.inversion.singular_window, "inversion");
    }
    if (j.contains("ensemble")) {
        const auto& e = j["ensemble"];
        check_keys(e, "ensemble",
                   {"n", "seed", "dt", "methods", "t_final", "observable_stride", "workers",
                    "rk4_substeps", "force_cap", "density", "bandwidth"});
        read(e, "n", c.ensemble.n, "ensemble");
        read(e, "seed", c.ensemble.seed, "ensemble");
        read_number(e, "dt", c.ensemble.dt, "ensemble");
        read(e, "methods", c.ensemble.methods, "ensemble");
        read_number(e, "t_final", c.ensemble.t_final, "ensemble");
        read_number(e, "observable_stride", c.ensemble.observable_stride, "ensemble");
        read(e, "workers", c.ensemble.workers, "ensemble");
        read(e, "rk4_substeps", c.ensemble.rk4_substeps, "ensemble");
        read_number(e, "force_cap", c.ensemble.force_cap, "ensemble");
        read(e, "density", c.ensemble.density, "ensemble");
        read_number(e, "bandwidth", c.ensemble.bandwidth, "ensemble");
    }
    if (j.contains("qsurf")) {
        const auto& s = j["qsurf"];
        check_keys(s, "qsurf", {"components"});
        read(s, "components", c.qsurf_components, "qsurf");
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        check_keys(o, "output", {"directory", "emit_plot_data", "dump_times"});
        read(o, "directory", c.output.directory, "output");
        read(o, "emit_plot_data", c.output.emit_plot_data, "output");
        read(o, "dump_times", c.output.dump_times, "output");
    }
    if (j.contains("inputs")) {
        const auto& i = j["inputs"];
        check_keys(i, "inputs", {"snapshots", "surfaces"});
        read(i, "snapshots", c.inputs.snapshots, "inputs");
        read(i, "surfaces", c.inputs.surfaces, "inputs");
    }
    c.resolve();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in '" + path.string() + "': " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const RunConfig& c) {
    json j;
    j["model"] = {{"eps_g", c.model.eps_g},
                  {"eps_e", c.model.eps_e},
                  {"omega_c", c.model.omega_c},
                  {"g_coupling", c.model.g_coupling},
                  {"rabi_frequency", c.rabi_frequency}};
    j["grid"] = {{"q_min", c.grid.q_min}, {"q_max", c.grid.q_max}, {"n_points", c.grid.n_points}};
    j["quantum"] = {{"dt", c.quantum.dt},
                    {"t_final", c.quantum.t_final},
                    {"snapshot_stride", c.quantum.snapshot_stride},
                    {"edge_tolerance", c.quantum.edge_tolerance},
                    {"norm_tolerance", c.quantum.norm_tolerance}};
    j["inversion"] = {{"mask_threshold", c.inversion.mask_threshold},
                      {"stencil_order", c.inversion.stencil_order},
                      {"singular_window", c.inversion.singular_window}};
    j["ensemble"] = {{"n", c.ensemble.n},
                     {"seed", c.ensemble.seed},
                     {"dt", c.ensemble.dt},
                     {"methods", c.ensemble.methods},
                     {"t_final", c.ensemble.t_final},
                     {"observable_stride", c.ensemble.observable_stride},
                     {"workers", c.ensemble.workers},
                     {"rk4_substeps", c.ensemble.rk4_substeps},
                     {"force_cap", c.ensemble.force_cap},
                     {"density", c.ensemble.density},
                     {"bandwidth", c.ensemble.bandwidth}};
    j["qsurf"] = {{"components", c.qsurf_components}};
    j["output"] = {{"directory", c.output.directory},
                   {"emit_plot_data", c.output.emit_plot_data},
                   {"dump_times", c.output.dump_times}};
    j["inputs"] = {{"snapshots", c.inputs.snapshots}, {"surfaces", c.inputs.surfaces}};
    return j;
}

RunConfig paper_defaults() {
    RunConfig c;
    c.resolve();
    return c;
}

}  // namespace xfp
