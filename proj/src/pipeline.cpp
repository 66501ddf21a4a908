#include "xfphoton/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "xfphoton/errors.hpp"
#include "xfphoton/factorization.hpp"
#include "xfphoton/io.hpp"
#include "xfphoton/observables.hpp"
#include "xfphoton/quantum.hpp"

namespace xfp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string method_tag(Method m) {
    switch (m) {
        case Method::mte_diabatic: return "mte-diabatic";
        case Method::mte_qbo: return "mte-qbo";
        case Method::wbo: return "wbo-qc";
        case Method::qtdpes: return "qtdpes-qc";
    }
    return "unknown";
}

namespace {

const std::vector<std::string> kOverlayOrder{"exact",   "mte-diabatic", "mte-qbo",
                                             "wbo-qc",  "wbo-quantum",  "qtdpes-qc",
                                             "qtdpes-quantum"};

std::string time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t=%g", t);
    return buf;
}

fs::path prepare_output(const RunConfig& config) {
    const fs::path dir = config.output_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
    write_json(dir / files::effective_config, config_to_json(config));
    return dir;
}

std::string config_hash(const RunConfig& config) {
    return sha256_hex(config_to_json(config).dump());
}

void write_manifest(const fs::path& dir, const std::string& command, const json& inputs,
                    CommandResult& result) {
    json j;
    j["command"] = command;
    j["inputs"] = inputs;
    json outs = json::object();
    for (const auto& p : result.outputs) outs[p.filename().string()] = sha256_file(p);
    j["outputs"] = outs;
    j["summary"] = result.summary;
    j["warnings"] = result.warnings;
    const fs::path path = dir / ("manifest_" + command + ".json");
    write_json(path, j);
    result.outputs.push_back(path);
}

// Index of the dump time matching t within half a stride, or -1.
int dump_slot(const std::vector<double>& dump_times, double t, double stride) {
    for (std::size_t i = 0; i < dump_times.size(); ++i)
        if (std::abs(dump_times[i] - t) < 0.5 * stride) return static_cast<int>(i);
    return -1;
}

struct DensityColumns {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    void add(double t, std::vector<double> values) {
        names.push_back(time_label(t));
        columns.push_back(std::move(values));
    }
};

std::size_t stride_skip(double every, double stride) {
    const auto skip = static_cast<std::size_t>(std::llround(every / stride));
    if (skip == 0 || std::abs(static_cast<double>(skip) * stride - every) > 1e-9 * every) return 1;
    return skip;
}

std::map<std::string, std::vector<double>> read_density_columns(const fs::path& path) {
    std::map<std::string, std::vector<double>> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (names.empty()) {
            names = cells;
            continue;
        }
        for (std::size_t c = 1; c < cells.size() && c < names.size(); ++c)
            out[names[c]].push_back(std::stod(cells[c]));
    }
    return out;
}

}  // namespace

CommandResult cmd_exact(const RunConfig& config) {
    const fs::path dir = prepare_output(config);
    const std::string in_hash = config_hash(config);
    const auto series = propagate_exact(config.model, config.grid, config.propagation());

    CommandResult result;
    const fs::path snap = dir / files::snapshots;
    write_snapshots(snap, series, in_hash);
    result.outputs.push_back(snap);

    const std::size_t skip = stride_skip(config.ensemble.observable_stride, series.stride);
    const auto obs = exact_series(series, skip * series.stride);
    const fs::path csv = dir / "series_exact.csv";
    write_series_csv(csv, obs, in_hash);
    result.outputs.push_back(csv);

    DensityColumns dens;
    Spectral spectral(series.grid);
    double e0 = 0.0, drift = 0.0;
    for (std::size_t k = 0; k < series.frames.size(); ++k) {
        const auto& f = series.frames[k];
        const auto m = wavefunction_observables(f, config.model, spectral);
        if (k == 0) e0 = m.energy;
        drift = std::max(drift, std::abs(m.energy - e0));
        if (dump_slot(config.output.dump_times, f.t, series.stride) >= 0) dens.add(f.t, f.density());
    }
    const fs::path dpath = dir / "densities_exact.csv";
    write_density_table(dpath, series.grid, -1.0, dens.names, dens.columns, in_hash);
    result.outputs.push_back(dpath);

    const double T = config.period();
    result.summary = {{"frames", series.frames.size()},
                      {"t_final", series.frames.back().t},
                      {"N_half_period", obs.at("N", 0.5 * T)},
                      {"N_final", obs.n_photon.back()},
                      {"norm_final", series.frames.back().norm()},
                      {"energy_drift", drift}};
    write_manifest(dir, "exact", {{"config", in_hash}}, result);
    return result;
}

CommandResult cmd_invert(const RunConfig& config, const fs::path& snapshots) {
    const fs::path dir = prepare_output(config);
    const std::string in_hash = sha256_file(snapshots);
    const auto series = read_snapshots(snapshots);
    const auto set = invert_series(series, config.inversion);

    CommandResult result;
    const fs::path surf = dir / files::surfaces;
    write_surfaces(surf, set, in_hash);
    result.outputs.push_back(surf);

    json frames = json::array();
    double max_masked = 0.0, max_imag = 0.0;
    std::size_t untrusted = 0;
    for (const auto& r : set.reports) {
        frames.push_back({{"t", r.t},
                          {"masked_fraction", r.masked_fraction},
                          {"gd_max_imag", r.gd_max_imag},
                          {"trusted", r.trusted},
                          {"issue", r.issue}});
        max_masked = std::max(max_masked, r.masked_fraction);
        if (r.trusted) max_imag = std::max(max_imag, r.gd_max_imag);
        if (!r.trusted) ++untrusted;
    }
    const fs::path rep = dir / "inversion_report.json";
    write_json(rep, {{"input_sha256", in_hash}, {"frames", frames}});
    result.outputs.push_back(rep);
    result.summary = {{"frames", set.times.size()},
                      {"max_masked_fraction", max_masked},
                      {"max_gd_imag_trusted", max_imag},
                      {"untrusted_frames", untrusted}};
    write_manifest(dir, "invert", {{"snapshots", in_hash}}, result);
    return result;
}

CommandResult cmd_traj(const RunConfig& config, Method method,
                       const std::optional<fs::path>& surfaces) {
    const fs::path dir = prepare_output(config);
    std::string in_hash = config_hash(config);
    json inputs = {{"config", in_hash}};

    std::optional<SurfaceSet> set;
    std::unique_ptr<SurfaceField> field;
    std::unique_ptr<ForceProvider> forces;
    const auto& ec = config.ensemble;
    if (is_surface_method(method)) {
        if (!surfaces) throw ConfigError("method " + method_name(method) + " needs a surface file");
        if (!fs::exists(*surfaces))
            throw ConfigError("surface file '" + surfaces->string() + "' does not exist");
        const std::string s_hash = sha256_file(*surfaces);
        inputs["surfaces"] = s_hash;
        in_hash = sha256_hex(in_hash + s_hash);
        set = read_surfaces(*surfaces);
        if (!(set->grid == config.grid)) throw ConfigError("surface grid differs from config grid");
        const auto& movie = method == Method::wbo ? set->wbo : set->qtdpes;
        field = std::make_unique<SurfaceField>(movie, config.model.omega_c, ec.force_cap);
        forces = std::make_unique<SurfaceForces>(*field);
    } else if (method == Method::mte_diabatic) {
        forces = std::make_unique<MteDiabaticForces>(config.model, ec.rk4_substeps);
    } else {
        forces = std::make_unique<MteQboForces>(config.model, ec.rk4_substeps);
    }

    Ensemble ens = wigner_sample(config.model, ec.n, ec.seed,
                                 method == Method::mte_qbo ? Basis::qbo : Basis::diabatic);
    ens.dt = ec.dt;
    ens.method = method;

    const std::string tag = method_tag(method);
    ObservableSeries series;
    series.method = tag;
    series.omega_c = config.model.omega_c;
    DensityColumns dens;
    const fs::path phase_path = dir / ("phase_space_" + tag + ".csv");
    bool phase_started = false;
    const auto dens_opts = config.density_options();
    const double dq = config.grid.dq();

    EnsembleRunOptions run;
    run.t_final = ec.t_final;
    run.snapshot_stride = ec.observable_stride;
    run.workers = ec.workers;
    run.q_limit = std::max(std::abs(config.grid.q_min), std::abs(config.grid.q_max));

    propagate_ensemble(ens, *forces, run, [&](double t, const Ensemble& e) {
        const auto m = ensemble_moments(e);
        double kin = 0.0;
        const bool dump = dump_slot(config.output.dump_times, t, ec.observable_stride) >= 0;
        if (set || dump) {
            DensityOptions hist;
            hist.min_trajectories = dens_opts.min_trajectories;
            if (set) {
                const auto rho = ensemble_density(e, config.grid, hist);
                kin = kinetic_correction(rho.values, movie_at(set->kin, t), dq);
            }
            if (dump) {
                dens.add(t, ensemble_density(e, config.grid, dens_opts).values);
                write_phase_space_csv(phase_path, t, e, phase_started);
                phase_started = true;
            }
        }
        series.append(t, m.q2, m.p2, kin, static_cast<double>(m.used) / static_cast<double>(e.size()),
                      m.excluded);
    });

    CommandResult result;
    const fs::path csv = dir / ("series_" + tag + ".csv");
    write_series_csv(csv, series, in_hash);
    result.outputs.push_back(csv);
    if (phase_started) result.outputs.push_back(phase_path);
    const fs::path dpath = dir / ("densities_" + tag + ".csv");
    write_density_table(dpath, config.grid, -1.0, dens.names, dens.columns, in_hash);
    result.outputs.push_back(dpath);

    double worst_drift = 0.0;
    for (const auto& t : ens.trajectories) worst_drift = std::max(worst_drift, t.max_step_drift);
    if (!is_surface_method(method) && worst_drift > 1e-6) {
        std::ostringstream os;
        os << "coefficient norm drift per step up to " << worst_drift << " exceeds 1e-6";
        result.warnings.push_back(os.str());
    }
    const std::size_t diverged = ens.diverged_count();
    if (diverged > 0)
        result.warnings.push_back(std::to_string(diverged) + " trajectories diverged and were excluded");
    result.summary = {{"method", tag},
                      {"n", ec.n},
                      {"seed", ec.seed},
                      {"dt", ec.dt},
                      {"diverged", diverged},
                      {"max_step_norm_drift", worst_drift},
                      {"N_final", series.n_photon.back()}};
    write_manifest(dir, "traj_" + tag, inputs, result);
    return result;
}

CommandResult cmd_qsurf(const RunConfig& config, const fs::path& surfaces,
                        const std::string& component) {
    if (component != "wbo" && component != "qtdpes")
        throw ConfigError("qsurf component must be 'wbo' or 'qtdpes'");
    if (!fs::exists(surfaces))
        throw ConfigError("surface file '" + surfaces.string() + "' does not exist");
    const fs::path dir = prepare_output(config);
    const std::string s_hash = sha256_file(surfaces);
    const std::string in_hash = sha256_hex(config_hash(config) + s_hash);
    const auto set = read_surfaces(surfaces);
    if (!(set.grid == config.grid)) throw ConfigError("surface grid differs from config grid");
    const auto& movie = set.component(component);
    SurfaceField field(movie, config.model.omega_c);

    ScalarWavefunction chi0(config.grid);
    for (std::size_t i = 0; i < config.grid.n_points; ++i)
        chi0.psi[i] = harmonic_ground(config.model.omega_c, config.grid.q(i));
    chi0.t = movie.times.front();
    auto opts = config.propagation();
    const auto frames = propagate_on_surface(field, chi0, opts);

    const std::size_t skip = stride_skip(config.ensemble.observable_stride, opts.snapshot_stride);
    std::vector<ScalarWavefunction> sampled;
    DensityColumns dens;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (k % skip == 0) sampled.push_back(frames[k]);
        if (dump_slot(config.output.dump_times, frames[k].t, opts.snapshot_stride) >= 0)
            dens.add(frames[k].t, frames[k].density());
    }
    const std::string tag = component + "-quantum";
    const auto series = surface_quantum_series(tag, sampled, config.model.omega_c, &set.kin);

    CommandResult result;
    const fs::path csv = dir / ("series_" + tag + ".csv");
    write_series_csv(csv, series, in_hash);
    result.outputs.push_back(csv);
    const fs::path dpath = dir / ("densities_" + tag + ".csv");
    write_density_table(dpath, config.grid, -1.0, dens.names, dens.columns, in_hash);
    result.outputs.push_back(dpath);
    result.summary = {{"component", component},
                      {"frames", frames.size()},
                      {"N_final", series.n_photon.back()}};
    write_manifest(dir, "qsurf_" + component, {{"config", config_hash(config)}, {"surfaces", s_hash}},
                   result);
    return result;
}

CommandResult cmd_report(const RunConfig& config, const std::vector<fs::path>& paths) {
    if (paths.empty()) throw ConfigError("report needs at least one series file");
    const fs::path dir = prepare_output(config);
    CommandResult result;
    std::vector<ObservableSeries> all;
    json inputs = json::object();
    for (const auto& p : paths) {
        if (!fs::exists(p)) throw ConfigError("series file '" + p.string() + "' does not exist");
        all.push_back(read_series_csv(p, config.model.omega_c));
        inputs[p.filename().string()] = sha256_file(p);
    }
    const std::string in_hash = sha256_hex(inputs.dump());
    if (all.size() < 2)
        result.warnings.push_back("single series given: the comparison report is degenerate");

    const double T = config.period();
    const auto& ref = all.front();
    json comparisons = json::array();
    std::ostringstream bias;
    bias << "# input_sha256=" << in_hash << "\n";
    bias << "candidate,quantity,window,mean_signed,max_abs,frac_below,frac_above,strictly_below,"
            "strictly_above\n";
    for (std::size_t c = 1; c < all.size(); ++c) {
        for (const char* q : {"N", "q2", "p2"}) {
            const auto rep = compare_series(ref, all[c], T, q);
            comparisons.push_back(rep.to_json());
            for (const auto& w : rep.windows)
                bias << all[c].method << ',' << q << ',' << w.name << ','
                     << fmt_number(w.mean_signed) << ',' << fmt_number(w.max_abs) << ','
                     << fmt_number(w.frac_below) << ',' << fmt_number(w.frac_above) << ','
                     << (w.strictly_below ? 1 : 0) << ',' << (w.strictly_above ? 1 : 0) << "\n";
        }
    }
    const fs::path rpath = dir / "report.json";
    write_json(rpath, {{"reference", ref.method},
                       {"period", T},
                       {"input_sha256", in_hash},
                       {"comparisons", comparisons},
                       {"warnings", result.warnings}});
    result.outputs.push_back(rpath);
    const fs::path bpath = dir / "bias_table.csv";
    {
        std::ofstream out(bpath);
        out << bias.str();
    }
    result.outputs.push_back(bpath);

    // Time series on the reference axis.
    const fs::path fig2 = dir / "fig2_series.csv";
    {
        std::ofstream out(fig2);
        out << "# input_sha256=" << in_hash << "\n";
        out << "t";
        for (const auto& s : all)
            for (const char* q : {"N", "q2", "p2"}) out << ',' << q << '_' << s.method;
        out << "\n";
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const double t = ref.times[i];
            out << fmt_number(t);
            for (const auto& s : all) {
                const bool inside = t >= s.times.front() - 1e-9 && t <= s.times.back() + 1e-9;
                for (const char* q : {"N", "q2", "p2"})
                    out << ',' << (inside ? fmt_number(s.at(q, t)) : std::string("nan"));
            }
            out << "\n";
        }
    }
    result.outputs.push_back(fig2);

    // Density overlays at the dump times.
    std::map<std::string, std::map<std::string, std::vector<double>>> dens;
    for (const auto& tag : kOverlayOrder) {
        const fs::path p = dir / ("densities_" + tag + ".csv");
        if (fs::exists(p)) dens[tag] = read_density_columns(p);
    }
    json overlays = json::array();
    for (double t : config.output.dump_times) {
        const std::string label = time_label(t);
        std::vector<std::string> names;
        std::vector<std::vector<double>> cols;
        for (const auto& tag : kOverlayOrder) {
            auto it = dens.find(tag);
            if (it == dens.end()) continue;
            auto col = it->second.find(label);
            if (col == it->second.end() || col->second.size() != config.grid.n_points) continue;
            names.push_back(tag);
            cols.push_back(col->second);
        }
        if (names.empty()) continue;
        char fname[64];
        std::snprintf(fname, sizeof fname, "fig3_t%g.csv", t);
        const fs::path p = dir / fname;
        write_density_table(p, config.grid, t, names, cols, in_hash);
        result.outputs.push_back(p);
        overlays.push_back({{"t", t}, {"file", fname}, {"columns", names}});
    }

    if (config.output.emit_plot_data) {
        json series_cols = json::array();
        for (const auto& s : all) series_cols.push_back("N_" + s.method);
        const fs::path p2 = dir / "fig2.plot.json";
        write_json(p2, {{"kind", "line"},
                        {"data", "fig2_series.csv"},
                        {"x", "t"},
                        {"y", series_cols},
                        {"x_label", "t (a.u.)"},
                        {"y_label", "<N>"}});
        result.outputs.push_back(p2);
        const fs::path p3 = dir / "fig3.plot.json";
        write_json(p3, {{"kind", "line-panels"},
                        {"panels", overlays},
                        {"x", "q"},
                        {"x_label", "q (a.u.)"},
                        {"y_label", "|chi(q,t)|^2"}});
        result.outputs.push_back(p3);
    }
    result.summary = {{"series", all.size()}, {"overlay_times", overlays.size()}};
    write_manifest(dir, "report", inputs, result);
    return result;
}

CommandResult run_pipeline(const RunConfig& config, std::ostream* log) {
    auto say = [&](const std::string& s) {
        if (log) *log << s << std::endl;
    };
    CommandResult all;
    auto merge = [&](CommandResult r, const std::string& name) {
        for (auto& p : r.outputs) all.outputs.push_back(p);
        for (auto& w : r.warnings) {
            say("warning: " + w);
            all.warnings.push_back(name + ": " + w);
        }
        all.summary[name] = r.summary;
    };
    const fs::path dir = config.output_dir();
    say("exact propagation");
    merge(cmd_exact(config), "exact");
    say("inversion");
    merge(cmd_invert(config, dir / files::snapshots), "invert");
    std::vector<fs::path> series{dir / "series_exact.csv"};
    for (const auto& name : config.ensemble.methods) {
        const Method m = parse_method(name);
        say("trajectories: " + method_tag(m));
        merge(cmd_traj(config, m, dir / files::surfaces), "traj_" + method_tag(m));
        series.push_back(dir / ("series_" + method_tag(m) + ".csv"));
    }
    for (const auto& c : config.qsurf_components) {
        say("quantum on surface: " + c);
        merge(cmd_qsurf(config, dir / files::surfaces, c), "qsurf_" + c);
        series.push_back(dir / ("series_" + c + "-quantum.csv"));
    }
    say("report");
    merge(cmd_report(config, series), "report");
    return all;
}

}  // namespace xfp
