#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xfphoton/config.hpp"
#include "xfphoton/errors.hpp"
#include "xfphoton/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kConfigError = 2;
constexpr int kInvariant = 3;

struct Common {
    std::string config_path;
    bool paper_defaults = false;
    std::string output;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "JSON run configuration");
        cmd->add_flag("--paper-defaults", paper_defaults, "use the paper's parameters");
        cmd->add_option("-o,--output", output, "output directory (overrides the config)");
    }

    xfp::RunConfig load() const {
        if (!config_path.empty() && paper_defaults)
            throw xfp::ConfigError("give either --config or --paper-defaults, not both");
        xfp::RunConfig cfg = config_path.empty() ? xfp::paper_defaults()
                                                 : xfp::load_config(config_path);
        if (!output.empty()) cfg.output.directory = output;
        return cfg;
    }
};

void print_result(const xfp::CommandResult& r) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& p : r.outputs) std::cout << "wrote " << p.string() << "\n";
    std::cout << r.summary.dump(2) << "\n";
}

fs::path default_input(const xfp::RunConfig& cfg, const std::string& given,
                       const std::string& from_config, const char* name) {
    if (!given.empty()) return given;
    if (!from_config.empty()) return from_config;
    return cfg.output_dir() / name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity photon dynamics: exact propagation, exact-factorization surfaces and "
                 "trajectory ensembles"};
    app.require_subcommand(1);

    Common common;
    auto* exact = app.add_subcommand("exact", "exact two-component propagation");
    common.attach(exact);

    std::string snapshots;
    auto* invert = app.add_subcommand("invert", "build surfaces from a snapshot file");
    common.attach(invert);
    invert->add_option("--snapshots", snapshots, "snapshot file");

    std::string method = "mte-diabatic";
    std::string surfaces;
    auto* traj = app.add_subcommand("traj", "trajectory ensemble");
    common.attach(traj);
    traj->add_option("-m,--method", method, "mte-diabatic, mte-qbo, wbo or qtdpes");
    traj->add_option("--surfaces", surfaces, "surface file (wbo, qtdpes)");

    std::string component = "qtdpes";
    auto* qsurf = app.add_subcommand("qsurf", "quantum propagation on a stored surface");
    common.attach(qsurf);
    qsurf->add_option("--surfaces", surfaces, "surface file");
    qsurf->add_option("--component", component, "wbo or qtdpes");

    std::vector<std::string> series;
    auto* report = app.add_subcommand("report", "compare observable series");
    common.attach(report);
    report->add_option("series", series, "series CSV files, reference first")->required();

    auto* selftest = app.add_subcommand("selftest", "run the built-in identity checks");

    auto* run = app.add_subcommand("run", "full pipeline");
    common.attach(run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (selftest->parsed()) return xfp::run_selftest(std::cout) ? kOk : kInvariant;
        const auto cfg = common.load();
        if (exact->parsed()) {
            print_result(xfp::cmd_exact(cfg));
        } else if (invert->parsed()) {
            const auto in = default_input(cfg, snapshots, cfg.inputs.snapshots, xfp::files::snapshots);
            if (!fs::exists(in)) throw xfp::ConfigError("snapshot file '" + in.string() + "' not found");
            print_result(xfp::cmd_invert(cfg, in));
        } else if (traj->parsed()) {
            const auto m = xfp::parse_method(method);
            std::optional<fs::path> surf;
            if (xfp::is_surface_method(m))
                surf = default_input(cfg, surfaces, cfg.inputs.surfaces, xfp::files::surfaces);
            print_result(xfp::cmd_traj(cfg, m, surf));
        } else if (qsurf->parsed()) {
            const auto in = default_input(cfg, surfaces, cfg.inputs.surfaces, xfp::files::surfaces);
            print_result(xfp::cmd_qsurf(cfg, in, component));
        } else if (report->parsed()) {
            std::vector<fs::path> paths(series.begin(), series.end());
            print_result(xfp::cmd_report(cfg, paths));
        } else if (run->parsed()) {
            print_result(xfp::run_pipeline(cfg, &std::cerr));
        }
    } catch (const xfp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const xfp::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}
