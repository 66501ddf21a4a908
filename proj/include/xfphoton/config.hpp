#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "xfphoton/factorization.hpp"
#include "xfphoton/grid.hpp"
#include "xfphoton/model.hpp"
#include "xfphoton/observables.hpp"
#include "xfphoton/quantum.hpp"

namespace xfp {

/// Environment variable holding the root for relative output directories.
inline constexpr const char* kOutputRootEnv = "XFPHOTON_OUTPUT_ROOT";

struct QuantumSection {
    double dt = 0.001;
    /// Defaults to 2 pi / rabi_frequency.
    double t_final = 0.0;
    double snapshot_stride = 0.2;
    double edge_tolerance = 1e-6;
    double norm_tolerance = 1e-8;
};

struct EnsembleSection {
    std::size_t n = 10000;
    std::uint64_t seed = 20240607;
    double dt = 0.02;
    std::vector<std::string> methods{"mte-diabatic", "mte-qbo", "wbo", "qtdpes"};
    /// Defaults to the quantum t_final.
    double t_final = 0.0;
    double observable_stride = 1.0;
    unsigned workers = 1;
    int rk4_substeps = 4;
    /// |force| cap for surface methods; 0 disables.
    double force_cap = 0.0;
    std::string density = "histogram";
    double bandwidth = 0.0;
};

struct OutputSection {
    std::string directory = "xfphoton-out";
    bool emit_plot_data = true;
    std::vector<double> dump_times{0.0, 100.0, 160.0, 240.0, 350.0};
};

struct InputSection {
    std::string snapshots;
    std::string surfaces;
};

struct RunConfig {
    ModelParams model;
    /// Rabi angular frequency defining the period T = 2 pi / rabi_frequency.
    double rabi_frequency = 0.01;
    Grid grid;
    QuantumSection quantum;
    InversionOptions inversion;
    EnsembleSection ensemble;
    std::vector<std::string> qsurf_components{"wbo", "qtdpes"};
    OutputSection output;
    InputSection inputs;

    double period() const;
    /// Fills derived defaults and checks every field. Throws ConfigError.
    void resolve();
    PropagationOptions propagation() const;
    DensityOptions density_options() const;
    /// Output directory after applying XFPHOTON_OUTPUT_ROOT to relative paths.
    std::filesystem::path output_dir() const;
};

/// Strict parse: unknown keys, wrong types and invalid values are
/// ConfigErrors. Missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);
/// The paper's parameter set with defaults resolved.
RunConfig paper_defaults();

}  // namespace xfp
