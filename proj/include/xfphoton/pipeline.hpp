#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xfphoton/config.hpp"
#include "xfphoton/trajectories.hpp"

namespace xfp {

/// Files written by a command plus a short machine-readable summary.
struct CommandResult {
    std::vector<std::filesystem::path> outputs;
    nlohmann::json summary;
    std::vector<std::string> warnings;
};

namespace files {
inline constexpr const char* snapshots = "snapshots.xfps";
inline constexpr const char* surfaces = "surfaces.xfpsurf";
inline constexpr const char* effective_config = "effective_config.json";
}  // namespace files

/// Tag used in file names: mte-diabatic, mte-qbo, wbo-qc, qtdpes-qc.
std::string method_tag(Method m);

/// Exact propagation: snapshots, series_exact.csv, densities_exact.csv.
CommandResult cmd_exact(const RunConfig& config);

/// Inversion of a snapshot file into surfaces.xfpsurf and inversion_report.json.
CommandResult cmd_invert(const RunConfig& config, const std::filesystem::path& snapshots);

/// Trajectory ensemble for one method. Surface methods need a surface file.
CommandResult cmd_traj(const RunConfig& config, Method method,
                       const std::optional<std::filesystem::path>& surfaces);

/// Quantum propagation on the wbo or qtdpes surface.
CommandResult cmd_qsurf(const RunConfig& config, const std::filesystem::path& surfaces,
                        const std::string& component);

/// Comparison of series files against the first one, plus plot data.
CommandResult cmd_report(const RunConfig& config, const std::vector<std::filesystem::path>& series);

/// exact -> invert -> traj (all configured methods) -> qsurf -> report.
CommandResult run_pipeline(const RunConfig& config, std::ostream* log = nullptr);

/// Quick checks of the basic identities; one line per check to `out`.
/// Returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace xfp
