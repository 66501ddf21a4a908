#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "xfphoton/factorization.hpp"
#include "xfphoton/observables.hpp"
#include "xfphoton/quantum.hpp"
#include "xfphoton/trajectories.hpp"

namespace xfp {

/// Lowercase hex SHA-256 of a byte string / a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Binary layout shared by snapshot and surface files (native little-endian):
//   8-byte tag, uint64 header length, JSON header, then frames.
// Snapshot frame: double t, then comp_g and comp_e as interleaved (re, im).
// Surface frame: n rows of kSurfaceColumns doubles.

void write_snapshots(const std::filesystem::path& path, const SnapshotSeries& series,
                     const std::string& input_hash = "");
SnapshotSeries read_snapshots(const std::filesystem::path& path);

inline const std::vector<std::string> kSurfaceColumns{
    "q", "wbo", "kin", "gd", "qtdpes", "density", "pop_e", "phase",
    "force_lower", "force_gap", "force_population", "mask"};

void write_surfaces(const std::filesystem::path& path, const SurfaceSet& set,
                    const std::string& input_hash = "");
SurfaceSet read_surfaces(const std::filesystem::path& path);

/// CSV with '#' comment lines (method, input hash) then
/// t,N,q2,p2,p2_chi,kin_correction,norm,excluded.
void write_series_csv(const std::filesystem::path& path, const ObservableSeries& series,
                      const std::string& input_hash = "");
ObservableSeries read_series_csv(const std::filesystem::path& path, double omega_c);

/// Rows t,id,q,p,re_cg,im_cg,re_ce,im_ce,diverged. Appends when `append`.
void write_phase_space_csv(const std::filesystem::path& path, double t, const Ensemble& ensemble,
                           bool append);

/// Column table: first column q, then one column per named density.
/// A negative t omits the time comment line.
void write_density_table(const std::filesystem::path& path, const Grid& grid, double t,
                         const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& columns,
                         const std::string& input_hash = "");

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Fixed-precision number formatting used by every text output.
std::string fmt_number(double v);

}  // namespace xfp
