#include "xfphoton/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "xfphoton/errors.hpp"

namespace xfp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string fmt_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

namespace {

constexpr char kSnapTag[] = "XFPSNAP1";
constexpr char kSurfTag[] = "XFPSURF1";

std::ofstream open_out(const fs::path& path, bool binary = false, bool append = false) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto mode = std::ios::out;
    if (binary) mode |= std::ios::binary;
    mode |= append ? std::ios::app : std::ios::trunc;
    std::ofstream out(path, mode);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

void write_header(std::ofstream& out, const char* tag, const json& header) {
    const std::string text = header.dump();
    const std::uint64_t len = text.size();
    out.write(tag, 8);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json read_header(std::ifstream& in, const char* tag, const fs::path& path) {
    char got[8];
    in.read(got, 8);
    if (!in || std::memcmp(got, tag, 8) != 0)
        throw ConfigError("'" + path.string() + "' is not a " + std::string(tag, 8) + " file");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len > (1ull << 32)) throw ConfigError("corrupt header in '" + path.string() + "'");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) throw ConfigError("truncated header in '" + path.string() + "'");
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("bad header in '" + path.string() + "': " + e.what());
    }
}

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* p, std::size_t n, const fs::path& path) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ConfigError("truncated data in '" + path.string() + "'");
}

json params_json(const ModelParams& p) {
    return {{"eps_g", p.eps_g}, {"eps_e", p.eps_e}, {"omega_c", p.omega_c},
            {"g_coupling", p.g_coupling}};
}

ModelParams params_from(const json& j) {
    ModelParams p;
    p.eps_g = j.at("eps_g").get<double>();
    p.eps_e = j.at("eps_e").get<double>();
    p.omega_c = j.at("omega_c").get<double>();
    p.g_coupling = j.at("g_coupling").get<double>();
    return p;
}

json grid_json(const Grid& g) {
    return {{"q_min", g.q_min}, {"q_max", g.q_max}, {"n_points", g.n_points}};
}

Grid grid_from(const json& j) {
    Grid g;
    g.q_min = j.at("q_min").get<double>();
    g.q_max = j.at("q_max").get<double>();
    g.n_points = j.at("n_points").get<std::size_t>();
    g.validate();
    return g;
}

}  // namespace

void write_snapshots(const fs::path& path, const SnapshotSeries& series,
                     const std::string& input_hash) {
    auto out = open_out(path, true);
    json h;
    h["format"] = "xfphoton snapshots";
    h["params"] = params_json(series.params);
    h["grid"] = grid_json(series.grid);
    h["dt"] = series.dt;
    h["stride"] = series.stride;
    h["frames"] = series.frames.size();
    h["input_sha256"] = input_hash;
    write_header(out, kSnapTag, h);
    const std::size_t n = series.grid.n_points;
    for (const auto& f : series.frames) {
        write_doubles(out, &f.t, 1);
        write_doubles(out, reinterpret_cast<const double*>(f.comp_g.data()), 2 * n);
        write_doubles(out, reinterpret_cast<const double*>(f.comp_e.data()), 2 * n);
    }
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

SnapshotSeries read_snapshots(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    const json h = read_header(in, kSnapTag, path);
    SnapshotSeries s;
    try {
        s.params = params_from(h.at("params"));
        s.grid = grid_from(h.at("grid"));
        s.dt = h.at("dt").get<double>();
        s.stride = h.at("stride").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError("bad snapshot header: " + std::string(e.what()));
    }
    const auto count = h.at("frames").get<std::size_t>();
    const std::size_t n = s.grid.n_points;
    s.frames.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        GridWavefunction f(s.grid);
        read_doubles(in, &f.t, 1, path);
        read_doubles(in, reinterpret_cast<double*>(f.comp_g.data()), 2 * n, path);
        read_doubles(in, reinterpret_cast<double*>(f.comp_e.data()), 2 * n, path);
        s.frames.push_back(std::move(f));
    }
    return s;
}

void write_surfaces(const fs::path& path, const SurfaceSet& set, const std::string& input_hash) {
    auto out = open_out(path, true);
    json h;
    h["format"] = "xfphoton surfaces";
    h["params"] = params_json(set.params);
    h["grid"] = grid_json(set.grid);
    h["times"] = set.times;
    h["gauge_reference"] = set.gauge_reference;
    h["mask_threshold"] = set.mask_threshold;
    h["columns"] = kSurfaceColumns;
    h["input_sha256"] = input_hash;
    json reports = json::array();
    for (const auto& r : set.reports)
        reports.push_back({{"t", r.t},
                           {"masked_fraction", r.masked_fraction},
                           {"gd_max_imag", r.gd_max_imag},
                           {"trusted", r.trusted},
                           {"issue", r.issue}});
    h["reports"] = reports;
    write_header(out, kSurfTag, h);
    const std::size_t n = set.grid.n_points;
    const ScalarSurfaceMovie* movies[] = {&set.wbo,     &set.kin,         &set.gd,
                                          &set.qtdpes,  &set.density,     &set.pop_e,
                                          &set.phase,   &set.force_lower, &set.force_gap,
                                          &set.force_population};
    std::vector<double> row(kSurfaceColumns.size());
    for (std::size_t k = 0; k < set.times.size(); ++k) {
        const auto mask = set.wbo.frame_mask(k);
        for (std::size_t i = 0; i < n; ++i) {
            row[0] = set.grid.q(i);
            for (std::size_t c = 0; c < 10; ++c) row[c + 1] = movies[c]->frame(k)[i];
            row[11] = mask[i] ? 1.0 : 0.0;
            write_doubles(out, row.data(), row.size());
        }
    }
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

SurfaceSet read_surfaces(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    const json h = read_header(in, kSurfTag, path);
    SurfaceSet set;
    try {
        set.params = params_from(h.at("params"));
        set.grid = grid_from(h.at("grid"));
        set.times = h.at("times").get<std::vector<double>>();
        set.gauge_reference = h.at("gauge_reference").get<std::vector<std::size_t>>();
        set.mask_threshold = h.at("mask_threshold").get<double>();
        if (h.at("columns").get<std::vector<std::string>>() != kSurfaceColumns)
            throw ConfigError("unexpected surface columns in '" + path.string() + "'");
        for (const auto& r : h.at("reports")) {
            FrameReport fr;
            fr.t = r.at("t").get<double>();
            fr.masked_fraction = r.at("masked_fraction").get<double>();
            fr.gd_max_imag = r.at("gd_max_imag").get<double>();
            fr.trusted = r.at("trusted").get<bool>();
            fr.issue = r.at("issue").get<std::string>();
            set.reports.push_back(fr);
        }
    } catch (const json::exception& e) {
        throw ConfigError("bad surface header: " + std::string(e.what()));
    }
    ScalarSurfaceMovie* movies[] = {&set.wbo,    &set.kin,         &set.gd,
                                    &set.qtdpes, &set.density,     &set.pop_e,
                                    &set.phase,  &set.force_lower, &set.force_gap,
                                    &set.force_population};
    for (auto* m : movies) *m = ScalarSurfaceMovie::with_times(set.grid, set.times);
    const std::size_t n = set.grid.n_points;
    std::vector<double> row(kSurfaceColumns.size());
    for (std::size_t k = 0; k < set.times.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            read_doubles(in, row.data(), row.size(), path);
            for (std::size_t c = 0; c < 10; ++c) movies[c]->frame(k)[i] = row[c + 1];
            const std::uint8_t v = row[11] != 0.0 ? 1 : 0;
            for (auto* m : movies) m->mask[k * n + i] = v;
        }
    }
    set.wbo.validate();
    return set;
}

void write_series_csv(const fs::path& path, const ObservableSeries& s,
                      const std::string& input_hash) {
    auto out = open_out(path);
    out << "# method=" << s.method << "\n";
    out << "# omega_c=" << fmt_number(s.omega_c) << "\n";
    if (!input_hash.empty()) out << "# input_sha256=" << input_hash << "\n";
    out << "t,N,q2,p2,p2_chi,kin_correction,norm,excluded\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << fmt_number(s.times[i]) << ',' << fmt_number(s.n_photon[i]) << ','
            << fmt_number(s.q2[i]) << ',' << fmt_number(s.p2[i]) << ','
            << fmt_number(s.p2_chi[i]) << ',' << fmt_number(s.kin_correction[i]) << ','
            << fmt_number(s.norm[i]) << ',' << s.excluded[i] << "\n";
    }
}

ObservableSeries read_series_csv(const fs::path& path, double omega_c) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    ObservableSeries s;
    s.omega_c = omega_c;
    s.method = path.stem().string();
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# method=", 0) == 0) s.method = line.substr(9);
            if (line.rfind("# omega_c=", 0) == 0) s.omega_c = std::stod(line.substr(10));
            continue;
        }
        if (!header) {
            if (line != "t,N,q2,p2,p2_chi,kin_correction,norm,excluded")
                throw ConfigError("'" + path.string() + "' is not an observable series");
            header = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(row, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("bad number '" + cell + "' in '" + path.string() + "'");
            }
        }
        if (v.size() != 8) throw ConfigError("bad row in '" + path.string() + "'");
        s.append(v[0], v[2], v[4], v[5], v[6], static_cast<std::size_t>(v[7]));
    }
    if (!header) throw ConfigError("'" + path.string() + "' has no header");
    return s;
}

void write_phase_space_csv(const fs::path& path, double t, const Ensemble& ensemble, bool append) {
    auto out = open_out(path, false, append);
    if (!append) out << "t,id,q,p,re_cg,im_cg,re_ce,im_ce,diverged\n";
    for (const auto& tr : ensemble.trajectories) {
        out << fmt_number(t) << ',' << tr.id << ',' << fmt_number(tr.q) << ',' << fmt_number(tr.p)
            << ',' << fmt_number(tr.c_g.real()) << ',' << fmt_number(tr.c_g.imag()) << ','
            << fmt_number(tr.c_e.real()) << ',' << fmt_number(tr.c_e.imag()) << ','
            << (tr.diverged ? 1 : 0) << "\n";
    }
}

void write_density_table(const fs::path& path, const Grid& grid, double t,
                         const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& columns,
                         const std::string& input_hash) {
    if (names.size() != columns.size()) throw ConfigError("density table: name/column mismatch");
    auto out = open_out(path);
    if (t >= 0.0) out << "# t=" << fmt_number(t) << "\n";
    if (!input_hash.empty()) out << "# input_sha256=" << input_hash << "\n";
    out << "q";
    for (const auto& n : names) out << ',' << n;
    out << "\n";
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        out << fmt_number(grid.q(i));
        for (const auto& c : columns) out << ',' << fmt_number(c.at(i));
        out << "\n";
    }
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("parse error in '" + path.string() + "': " + e.what());
    }
}

}  // namespace xfp
