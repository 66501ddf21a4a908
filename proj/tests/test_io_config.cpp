#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "xfphoton/config.hpp"
#include "xfphoton/errors.hpp"
#include "xfphoton/io.hpp"
#include "xfphoton/quantum.hpp"

using namespace xfp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "xfphoton-unit";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("sha256 of known strings") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("paper defaults resolve to the reference parameters") {
    const auto c = paper_defaults();
    CHECK(c.model.eps_g == -0.2);
    CHECK(c.model.eps_e == 0.2);
    CHECK(c.model.omega_c == 0.4);
    CHECK(c.model.g_coupling == 0.01);
    CHECK(c.quantum.t_final == doctest::Approx(c.period()));
    CHECK(c.period() == doctest::Approx(628.3185).epsilon(1e-6));
    CHECK(c.ensemble.t_final == c.quantum.t_final);
    CHECK(c.ensemble.n == 10000);
}

TEST_CASE("configs round trip through json") {
    auto c = paper_defaults();
    c.ensemble.n = 123;
    c.ensemble.methods = {"wbo"};
    c.output.dump_times = {1.0, 2.0};
    auto back = config_from_json(config_to_json(c));
    back.resolve();
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(config_from_json({{"model", {{"omega", 0.4}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"modle", nlohmann::json::object()}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"ensemble", {{"n", "many"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"ensemble", {{"dt", 0.02}, {"observable_stride", 0.03}}}}),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json({{"ensemble", {{"methods", {"surface-hopping"}}}}}),
                    ConfigError);
    CHECK_THROWS_AS(config_from_json({{"inputs", {{"snapshots", "/nonexistent/x.xfps"}}}}),
                    ConfigError);
    const auto path = scratch("broken.json");
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("output root applies to relative directories") {
    auto c = paper_defaults();
    c.output.directory = "runs/a";
    setenv(kOutputRootEnv, "/tmp/xfp-root", 1);
    CHECK(c.output_dir() == fs::path("/tmp/xfp-root/runs/a"));
    c.output.directory = "/abs/b";
    CHECK(c.output_dir() == fs::path("/abs/b"));
    unsetenv(kOutputRootEnv);
    c.output.directory = "runs/a";
    CHECK(c.output_dir() == fs::path("runs/a"));
}

TEST_CASE("snapshot files round trip exactly") {
    ModelParams p;
    Grid grid{-12.8, 12.8, 128};
    PropagationOptions opts;
    opts.dt = 0.01;
    opts.t_final = 0.4;
    opts.snapshot_stride = 0.2;
    const auto run = propagate_exact(p, grid, opts);
    const auto path = scratch("run.xfps");
    write_snapshots(path, run, "abc");
    const auto back = read_snapshots(path);
    REQUIRE(back.frames.size() == run.frames.size());
    CHECK(back.grid == run.grid);
    CHECK(back.params.g_coupling == p.g_coupling);
    for (std::size_t k = 0; k < run.frames.size(); ++k) {
        CHECK(back.frames[k].t == run.frames[k].t);
        CHECK(back.frames[k].comp_e == run.frames[k].comp_e);
        CHECK(back.frames[k].comp_g == run.frames[k].comp_g);
    }
    const auto copy = scratch("copy.xfps");
    write_snapshots(copy, back, "abc");
    CHECK(sha256_file(copy) == sha256_file(path));

    std::ofstream(scratch("junk.xfps")) << "XFPSURF1 not a snapshot";
    CHECK_THROWS(read_snapshots(scratch("junk.xfps")));
}

TEST_CASE("surface files round trip exactly") {
    ModelParams p;
    Grid grid{-12.8, 12.8, 128};
    PropagationOptions opts;
    opts.dt = 0.01;
    opts.t_final = 0.6;
    opts.snapshot_stride = 0.2;
    const auto set = invert_series(propagate_exact(p, grid, opts), InversionOptions{});
    const auto path = scratch("run.xfpsurf");
    write_surfaces(path, set);
    const auto back = read_surfaces(path);
    CHECK(back.times == set.times);
    CHECK(back.gauge_reference == set.gauge_reference);
    CHECK(back.qtdpes.values == set.qtdpes.values);
    CHECK(back.gd.values == set.gd.values);
    CHECK(back.force_population.values == set.force_population.values);
    CHECK(back.wbo.mask == set.wbo.mask);
    CHECK(back.reports.size() == set.reports.size());
}

TEST_CASE("series csv round trip") {
    ObservableSeries s;
    s.method = "wbo-qc";
    s.omega_c = 0.4;
    s.append(0.0, 1.25, 0.2, 0.01, 1.0, 0);
    s.append(1.0, 1.3, 0.21, 0.02, 1.0, 2);
    const auto path = scratch("series.csv");
    write_series_csv(path, s, "deadbeef");
    const auto back = read_series_csv(path, 0.4);
    CHECK(back.method == "wbo-qc");
    REQUIRE(back.size() == 2);
    CHECK(back.q2[1] == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(back.kin_correction[1] == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(back.excluded[1] == 2);
    CHECK(back.n_photon[1] == doctest::Approx(s.n_photon[1]).epsilon(1e-12));
    CHECK(fmt_number(0.5) == "5.000000000000e-01");
}
