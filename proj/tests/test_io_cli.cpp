#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracpk/io.hpp"

using namespace fracpk;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "fracpk_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& f) {
    std::ifstream is(f);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FRACPK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("sample path CSV format and round trip precision") {
    auto dir = temp_dir();
    TimeGrid grid(1.0, 4);
    SamplePath path(grid, {0.0, 0.1234567890123456789, -2.5e-17, 3.0, 1e300});
    write_sample_path_csv(dir / "path.csv", path, "value");
    auto text = slurp(dir / "path.csv");
    CHECK(text.rfind("t,value\n", 0) == 0);

    // observations round-trip bit exactly through the 17-digit format
    ObservationSet obs{{0.0, 0.5, 1.0, 1.5}, {1.0, 0.1234567890123456789, 0.25, 1e-300}, 0.0};
    write_observations_csv(dir / "obs.csv", obs);
    auto back = load_observations(dir / "obs.csv", 0.0);
    REQUIRE(back.times.size() == obs.times.size());
    for (std::size_t i = 0; i < obs.times.size(); ++i) {
        CHECK(back.times[i] == obs.times[i]);
        CHECK(back.concentrations[i] == obs.concentrations[i]);
    }
}

TEST_CASE("observation loader rejects malformed input with line numbers") {
    auto dir = temp_dir();
    {
        std::ofstream os(dir / "bad_value.csv");
        os << "t,c\n0,1.0\n0.5,oops\n1.0,0.5\n";
    }
    CHECK_THROWS_MATCHES(load_observations(dir / "bad_value.csv", 0.0), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":3")));
    {
        std::ofstream os(dir / "bad_grid.csv");
        os << "t,c\n0,1.0\n0.5,0.9\n1.2,0.5\n";
    }
    CHECK_THROWS_MATCHES(load_observations(dir / "bad_grid.csv", 0.0), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("uniform")));
    {
        std::ofstream os(dir / "bad_header.csv");
        os << "time;conc\n0,1.0\n";
    }
    CHECK_THROWS_AS(load_observations(dir / "bad_header.csv", 0.0), ValidationError);
    {
        std::ofstream os(dir / "neg.csv");
        os << "t,c\n0,1.0\n0.5,-0.1\n1.0,0.5\n";
    }
    CHECK_THROWS_MATCHES(load_observations(dir / "neg.csv", 0.0), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("zero crossing")));
    CHECK_THROWS_AS(load_observations(dir / "missing.csv", 0.0), ValidationError);
}

TEST_CASE("bundle sidecar carries provenance") {
    auto p = ModelParams{3.5, 0.5, 0.9, 0.9, 1.0, 3.0};
    auto bundle = simulate_concentration(p, 16, Seed{88});
    auto j = bundle_sidecar(bundle);
    CHECK(j["seed"] == 88);
    CHECK(j["generator"] == "exact");
    CHECK(j["params"]["upsilon"] == 3.5);
    CHECK(j["steps"] == 16);
}

TEST_CASE("cli: simulate is reproducible and validates input") {
    auto dir = temp_dir();
    const std::string out1 = (dir / "sim1").string(), out2 = (dir / "sim2").string();
    REQUIRE(run_cli("simulate --upsilon 3.5 --sigma 0.5 --beta 0.9 --hurst 0.9 --c0 1 "
                    "--horizon 3 --grid-n 32 --seed 7 --out " + out1) == 0);
    REQUIRE(run_cli("simulate --upsilon 3.5 --sigma 0.5 --beta 0.9 --hurst 0.9 --c0 1 "
                    "--horizon 3 --grid-n 32 --seed 7 --out " + out2) == 0);
    CHECK(slurp(fs::path(out1) / "bundle_0000.csv") == slurp(fs::path(out2) / "bundle_0000.csv"));
    CHECK(fs::exists(fs::path(out1) / "resolved_config.json"));
    CHECK(fs::exists(fs::path(out1) / "bundle_0000.json"));

    // invalid parameter -> exit 2
    CHECK(run_cli("simulate --hurst 1.4 --out " + (dir / "simbad").string()) == 2);
    // unknown flag -> exit 2
    CHECK(run_cli("simulate --frobnicate 1") == 2);
}

TEST_CASE("cli: sigma=0 produces the pure decay and estimate consumes it") {
    auto dir = temp_dir();
    const auto simout = dir / "sim0";
    REQUIRE(run_cli("simulate --upsilon 2.0 --sigma 0 --beta 0 --hurst 0.8 --c0 1 --horizon 1 "
                    "--grid-n 64 --seed 3 --out " + simout.string()) == 0);
    // turn the bundle into a t,c observations file
    std::ifstream is(simout / "bundle_0000.csv");
    std::ofstream os(simout / "obs.csv");
    os << "t,c\n";
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        auto fields = detail::split_csv_line(line);
        REQUIRE(fields.size() == 5);
        os << fields[0] << "," << fields[4] << "\n";
    }
    os.close();
    const auto estout = dir / "est0";
    REQUIRE(run_cli("estimate --data " + (simout / "obs.csv").string() + " --beta 0 --out " +
                    estout.string()) == 0);
    json rep;
    std::ifstream(estout / "estimates.json") >> rep;
    // noiseless decay: regression recovers upsilon, roughness estimators degenerate
    CHECK_THAT(rep["upsilon_regression"]["estimate"].get<double>(),
               Catch::Matchers::WithinRel(2.0, 1e-6));
    CHECK(rep.contains("hurst"));
    CHECK(rep.contains("sigma"));
}

TEST_CASE("cli: estimate on stochastic data emits all estimators") {
    auto dir = temp_dir();
    const auto simout = dir / "sim_est";
    REQUIRE(run_cli("simulate --upsilon 1.5 --sigma 0.5 --beta 0 --hurst 0.9 --c0 1 --horizon 10 "
                    "--grid-n 400 --averaged-weights --seed 21 --out " + simout.string()) == 0);
    std::ifstream is(simout / "bundle_0000.csv");
    std::ofstream os(simout / "obs.csv");
    os << "t,c\n";
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        auto fields = detail::split_csv_line(line);
        os << fields[0] << "," << fields[4] << "\n";
    }
    os.close();
    const auto estout = dir / "est1";
    // known (H, sigma) enables the known-parameter estimator
    REQUIRE(run_cli("estimate --data " + (simout / "obs.csv").string() +
                    " --beta 0 --hurst 0.9 --sigma 0.5 --out " + estout.string()) == 0);
    json rep;
    std::ifstream(estout / "estimates.json") >> rep;
    for (const char* key :
         {"hurst", "sigma", "upsilon_plugin", "upsilon_regression", "upsilon_known"})
        CHECK(rep.contains(key));
    if (rep["hurst"].contains("estimate"))
        CHECK_THAT(rep["hurst"]["estimate"].get<double>(), Catch::Matchers::WithinAbs(0.9, 0.25));
}

TEST_CASE("cli: config file values are overridden by flags") {
    auto dir = temp_dir();
    {
        std::ofstream os(dir / "cfg.json");
        os << R"({"upsilon": 2.0, "sigma": 0.0, "beta": 0.0, "hurst": 0.8, "c0": 1.0,
                  "horizon": 1.0, "grid_n": 8, "seed": 5})";
    }
    const auto outa = dir / "cfg_a";
    REQUIRE(run_cli("simulate --config " + (dir / "cfg.json").string() + " --out " +
                    outa.string()) == 0);
    json ra;
    std::ifstream(outa / "resolved_config.json") >> ra;
    CHECK(ra["params"]["upsilon"] == 2.0);
    CHECK(ra["grid_n"] == 8);
    const auto outb = dir / "cfg_b";
    REQUIRE(run_cli("simulate --config " + (dir / "cfg.json").string() + " --upsilon 3.0 --out " +
                    outb.string()) == 0);
    json rb;
    std::ifstream(outb / "resolved_config.json") >> rb;
    CHECK(rb["params"]["upsilon"] == 3.0);
}

TEST_CASE("cli: bound emits the budget table") {
    auto dir = temp_dir();
    const auto out = dir / "bound";
    REQUIRE(run_cli("bound --upsilon 3.5 --beta 0.9 --hurst 0.9 --horizon 3 --out " +
                    out.string()) == 0);
    json rep;
    std::ifstream(out / "bound.json") >> rep;
    auto rows = rep["budget_table"]["rows"];
    REQUIRE(rows.size() == 3);
    // worked cell: radius 0.2, lambda 0.01
    CHECK_THAT(rows[1]["budgets"][0].get<double>(), Catch::Matchers::WithinAbs(0.2991, 5e-3));
}

TEST_CASE("cli: procedure and density run end to end") {
    auto dir = temp_dir();
    {
        std::ofstream os(dir / "proc_obs.csv");
        os << "t,c\n";
        for (int i = 0; i <= 30; ++i) {
            const double t = 0.1 * i;
            os << t << "," << std::exp(-3.5 * t) * (1.0 + 0.15 * std::sin(9.0 * t + 0.4)) << "\n";
        }
    }
    const auto pout = dir / "proc";
    REQUIRE(run_cli("procedure --data " + (dir / "proc_obs.csv").string() +
                    " --hurst 0.9 --beta 0.9 --lambda 0.01 --upsilon 3.5 --horizon 3 "
                    "--radius 0.2 --out " + pout.string()) == 0);
    json rep;
    std::ifstream(pout / "report.json") >> rep;
    CHECK_THAT(rep["sigma2_max"].get<double>(), Catch::Matchers::WithinAbs(0.2991, 5e-3));
    CHECK(fs::exists(pout / "report.txt"));

    const auto dout = dir / "dens";
    REQUIRE(run_cli("density --upsilon 1.5 --sigma 0.51 --beta 0 --hurst 0.9 --c0 1 --horizon 2 "
                    "--times 1 --curve-points 200 --out " + dout.string()) == 0);
    auto text = slurp(dout / "density.csv");
    CHECK(text.rfind("x,density", 0) == 0);

    // numeric failure: the undamped kernel overflows at this horizon -> exit 3
    CHECK(run_cli("bound --upsilon 1.5 --beta 0 --hurst 0.9 --horizon 1000 --out " +
                  (dir / "boundbad").string()) == 3);
}
