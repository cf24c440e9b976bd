#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spinstat/cli.hpp"
#include "spinstat/config.hpp"
#include "spinstat/errors.hpp"

using namespace spinstat;
using namespace spinstat::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "spinstat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Fresh directory with a config whose outputs land inside it.
struct Workspace {
  fs::path dir;
  fs::path config;

  explicit Workspace(const std::string& name, double beta = 0.0) {
    dir = fs::temp_directory_path() / ("spinstat_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    RunConfig c;
    c.scenario.j_max = 8;
    c.scenario.beta2_half = beta;
    c.output.catalog_csv = (dir / "catalog.csv").string();
    c.output.catalog_json = (dir / "catalog.json").string();
    c.output.spectrum_csv = (dir / "spectrum.csv").string();
    c.output.spectrum_json = (dir / "spectrum.json").string();
    c.output.report_json = (dir / "bound.json").string();
    c.output.calibration_json = (dir / "calibration.json").string();
    config = dir / "run.toml";
    std::ofstream(config) << to_text(c);
  }
  ~Workspace() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("gram subcommand") {
  const auto r = run({"gram", "--n", "3", "--q", "0.5"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("n") == 3);
  CHECK(j.at("is_psd") == true);
  CHECK(j.at("meta").at("tool") == "spinstat");

  CHECK(run({"gram", "--n", "3", "--q", "1.5"}).code == 1);
  CHECK(run({"gram", "--n", "9", "--q", "0.5"}).code == 1);
  CHECK(run({"gram", "--q", "0.5"}).code == 1);
}

TEST_CASE("usage errors") {
  const auto r = run({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"catalog"}).code == 1);
  CHECK(run({"catalog", "--config", "/nonexistent/run.toml"}).code == 1);
}

TEST_CASE("project subcommand") {
  const auto r = run({"project", "--n", "2", "--beta", "0.3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("weights").at("[1,1]").get<double>() == doctest::Approx(0.3).epsilon(1e-12));
  const auto m = nlohmann::json::parse(run({"project", "--n", "3"}).out);
  CHECK(m.at("weights").at("[2,1]").get<double>() == doctest::Approx(4.0 / 6));
  CHECK(run({"project", "--n", "5"}).code == 1);
  CHECK(run({"project", "--n", "2", "--beta", "1.5"}).code == 1);
}

TEST_CASE("config text round trip") {
  RunConfig c;
  c.scenario.molecule.name = "test molecule";
  c.scenario.molecule.electronic_parity = specmodel::ElectronicParity::Antisymmetric;
  c.scenario.molecule.b_upper = 0.1 + 0.2;
  c.scenario.branches = {true, true};
  c.scenario.beta2_half = 1.0 / 3.0;
  c.scenario.snr = 12345.678;
  c.scenario.seed = 18446744073709551615ULL;
  c.scenario.fit_shape = true;
  c.calibrate_trials = 321;
  c.output.report_json = "out/b.json";
  const auto back = parse_config(to_text(c));
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(RunConfig{}) != config_hash(c));

  CHECK(parse_config("") == RunConfig{});
  CHECK(parse_config("[synth]\nseed = 7\n").scenario.seed == 7);
  CHECK_THROWS_AS(parse_config("[synth]\nsed = 7\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[nope]\nseed = 7\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("seed = 7\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[synth]\nsnr = fast\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[fit]\nfit_shape = yes\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[catalog]\nbranches = \"Q\"\n"), ValidationError);

  RunConfig bad;
  bad.output.catalog_csv = "/nonexistent/dir/c.csv";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("print-config lists every default") {
  const auto r = run({"--print-config"});
  CHECK(r.code == 0);
  CHECK(parse_config(r.out) == RunConfig{});
  for (const char* key : {"[molecule]", "[catalog]", "[synth]", "[fit]", "[calibrate]", "[output]",
                          "beta2_half", "seed", "CL", "baseline_degree"}) {
    CHECK(r.out.find(key) != std::string::npos);
  }
}

TEST_CASE("catalog at beta = 0 has only even-J R lines") {
  Workspace ws("catalog");
  const auto r = run({"catalog", "--config", ws.config.string()});
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(ws.dir / "catalog.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.rfind("R,", 0) == 0);
    CHECK(std::stoi(line.substr(2)) % 2 == 0);
    ++rows;
  }
  CHECK(rows == 5);
  const auto j = nlohmann::json::parse(slurp(ws.dir / "catalog.json"));
  CHECK(j.at("meta").at("config_hash").get<std::string>().size() == 16);
  CHECK(j.at("meta").at("seed") == 42);
}

TEST_CASE("synth and fit are byte-for-byte reproducible") {
  Workspace ws("pipeline", 1e-3);
  const auto cfg = ws.config.string();
  std::vector<std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    REQUIRE(run({"catalog", "--config", cfg}).code == 0);
    REQUIRE(run({"synth", "--config", cfg}).code == 0);
    const auto fit = run({"fit", "--config", cfg});
    REQUIRE(fit.code == 0);
    CHECK(fit.out.rfind("beta2_half <= ", 0) == 0);
    std::vector<std::string> files;
    for (const char* f : {"catalog.csv", "catalog.json", "spectrum.csv", "spectrum.json", "bound.json"})
      files.push_back(slurp(ws.dir / f));
    if (pass == 0) {
      first = files;
      for (const char* f : {"catalog.csv", "catalog.json", "spectrum.csv", "spectrum.json", "bound.json"})
        fs::remove(ws.dir / f);
    } else {
      CHECK(files == first);
    }
  }
  const auto bound = nlohmann::json::parse(first[4]);
  CHECK(bound.at("lines_used") == 4);
  CHECK(bound.at("meta").at("version") == kToolVersion);
}

TEST_CASE("fit reads explicit spectrum paths") {
  Workspace ws("explicit");
  const auto cfg = ws.config.string();
  REQUIRE(run({"synth", "--config", cfg}).code == 0);
  fs::rename(ws.dir / "spectrum.csv", ws.dir / "moved.csv");
  CHECK(run({"fit", "--config", cfg}).code == 1);
  CHECK(run({"fit", "--config", cfg, "--spectrum", (ws.dir / "moved.csv").string()}).code == 0);
}

TEST_CASE("fit on a spectrum without allowed lines is a range error") {
  Workspace ws("norange");
  const auto cfg = ws.config.string();
  {
    std::ofstream csv(ws.dir / "spectrum.csv");
    csv << "wavenumber_cm1,absorbance\n100,0\n100.5,0\n101,0\n";
  }
  std::ofstream(ws.dir / "spectrum.json") << R"({"catalog_hash":0,"seed":1,"snr":null,"column":0.01,)"
                                          << R"("gaussian_hwhm":0.006,"lorentzian_hwhm":0.002,"n_average":1})";
  const auto r = run({"fit", "--config", cfg});
  CHECK(r.code == 1);
  CHECK(r.err.find("no allowed line") != std::string::npos);
}

TEST_CASE("calibrate subcommand") {
  Workspace ws("calibrate");
  const auto cfg = ws.config.string();
  CHECK(run({"calibrate", "--config", cfg, "--trials", "50"}).code == 1);
  const auto r = run({"calibrate", "--config", cfg, "--trials", "100"});
  CHECK(r.code == 0);
  CHECK(r.out.find("coverage") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(ws.dir / "calibration.json"));
  CHECK(j.at("n_trials") == 100);
}

TEST_CASE("computation failures exit with 2") {
  Workspace ws("failing");
  auto c = load_config(ws.config);
  c.scenario.snr = 1.0;
  c.scenario.column = 1e-6;
  std::ofstream(ws.config) << to_text(c);
  const auto r = run({"calibrate", "--config", ws.config.string(), "--trials", "100"});
  CHECK(r.code == 2);
  CHECK(r.err.find("failed to fit") != std::string::npos);
}
