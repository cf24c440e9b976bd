#include "spinstat/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinstat/calibrate.hpp"
#include "spinstat/config.hpp"
#include "spinstat/errors.hpp"
#include "spinstat/format.hpp"
#include "spinstat/permsym.hpp"
#include "spinstat/qfock.hpp"

namespace spinstat::cli {

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
  if (!out) throw ComputationError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json meta_block(const RunConfig* cfg) {
  json m = {{"tool", kToolName}, {"version", kToolVersion}};
  if (cfg) {
    m["config_hash"] = config_hash(*cfg);
    m["seed"] = cfg->scenario.seed;
  }
  return m;
}

RunConfig checked_config(const std::string& path) {
  RunConfig c = load_config(path);
  c.validate();
  return c;
}

int run_gram(int n, double q, double tol, const std::string& csv, const std::string& matrix_json,
             std::ostream& out) {
  const qfock::QParameter qp(q);
  const auto report = qfock::check_positivity(n, qp, tol);
  if (!csv.empty() || !matrix_json.empty()) {
    const auto g = qfock::gram_matrix(n, qp);
    if (!csv.empty()) write_text(csv, qfock::to_csv(g));
    if (!matrix_json.empty()) write_text(matrix_json, qfock::to_json(g).dump() + "\n");
  }
  json j = qfock::to_json(report);
  j["meta"] = meta_block(nullptr);
  out << j.dump(2) << '\n';
  return kOk;
}

int run_project(int n, const std::string& rho_path, std::optional<double> beta,
                std::ostream& out) {
  using namespace permsym;
  const auto dim = static_cast<Eigen::Index>(qfock::permutations(n).size());
  std::optional<DensityMatrix> rho;
  if (!rho_path.empty()) {
    try {
      rho = density_from_json(json::parse(read_text(rho_path)));
    } catch (const json::parse_error& e) {
      throw ValidationError(rho_path + ": " + e.what());
    }
  } else if (beta) {
    Eigen::VectorXcd sym = Eigen::VectorXcd::Ones(dim);
    Eigen::VectorXcd anti(dim);
    const auto perms = qfock::permutations(n);
    for (Eigen::Index i = 0; i < dim; ++i)
      anti(i) = qfock::inversions(perms[static_cast<std::size_t>(i)]) % 2 ? -1.0 : 1.0;
    rho = violation_mixture(*beta, DensityMatrix::pure(sym), DensityMatrix::pure(anti)).rho;
  } else {
    rho = DensityMatrix::maximally_mixed(dim);
  }
  json j = to_json(symmetry_decompose(*rho, n));
  j["meta"] = meta_block(nullptr);
  out << j.dump(2) << '\n';
  return kOk;
}

int run_catalog(const std::string& config_path, std::ostream& out) {
  const auto cfg = checked_config(config_path);
  const auto& s = cfg.scenario;
  const auto cat = specmodel::build_catalog(s.molecule, s.branches, s.j_max, s.beta2_half);
  write_text(cfg.output.catalog_csv, specmodel::to_csv(cat));
  json j = specmodel::to_json(cat);
  j["meta"] = meta_block(&cfg);
  write_text(cfg.output.catalog_json, j.dump(2) + "\n");
  out << "catalog: " << cat.lines.size() << " lines -> " << cfg.output.catalog_csv << ", "
      << cfg.output.catalog_json << '\n';
  return kOk;
}

int run_synth(const std::string& config_path, std::ostream& out) {
  const auto cfg = checked_config(config_path);
  const auto prepared = bounds::prepare(cfg.scenario);
  const auto spectrum = bounds::simulate(prepared, cfg.scenario.seed);
  synth::write_spectrum(spectrum, cfg.output.spectrum_csv, cfg.output.spectrum_json,
                        meta_block(&cfg));
  out << "synth: " << spectrum.grid.size() << " samples -> " << cfg.output.spectrum_csv << ", "
      << cfg.output.spectrum_json << '\n';
  return kOk;
}

int run_fit(const std::string& config_path, const std::string& spectrum_csv,
            const std::string& sidecar, std::ostream& out) {
  const auto cfg = checked_config(config_path);
  const auto spectrum =
      synth::read_spectrum(spectrum_csv.empty() ? cfg.output.spectrum_csv : spectrum_csv,
                           sidecar.empty() ? cfg.output.spectrum_json : sidecar);
  const auto prepared = bounds::prepare(cfg.scenario);
  const auto report = bounds::analyze(spectrum, prepared);
  json j = bounds::to_json(report);
  j["meta"] = meta_block(&cfg);
  write_text(cfg.output.report_json, j.dump(2) + "\n");
  out << report.summary() << '\n';
  return kOk;
}

int run_calibrate(const std::string& config_path, std::optional<int> trials, std::ostream& out) {
  auto cfg = checked_config(config_path);
  if (trials) {
    cfg.calibrate_trials = *trials;
    cfg.validate();
  }
  const auto rep = bounds::mc_calibrate(cfg.scenario, cfg.calibrate_trials);
  json j = bounds::to_json(rep);
  j["meta"] = meta_block(&cfg);
  write_text(cfg.output.calibration_json, j.dump(2) + "\n");
  out << "coverage " << format_short(rep.coverage, 4) << " (threshold "
      << format_short(rep.coverage_threshold, 4) << ", " << rep.n_trials - rep.failures << "/"
      << rep.n_trials << " trials), median upper limit " << format_short(rep.median_upper_limit)
      << '\n';
  return rep.coverage_ok ? kOk : kComputationError;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum-statistics violation toolkit: q-deformed Fock spaces, permutation "
               "symmetry classes, forbidden-line spectra and beta^2/2 upper limits",
               kToolName};
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default run configuration");
  app.require_subcommand(0, 1);

  int gram_n = 0;
  double gram_q = 0.0, gram_tol = qfock::kEigenTolerance;
  std::string gram_csv, gram_json;
  auto* gram = app.add_subcommand("gram", "Gram matrix positivity for n quons");
  gram->add_option("--n", gram_n, "Particle number")->required();
  gram->add_option("--q", gram_q, "Deformation parameter in [-1, 1]")->required();
  gram->add_option("--tol", gram_tol, "Eigenvalue tolerance");
  gram->add_option("--csv", gram_csv, "Write the matrix as CSV");
  gram->add_option("--matrix-json", gram_json, "Write the matrix as JSON");

  int proj_n = 2;
  std::string proj_rho;
  std::optional<double> proj_beta;
  auto* project = app.add_subcommand("project", "Symmetry-class weights of a density matrix");
  project->add_option("--n", proj_n, "Particle number (2..4)");
  auto* rho_opt = project->add_option("--rho", proj_rho, "Density matrix JSON (nested [re, im])");
  project->add_option("--beta", proj_beta, "Mixture weight of the antisymmetric class")
      ->excludes(rho_opt);

  std::string config;
  std::string fit_spectrum, fit_sidecar;
  std::optional<int> trials;
  auto* catalog = app.add_subcommand("catalog", "Write the line catalog");
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic spectrum");
  auto* fit = app.add_subcommand("fit", "Fit a spectrum and write the bound report");
  auto* calibrate = app.add_subcommand("calibrate", "Monte-Carlo coverage calibration");
  for (auto* sub : {catalog, synth_cmd, fit, calibrate}) {
    sub->add_option("--config", config, "Run configuration file")->required();
  }
  fit->add_option("--spectrum", fit_spectrum, "Spectrum CSV (default: output.spectrum_csv)");
  fit->add_option("--sidecar", fit_sidecar, "Spectrum JSON sidecar (default: output.spectrum_json)");
  calibrate->add_option("--trials", trials, "Override calibrate.trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kValidationError;
  }

  try {
    if (print_config) {
      out << to_text(RunConfig{});
      return kOk;
    }
    if (*gram) return run_gram(gram_n, gram_q, gram_tol, gram_csv, gram_json, out);
    if (*project) return run_project(proj_n, proj_rho, proj_beta, out);
    if (*catalog) return run_catalog(config, out);
    if (*synth_cmd) return run_synth(config, out);
    if (*fit) return run_fit(config, fit_spectrum, fit_sidecar, out);
    if (*calibrate) return run_calibrate(config, trials, out);
    err << app.help();
    return kValidationError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputationError;
  }
}

}  // namespace spinstat::cli
