#include "spinstat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "spinstat/errors.hpp"
#include "spinstat/rng.hpp"

namespace spinstat::cli {

namespace {

using specmodel::ElectronicParity;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not a number");
  }
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValidationError("config key '" + key + "': expected true or false, got '" + v + "'");
}

struct Field {
  const char* section;
  const char* key;
  const char* comment;  // may be empty
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define NUM_FIELD(sec, name, member, note)                                                  \
  Field {                                                                                  \
    sec, name, note, [](const RunConfig& c) { return fmt(c.member); },                     \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); } \
  }

#define INT_FIELD(sec, name, member, type, note)                                            \
  Field {                                                                                  \
    sec, name, note, [](const RunConfig& c) { return std::to_string(c.member); },          \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_int<type>(k, v); } \
  }

#define STR_FIELD(sec, name, member, note)                                                  \
  Field {                                                                                  \
    sec, name, note, [](const RunConfig& c) { return quote(c.member); },                   \
        [](RunConfig& c, const std::string&, const std::string& v) { c.member = v; }       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      STR_FIELD("molecule", "name", scenario.molecule.name, ""),
      Field{"molecule", "electronic_parity", "symmetric | antisymmetric",
            [](const RunConfig& c) {
              return quote(c.scenario.molecule.electronic_parity == ElectronicParity::Symmetric
                               ? "symmetric"
                               : "antisymmetric");
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "symmetric") {
                c.scenario.molecule.electronic_parity = ElectronicParity::Symmetric;
              } else if (v == "antisymmetric") {
                c.scenario.molecule.electronic_parity = ElectronicParity::Antisymmetric;
              } else {
                throw ValidationError("config key '" + k + "': expected symmetric or antisymmetric");
              }
            }},
      INT_FIELD("molecule", "nuclear_spin", scenario.molecule.nuclear_spin, int, ""),
      NUM_FIELD("molecule", "B_lower", scenario.molecule.b_lower, "cm^-1"),
      NUM_FIELD("molecule", "B_upper", scenario.molecule.b_upper, "cm^-1"),
      NUM_FIELD("molecule", "D_lower", scenario.molecule.d_lower, "cm^-1"),
      NUM_FIELD("molecule", "D_upper", scenario.molecule.d_upper, "cm^-1"),
      NUM_FIELD("molecule", "nu0", scenario.molecule.nu0, "band origin, cm^-1"),
      NUM_FIELD("molecule", "T", scenario.molecule.temperature, "K"),

      Field{"catalog", "branches", "R, P or PR",
            [](const RunConfig& c) {
              std::string s;
              if (c.scenario.branches.p) s += 'P';
              if (c.scenario.branches.r) s += 'R';
              return quote(s);
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v != "R" && v != "P" && v != "PR" && v != "RP") {
                throw ValidationError("config key '" + k + "': expected R, P or PR");
              }
              c.scenario.branches.p = v.find('P') != std::string::npos;
              c.scenario.branches.r = v.find('R') != std::string::npos;
            }},
      INT_FIELD("catalog", "J_max", scenario.j_max, int, ""),
      NUM_FIELD("catalog", "beta2_half", scenario.beta2_half, "injected violation parameter"),

      NUM_FIELD("synth", "gaussian_hwhm", scenario.shape.gaussian_hwhm, "cm^-1"),
      NUM_FIELD("synth", "lorentzian_hwhm", scenario.shape.lorentzian_hwhm, "cm^-1"),
      NUM_FIELD("synth", "column", scenario.column, "concentration x pathlength, arbitrary units"),
      NUM_FIELD("synth", "snr", scenario.snr, "transmittance noise sigma = 1/snr"),
      INT_FIELD("synth", "seed", scenario.seed, std::uint64_t, ""),
      INT_FIELD("synth", "n_average", scenario.n_average, int, "spectra averaged before fitting"),
      NUM_FIELD("synth", "grid_min", scenario.grid_min, "grid_min = grid_max = 0 selects the catalog range"),
      NUM_FIELD("synth", "grid_max", scenario.grid_max, ""),
      NUM_FIELD("synth", "grid_step", scenario.grid_step, "0 selects gaussian_hwhm / 5"),

      NUM_FIELD("fit", "CL", scenario.cl, "one-sided confidence level"),
      INT_FIELD("fit", "baseline_degree", scenario.baseline_degree, int, "0..3"),
      Field{"fit", "fit_shape", "fit a common width scale factor",
            [](const RunConfig& c) { return std::string(c.scenario.fit_shape ? "true" : "false"); },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.scenario.fit_shape = to_bool(k, v);
            }},

      INT_FIELD("calibrate", "trials", calibrate_trials, int, ">= 100"),

      STR_FIELD("output", "catalog_csv", output.catalog_csv, ""),
      STR_FIELD("output", "catalog_json", output.catalog_json, ""),
      STR_FIELD("output", "spectrum_csv", output.spectrum_csv, ""),
      STR_FIELD("output", "spectrum_json", output.spectrum_json, ""),
      STR_FIELD("output", "report_json", output.report_json, ""),
      STR_FIELD("output", "calibration_json", output.calibration_json, ""),
  };
  return table;
}

#undef NUM_FIELD
#undef INT_FIELD
#undef STR_FIELD

void check_writable(const std::string& path) {
  if (path.empty()) throw ValidationError("output path is empty");
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw ValidationError("output directory does not exist: " + parent.string());
  }
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  if (calibrate_trials < 100) throw ValidationError("calibrate.trials must be >= 100");
  for (const auto* p : {&output.catalog_csv, &output.catalog_json, &output.spectrum_csv,
                        &output.spectrum_json, &output.report_json, &output.calibration_json}) {
    check_writable(*p);
  }
}

std::string to_text(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    if (*f.comment) os << "# " << f.comment << '\n';
    os << f.key << " = " << f.get(c) << '\n';
  }
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream is(text);
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ValidationError("config: key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) {
        return section == f.section && key == f.key;
      });
      if (it == fields().end()) {
        throw ValidationError("config: unknown key '" + section + "." + key + "'");
      }
      it->set(c, section + "." + key, unquote(value.data()));
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string config_hash(const RunConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_text(c))));
  return buf;
}

}  // namespace spinstat::cli
