#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "anyonfock/cli.hpp"

namespace anyonfock {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::uint64_t parse_uint(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(field, item));
  if (out.empty()) throw ConfigError(field, "expected a comma-separated list");
  return out;
}

// "a,b;c,d" -> rows
std::vector<std::vector<double>> parse_matrix(const std::string& field,
                                              const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_list(field, row));
  return rows;
}

void parse_angle(const std::string& field, const std::string& text, KernelSpec& k) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  if (slash == std::string::npos) {
    k.num = parse_long(field, t);
    k.den = 1;
  } else {
    k.num = parse_long(field, t.substr(0, slash));
    k.den = parse_long(field, t.substr(slash + 1));
  }
  if (k.den == 0) throw ConfigError(field, "denominator must be nonzero");
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.suite",        "run.seed",         "run.out",          "run.format",
      "run.parallel",     "run.timings",      "grid.cells",       "grid.fiber_dim",
      "grid.total_mass",  "grid.coords",      "grid.weights",     "kernel.q_angle",
      "kernel.eta",       "fock.max_level",   "fock.entry_cap",   "model.eta",
      "model.kappa",      "model.t_block",    "sampling.samples", "sampling.threads",
      "checks.random_cases", "checks.kappas"};
  return keys;
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "keys must live inside a [section]");
    }
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      if (!known_keys().count(field)) throw ConfigError(field, "unknown key");
      const std::string v = value.data();
      if (field == "run.suite") c.suite = trim(v);
      else if (field == "run.seed") c.seed = parse_uint(field, v);
      else if (field == "run.out") c.out_dir = trim(v);
      else if (field == "run.format") c.format = trim(v);
      else if (field == "run.parallel") c.parallel = parse_bool(field, v);
      else if (field == "run.timings") c.timings = parse_bool(field, v);
      else if (field == "grid.cells") c.grid.cells = parse_uint(field, v);
      else if (field == "grid.fiber_dim") c.grid.fiber_dim = parse_uint(field, v);
      else if (field == "grid.total_mass") c.grid.total_mass = parse_double(field, v);
      else if (field == "grid.coords") c.grid.coords = parse_list(field, v);
      else if (field == "grid.weights") c.grid.weights = parse_list(field, v);
      else if (field == "kernel.q_angle") parse_angle(field, v, c.kernel);
      else if (field == "kernel.eta") c.kernel.eta = parse_double(field, v);
      else if (field == "fock.max_level") c.max_level = parse_uint(field, v);
      else if (field == "fock.entry_cap") c.entry_cap = parse_uint(field, v);
      else if (field == "model.eta") c.model_eta = parse_double(field, v);
      else if (field == "model.kappa") c.model_kappa = parse_double(field, v);
      else if (field == "model.t_block") c.t_block = parse_matrix(field, v);
      else if (field == "sampling.samples") c.samples = parse_uint(field, v);
      else if (field == "sampling.threads") c.threads = static_cast<unsigned>(parse_uint(field, v));
      else if (field == "checks.random_cases") c.random_cases = parse_uint(field, v);
      else if (field == "checks.kappas") c.kappas = parse_list(field, v);
    }
  }
  return c;
}

}  // namespace

Grid GridSpec::build() const {
  std::vector<double> c = coords;
  std::vector<double> w = weights;
  if (c.empty()) {
    c.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) c[i] = static_cast<double>(i + 1);
  }
  if (w.empty()) w.assign(cells, total_mass / static_cast<double>(cells));
  return Grid(std::move(c), std::move(w), fiber_dim);
}

QKernel KernelSpec::build() const { return QKernel::from_angle(num, den, eta); }

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "qcr", "exclusion", "quasifree", "density", "pointproc", "gamma-limit", "all"};
  return names;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("malformed INI: ") + e.message() +
                                    " at line " + std::to_string(e.line()));
  }
  ExperimentConfig c = from_tree(tree);
  validate(c);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

void validate(const ExperimentConfig& c) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), c.suite) == names.end()) {
    throw ConfigError("run.suite", "unknown suite '" + c.suite + "'");
  }
  if (c.format != "json" && c.format != "csv") {
    throw ConfigError("run.format", "must be json or csv");
  }
  if (c.out_dir.empty()) throw ConfigError("run.out", "must not be empty");
  if (c.grid.cells == 0) throw ConfigError("grid.cells", "must be positive");
  if (c.grid.fiber_dim == 0) throw ConfigError("grid.fiber_dim", "must be positive");
  if (!(c.grid.total_mass > 0.0)) throw ConfigError("grid.total_mass", "must be positive");
  if (!c.grid.coords.empty()) {
    if (c.grid.coords.size() != c.grid.cells) {
      throw ConfigError("grid.coords", "needs exactly grid.cells values");
    }
    for (std::size_t i = 1; i < c.grid.coords.size(); ++i) {
      if (!(c.grid.coords[i] > c.grid.coords[i - 1])) {
        throw ConfigError("grid.coords", "must be strictly increasing");
      }
    }
  }
  if (!c.grid.weights.empty()) {
    if (c.grid.weights.size() != c.grid.cells) {
      throw ConfigError("grid.weights", "needs exactly grid.cells values");
    }
    for (double w : c.grid.weights) {
      if (!(w > 0.0)) throw ConfigError("grid.weights", "must all be positive");
    }
  }
  if (c.kernel.den == 0) throw ConfigError("kernel.q_angle", "denominator must be nonzero");
  if (c.max_level < 2 || c.max_level > 8) throw ConfigError("fock.max_level", "must be in 2..8");
  if (c.entry_cap == 0) throw ConfigError("fock.entry_cap", "must be positive");
  if (!(c.model_kappa > 0.0)) throw ConfigError("model.kappa", "must be positive");
  if (c.model_eta < 0.0 && !(c.model_kappa * c.model_kappa < 1.0 / -c.model_eta)) {
    throw ConfigError("model.kappa", "eta < 0 requires kappa^2 < 1/|eta|");
  }
  if (!c.t_block.empty()) {
    const std::size_t n = c.t_block.size();
    for (const auto& row : c.t_block) {
      if (row.size() != n) throw ConfigError("model.t_block", "must be a square matrix");
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(c.t_block[i][j] - c.t_block[j][i]) > 1e-12) {
          throw ConfigError("model.t_block", "must be symmetric");
        }
      }
    }
  }
  if (c.samples < 100) throw ConfigError("sampling.samples", "must be at least 100");
  if (c.threads == 0) throw ConfigError("sampling.threads", "must be positive");
  if (c.random_cases == 0) throw ConfigError("checks.random_cases", "must be positive");
  if (c.kappas.size() < 2) throw ConfigError("checks.kappas", "needs at least two values");
  for (double k : c.kappas) {
    if (!(k > 0.0)) throw ConfigError("checks.kappas", "must all be positive");
  }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["run"] = {{"suite", c.suite}, {"seed", c.seed}, {"format", c.format},
              {"parallel", c.parallel}};
  nlohmann::json grid = {{"cells", c.grid.cells},
                         {"fiber_dim", c.grid.fiber_dim},
                         {"total_mass", c.grid.total_mass}};
  if (!c.grid.coords.empty()) grid["coords"] = c.grid.coords;
  if (!c.grid.weights.empty()) grid["weights"] = c.grid.weights;
  j["grid"] = grid;
  nlohmann::json kernel = {{"q_angle", std::to_string(c.kernel.num) + "/" + std::to_string(c.kernel.den)}};
  if (c.kernel.eta) kernel["eta"] = *c.kernel.eta;
  j["kernel"] = kernel;
  j["fock"] = {{"max_level", c.max_level}, {"entry_cap", c.entry_cap}};
  nlohmann::json model = {{"eta", c.model_eta}, {"kappa", c.model_kappa}};
  if (!c.t_block.empty()) model["t_block"] = c.t_block;
  j["model"] = model;
  j["sampling"] = {{"samples", c.samples}, {"threads", c.threads}};
  j["checks"] = {{"random_cases", c.random_cases}, {"kappas", c.kappas}};
  return j;
}

}  // namespace anyonfock
