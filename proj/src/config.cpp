#include "fracheat/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "fracheat/csv.hpp"
#include "fracheat/digest.hpp"

namespace fracheat {

namespace {

const double kPi = 3.141592653589793;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_long(const std::string& s, long* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_u64(const std::string& s, std::uint64_t* out) {
  if (s.empty() || s[0] == '-') return false;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

struct Violations {
  std::vector<std::string> list;
  void add(const std::string& msg) { list.push_back(msg); }
  void raise_if_any() const {
    if (list.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& v : list) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }
};

using Section = std::map<std::string, std::string>;

const std::set<std::string> kKinds = {
    "ml-eval",   "kernel",     "simulate", "moment-scan",
    "lambda-profile", "beta-sweep", "continuity"};

// per-kind parameter schema: {name, required, is_integer, is_list}
struct ParamSpec {
  const char* name;
  bool required;
  enum { real, integer, list } type;
};

const std::vector<ParamSpec>& kind_params(const std::string& kind) {
  static const std::map<std::string, std::vector<ParamSpec>> table = {
      {"ml-eval",
       {{"beta_list", false, ParamSpec::list},
        {"x_min", false, ParamSpec::real},
        {"x_max", false, ParamSpec::real},
        {"points", false, ParamSpec::integer}}},
      {"kernel",
       {{"t", true, ParamSpec::real}, {"points", false, ParamSpec::integer}}},
      {"simulate", {{"stream", false, ParamSpec::integer}}},
      {"moment-scan", {}},
      {"lambda-profile",
       {{"beta_list", false, ParamSpec::list},
        {"lambda1", false, ParamSpec::real},
        {"theta_list", false, ParamSpec::list}}},
      {"beta-sweep",
       {{"beta_list", true, ParamSpec::list},
        {"p", false, ParamSpec::integer}}},
      {"continuity", {{"p", false, ParamSpec::integer}}}};
  return table.at(kind);
}

void check_experiment_params(ExperimentConfig& cfg, Violations& v) {
  const std::string& kind = cfg.experiment_kind;
  if (kind.empty()) {
    if (!cfg.experiment.empty())
      v.add("experiment.kind required to interpret kind-specific keys");
    return;
  }
  if (!kKinds.count(kind)) {
    v.add("experiment.kind = '" + kind +
          "' is not a known experiment (ml-eval, kernel, simulate, "
          "moment-scan, lambda-profile, beta-sweep, continuity)");
    return;
  }
  const auto& schema = kind_params(kind);
  for (const auto& [key, raw] : cfg.experiment) {
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const ParamSpec& p) { return key == p.name; });
    if (it == schema.end()) {
      v.add("unknown key experiment." + key + " for kind '" + kind + "'");
      continue;
    }
    if (it->type == ParamSpec::real) {
      double d;
      if (!parse_double(raw, &d))
        v.add("experiment." + key + " = '" + raw + "' is not a number");
      else
        cfg.experiment[key] = format_g17(d);
    } else if (it->type == ParamSpec::integer) {
      long n;
      if (!parse_long(raw, &n))
        v.add("experiment." + key + " = '" + raw + "' is not an integer");
      else
        cfg.experiment[key] = std::to_string(n);
    } else {
      std::vector<double> xs;
      try {
        xs = parse_double_list(raw);
      } catch (const std::invalid_argument&) {
        v.add("experiment." + key + " = '" + raw +
              "' is not a comma-separated number list");
        continue;
      }
      cfg.experiment[key] = render_double_list(xs);
    }
  }
  for (const auto& p : schema)
    if (p.required && !cfg.experiment.count(p.name))
      v.add("experiment." + std::string(p.name) + " required for kind '" +
            kind + "'");

  // materialize defaults so the canonical form is parse-stable
  auto put = [&](const char* key, const std::string& val) {
    if (!cfg.experiment.count(key)) cfg.experiment[key] = val;
  };
  if (kind == "ml-eval") {
    put("beta_list", render_double_list({cfg.model.beta}));
    put("x_min", format_g17(1e-3));
    put("x_max", format_g17(1e3));
    put("points", "40");
  } else if (kind == "kernel") {
    put("points", "33");
  } else if (kind == "simulate") {
    put("stream", "0");
  } else if (kind == "lambda-profile") {
    put("beta_list", render_double_list({cfg.model.beta}));
    double lam1 = kPi / cfg.model.domain.length;
    put("lambda1", format_g17(lam1 * lam1));
    put("theta_list",
        render_double_list({1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}));
  } else if (kind == "beta-sweep") {
    put("p", "2");
  } else if (kind == "continuity") {
    put("p", "2");
  }

  // domain checks on the now-canonical values
  auto get_real = [&](const char* key) {
    double d = 0.0;
    parse_double(cfg.experiment.at(key), &d);
    return d;
  };
  auto get_int = [&](const char* key) {
    long n = 0;
    parse_long(cfg.experiment.at(key), &n);
    return n;
  };
  auto check_betas = [&](const char* key) {
    if (!cfg.experiment.count(key)) return;
    auto xs = parse_double_list(cfg.experiment.at(key));
    if (xs.empty()) v.add("experiment." + std::string(key) + " is empty");
    for (double b : xs)
      if (!(b > 0.0 && b <= 1.0)) {
        v.add("experiment." + std::string(key) + " entry " + format_g17(b) +
              " outside (0, 1]");
        break;
      }
  };
  if (kind == "ml-eval" && cfg.experiment.count("x_min") &&
      cfg.experiment.count("x_max") && cfg.experiment.count("points")) {
    check_betas("beta_list");
    if (!(get_real("x_min") > 0.0))
      v.add("experiment.x_min must be positive");
    if (!(get_real("x_max") > get_real("x_min")))
      v.add("experiment.x_max must exceed x_min");
    if (get_int("points") < 2) v.add("experiment.points must be >= 2");
  } else if (kind == "kernel" && cfg.experiment.count("t")) {
    if (!(get_real("t") > 0.0)) v.add("experiment.t must be positive");
    if (get_int("points") < 2) v.add("experiment.points must be >= 2");
  } else if (kind == "simulate") {
    if (get_int("stream") < 0) v.add("experiment.stream must be >= 0");
  } else if (kind == "lambda-profile") {
    check_betas("beta_list");
    if (!(get_real("lambda1") > 0.0))
      v.add("experiment.lambda1 must be positive");
    if (cfg.experiment.count("theta_list"))
      for (double th : parse_double_list(cfg.experiment.at("theta_list")))
        if (!(th > 0.0)) {
          v.add("experiment.theta_list entries must be positive");
          break;
        }
  } else if (kind == "beta-sweep") {
    if (cfg.experiment.count("beta_list")) check_betas("beta_list");
    long p = get_int("p");
    if (p < 2 || p % 2 != 0) v.add("experiment.p must be even and >= 2");
  } else if (kind == "continuity") {
    long p = get_int("p");
    if (p < 2 || p % 2 != 0) v.add("experiment.p must be even and >= 2");
  }
}

void check_semantics(ExperimentConfig& cfg, Violations& v) {
  const ModelSpec& m = cfg.model;
  if (!(m.beta > 0.0 && m.beta <= 1.0))
    v.add("model.beta = " + format_g17(m.beta) + " outside (0, 1]");
  if (!(m.lambda_level >= 0.0) || !std::isfinite(m.lambda_level))
    v.add("model.lambda = " + format_g17(m.lambda_level) +
          " outside [0, inf)");
  if (!(m.domain.length > 0.0) || !std::isfinite(m.domain.length))
    v.add("model.length = " + format_g17(m.domain.length) +
          " outside (0, inf)");
  if (m.domain.n_modes < 1)
    v.add("model.n_modes = " + std::to_string(m.domain.n_modes) +
          " outside [1, inf)");
  if (!(m.kernel_tol > 0.0))
    v.add("model.kernel_tol = " + format_g17(m.kernel_tol) +
          " outside (0, inf)");
  if (!std::isfinite(m.sigma.c))
    v.add("model.sigma_c must be finite");
  if (m.domain.length > 0.0) {
    try {
      m.u0.validate(m.domain.length);
    } catch (const std::invalid_argument& e) {
      v.add(std::string("model.u0: ") + e.what());
    }
  }
  try {
    cfg.grid.validate();
  } catch (const std::invalid_argument& e) {
    v.add(std::string("grid: ") + e.what());
  }
  if (cfg.replicas < 1)
    v.add("mc.replicas = " + std::to_string(cfg.replicas) +
          " outside [1, inf)");
  try {
    cfg.eval.validate();
  } catch (const std::invalid_argument& e) {
    v.add(std::string("eval: ") + e.what());
  }
  if (cfg.output_dir.empty()) v.add("output.dir must not be empty");
  check_experiment_params(cfg, v);
}

}  // namespace

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string item =
        trim(comma == std::string::npos ? csv.substr(pos)
                                        : csv.substr(pos, comma - pos));
    if (item.empty())
      throw std::invalid_argument("empty entry in number list");
    double v;
    if (!parse_double(item, &v))
      throw std::invalid_argument("bad number '" + item + "' in list");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string render_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_g17(values[i]);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  Violations v;
  std::map<std::string, Section> doc;
  std::string current;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  const std::set<std::string> known_sections = {"model", "grid",  "mc",
                                                "eval",  "experiment", "output"};
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        v.add("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      current = trim(s.substr(1, s.size() - 2));
      if (!known_sections.count(current)) {
        v.add("unknown section [" + current + "]");
        current = "\x01skip";  // swallow its keys without further noise
      }
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      v.add("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    if (current == "\x01skip") continue;
    if (current.empty()) {
      v.add("line " + std::to_string(lineno) + ": key outside any section");
      continue;
    }
    doc[current][trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }

  ExperimentConfig cfg;

  auto take_real = [&](const char* sec, const char* key, double* dst) {
    auto si = doc.find(sec);
    if (si == doc.end()) return;
    auto ki = si->second.find(key);
    if (ki == si->second.end()) return;
    double d;
    if (!parse_double(ki->second, &d))
      v.add(std::string(sec) + "." + key + " = '" + ki->second +
            "' is not a number");
    else
      *dst = d;
    si->second.erase(ki);
  };
  auto take_long = [&](const char* sec, const char* key, long* dst) {
    auto si = doc.find(sec);
    if (si == doc.end()) return;
    auto ki = si->second.find(key);
    if (ki == si->second.end()) return;
    long n;
    if (!parse_long(ki->second, &n))
      v.add(std::string(sec) + "." + key + " = '" + ki->second +
            "' is not an integer");
    else
      *dst = n;
    si->second.erase(ki);
  };
  auto take_string = [&](const char* sec, const char* key, std::string* dst) {
    auto si = doc.find(sec);
    if (si == doc.end()) return false;
    auto ki = si->second.find(key);
    if (ki == si->second.end()) return false;
    *dst = ki->second;
    si->second.erase(ki);
    return true;
  };

  take_real("model", "beta", &cfg.model.beta);
  take_real("model", "lambda", &cfg.model.lambda_level);
  take_real("model", "length", &cfg.model.domain.length);
  take_long("model", "n_modes", &cfg.model.domain.n_modes);
  take_real("model", "kernel_tol", &cfg.model.kernel_tol);
  double sigma_c = cfg.model.sigma.c;
  take_real("model", "sigma_c", &sigma_c);
  cfg.model.sigma = SigmaSpec::linear_sigma(sigma_c);
  std::string u0_kind;
  if (take_string("model", "u0", &u0_kind)) {
    if (u0_kind == "mode")
      cfg.model.u0.kind = InitialCondition::Kind::mode;
    else if (u0_kind == "bump")
      cfg.model.u0.kind = InitialCondition::Kind::bump;
    else if (u0_kind == "tabulated")
      cfg.model.u0.kind = InitialCondition::Kind::tabulated;
    else
      v.add("model.u0 = '" + u0_kind + "' (admissible: mode, bump, tabulated)");
  }
  take_real("model", "u0_amplitude", &cfg.model.u0.amplitude);
  long mode_index = cfg.model.u0.mode_index;
  take_long("model", "u0_mode_index", &mode_index);
  cfg.model.u0.mode_index = static_cast<int>(mode_index);
  take_real("model", "u0_center", &cfg.model.u0.center);
  take_real("model", "u0_half_width", &cfg.model.u0.half_width);
  std::string table_text;
  if (take_string("model", "u0_table", &table_text)) {
    try {
      cfg.model.u0.table = parse_double_list(table_text);
    } catch (const std::invalid_argument& e) {
      v.add(std::string("model.u0_table: ") + e.what());
    }
  }

  take_long("grid", "n_cells", &cfg.grid.n_cells_J);
  take_real("grid", "dt", &cfg.grid.dt);
  take_real("grid", "t_final", &cfg.grid.t_final);

  take_long("mc", "replicas", &cfg.replicas);
  std::string seed_text;
  if (take_string("mc", "seed", &seed_text)) {
    if (!parse_u64(seed_text, &cfg.seed))
      v.add("mc.seed = '" + seed_text + "' is not an unsigned integer");
  } else {
    v.add("mc.seed required");
  }

  take_real("eval", "series_cutoff", &cfg.eval.series_cutoff);
  take_real("eval", "asymptotic_cutoff", &cfg.eval.asymptotic_cutoff);
  long terms = cfg.eval.series_terms_max;
  take_long("eval", "series_terms_max", &terms);
  cfg.eval.series_terms_max = static_cast<int>(terms);
  take_real("eval", "quadrature_abs_tol", &cfg.eval.quadrature_abs_tol);
  take_real("eval", "quadrature_rel_tol", &cfg.eval.quadrature_rel_tol);

  take_string("experiment", "kind", &cfg.experiment_kind);
  if (doc.count("experiment"))
    for (const auto& [key, value] : doc["experiment"])
      cfg.experiment[key] = value;
  doc.erase("experiment");

  take_string("output", "dir", &cfg.output_dir);

  for (const auto& [sec, keys] : doc)
    for (const auto& [key, value] : keys)
      v.add("unknown key " + sec + "." + key);

  check_semantics(cfg, v);
  v.raise_if_any();
  return cfg;
}

void validate_config(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  Violations v;
  check_semantics(copy, v);
  v.raise_if_any();
}

std::string serialize_config(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  {
    // materialize kind defaults so serialization is a parse fixed point
    Violations v;
    check_experiment_params(cfg, v);
  }
  std::ostringstream os;
  os << "[model]\n";
  os << "beta = " << format_g17(cfg.model.beta) << "\n";
  os << "lambda = " << format_g17(cfg.model.lambda_level) << "\n";
  os << "length = " << format_g17(cfg.model.domain.length) << "\n";
  os << "n_modes = " << cfg.model.domain.n_modes << "\n";
  os << "kernel_tol = " << format_g17(cfg.model.kernel_tol) << "\n";
  os << "sigma_c = " << format_g17(cfg.model.sigma.c) << "\n";
  const char* kinds[] = {"mode", "bump", "tabulated"};
  os << "u0 = " << kinds[static_cast<int>(cfg.model.u0.kind)] << "\n";
  os << "u0_amplitude = " << format_g17(cfg.model.u0.amplitude) << "\n";
  os << "u0_mode_index = " << cfg.model.u0.mode_index << "\n";
  os << "u0_center = " << format_g17(cfg.model.u0.center) << "\n";
  os << "u0_half_width = " << format_g17(cfg.model.u0.half_width) << "\n";
  if (!cfg.model.u0.table.empty())
    os << "u0_table = " << render_double_list(cfg.model.u0.table) << "\n";
  os << "\n[grid]\n";
  os << "n_cells = " << cfg.grid.n_cells_J << "\n";
  os << "dt = " << format_g17(cfg.grid.dt) << "\n";
  os << "t_final = " << format_g17(cfg.grid.t_final) << "\n";
  os << "\n[mc]\n";
  os << "replicas = " << cfg.replicas << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "\n[eval]\n";
  os << "series_cutoff = " << format_g17(cfg.eval.series_cutoff) << "\n";
  os << "asymptotic_cutoff = " << format_g17(cfg.eval.asymptotic_cutoff)
     << "\n";
  os << "series_terms_max = " << cfg.eval.series_terms_max << "\n";
  os << "quadrature_abs_tol = " << format_g17(cfg.eval.quadrature_abs_tol)
     << "\n";
  os << "quadrature_rel_tol = " << format_g17(cfg.eval.quadrature_rel_tol)
     << "\n";
  if (!cfg.experiment_kind.empty()) {
    os << "\n[experiment]\n";
    os << "kind = " << cfg.experiment_kind << "\n";
    if (kKinds.count(cfg.experiment_kind))
      for (const auto& p : kind_params(cfg.experiment_kind))
        if (cfg.experiment.count(p.name))
          os << p.name << " = " << cfg.experiment.at(p.name) << "\n";
  }
  os << "\n[output]\n";
  os << "dir = " << cfg.output_dir << "\n";
  return os.str();
}

std::string config_digest(const ExperimentConfig& config) {
  return sha256_hex(serialize_config(config));
}

}  // namespace fracheat
