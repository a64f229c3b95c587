#include "sprelax/config.hpp"

#include "sprelax/assembly.hpp"
#include "sprelax/errors.hpp"
#include "sprelax/verification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sprelax {

CosmoParams RunConfig::make_cosmo_params() const {
  CosmoParams c;
  c.tau_i = t_start;
  c.tau_f = t_end;
  c.beta = params.beta;
  c.epsilon = params.epsilon;
  c.steps = steps;
  c.sigma = filter_sigma;
  if (!frame_taus.empty()) c.frame_taus = frame_taus;
  return c;
}

namespace {

struct RawConfig {
  // section -> key -> (value, consumed)
  std::map<std::string, std::map<std::string, std::pair<std::string, bool>>> data;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class ConfigReader {
public:
  ConfigReader(RawConfig& raw, std::vector<std::string>& errors)
      : raw_(&raw), errors_(&errors) {}

  bool has(const std::string& section, const std::string& key) {
    auto s = raw_->data.find(section);
    if (s == raw_->data.end()) return false;
    return s->second.count(key) > 0;
  }

  std::optional<std::string> take(const std::string& section, const std::string& key) {
    auto s = raw_->data.find(section);
    if (s == raw_->data.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    k->second.second = true;
    return k->second.first;
  }

  void error(const std::string& msg) { errors_->push_back(msg); }

  double require_double(const std::string& sec, const std::string& key, double fallback = 0.0) {
    auto v = take(sec, key);
    if (!v) {
      error("missing required key: [" + sec + "] " + key);
      return fallback;
    }
    return parse_double(sec, key, *v, fallback);
  }

  double optional_double(const std::string& sec, const std::string& key, double fallback) {
    auto v = take(sec, key);
    if (!v) return fallback;
    return parse_double(sec, key, *v, fallback);
  }

  int require_int(const std::string& sec, const std::string& key, int fallback = 0) {
    auto v = take(sec, key);
    if (!v) {
      error("missing required key: [" + sec + "] " + key);
      return fallback;
    }
    return parse_int(sec, key, *v, fallback);
  }

  int optional_int(const std::string& sec, const std::string& key, int fallback) {
    auto v = take(sec, key);
    if (!v) return fallback;
    return parse_int(sec, key, *v, fallback);
  }

  std::string optional_string(const std::string& sec, const std::string& key,
                              const std::string& fallback) {
    auto v = take(sec, key);
    return v ? *v : fallback;
  }

  bool optional_bool(const std::string& sec, const std::string& key, bool fallback) {
    auto v = take(sec, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "on" || *v == "1") return true;
    if (*v == "false" || *v == "off" || *v == "0") return false;
    error("invalid boolean for [" + sec + "] " + key + ": '" + *v + "'");
    return fallback;
  }

  std::vector<double> optional_double_list(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    std::vector<double> out;
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse_double(sec, key, item, 0.0));
    }
    return out;
  }

  std::vector<int> optional_int_list(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    std::vector<int> out;
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse_int(sec, key, item, 0));
    }
    return out;
  }

  void report_unconsumed() {
    for (const auto& [sec, keys] : raw_->data)
      for (const auto& [key, val] : keys)
        if (!val.second)
          error("unknown key: [" + sec + "] " + key);
  }

private:
  double parse_double(const std::string& sec, const std::string& key, const std::string& v,
                      double fallback) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return x;
    } catch (const std::exception&) {
      error("invalid number for [" + sec + "] " + key + ": '" + v + "'");
      return fallback;
    }
  }

  int parse_int(const std::string& sec, const std::string& key, const std::string& v,
                int fallback) {
    try {
      std::size_t pos = 0;
      const long x = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing characters");
      return static_cast<int>(x);
    } catch (const std::exception&) {
      error("invalid integer for [" + sec + "] " + key + ": '" + v + "'");
      return fallback;
    }
  }

  RawConfig* raw_;
  std::vector<std::string>* errors_;
};

const std::set<std::string> kKnownSections = {"",        "domain", "grid",      "time",
                                              "physics", "solver", "output",    "ic",
                                              "filter",  "eoc"};

} // namespace

ParseOutcome parse_config(const std::string& text) {
  ParseOutcome out;
  RawConfig raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        out.errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!kKnownSections.count(section))
        out.errors.push_back("unknown section: [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      out.errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      out.errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (!kKnownSections.count(section)) continue; // already reported
    if (raw.data[section].count(key))
      out.errors.push_back("duplicate key: [" + section + "] " + key);
    raw.data[section][key] = {value, false};
  }

  ConfigReader rd(raw, out.errors);
  RunConfig cfg;

  const std::string problem = rd.optional_string("", "problem", "");
  if (problem.empty()) {
    rd.error("missing required key: problem (mms | conservation | cosmology | custom)");
  } else if (problem == "mms") {
    cfg.problem = ProblemKind::Mms;
  } else if (problem == "conservation") {
    cfg.problem = ProblemKind::Conservation;
  } else if (problem == "cosmology") {
    cfg.problem = ProblemKind::Cosmology;
  } else if (problem == "custom") {
    cfg.problem = ProblemKind::Custom;
  } else {
    rd.error("unknown problem kind: '" + problem + "'");
  }
  const bool is_cosmo = (problem == "cosmology");

  cfg.domain.xmin = rd.require_double("domain", "xmin", -1.0);
  cfg.domain.xmax = rd.require_double("domain", "xmax", 1.0);
  cfg.domain.ymin = rd.require_double("domain", "ymin", -1.0);
  cfg.domain.ymax = rd.require_double("domain", "ymax", 1.0);
  if (!(cfg.domain.xmax > cfg.domain.xmin) || !(cfg.domain.ymax > cfg.domain.ymin))
    rd.error("[domain] must satisfy xmax > xmin and ymax > ymin");

  cfg.nx = rd.require_int("grid", "nx", 1);
  cfg.ny = rd.require_int("grid", "ny", 1);
  cfg.degree = rd.require_int("grid", "degree", 1);
  const std::string bc = rd.optional_string("grid", "bc", "");
  if (bc.empty()) {
    rd.error("missing required key: [grid] bc (dirichlet | periodic)");
  } else if (bc == "dirichlet") {
    cfg.bc = BcKind::Dirichlet;
  } else if (bc == "periodic") {
    cfg.bc = BcKind::Periodic;
  } else {
    rd.error("invalid [grid] bc: '" + bc + "' (expected dirichlet or periodic)");
  }
  if (cfg.nx < 1 || cfg.ny < 1) rd.error("[grid] nx and ny must be >= 1");
  if (cfg.degree < 1) rd.error("[grid] degree must be >= 1");

  cfg.t_start = rd.optional_double("time", "t_start", 0.0);
  cfg.t_end = rd.require_double("time", "t_end", 1.0);
  const bool has_steps = rd.has("time", "steps");
  const bool has_k = rd.has("time", "k");
  if (has_steps && has_k) {
    rd.error("[time] give either steps or k, not both");
    (void)rd.take("time", "steps");
    (void)rd.take("time", "k");
  } else if (has_steps) {
    cfg.steps = rd.require_int("time", "steps", 1);
    if (cfg.steps < 1) rd.error("[time] steps must be >= 1");
  } else if (has_k) {
    const double k = rd.require_double("time", "k", 1.0);
    if (!(k > 0.0)) {
      rd.error("[time] k must be positive");
    } else {
      const double raw_steps = (cfg.t_end - cfg.t_start) / k;
      const int steps = static_cast<int>(std::lround(raw_steps));
      if (steps < 1 || std::abs(steps - raw_steps) > 1e-8 * std::max(1.0, raw_steps))
        rd.error("[time] k must divide the interval into a whole number of steps");
      else
        cfg.steps = steps;
    }
  } else {
    rd.error("missing required key: [time] steps (or k)");
  }
  if (!(cfg.t_end > cfg.t_start)) rd.error("[time] t_end must exceed t_start");

  cfg.params.alpha = is_cosmo ? rd.optional_double("physics", "alpha", 1.0)
                              : rd.require_double("physics", "alpha", 1.0);
  cfg.params.beta = rd.require_double("physics", "beta", 0.0);
  cfg.params.epsilon = rd.require_double("physics", "epsilon", 1.0);
  if (!(cfg.params.alpha > 0.0)) rd.error("[physics] alpha must be positive");
  if (!(cfg.params.epsilon > 0.0)) rd.error("[physics] epsilon must be positive");

  cfg.solver.mass_tol = rd.optional_double("solver", "mass_tol", 1e-13);
  cfg.solver.poisson_tol = rd.optional_double("solver", "poisson_tol", 1e-12);
  cfg.solver.wave_tol = rd.optional_double("solver", "wave_tol", 1e-12);
  cfg.solver.max_iter = rd.optional_int("solver", "max_iter", 200000);

  cfg.output_dir = rd.optional_string("output", "directory", "out");
  cfg.snapshot_times = rd.optional_double_list("output", "snapshots");
  cfg.log_invariants = rd.optional_bool("output", "log_invariants", true);
  cfg.lemma_residuals = rd.optional_bool("output", "lemma_residuals", false);

  cfg.ic_kind = rd.optional_string("ic", "kind", "");
  cfg.ic_amplitude = rd.optional_double("ic", "amplitude", 0.1);
  cfg.ic_phase_amplitude = rd.optional_double("ic", "phase_amplitude", 0.0);
  cfg.normalize_mass = rd.optional_bool("ic", "normalize", false);

  cfg.filter_sigma = rd.optional_double("filter", "sigma", is_cosmo ? 0.0035 : 0.0);
  cfg.frame_taus = rd.optional_double_list("filter", "frame_taus");
  if (cfg.filter_sigma < 0.0) rd.error("[filter] sigma must be >= 0");

  cfg.eoc_nx = rd.optional_int_list("eoc", "nx_levels");
  cfg.eoc_k = rd.optional_double_list("eoc", "k_levels");
  cfg.eoc_steps = rd.optional_int("eoc", "steps", 2000);
  cfg.eoc_nx_time = rd.optional_int("eoc", "nx_time", 32);
  cfg.eoc_degree_time = rd.optional_int("eoc", "degree_time", 5);

  rd.report_unconsumed();

  // Cross-field consistency.
  if (is_cosmo) {
    if (cfg.bc != BcKind::Periodic)
      rd.error("cosmology runs require [grid] bc = periodic");
    if (!(cfg.t_start > 0.0)) rd.error("cosmology runs require [time] t_start = tau_i > 0");
  }
  if (cfg.log_invariants && cfg.params.beta == 0.0 &&
      (cfg.problem == ProblemKind::Conservation || cfg.problem == ProblemKind::Cosmology))
    rd.error("energy logging needs beta != 0; set [output] log_invariants = false");
  if (cfg.bc == BcKind::Periodic && (cfg.nx < 2 || cfg.ny < 2))
    rd.error("[grid] periodic needs nx, ny >= 2");

  // Default initial-condition kinds per problem.
  if (cfg.ic_kind.empty()) {
    switch (cfg.problem) {
      case ProblemKind::Mms: cfg.ic_kind = "mms"; break;
      case ProblemKind::Conservation: cfg.ic_kind = "trig_bump"; break;
      case ProblemKind::Cosmology: cfg.ic_kind = "sine_perturbation"; break;
      case ProblemKind::Custom: cfg.ic_kind = "trig_bump"; break;
    }
  }
  static const std::set<std::string> kIcKinds = {"mms", "trig_bump", "uniform",
                                                 "sine_perturbation"};
  if (!kIcKinds.count(cfg.ic_kind)) rd.error("unknown [ic] kind: '" + cfg.ic_kind + "'");

  if (!out.errors.empty()) return out;
  if (cfg.snapshot_times.empty()) cfg.snapshot_times = {cfg.t_start, cfg.t_end};
  out.config = std::move(cfg);
  return out;
}

ParseOutcome parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseOutcome out;
    out.errors.push_back("cannot open config file: " + path);
    return out;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::function<cplx(double, double)> make_initial_condition(const RunConfig& cfg,
                                                           const Grid& grid) {
  std::function<cplx(double, double)> u0;
  if (cfg.ic_kind == "mms") {
    const MmsCase mms = make_mms_case();
    u0 = [u = mms.u](double x, double y) { return u(x, y, 0.0); };
  } else if (cfg.ic_kind == "trig_bump") {
    u0 = [](double x, double y) {
      const double bump = (1.0 - x * x) * (1.0 - x * x) * (1.0 - y * y) * (1.0 - y * y);
      return cplx(std::sin(x), std::cos(y)) * bump;
    };
  } else if (cfg.ic_kind == "uniform") {
    u0 = [](double, double) { return cplx(1.0, 0.0); };
  } else if (cfg.ic_kind == "sine_perturbation") {
    const double amp = cfg.ic_amplitude;
    const double phase_amp = cfg.ic_phase_amplitude;
    const double eps = cfg.params.epsilon;
    const double wx = 2.0 * M_PI / grid.domain.width();
    const double wy = 2.0 * M_PI / grid.domain.height();
    u0 = [=](double x, double y) {
      const double dens =
          1.0 + amp * (std::cos(wx * (x - grid.domain.xmin)) +
                       std::cos(wy * (y - grid.domain.ymin)));
      const double phase = phase_amp / eps *
                           (std::cos(wx * (x - grid.domain.xmin)) +
                            std::cos(wy * (y - grid.domain.ymin)));
      return std::sqrt(std::max(dens, 0.0)) * std::exp(cplx(0.0, phase));
    };
  } else {
    throw ConfigurationError("make_initial_condition: unknown ic kind '" + cfg.ic_kind + "'");
  }

  if (cfg.normalize_mass) {
    const Workspace ws(grid);
    const double raw = integrate(ws, [&](double x, double y) { return std::norm(u0(x, y)); });
    if (!(raw > 0.0)) throw ConfigurationError("normalize: initial datum has zero mass");
    const double scale = std::sqrt(grid.domain.area() / raw);
    return [u0, scale](double x, double y) { return scale * u0(x, y); };
  }
  return u0;
}

} // namespace sprelax
