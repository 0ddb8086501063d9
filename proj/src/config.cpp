#include "slip/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "slip/error.hpp"
#include "slip/format.hpp"

namespace slip {

PdeSetup RunConfig::pde() const {
  PdeSetup s;
  s.eps = eps;
  s.b = {bx, by};
  s.state_grid = GridSpec(state_nx, state_ny);
  s.peclet_limit = peclet_limit;
  return s;
}

SlipConfig RunConfig::slip() const {
  SlipConfig s;
  s.delta0 = delta0;
  s.sigma = sigma;
  s.delta_min = delta_min;
  s.max_outer = max_outer;
  s.node_limit = node_limit;
  s.seed = seed;
  return s;
}

namespace {

const std::vector<std::string> kRequired = {"grid.nx", "grid.ny", "state.nx", "state.ny", "pde.eps", "pde.bx",
                                            "pde.by",  "labels",  "alpha",    "delta0",   "sigma",   "max_outer"};
const std::set<std::string> kOptional = {"delta_min", "seed", "node_limit", "pde.peclet_limit", "ydata.path",
                                         "ydata.reference_control.path", "v0.path", "v0.constant"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(const std::map<std::string, Entry>& entries, std::vector<std::string>& errors)
      : entries_(entries), errors_(errors) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::optional<long long> integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Entry& e = entries_.at(key);
    long long v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc{} || p != end) {
      fail(key, "expected an integer, got '" + e.value + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> real(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Entry& e = entries_.at(key);
    double v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc{} || p != end || !std::isfinite(v)) {
      fail(key, "expected a finite number, got '" + e.value + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::vector<int>> int_list(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Entry& e = entries_.at(key);
    std::vector<int> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      int v = 0;
      const char* end = item.data() + item.size();
      auto [p, ec] = std::from_chars(item.data(), end, v);
      if (item.empty() || ec != std::errc{} || p != end) {
        fail(key, "expected comma-separated integers, got '" + e.value + "'");
        return std::nullopt;
      }
      out.push_back(v);
    }
    return out;
  }

  std::optional<std::string> text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return entries_.at(key).value;
  }

  void fail(const std::string& key, const std::string& msg) {
    auto it = entries_.find(key);
    std::string where = it != entries_.end() ? "line " + std::to_string(it->second.line) + ": " : "";
    errors_.push_back(where + key + ": " + msg);
  }

 private:
  const std::map<std::string, Entry>& entries_;
  std::vector<std::string>& errors_;
};

}  // namespace

ConfigParse parse_config(std::string_view text) {
  ConfigParse out;
  std::vector<std::string>& errors = out.errors;
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const bool known = kOptional.count(key) || std::find(kRequired.begin(), kRequired.end(), key) != kRequired.end();
    if (!known) {
      errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      continue;
    }
    if (value.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": " + key + ": missing value");
      continue;
    }
    if (auto it = entries.find(key); it != entries.end()) {
      errors.push_back("line " + std::to_string(line_no) + ": " + key + ": duplicate key (first set on line " +
                       std::to_string(it->second.line) + ")");
      continue;
    }
    entries[key] = {value, line_no};
  }
  for (const auto& key : kRequired) {
    if (!entries.count(key)) errors.push_back("missing required key '" + key + "'");
  }

  Reader r(entries, errors);
  RunConfig cfg;
  auto positive_int = [&](const std::string& key, int& dst, int min) {
    if (auto v = r.integer(key)) {
      if (*v < min || *v > 1 << 20) {
        r.fail(key, "must be an integer >= " + std::to_string(min));
      } else {
        dst = static_cast<int>(*v);
      }
    }
  };
  positive_int("grid.nx", cfg.grid_nx, 1);
  positive_int("grid.ny", cfg.grid_ny, 1);
  positive_int("state.nx", cfg.state_nx, 1);
  positive_int("state.ny", cfg.state_ny, 2);
  if (auto v = r.real("pde.eps")) {
    if (*v <= 0) r.fail("pde.eps", "must be positive");
    cfg.eps = *v;
  }
  if (auto v = r.real("pde.bx")) cfg.bx = *v;
  if (auto v = r.real("pde.by")) cfg.by = *v;
  if (auto v = r.real("pde.peclet_limit")) {
    if (*v <= 0) r.fail("pde.peclet_limit", "must be positive");
    cfg.peclet_limit = *v;
  }
  if (auto v = r.int_list("labels")) {
    try {
      cfg.labels = LabelSet(*v).values();
    } catch (const UsageError& e) {
      r.fail("labels", e.what());
    }
  }
  if (auto v = r.real("alpha")) {
    if (*v < 0) r.fail("alpha", "must be nonnegative");
    cfg.alpha = *v;
  }
  if (auto v = r.real("delta0")) {
    if (*v <= 0) r.fail("delta0", "must be positive");
    cfg.delta0 = *v;
  }
  if (auto v = r.real("sigma")) {
    if (!(*v > 0 && *v < 1)) r.fail("sigma", "sigma must lie in (0,1)");
    cfg.sigma = *v;
  }
  if (auto v = r.real("delta_min")) {
    if (*v <= 0) r.fail("delta_min", "must be positive");
    cfg.delta_min = *v;
  }
  positive_int("max_outer", cfg.max_outer, 0);
  if (auto v = r.integer("node_limit")) {
    if (*v < 1) r.fail("node_limit", "must be a positive integer");
    cfg.node_limit = static_cast<long>(*v);
  }
  if (auto v = r.integer("seed")) {
    if (*v < 0) r.fail("seed", "must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
  cfg.ydata_path = r.text("ydata.path");
  cfg.reference_control_path = r.text("ydata.reference_control.path");
  if (cfg.ydata_path.has_value() == cfg.reference_control_path.has_value()) {
    errors.push_back("exactly one of 'ydata.path' and 'ydata.reference_control.path' must be given");
  }
  cfg.v0_path = r.text("v0.path");
  if (auto v = r.integer("v0.constant")) {
    cfg.v0_constant = static_cast<int>(*v);
    if (!cfg.labels.empty() && std::find(cfg.labels.begin(), cfg.labels.end(), *v) == cfg.labels.end()) {
      r.fail("v0.constant", "value is not one of the labels");
    }
  }
  if (cfg.v0_path.has_value() == r.has("v0.constant")) {
    errors.push_back("exactly one of 'v0.path' and 'v0.constant' must be given");
  }
  if (cfg.eps > 0 && cfg.state_nx >= 1 && cfg.state_ny >= 2 && cfg.peclet_limit > 0) {
    const double pe = mesh_peclet(cfg.pde());
    if (!(pe < cfg.peclet_limit)) {
      r.fail("state.nx", "mesh Peclet number " + format_double(pe) + " is not below " +
                             format_double(cfg.peclet_limit) + "; refine the state grid");
    }
  }
  if (errors.empty()) out.config = std::move(cfg);
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ConfigParse parsed = parse_config(ss.str());
  if (!parsed.config) {
    std::string msg = path.string() + ": invalid configuration";
    for (const auto& e : parsed.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  parsed.config->base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return *parsed.config;
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out << "grid.nx = " << c.grid_nx << "\ngrid.ny = " << c.grid_ny << "\nstate.nx = " << c.state_nx
      << "\nstate.ny = " << c.state_ny << "\npde.eps = " << format_double(c.eps) << "\npde.bx = " << format_double(c.bx)
      << "\npde.by = " << format_double(c.by) << "\npde.peclet_limit = " << format_double(c.peclet_limit)
      << "\nlabels = ";
  for (std::size_t k = 0; k < c.labels.size(); ++k) out << (k ? "," : "") << c.labels[k];
  out << "\nalpha = " << format_double(c.alpha) << "\ndelta0 = " << format_double(c.delta0)
      << "\nsigma = " << format_double(c.sigma) << "\ndelta_min = "
      << format_double(c.delta_min ? *c.delta_min : c.control_grid().domain_measure() / c.control_grid().num_cells())
      << "\nmax_outer = " << c.max_outer << "\nnode_limit = " << c.node_limit << "\nseed = " << c.seed << '\n';
  auto path = [&](const std::string& p) { return std::filesystem::absolute(c.base_dir / p).lexically_normal().string(); };
  if (c.ydata_path) out << "ydata.path = " << path(*c.ydata_path) << '\n';
  if (c.reference_control_path) out << "ydata.reference_control.path = " << path(*c.reference_control_path) << '\n';
  if (c.v0_path) out << "v0.path = " << path(*c.v0_path) << '\n';
  if (c.v0_constant) out << "v0.constant = " << *c.v0_constant << '\n';
  return out.str();
}

namespace {

std::ifstream open_input(const RunConfig& cfg, const std::string& p) {
  const auto full = cfg.base_dir / p;
  std::ifstream in(full);
  if (!in) throw ConfigError("cannot open " + full.string());
  return in;
}

}  // namespace

ScalarField load_target(const RunConfig& cfg) {
  const PdeSetup pde = cfg.pde();
  if (cfg.ydata_path) {
    auto in = open_input(cfg, *cfg.ydata_path);
    ScalarField y = read_scalar_csv(in);
    if (!(y.state_grid() == pde.state_grid)) throw ConfigError("ydata.path: target lives on a different state grid");
    return y;
  }
  if (!cfg.reference_control_path) throw ConfigError("no target state configured");
  auto in = open_input(cfg, *cfg.reference_control_path);
  const ControlField ref = read_csv(in, cfg.label_set());
  return target_from_control(pde, ref);
}

Problem build_problem(const RunConfig& cfg) {
  return make_tracking_problem(cfg.pde(), cfg.control_grid(), load_target(cfg), cfg.alpha, cfg.label_set());
}

ControlField initial_control(const RunConfig& cfg) {
  if (cfg.v0_constant) return ControlField(cfg.control_grid(), cfg.label_set(), *cfg.v0_constant);
  if (!cfg.v0_path) throw ConfigError("no initial control configured");
  auto in = open_input(cfg, *cfg.v0_path);
  ControlField v = read_csv(in, cfg.label_set());
  if (!(v.grid() == cfg.control_grid())) throw ConfigError("v0.path: control lives on a different grid");
  return v;
}

}  // namespace slip
