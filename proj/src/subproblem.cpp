#include "slip/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <thread>

#include "slip/error.hpp"
#include "slip/format.hpp"
#include "slip/simplex.hpp"

namespace slip {

const char* to_string(IPStatus status) {
  switch (status) {
    case IPStatus::optimal: return "optimal";
    case IPStatus::node_limit: return "node_limit";
  }
  return "unknown";
}

void validate(const TRInstance& inst) {
  if (!(inst.c.grid == inst.vbar.grid())) throw UsageError("gradient and vbar live on different grids");
  if (inst.c.values.size() != static_cast<std::size_t>(inst.vbar.grid().num_cells())) {
    throw UsageError("gradient has the wrong number of cells");
  }
  if (!(inst.delta >= 0.0)) throw UsageError("trust-region radius must be nonnegative");
  if (!(inst.alpha >= 0.0) || !std::isfinite(inst.alpha)) throw UsageError("alpha must be nonnegative");
  for (double c : inst.c.values) {
    if (!std::isfinite(c)) throw UsageError("gradient contains non-finite values");
  }
}

namespace {

void check_same_space(const TRInstance& inst, const ControlField& v) {
  if (!(v.grid() == inst.vbar.grid()) || !(v.labels() == inst.vbar.labels())) {
    throw UsageError("candidate does not match the instance grid or labels");
  }
}

long l1_steps(const ControlField& a, const ControlField& b) {
  long total = 0;
  for (int p = 0; p < a.grid().num_cells(); ++p) total += std::abs(a[p] - b[p]);
  return total;
}

// Largest admissible number of unit steps sum_P |v_P - vbar_P|.
double step_budget(const TRInstance& inst) { return inst.delta / inst.vbar.grid().cell_measure() + 1e-9; }

}  // namespace

double tr_objective(const TRInstance& inst, const ControlField& v) {
  check_same_space(inst, v);
  double linear = 0.0;
  for (int p = 0; p < v.grid().num_cells(); ++p) {
    linear += inst.c.values[static_cast<std::size_t>(p)] * (v[p] - inst.vbar[p]);
  }
  return linear + inst.alpha * tv(v) - inst.alpha * tv(inst.vbar);
}

bool tr_feasible(const TRInstance& inst, const ControlField& v) {
  check_same_space(inst, v);
  return static_cast<double>(l1_steps(v, inst.vbar)) <= step_budget(inst);
}

double pred(const TRInstance& inst, const ControlField& vtilde) {
  if (!tr_feasible(inst, vtilde)) throw UsageError("pred: candidate violates the trust region");
  return -tr_objective(inst, vtilde);
}

int IPModel::num_integer() const {
  return static_cast<int>(std::count_if(variables.begin(), variables.end(), [](const IPVariable& v) { return v.integer; }));
}

int IPModel::num_continuous() const { return static_cast<int>(variables.size()) - num_integer(); }

IPModel build_ip(const TRInstance& inst) {
  validate(inst);
  const GridSpec& g = inst.vbar.grid();
  const LabelSet& labels = inst.vbar.labels();
  const int n = g.num_cells();
  const auto facets = interior_facets(g);
  const int ne = static_cast<int>(facets.size());
  IPModel m;
  m.domain = labels.values();
  for (int p = 0; p < n; ++p) {
    m.variables.push_back({"v_" + std::to_string(p), true, double(labels.min()), double(labels.max())});
  }
  for (int p = 0; p < n; ++p) m.variables.push_back({"u_" + std::to_string(p), false, 0.0, LinearProgram::inf});
  for (int e = 0; e < ne; ++e) m.variables.push_back({"w_" + std::to_string(e), false, 0.0, LinearProgram::inf});

  m.objective.assign(m.variables.size(), 0.0);
  double constant = 0.0;
  for (int p = 0; p < n; ++p) {
    m.objective[static_cast<std::size_t>(p)] = inst.c.values[static_cast<std::size_t>(p)];
    constant -= inst.c.values[static_cast<std::size_t>(p)] * inst.vbar[p];
  }
  for (int e = 0; e < ne; ++e) m.objective[static_cast<std::size_t>(2 * n + e)] = inst.alpha * facets[static_cast<std::size_t>(e)].measure;
  m.objective_constant = constant - inst.alpha * tv(inst.vbar);

  for (int p = 0; p < n; ++p) {
    const double vb = inst.vbar[p];
    m.rows.push_back({"trl_" + std::to_string(p), {{p, 1.0}, {n + p, -1.0}}, RowSense::less_equal, vb});
    m.rows.push_back({"trg_" + std::to_string(p), {{p, 1.0}, {n + p, 1.0}}, RowSense::greater_equal, vb});
  }
  IPRow budget{"budget", {}, RowSense::less_equal, inst.delta};
  for (int p = 0; p < n; ++p) budget.terms.emplace_back(n + p, g.cell_measure());
  m.rows.push_back(std::move(budget));
  for (int e = 0; e < ne; ++e) {
    const Facet& f = facets[static_cast<std::size_t>(e)];
    m.rows.push_back({"jl_" + std::to_string(e), {{f.cell_a, 1.0}, {f.cell_b, -1.0}, {2 * n + e, -1.0}},
                      RowSense::less_equal, 0.0});
    m.rows.push_back({"jg_" + std::to_string(e), {{f.cell_a, 1.0}, {f.cell_b, -1.0}, {2 * n + e, 1.0}},
                      RowSense::greater_equal, 0.0});
  }
  return m;
}

void write_lp(std::ostream& out, const IPModel& m) {
  auto term = [&](double coef, const std::string& name, bool first) {
    if (coef < 0) {
      out << " - " << format_double(-coef) << ' ' << name;
    } else {
      out << (first ? " " : " + ") << format_double(coef) << ' ' << name;
    }
  };
  out << "\\ objective constant " << format_double(m.objective_constant) << "\n";
  out << "\\ integer domain";
  for (int d : m.domain) out << ' ' << d;
  out << "\nMinimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < m.variables.size(); ++j) {
    if (m.objective[j] == 0.0) continue;
    term(m.objective[j], m.variables[j].name, first);
    first = false;
  }
  if (first) out << " 0 " << m.variables.front().name;
  out << "\nSubject To\n";
  for (const IPRow& r : m.rows) {
    out << ' ' << r.name << ':';
    bool f = true;
    for (const auto& [j, coef] : r.terms) {
      term(coef, m.variables[static_cast<std::size_t>(j)].name, f);
      f = false;
    }
    out << (r.sense == RowSense::less_equal ? " <= " : r.sense == RowSense::greater_equal ? " >= " : " = ")
        << format_double(r.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const IPVariable& v : m.variables) {
    out << ' ' << format_double(v.lower) << " <= " << v.name;
    if (std::isfinite(v.upper)) out << " <= " << format_double(v.upper);
    out << '\n';
  }
  out << "General\n";
  for (const IPVariable& v : m.variables) {
    if (v.integer) out << ' ' << v.name << '\n';
  }
  out << "End\n";
}

namespace {

bool better(double obj, const std::vector<int>& v, double best_obj, std::span<const int> best) {
  if (obj < best_obj - 1e-12) return true;
  if (obj > best_obj + 1e-12) return false;
  return std::lexicographical_compare(v.begin(), v.end(), best.begin(), best.end());
}

}  // namespace

IPSolution solve_exhaustive(const TRInstance& inst) {
  validate(inst);
  const GridSpec& g = inst.vbar.grid();
  const LabelSet& labels = inst.vbar.labels();
  const int n = g.num_cells();
  const double m = static_cast<double>(labels.size());
  if (n * std::log10(m) > 6.0 + 1e-12) {
    throw UsageError("exhaustive solver guard: M^(nx*ny) exceeds 1e6");
  }
  IPSolution best{inst.vbar, 0.0, IPStatus::optimal, 0};
  std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
  std::vector<int> values(static_cast<std::size_t>(n), labels.min());
  while (true) {
    ControlField v(g, labels, values);
    ++best.nodes;
    if (tr_feasible(inst, v)) {
      const double obj = tr_objective(inst, v);
      if (better(obj, values, best.objective, best.v_opt.values())) {
        best.objective = obj;
        best.v_opt = v;
      }
    }
    int k = n - 1;
    while (k >= 0) {
      auto& d = digits[static_cast<std::size_t>(k)];
      if (++d < labels.size()) {
        values[static_cast<std::size_t>(k)] = labels[d];
        break;
      }
      d = 0;
      values[static_cast<std::size_t>(k)] = labels.min();
      --k;
    }
    if (k < 0) break;
  }
  return best;
}

namespace {

// Relaxation in step variables: v_P = vbar_P + p_P - m_P and v_a - v_b = q_E - r_E,
// min sum c (p - m) + alpha sum H(E)(q + r) subject to sum (p + m) <= budget.
// Its optimal value equals that of the linearized model with v relaxed to [lo, hi].
class Relaxation {
 public:
  explicit Relaxation(const TRInstance& inst)
      : inst_(inst), facets_(interior_facets(inst.vbar.grid())), n_(inst.vbar.grid().num_cells()) {
    ne_ = static_cast<int>(facets_.size());
    budget_ = std::floor(step_budget(inst));
    tv_bar_ = tv(inst.vbar);
  }

  struct Result {
    bool feasible = false;
    double bound = 0.0;
    std::vector<double> v;
  };

  Result solve(const std::vector<int>& lo, const std::vector<int>& hi) const {
    const int cols = 2 * n_ + 2 * ne_ + 1;
    const int rows = ne_ + 1;
    LinearProgram lp;
    lp.rows = rows;
    lp.cols = cols;
    lp.a.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    lp.b.assign(static_cast<std::size_t>(rows), 0.0);
    lp.c.assign(static_cast<std::size_t>(cols), 0.0);
    lp.lower.assign(static_cast<std::size_t>(cols), 0.0);
    lp.upper.assign(static_cast<std::size_t>(cols), LinearProgram::inf);
    auto a = [&](int i, int j) -> double& { return lp.a[static_cast<std::size_t>(i) * cols + j]; };

    for (int p = 0; p < n_; ++p) {
      const auto up = static_cast<std::size_t>(p);
      const int vb = inst_.vbar[p];
      lp.lower[up] = std::max(0, lo[up] - vb);
      lp.upper[up] = std::max(0, hi[up] - vb);
      lp.lower[up + n_] = std::max(0, vb - hi[up]);
      lp.upper[up + n_] = std::max(0, vb - lo[up]);
      lp.c[up] = inst_.c.values[up];
      lp.c[up + n_] = -inst_.c.values[up];
      a(ne_, p) = 1.0;
      a(ne_, n_ + p) = 1.0;
    }
    for (int e = 0; e < ne_; ++e) {
      const Facet& f = facets_[static_cast<std::size_t>(e)];
      a(e, f.cell_a) = 1.0;
      a(e, n_ + f.cell_a) = -1.0;
      a(e, f.cell_b) = -1.0;
      a(e, n_ + f.cell_b) = 1.0;
      a(e, 2 * n_ + e) = -1.0;
      a(e, 2 * n_ + ne_ + e) = 1.0;
      lp.b[static_cast<std::size_t>(e)] = inst_.vbar[f.cell_b] - inst_.vbar[f.cell_a];
      lp.c[static_cast<std::size_t>(2 * n_ + e)] = inst_.alpha * f.measure;
      lp.c[static_cast<std::size_t>(2 * n_ + ne_ + e)] = inst_.alpha * f.measure;
    }
    a(ne_, cols - 1) = 1.0;
    lp.b[static_cast<std::size_t>(ne_)] = budget_;

    const LpResult r = solve_lp(lp);
    Result out;
    if (r.status == LpStatus::infeasible) return out;
    if (r.status != LpStatus::optimal) {
      throw NumericalError(std::string("relaxation simplex ended with status ") + to_string(r.status));
    }
    out.feasible = true;
    out.bound = r.objective - inst_.alpha * tv_bar_;
    out.v.resize(static_cast<std::size_t>(n_));
    for (int p = 0; p < n_; ++p) {
      const auto up = static_cast<std::size_t>(p);
      const double v = inst_.vbar[p] + r.x[up] - r.x[up + n_];
      out.v[up] = std::clamp(v, double(lo[up]), double(hi[up]));
    }
    return out;
  }

 private:
  const TRInstance& inst_;
  std::vector<Facet> facets_;
  int n_;
  int ne_ = 0;
  double budget_ = 0.0;
  double tv_bar_ = 0.0;
};

struct Node {
  long id = 0;
  double bound = 0.0;
  std::vector<int> lo;
  std::vector<int> hi;
  int branch_cell = -1;
  int branch_down = 0;  // largest member below the fractional value
  int branch_up = 0;    // smallest member above it
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

int env_threads() {
  if (const char* s = std::getenv("SLIP_THREADS")) {
    const int t = std::atoi(s);
    if (t >= 1) return t;
  }
  return 1;
}

constexpr double kIntegralTol = 1e-7;
constexpr double kPruneTol = 1e-10;
// Parents expanded per batch. Fixed so that the search, and its node count, do not depend on
// the thread count.
constexpr int kBatchParents = 4;

}  // namespace

IPSolution solve_bnb(const TRInstance& inst, const BnbOptions& options) {
  validate(inst);
  if (options.node_limit < 1) throw UsageError("node limit must be positive");
  const LabelSet& labels = inst.vbar.labels();
  const GridSpec& g = inst.vbar.grid();
  const int n = g.num_cells();
  const int threads = options.threads > 0 ? options.threads : env_threads();
  const Relaxation relax(inst);

  IPSolution best{inst.vbar, 0.0, IPStatus::optimal, 0};
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;

  // Classifies a solved relaxation: integral leaves update the incumbent, the rest are queued.
  auto process = [&](Node node, const Relaxation::Result& r) {
    ++best.nodes;
    if (!r.feasible || r.bound >= best.objective - kPruneTol) return;
    int cell = -1;
    double most = 0.0;
    std::vector<int> rounded(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
      const double x = r.v[static_cast<std::size_t>(p)];
      const double nearest = std::round(x);
      if (std::abs(x - nearest) <= kIntegralTol && labels.contains(static_cast<int>(nearest))) {
        rounded[static_cast<std::size_t>(p)] = static_cast<int>(nearest);
        continue;
      }
      const int down = *labels.floor(x);
      const int up = *labels.ceil(x);
      const double frac = std::min(x - down, up - x) / (up - down);
      if (cell < 0 || frac > most) {
        cell = p;
        most = frac;
        node.branch_down = down;
        node.branch_up = up;
      }
    }
    if (cell < 0) {
      ControlField v(g, labels, std::move(rounded));
      if (!tr_feasible(inst, v)) return;
      const double obj = tr_objective(inst, v);
      std::vector<int> vals(v.values().begin(), v.values().end());
      if (better(obj, vals, best.objective, best.v_opt.values())) {
        best.objective = obj;
        best.v_opt = std::move(v);
      }
      return;
    }
    node.branch_cell = cell;
    node.bound = r.bound;
    open.push(std::move(node));
  };

  Node root;
  root.id = next_id++;
  root.lo.assign(static_cast<std::size_t>(n), labels.min());
  root.hi.assign(static_cast<std::size_t>(n), labels.max());
  process(root, relax.solve(root.lo, root.hi));

  while (!open.empty()) {
    std::vector<Node> children;
    while (!open.empty() && static_cast<int>(children.size()) < 2 * kBatchParents) {
      Node parent = open.top();
      open.pop();
      if (parent.bound >= best.objective - kPruneTol) continue;
      const auto c = static_cast<std::size_t>(parent.branch_cell);
      Node left = parent;
      left.id = next_id++;
      left.hi[c] = parent.branch_down;
      Node right = std::move(parent);
      right.id = next_id++;
      right.lo[c] = right.branch_up;
      children.push_back(std::move(left));
      children.push_back(std::move(right));
    }
    if (children.empty()) break;
    if (best.nodes + static_cast<long>(children.size()) > options.node_limit) {
      best.status = IPStatus::node_limit;
      return best;
    }
    std::vector<Relaxation::Result> results(children.size());
    if (threads <= 1 || children.size() == 1) {
      for (std::size_t k = 0; k < children.size(); ++k) results[k] = relax.solve(children[k].lo, children[k].hi);
    } else {
      const std::size_t workers = std::min(children.size(), static_cast<std::size_t>(threads));
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t k = w; k < children.size(); k += workers) {
            results[k] = relax.solve(children[k].lo, children[k].hi);
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t k = 0; k < children.size(); ++k) process(std::move(children[k]), results[k]);
  }
  return best;
}

TRInstance read_instance(std::istream& in) {
  auto line_stream = [&](const char* what) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw ConfigError(std::string("instance: missing ") + what);
  };
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  auto header = line_stream("grid line");
  if (!(header >> nx >> ny >> lx >> ly)) throw ConfigError("instance: grid line must be 'nx ny lx ly'");
  std::vector<int> label_values;
  auto ls = line_stream("label line");
  for (int l; ls >> l;) label_values.push_back(l);
  if (!ls.eof()) throw ConfigError("instance: labels must be integers");
  double delta = 0.0;
  double alpha = 0.0;
  auto da = line_stream("delta/alpha line");
  if (!(da >> delta >> alpha)) throw ConfigError("instance: third line must be 'delta alpha'");
  try {
    GridSpec g(nx, ny, lx, ly);
    LabelSet labels(label_values);
    std::vector<int> vbar;
    std::vector<double> c;
    for (int p = 0; p < g.num_cells(); ++p) {
      auto cell = line_stream("cell line");
      int v = 0;
      double cp = 0.0;
      if (!(cell >> v >> cp)) throw ConfigError("instance: cell line " + std::to_string(p) + " must be 'vbar c'");
      vbar.push_back(v);
      c.push_back(cp);
    }
    TRInstance inst{ControlField(g, labels, std::move(vbar)), GradientField{g, std::move(c)}, delta, alpha};
    validate(inst);
    return inst;
  } catch (const UsageError& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
}

void write_instance(std::ostream& out, const TRInstance& inst) {
  const GridSpec& g = inst.vbar.grid();
  out << g.nx() << ' ' << g.ny() << ' ' << format_double(g.lx()) << ' ' << format_double(g.ly()) << '\n';
  const auto& labels = inst.vbar.labels().values();
  for (std::size_t k = 0; k < labels.size(); ++k) out << (k ? " " : "") << labels[k];
  out << '\n' << format_double(inst.delta) << ' ' << format_double(inst.alpha) << '\n';
  for (int p = 0; p < g.num_cells(); ++p) {
    out << inst.vbar[p] << ' ' << format_double(inst.c.values[static_cast<std::size_t>(p)]) << '\n';
  }
}

}  // namespace slip
