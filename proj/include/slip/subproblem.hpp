#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slip/control.hpp"
#include "slip/objective.hpp"

namespace slip {

// min_v (c, v - vbar) + alpha tv(v) - alpha tv(vbar)  s.t.  ||v - vbar||_L1 <= delta, v in V.
struct TRInstance {
  ControlField vbar;
  GradientField c;
  double delta = 0.0;
  double alpha = 0.0;
};

void validate(const TRInstance& inst);

// The objective above, evaluated exactly (zero at vbar).
double tr_objective(const TRInstance& inst, const ControlField& v);

// Trust-region feasibility in integer units: sum_P |v_P - vbar_P| <= delta / lambda(P) + 1e-9.
bool tr_feasible(const TRInstance& inst, const ControlField& v);

/// -tr_objective(inst, vtilde); throws UsageError when vtilde is infeasible.
double pred(const TRInstance& inst, const ControlField& vtilde);

// Integer program with absolute values linearized by u_P and w_E.
// Variable order: v_P (cells), u_P (cells), w_E (facets in canonical order).
struct IPVariable {
  std::string name;
  bool integer = false;
  double lower = 0.0;
  double upper = 0.0;  // +inf when unbounded
};

enum class RowSense { less_equal, greater_equal, equal };

struct IPRow {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  RowSense sense = RowSense::less_equal;
  double rhs = 0.0;
};

struct IPModel {
  std::vector<IPVariable> variables;
  std::vector<IPRow> rows;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<int> domain;  // admissible values of every integer variable

  int num_integer() const;
  int num_continuous() const;
};

IPModel build_ip(const TRInstance& inst);

// CPLEX LP text format; integer domains beyond the bounds are listed as comments.
void write_lp(std::ostream& out, const IPModel& model);

enum class IPStatus { optimal, node_limit };

const char* to_string(IPStatus status);

struct IPSolution {
  ControlField v_opt;
  double objective = 0.0;
  IPStatus status = IPStatus::optimal;
  long nodes = 0;
};

// Brute force over all M^(nx ny) assignments (guarded at 1e6); ties resolve to the
// lexicographically smallest label vector.
IPSolution solve_exhaustive(const TRInstance& inst);

struct BnbOptions {
  long node_limit = 100000;
  // Worker threads for the node relaxations of a batch; 0 reads SLIP_THREADS (default 1).
  // Results do not depend on this value.
  int threads = 0;
};

// Best-first branch-and-bound with simplex relaxation bounds.
IPSolution solve_bnb(const TRInstance& inst, const BnbOptions& options = {});

// Text format: "nx ny lx ly" / labels / "delta alpha" / nx*ny lines "vbar_P c_P".
TRInstance read_instance(std::istream& in);
void write_instance(std::ostream& out, const TRInstance& inst);

}  // namespace slip
