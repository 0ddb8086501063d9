#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slip/control.hpp"
#include "slip/objective.hpp"
#include "slip/subproblem.hpp"

namespace slip {

struct SlipConfig {
  double delta0 = 0.125;
  double sigma = 1e-4;
  // Unset: lambda(Omega) / (nx * ny) of the control grid.
  std::optional<double> delta_min;
  int max_outer = 200;
  long node_limit = 100000;
  std::uint64_t seed = 0;
};

void validate(const SlipConfig& cfg);
double resolved_delta_min(const SlipConfig& cfg, const GridSpec& control_grid);

struct IterationRecord {
  int outer = 0;
  int inner = 0;
  double delta = 0.0;
  double pred = 0.0;
  std::optional<double> ared;  // absent when pred <= 0 ended the run
  bool accepted = false;
  // Values at the subproblem solution (at the current iterate when pred <= 0).
  double j_value = 0.0;
  double f_value = 0.0;
  double tv_value = 0.0;
  IPStatus subproblem_status = IPStatus::optimal;
  long subproblem_nodes = 0;
};

enum class Termination { pred_nonpositive, delta_min, max_outer };

const char* to_string(Termination t);

struct SlipTrace {
  SlipConfig config;
  ControlField initial;
  std::vector<IterationRecord> records;
  // v^0 followed by every accepted iterate.
  std::vector<ControlField> iterates;
  ControlField final_control;
  double final_j = 0.0;
  double final_f = 0.0;
  double final_tv = 0.0;
  Termination reason = Termination::max_outer;
};

struct SlipObserver {
  std::function<void(const IterationRecord&)> on_record;
  std::function<void(int outer, const ControlField&)> on_accept;
};

// Trust-region loop: per outer iteration reset delta to delta0, evaluate the gradient once,
// then solve subproblems with halving radius until ared >= sigma * pred.
SlipTrace run(const Problem& prob, const ControlField& v0, const SlipConfig& cfg, const SlipObserver& observer = {});

/// j_value(v_old) - j_value(v_new)
double ared(const Problem& prob, const ControlField& v_old, const ControlField& v_new);

std::string to_json(const IterationRecord& r);

}  // namespace slip
