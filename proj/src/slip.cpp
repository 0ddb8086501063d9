#include "slip/slip.hpp"

#include <cmath>
#include <sstream>

#include "slip/error.hpp"
#include "slip/format.hpp"

namespace slip {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::pred_nonpositive: return "pred_nonpositive";
    case Termination::delta_min: return "delta_min";
    case Termination::max_outer: return "max_outer";
  }
  return "unknown";
}

void validate(const SlipConfig& cfg) {
  if (!(cfg.delta0 > 0.0) || !std::isfinite(cfg.delta0)) throw ConfigError("delta0 must be positive");
  if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0)) throw ConfigError("sigma must lie in (0,1)");
  if (cfg.delta_min && !(*cfg.delta_min > 0.0)) throw ConfigError("delta_min must be positive");
  if (cfg.max_outer < 0) throw ConfigError("max_outer must be nonnegative");
  if (cfg.node_limit < 1) throw ConfigError("node_limit must be positive");
}

double resolved_delta_min(const SlipConfig& cfg, const GridSpec& g) {
  return cfg.delta_min ? *cfg.delta_min : g.domain_measure() / g.num_cells();
}

double ared(const Problem& prob, const ControlField& v_old, const ControlField& v_new) {
  return j_value(prob, v_old) - j_value(prob, v_new);
}

SlipTrace run(const Problem& prob, const ControlField& v0, const SlipConfig& cfg, const SlipObserver& observer) {
  validate(cfg);
  if (!(prob.alpha > 0.0)) throw ConfigError("alpha must be positive for the trust-region method");
  if (!(v0.grid() == prob.control_grid()) || !(v0.labels() == prob.labels)) {
    throw UsageError("initial control does not match the problem");
  }
  const double delta_min = resolved_delta_min(cfg, v0.grid());
  SlipTrace trace{cfg, v0, {}, {v0}, v0, 0.0, 0.0, 0.0, Termination::max_outer};

  ControlField v = v0;
  double f = f_value(prob, v);
  double t = tv(v);
  double j = f + prob.alpha * t;
  auto finish = [&](Termination reason) {
    trace.final_control = v;
    trace.final_f = f;
    trace.final_tv = t;
    trace.final_j = j;
    trace.reason = reason;
    return trace;
  };

  for (int n = 1; n <= cfg.max_outer; ++n) {
    const GradientField g = gradient(prob, v);
    for (int k = 0;; ++k) {
      const double delta = std::ldexp(cfg.delta0, -k);
      if (delta < delta_min) return finish(Termination::delta_min);

      const TRInstance inst{v, g, delta, prob.alpha};
      const IPSolution sol = solve_bnb(inst, BnbOptions{cfg.node_limit, 0});
      if (sol.status != IPStatus::optimal) {
        std::ostringstream msg;
        msg << "subproblem at outer " << n << ", inner " << k << " hit the node limit (" << cfg.node_limit
            << ") without a certificate";
        throw NumericalError(msg.str());
      }
      for (int p = 0; p < v.grid().num_cells(); ++p) {
        if (!v.labels().contains(sol.v_opt[p])) throw NumericalError("subproblem returned a value outside V");
      }

      IterationRecord rec;
      rec.outer = n;
      rec.inner = k;
      rec.delta = delta;
      rec.pred = pred(inst, sol.v_opt);
      rec.subproblem_status = sol.status;
      rec.subproblem_nodes = sol.nodes;
      if (rec.pred <= 0.0) {
        if (rec.pred < -1e-9) {
          std::ostringstream msg;
          msg << "negative predicted reduction " << format_double(rec.pred) << " from a certified subproblem optimum";
          throw NumericalError(msg.str());
        }
        rec.f_value = f;
        rec.tv_value = t;
        rec.j_value = j;
        trace.records.push_back(rec);
        if (observer.on_record) observer.on_record(rec);
        return finish(Termination::pred_nonpositive);
      }

      const double f_new = f_value(prob, sol.v_opt);
      const double t_new = tv(sol.v_opt);
      const double j_new = f_new + prob.alpha * t_new;
      rec.f_value = f_new;
      rec.tv_value = t_new;
      rec.j_value = j_new;
      rec.ared = j - j_new;
      rec.accepted = *rec.ared >= cfg.sigma * rec.pred;
      trace.records.push_back(rec);
      if (observer.on_record) observer.on_record(rec);
      if (rec.accepted) {
        v = sol.v_opt;
        f = f_new;
        t = t_new;
        j = j_new;
        trace.iterates.push_back(v);
        if (observer.on_accept) observer.on_accept(n, v);
        break;
      }
    }
  }
  return finish(Termination::max_outer);
}

std::string to_json(const IterationRecord& r) {
  std::ostringstream out;
  out << "{\"outer\":" << r.outer << ",\"inner\":" << r.inner << ",\"delta\":" << format_double(r.delta)
      << ",\"pred\":" << format_double(r.pred) << ",\"ared\":" << (r.ared ? format_double(*r.ared) : "null")
      << ",\"accepted\":" << (r.accepted ? "true" : "false") << ",\"j_value\":" << format_double(r.j_value)
      << ",\"f_value\":" << format_double(r.f_value) << ",\"tv_value\":" << format_double(r.tv_value)
      << ",\"subproblem_status\":\"" << to_string(r.subproblem_status) << "\",\"subproblem_nodes\":"
      << r.subproblem_nodes << '}';
  return out.str();
}

}  // namespace slip
