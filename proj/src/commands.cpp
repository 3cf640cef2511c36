#include "peerstore/commands.hpp"

#include "peerstore/csv.hpp"
#include "peerstore/feasibility.hpp"
#include "peerstore/game.hpp"
#include "peerstore/markov.hpp"
#include "peerstore/metrics.hpp"
#include "peerstore/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace peerstore {

namespace {

namespace fs = std::filesystem;

std::string unit_set(const std::vector<int>& units) {
  std::string s = "{";
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(units[i]);
  }
  return s + "}";
}

void print_instance_line(std::ostream& out, const Instance& inst) {
  std::int64_t beta_sum = 0;
  for (int y = 0; y < inst.n(); ++y) beta_sum += inst.beta(y);
  out << "instance: n=" << inst.n() << ", edges=" << inst.edge_count()
      << ", demand=" << inst.alpha_sum() << ", capacity=" << beta_sum << "\n";
}

std::string replica_tag(int r) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%03d", r);
  return buf;
}

const char* psi_opt_source_name(PsiOptInfo::Source s) {
  switch (s) {
    case PsiOptInfo::Source::Enumerated: return "enumerated";
    case PsiOptInfo::Source::ClosedForm: return "closed-form";
    case PsiOptInfo::Source::Annealed: return "annealed estimate";
  }
  return "?";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

std::string trajectory_csv(const std::vector<EventRow>& log, double psi_opt) {
  std::string out = "t,gamma,kind,x,y,yp,Psi,psi,allocated\n";
  for (const auto& row : log) {
    out += format_double(row.time);
    out += ',';
    out += format_double(row.gamma);
    out += ',';
    out += event_kind_name(row.kind);
    out += ',';
    out += format_int(row.unit);
    out += ',';
    out += format_int(row.source);
    out += ',';
    out += format_int(row.target);
    out += ',';
    out += format_double(row.psi);
    out += ',';
    out += format_double(psi_opt > 0.0 ? row.psi / psi_opt
                                       : std::numeric_limits<double>::quiet_NaN());
    out += ',';
    out += format_int(row.allocated);
    out += '\n';
  }
  return out;
}

}  // namespace

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_scenario(opt.config_path);
    const Instance inst = build_instance(cfg);
    print_instance_line(out, inst);

    const FeasibilityReport report = feasible_by_flow(inst);
    if (inst.n() <= 22) {
      const FeasibilityReport cross = feasible_by_subsets(inst);
      if (cross.feasible != report.feasible) {
        err << "error: subset and flow routes disagree (internal defect)\n";
        return 1;
      }
    }

    if (!report.feasible) {
      out << "feasible: no\n";
      out << "violating subset D = " << unit_set(report.violating_units) << "\n";
      out << "demand(D) = " << report.violating_demand
          << " > capacity(N(D)) = " << report.violating_capacity << "\n";
      out << "strictly feasible: no\n";
      return 2;
    }

    out << "feasible: yes\n";
    if (inst.n() <= 12 && report.allocation) {
      out << "witness allocation:\n";
      std::ostringstream w;
      write_state_csv(w, *report.allocation);
      out << w.str();
    }
    out << "strictly feasible: " << (strictly_feasible(inst) ? "yes" : "no") << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    ScenarioConfig cfg = load_scenario(opt.config_path);
    if (opt.seed) cfg.base_seed = *opt.seed;
    if (opt.replicas) cfg.replicas = *opt.replicas;
    if (opt.horizon_mult) {
      cfg.horizon_mult = *opt.horizon_mult;
      cfg.horizon_events = -1;
    }

    const fs::path dir(opt.out_dir);
    if (fs::exists(dir) && !fs::is_empty(dir) && !opt.force) {
      err << "error: output directory '" << dir.string()
          << "' is not empty (use --force to overwrite)\n";
      return 1;
    }
    fs::create_directories(dir);

    const Instance inst = build_instance(cfg);
    const ScenarioResult result = run_scenario(cfg, inst, opt.jobs);

    std::string summary = kSummaryHeader;
    summary += '\n';
    for (const auto& rep : result.replicas) {
      summary += summary_csv_row(rep.summary);
      summary += '\n';
    }
    // Aggregate row: same numeric columns, seed slot says what it is.
    for (std::size_t i = 0; i < result.agg.mean.size(); ++i) {
      summary += format_double(result.agg.mean[i]);
      summary += ',';
    }
    summary += "mean\n";
    write_file(dir / "summary.csv", summary);
    write_file(dir / "aggregate.csv", aggregate_csv(result.agg));

    for (std::size_t r = 0; r < result.replicas.size(); ++r) {
      const auto& rep = result.replicas[r];
      std::ostringstream state;
      write_state_csv(state, rep.run.state);
      write_file(dir / ("final_state_" + replica_tag(static_cast<int>(r)) + ".csv"),
                 state.str());
      if (cfg.record_trajectory)
        write_file(dir / ("trajectory_" + replica_tag(static_cast<int>(r)) + ".csv"),
                   trajectory_csv(rep.run.log, result.psi_opt.value));
    }

    print_instance_line(out, inst);
    out << "scenario: " << (cfg.name.empty() ? "(unnamed)" : cfg.name) << "\n";
    out << "mode: " << (cfg.mode == SimMode::Discrete ? "discrete" : "continuous")
        << ", horizon: " << resolve_horizon(cfg, inst) << " events, replicas: " << cfg.replicas
        << "\n";
    out << "psi_opt: " << format_double(result.psi_opt.value) << " ("
        << psi_opt_source_name(result.psi_opt.source) << ")\n";
    out << "aggregate means: psi=" << format_double(result.agg.mean[0])
        << ", nu_moves=" << format_double(result.agg.mean[1])
        << ", d_plus=" << format_double(result.agg.mean[2])
        << ", lambda_bar=" << format_double(result.agg.mean[5]) << "\n";
    out << "wrote " << dir.string() << "/summary.csv and " << result.replicas.size()
        << " replica file sets\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_scenario(opt.config_path);
    const Instance inst = build_instance(cfg);
    std::ifstream in(opt.state_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + opt.state_path + "'");
    const AllocationState state = AllocationState::from_matrix(inst, read_state_csv(in));

    print_instance_line(out, inst);
    out << "allocated: " << state.total() << " of " << inst.alpha_sum() << "\n";
    if (!is_complete(inst, state)) {
      err << "error: state is incomplete; analysis requires a complete allocation\n";
      return 1;
    }

    const double psi = potential(inst, state);
    out << "Psi: " << format_double(psi) << "\n";
    try {
      const auto opt_info = optimal_potential(inst, 200000);
      out << "Psi_opt: " << format_double(opt_info.value)
          << (opt_info.kind == PotentialOptimum::Kind::ClosedForm ? " (closed-form)"
                                                                  : " (enumerated)")
          << ", psi ratio: " << format_double(psi / opt_info.value) << "\n";
    } catch (const std::exception&) {
      out << "Psi_opt: unavailable at this size (no closed form; enumeration over bound)\n";
    }

    const NashReport nash = is_nash(inst, state);
    if (nash.nash) {
      out << "nash: yes\n";
    } else {
      out << "nash: no (" << nash.deviations.size() << " improving deviations)\n";
      const std::size_t shown = std::min<std::size_t>(nash.deviations.size(), 10);
      for (std::size_t i = 0; i < shown; ++i) {
        const auto& d = nash.deviations[i];
        out << "  unit " << d.unit << ": " << d.source << " -> " << d.target
            << ", gain " << format_double(d.gain) << "\n";
      }
    }

    const ClassPartition classes = class_partition(cfg);
    out << "d_plus: " << format_double(mean_out_degree(state)) << "\n";
    const auto d_minus = mean_in_degree_by_class(classes, state);
    for (std::size_t c = 0; c < d_minus.size(); ++c)
      out << "d_minus[" << (c + 1) << "]: " << format_double(d_minus[c]) << "\n";
    out << "lambda_bar: " << format_double(satisfaction(inst, state)) << "\n";
    const Congestion congestion = congestion_by_class(inst, classes, state);
    for (std::size_t c = 0; c < congestion.normalized.size(); ++c) {
      out << "congestion[" << (c + 1)
          << "]: " << format_double(congestion.normalized[c]) << " (capacity-normalized)"
          << ", literal 1/(n beta): " << format_double(congestion.literal[c]);
      if (!congestion.literal_valid) out << " (mixed beta in class; literal value is nominal)";
      out << "\n";
    }
    out << "split bound: " << (split_bound_holds(inst, state) ? "holds" : "violated") << "\n";

    if (inst.n() <= 12) {
      out << "utilities (rows: units, '.' = no edge):\n";
      for (int x = 0; x < inst.n(); ++x) {
        for (int y = 0; y < inst.n(); ++y) {
          if (y) out << ",";
          if (inst.has_edge(x, y) && inst.beta(y) > 0)
            out << format_double(utility(inst, state, x, y));
          else
            out << ".";
        }
        out << "\n";
      }
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_scenario(opt.config_path);
    const Instance inst = build_instance(cfg);
    const double gamma = opt.gamma.value_or(cfg.gamma0);

    print_instance_line(out, inst);
    out << "strictly feasible: " << (strictly_feasible(inst) ? "yes" : "no") << "\n";

    const Generator gen = build_generator(inst, gamma, opt.bound);
    out << "gamma: " << format_double(gamma) << "\n";
    out << "states: |W|=" << gen.space.allocations.size() << ", with churn patterns: "
        << gen.space.size() << "\n";

    const double db = check_detailed_balance(inst, gen);
    out << "max detailed-balance violation: " << format_double(db) << "\n";

    const StationaryResult solved = solve_stationary(gen);
    if (!solved.irreducible) {
      out << "chain is reducible: " << solved.recurrent_classes.size()
          << " recurrent classes with sizes";
      for (const auto& c : solved.recurrent_classes) out << " " << c.size();
      out << "\n";
    } else {
      const Eigen::VectorXd closed = stationary_closed_form(inst, gen.space, gamma);
      out << "TV(closed-form, null-space): "
          << format_double(total_variation(closed, solved.distribution)) << "\n";
      const Eigen::VectorXd marginal = allocation_marginal(gen.space, solved.distribution);
      const Eigen::VectorXd direct = allocation_closed_form(inst, gen.space, gamma);
      out << "TV(allocation marginal, direct form): "
          << format_double(total_variation(marginal, direct)) << "\n";
    }
    out << "move graph connected: " << (check_L_connected(inst, opt.bound) ? "yes" : "no")
        << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace peerstore
