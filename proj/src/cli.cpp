#include "covevo/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "covevo/analytic.hpp"
#include "covevo/ensemble.hpp"
#include "covevo/errors.hpp"
#include "covevo/evolution.hpp"
#include "covevo/ode.hpp"
#include "covevo/peeling.hpp"
#include "covevo/scaling.hpp"

namespace covevo::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr const char* kCommands[] = {"threshold", "evolve", "covariance", "verify", "alpha", "waterfall", "simulate"};

const char* kUsageText =
    "usage: covevo <command> [options]\n"
    "\n"
    "commands:\n"
    "  threshold   BP threshold of the ensemble\n"
    "  evolve      density-evolution means along y (CSV or JSON)\n"
    "  covariance  covariance matrix at (epsilon, y), analytic or ODE\n"
    "  verify      ODE integration versus the closed-form covariance\n"
    "  alpha       threshold, critical point and slope scaling parameter\n"
    "  waterfall   scaling-law block error prediction\n"
    "  simulate    Monte Carlo peeling decoder\n"
    "\n"
    "ensemble: --lambda \"2:0.5,3:0.5\" --rho \"6:1\" [--n N]  or  --ensemble FILE.json\n"
    "output:   --format json|csv  --out PATH   (run 'covevo <command> --help' for details)\n";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOptions {
  std::string lambda, rho, ensemble_file;
  std::optional<std::int64_t> n;
  bool renormalize = false;
  std::string format = "json";
  std::string out_path;
  unsigned threads = 1;
  double y_floor = kDefaultYFloor;
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_threads) {
  sub->add_option("--lambda", o.lambda, "variable edge-degree distribution, e.g. 2:0.5,3:0.5");
  sub->add_option("--rho", o.rho, "check edge-degree distribution, e.g. 6:1");
  sub->add_option("--ensemble", o.ensemble_file, "JSON ensemble file {lambda, rho, n}");
  sub->add_option("--n", o.n, "block length")->envname("COVEVO_N");
  sub->add_flag("--renormalize", o.renormalize, "rescale coefficients to sum to one");
  sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->envname("COVEVO_FORMAT");
  sub->add_option("--out", o.out_path, "write to PATH instead of stdout");
  sub->add_option("--y-floor", o.y_floor, "lower bound on y")->envname("COVEVO_Y_FLOOR");
  if (with_threads) sub->add_option("--threads", o.threads, "worker threads, 0 = auto")->envname("COVEVO_THREADS");
}

Ensemble load_ensemble(const CommonOptions& o, bool need_n) {
  const bool inline_spec = !o.lambda.empty() || !o.rho.empty();
  if (inline_spec == !o.ensemble_file.empty()) {
    throw ValidationError("give exactly one ensemble source: --lambda/--rho or --ensemble FILE");
  }
  if (!o.ensemble_file.empty()) {
    std::ifstream in(o.ensemble_file);
    if (!in) throw ValidationError("cannot read ensemble file '" + o.ensemble_file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::int64_t fallback = o.n.value_or(need_n ? 0 : 1000);
    auto ens = Ensemble::from_json(ss.str(), fallback, o.renormalize);
    if (o.n) return Ensemble(ens.lambda(), ens.rho(), *o.n);
    return ens;
  }
  if (o.lambda.empty() || o.rho.empty()) throw ValidationError("both --lambda and --rho are required");
  if (need_n && !o.n) throw ValidationError("--n is required for this command");
  return Ensemble(DegreeDistribution::parse(o.lambda, o.renormalize), DegreeDistribution::parse(o.rho, o.renormalize),
                  o.n.value_or(1000));
}

Json ensemble_json(const Ensemble& e) {
  Json j;
  Json l = Json::object(), r = Json::object();
  for (const auto& [d, c] : e.lambda().coeffs()) l[std::to_string(d)] = c;
  for (const auto& [d, c] : e.rho().coeffs()) r[std::to_string(d)] = c;
  j["lambda"] = l;
  j["rho"] = r;
  j["n"] = e.n();
  return j;
}

Json document(const char* command, const Ensemble& e) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  j["ensemble"] = ensemble_json(e);
  return j;
}

Json matrix_json(const CovarianceMatrix& m) {
  Json labels = Json::array();
  for (const auto& l : m.labels()) labels.push_back(l.name());
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return Json{{"labels", labels}, {"matrix", rows}};
}

std::string matrix_csv(const CovarianceMatrix& m) {
  std::string s = "label";
  for (const auto& l : m.labels()) s += "," + l.name();
  s += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    s += m.labels()[i].name();
    for (std::size_t j = 0; j < m.size(); ++j) s += "," + fmt(m(i, j));
    s += "\n";
  }
  return s;
}

std::vector<double> grid_option(const std::string& list, const std::string& range) {
  if (!list.empty() && !range.empty()) throw ValidationError("give either a list or a range, not both");
  if (!list.empty()) return parse_list(list);
  if (range.find(':') != std::string::npos) return parse_range(range);
  if (!range.empty()) return parse_list(range);
  return {};
}

struct Emitter {
  std::ostream& out;
  const CommonOptions& opts;

  void emit(const Json& json, const std::string& csv) const {
    const std::string text = opts.format == "csv" ? csv : json.dump(2) + "\n";
    if (opts.out_path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(opts.out_path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + opts.out_path + "'");
    f << text;
  }
};

Json trajectory_json(const TrajectoryRecord& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    Json rc = Json::object(), lc = Json::object();
    for (const auto& [j, c] : s.r_counts) rc[std::to_string(j)] = c;
    for (const auto& [k, c] : s.l_counts) lc[std::to_string(k)] = c;
    samples.push_back(Json{{"tau", s.tau}, {"t", s.t}, {"halted", s.halted}, {"r_counts", rc}, {"l_counts", lc}});
  }
  return Json{{"schema", kSchemaVersion},   {"trial_id", r.trial_id},
              {"seed", r.seed},             {"success", r.success},
              {"residual_at_halt", r.residual_at_halt}, {"iterations", r.iterations},
              {"samples", samples}};
}

bool is_command(const std::string& s) {
  for (const char* c : kCommands)
    if (s == c) return true;
  return false;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (tok.empty() || used != tok.size()) throw ValidationError("malformed number '" + tok + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

std::vector<double> parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (b == std::string::npos) throw ValidationError("malformed range '" + text + "' (expected lo:hi:steps)");
  const auto lo = parse_list(text.substr(0, a));
  const auto hi = parse_list(text.substr(a + 1, b - a - 1));
  const auto steps = parse_list(text.substr(b + 1));
  if (lo.size() != 1 || hi.size() != 1 || steps.size() != 1 || steps[0] < 1 || steps[0] != std::floor(steps[0])) {
    throw ValidationError("malformed range '" + text + "' (expected lo:hi:steps)");
  }
  const auto n = static_cast<int>(steps[0]);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo[0] : lo[0] + (hi[0] - lo[0]) * i / (n - 1));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || !is_command(args[0])) {
    if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
      out << kUsageText;
      return kOk;
    }
    if (!args.empty()) err << "unknown command '" << args[0] << "'\n";
    err << kUsageText;
    return kUsage;
  }

  CLI::App app{"Finite-length scaling analysis of LDPC ensembles on the BEC", "covevo"};
  app.require_subcommand(1);
  CommonOptions o;
  Emitter emitter{out, o};

  double epsilon = 0.0, y = 1.0, step = 1e-4, tolerance = 1e-5;
  std::string method = "analytic", y_list, y_range, eps_list, eps_range, tau_list, traj_path;
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;

  auto* threshold_cmd = app.add_subcommand("threshold", "BP threshold");
  add_common(threshold_cmd, o, false);

  auto* evolve_cmd = app.add_subcommand("evolve", "density-evolution means");
  add_common(evolve_cmd, o, false);
  evolve_cmd->add_option("--epsilon", epsilon, "channel erasure probability")->required();
  evolve_cmd->add_option("--y-grid", y_list, "comma-separated y values");
  evolve_cmd->add_option("--y-range", y_range, "lo:hi:steps (default 1:0.1:19)");

  auto* cov_cmd = app.add_subcommand("covariance", "covariance matrix");
  add_common(cov_cmd, o, false);
  cov_cmd->add_option("--epsilon", epsilon)->required();
  cov_cmd->add_option("--y", y)->required();
  cov_cmd->add_option("--method", method)->check(CLI::IsMember({"analytic", "ode"}));
  cov_cmd->add_option("--step", step, "RK4 step in y")->envname("COVEVO_STEP");

  auto* verify_cmd = app.add_subcommand("verify", "ODE versus closed form");
  add_common(verify_cmd, o, false);
  verify_cmd->add_option("--epsilon", eps_list, "epsilon value(s), comma-separated");
  verify_cmd->add_option("--eps-grid", eps_range, "epsilon values, a,b,c or lo:hi:steps");
  verify_cmd->add_option("--y", y_list, "y value(s), comma-separated");
  verify_cmd->add_option("--y-grid", y_range, "y values, a,b,c or lo:hi:steps");
  verify_cmd->add_option("--step", step)->envname("COVEVO_STEP");
  verify_cmd->add_option("--tolerance", tolerance, "max absolute entry difference");

  auto* alpha_cmd = app.add_subcommand("alpha", "slope scaling parameter");
  add_common(alpha_cmd, o, false);

  auto* wf_cmd = app.add_subcommand("waterfall", "scaling-law block error prediction");
  add_common(wf_cmd, o, false);
  wf_cmd->add_option("--eps", eps_list, "comma-separated epsilon values");
  wf_cmd->add_option("--eps-range", eps_range, "lo:hi:steps");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo peeling decoder");
  add_common(sim_cmd, o, true);
  sim_cmd->add_option("--epsilon", epsilon)->required();
  sim_cmd->add_option("--trials", trials)->envname("COVEVO_TRIALS");
  sim_cmd->add_option("--seed", seed)->envname("COVEVO_SEED");
  sim_cmd->add_option("--tau-grid", tau_list, "comma-separated tau values");
  sim_cmd->add_option("--record-trajectories", traj_path, "newline-delimited JSON trajectory export");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.get_subcommands().front()->help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  const std::string cmd = args[0];
  try {
    if (cmd == "threshold") {
      const Ensemble ens = load_ensemble(o, false);
      const double es = threshold(ens);
      Json j = document("threshold", ens);
      j["epsilon_star"] = es;
      emitter.emit(j, "epsilon_star\n" + fmt(es) + "\n");
    } else if (cmd == "evolve") {
      const Ensemble ens = load_ensemble(o, false);
      auto ys = grid_option(y_list, y_range);
      if (ys.empty()) ys = parse_range("1:0.1:19");
      const int dc = ens.max_check_degree();
      std::vector<std::string> columns = {"y", "tau", "x", "e", "r1_mean"};
      for (int k : ens.variable_degrees()) columns.push_back("l" + std::to_string(k));
      for (int jj = 2; jj <= dc; ++jj) columns.push_back("r" + std::to_string(jj));
      Json rows = Json::array();
      std::string csv;
      for (std::size_t c = 0; c < columns.size(); ++c) csv += (c ? "," : "") + columns[c];
      csv += "\n";
      for (double yy : ys) {
        if (!(yy >= o.y_floor && yy <= 1.0)) throw DomainError("y = " + fmt(yy) + " outside [y_floor, 1]");
        const EvolutionPoint p = means_at(ens, epsilon, yy);
        std::vector<double> row = {yy, tau_of_y(ens, epsilon, yy), p.x, p.e, p.mean_r[1]};
        for (const auto& [k, v] : p.mean_l) row.push_back(v);
        for (int jj = 2; jj <= dc; ++jj) row.push_back(p.mean_r[jj]);
        rows.push_back(row);
        for (std::size_t c = 0; c < row.size(); ++c) csv += (c ? "," : "") + fmt(row[c]);
        csv += "\n";
      }
      Json j = document("evolve", ens);
      j["epsilon"] = epsilon;
      j["columns"] = columns;
      j["rows"] = rows;
      emitter.emit(j, csv);
    } else if (cmd == "covariance") {
      const Ensemble ens = load_ensemble(o, false);
      CovarianceMatrix m;
      if (method == "analytic") {
        m = covariance_analytic(ens, epsilon, y, o.y_floor);
      } else if (y == 1.0) {
        m = initial_covariance(ens, epsilon);
      } else {
        OdeConfig cfg;
        cfg.step = step;
        cfg.y_target = y;
        cfg.y_floor = o.y_floor;
        m = covariance_ode(ens, epsilon, cfg);
      }
      Json j = document("covariance", ens);
      j["method"] = method;
      j["epsilon"] = epsilon;
      j["y"] = y;
      if (method == "ode") j["step"] = step;
      const Json mj = matrix_json(m);
      j["labels"] = mj["labels"];
      j["matrix"] = mj["matrix"];
      emitter.emit(j, matrix_csv(m));
    } else if (cmd == "verify") {
      const Ensemble ens = load_ensemble(o, false);
      const auto epsilons = grid_option(eps_list, eps_range);
      const auto ys = grid_option(y_list, y_range);
      if (epsilons.empty() || ys.empty()) throw ValidationError("verify needs --epsilon/--eps-grid and --y/--y-grid");
      OdeConfig cfg;
      cfg.step = step;
      cfg.comparison_tolerance = tolerance;
      cfg.y_floor = o.y_floor;
      for (double yy : ys) {
        cfg.y_target = yy < 1.0 ? yy : 0.5;
        cfg.validate();
      }
      const auto report = compare_ode_analytic(ens, epsilons, ys, step, tolerance, o.y_floor);
      Json points = Json::array();
      std::string csv = "epsilon,y,max_abs_diff,max_rel_diff,pass\n";
      double worst_abs = 0.0, worst_rel = 0.0;
      bool pass = true;
      for (const auto& c : report) {
        points.push_back(Json{{"epsilon", c.epsilon}, {"y", c.y}, {"max_abs_diff", c.max_abs_diff},
                              {"max_rel_diff", c.max_rel_diff}, {"pass", c.pass}});
        csv += fmt(c.epsilon) + "," + fmt(c.y) + "," + fmt(c.max_abs_diff) + "," + fmt(c.max_rel_diff) + "," +
               (c.pass ? "true" : "false") + "\n";
        worst_abs = std::max(worst_abs, c.max_abs_diff);
        worst_rel = std::max(worst_rel, c.max_rel_diff);
        pass = pass && c.pass;
      }
      Json j = document("verify", ens);
      j["step"] = step;
      j["tolerance"] = tolerance;
      j["points"] = points;
      j["max_abs_diff"] = worst_abs;
      j["max_rel_diff"] = worst_rel;
      j["pass"] = pass;
      emitter.emit(j, csv);
    } else if (cmd == "alpha") {
      const Ensemble ens = load_ensemble(o, false);
      const ScalingResult r = alpha(ens);
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      Json j = document("alpha", ens);
      j["epsilon_star"] = r.epsilon_star;
      j["y_star"] = r.y_star;
      j["x_star"] = r.x_star;
      j["alpha"] = r.alpha;
      j["alpha_normalized"] = r.alpha_normalized;
      j["alpha_via_covariance"] = r.alpha_via_covariance;
      j["alpha_regular"] = r.alpha_regular ? Json(*r.alpha_regular) : Json(nullptr);
      j["delta_r1r1"] = r.delta_r1r1;
      j["r1_epsilon_derivative"] = r.r1_epsilon_derivative;
      j["warnings"] = r.warnings;
      std::string csv = "epsilon_star,y_star,x_star,alpha,alpha_normalized,alpha_via_covariance\n" +
                        fmt(r.epsilon_star) + "," + fmt(r.y_star) + "," + fmt(r.x_star) + "," + fmt(r.alpha) + "," +
                        fmt(r.alpha_normalized) + "," + fmt(r.alpha_via_covariance) + "\n";
      emitter.emit(j, csv);
    } else if (cmd == "waterfall") {
      const Ensemble ens = load_ensemble(o, true);
      const auto epsilons = grid_option(eps_list, eps_range);
      if (epsilons.empty()) throw ValidationError("waterfall needs --eps or --eps-range");
      const ScalingResult r = alpha(ens);
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      const auto pts = waterfall(ens, r, epsilons);
      Json points = Json::array();
      std::string csv = "epsilon,p_block\n";
      for (const auto& p : pts) {
        points.push_back(Json{{"epsilon", p.epsilon}, {"p_block", p.p_block}});
        csv += fmt(p.epsilon) + "," + fmt(p.p_block) + "\n";
      }
      Json j = document("waterfall", ens);
      j["epsilon_star"] = r.epsilon_star;
      j["alpha"] = r.alpha;
      j["points"] = points;
      emitter.emit(j, csv);
    } else if (cmd == "simulate") {
      const Ensemble ens = load_ensemble(o, true);
      const auto taus = tau_list.empty() ? std::vector<double>{} : parse_list(tau_list);
      SimOptions so;
      so.threads = o.threads;
      so.keep_records = !traj_path.empty();
      const SimSummary s = simulate(ens, epsilon, trials, seed, taus, so);
      if (!traj_path.empty()) {
        std::ofstream f(traj_path, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + traj_path + "'");
        for (const auto& r : s.records) f << trajectory_json(r).dump() << "\n";
      }
      Json labels = Json::array();
      for (const auto& l : s.labels) labels.push_back(l.name());
      Json tau_stats = Json::array();
      std::string csv = "tau,samples,label,mean,mean_stderr\n";
      for (const auto& ts : s.tau_stats) {
        Json t{{"tau", ts.tau}, {"samples", ts.samples}, {"mean", ts.mean}, {"mean_stderr", ts.mean_stderr}};
        t["covariance"] = ts.covariance ? matrix_json(*ts.covariance)["matrix"] : Json(nullptr);
        tau_stats.push_back(t);
        for (std::size_t i = 0; i < s.labels.size(); ++i) {
          csv += fmt(ts.tau) + "," + std::to_string(ts.samples) + "," + s.labels[i].name() + "," + fmt(ts.mean[i]) +
                 "," + fmt(ts.mean_stderr[i]) + "\n";
        }
      }
      Json j = document("simulate", ens);
      j["epsilon"] = epsilon;
      j["trials"] = s.trials;
      j["seed"] = seed;
      j["xi"] = s.xi;
      j["failures"] = s.failures;
      j["block_error_rate"] = s.block_error_rate;
      j["block_error_stderr"] = s.block_error_stderr;
      j["labels"] = labels;
      j["tau_stats"] = tau_stats;
      if (o.format == "csv") {
        csv = "trials,failures,block_error_rate,block_error_stderr\n" + std::to_string(s.trials) + "," +
              std::to_string(s.failures) + "," + fmt(s.block_error_rate) + "," + fmt(s.block_error_stderr) + "\n" +
              (s.tau_stats.empty() ? "" : "\n" + csv);
      }
      emitter.emit(j, csv);
    }
  } catch (const SingularityError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const StepSizeError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DegenerateMinimumError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}

}  // namespace covevo::cli
