#include "CLI11.hpp"
#include "json.hpp"

#include "expert_lab/discrete_game.hpp"
#include "expert_lab/pde_check.hpp"
#include "expert_lab/simulator.hpp"
#include "expert_lab/value3.hpp"
#include "expert_lab/value4.hpp"
#include "expert_lab/verify.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using expertlab::EvalPoint;
using expertlab::EvalPoint3;
using expertlab::QuadratureConfig;
using expertlab::Vector3d;
using expertlab::Vector4d;
using json = nlohmann::ordered_json;

struct Options {
  int n = 4;
  double t = 0.0;
  double T = 1.0;
  std::string x_str = "0,0,0,0";
  double tol = 1e-9;
  std::uint64_t seed = 1;
  long paths = 10000;
  int steps = 1000;
  int M = 8;
  std::string Ms_str;
  std::string player = "probability-matching";
  std::string adversary = "balanced-comb";
  std::string format = "json";
  int quad_nodes = 32;
  double quad_rtol = 1e-12;
  int threads = 0;
  std::string precision = "default";
};

bool g_full_precision = false;

// Result values print with 10 significant digits by default; inputs are
// echoed at full round-trip precision.
json num(double v) {
  if (g_full_precision) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return std::string(buf);
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::stod(buf);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    vals.push_back(std::stod(item));
  }
  return vals;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> vals;
  for (double v : parse_list(s)) vals.push_back(static_cast<int>(v));
  return vals;
}

Vector4d parse_x4(const Options& o) {
  const auto v = parse_list(o.x_str);
  if (v.size() != 4) throw std::domain_error("--x must carry 4 comma-separated entries for --n 4");
  Vector4d x;
  for (int i = 0; i < 4; ++i) x[i] = v[i];
  return x;
}

Vector3d parse_x3(const Options& o) {
  const auto v = parse_list(o.x_str);
  if (v.size() != 3) throw std::domain_error("--x must carry 3 comma-separated entries for --n 3");
  Vector3d x;
  for (int i = 0; i < 3; ++i) x[i] = v[i];
  return x;
}

QuadratureConfig quad_config(const Options& o) {
  QuadratureConfig cfg;
  cfg.nodes_per_panel = o.quad_nodes;
  cfg.rel_tol = o.quad_rtol;
  return cfg;
}

json echo_inputs(const Options& o, bool with_time = true) {
  json j;
  j["n"] = o.n;
  if (with_time) {
    j["t"] = o.t;
    j["T"] = o.T;
  }
  j["x"] = json::array();
  for (double v : parse_list(o.x_str)) j["x"].push_back(v);
  return j;
}

std::vector<int> subset_list(std::uint32_t mask, int n) {
  std::vector<int> experts;
  for (int i = 0; i < n; ++i)
    if ((mask >> i) & 1u) experts.push_back(i + 1);
  return experts;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int run_eval(const Options& o) {
  json out = echo_inputs(o);
  out["verb"] = "eval";
  if (o.n == 4)
    out["value"] = num(expertlab::value4({o.t, o.T, parse_x4(o)}, quad_config(o)));
  else if (o.n == 3)
    out["value"] = num(expertlab::value3({o.t, o.T, parse_x3(o)}));
  else
    throw std::domain_error("eval supports --n 3 or --n 4");
  emit(out);
  return 0;
}

int run_grad(const Options& o) {
  json out = echo_inputs(o);
  out["verb"] = "grad";
  json g = json::array();
  if (o.n == 4) {
    const Vector4d v = expertlab::gradient4({o.t, o.T, parse_x4(o)}, quad_config(o));
    for (int i = 0; i < 4; ++i) g.push_back(num(v[i]));
  } else if (o.n == 3) {
    const Vector3d v = expertlab::gradient3({o.t, o.T, parse_x3(o)});
    for (int i = 0; i < 3; ++i) g.push_back(num(v[i]));
  } else {
    throw std::domain_error("grad supports --n 3 or --n 4");
  }
  out["gradient"] = g;
  emit(out);
  return 0;
}

int run_hess(const Options& o) {
  if (o.n != 4) throw std::domain_error("hess supports --n 4 only");
  json out = echo_inputs(o);
  out["verb"] = "hess";
  const expertlab::Matrix4d H = expertlab::hessian4({o.t, o.T, parse_x4(o)}, quad_config(o));
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back(num(H(i, j)));
    rows.push_back(row);
  }
  out["hessian"] = rows;
  emit(out);
  return 0;
}

int run_residual(const Options& o) {
  if (o.n != 4) throw std::domain_error("residual supports --n 4 only");
  json out = echo_inputs(o);
  out["verb"] = "residual";
  const auto rp = expertlab::residual_profile({o.t, o.T, parse_x4(o)}, o.tol, quad_config(o));
  out["dt"] = num(rp.dt);
  out["comb"] = subset_list(rp.comb_mask, 4);
  json rows = json::array();
  for (std::uint32_t mask = 0; mask < 16; ++mask)
    rows.push_back({{"subset", subset_list(mask, 4)}, {"q", num(rp.q[mask])}});
  out["residuals"] = rows;
  json arg = json::array();
  for (std::uint32_t mask : rp.argmax) arg.push_back(subset_list(mask, 4));
  out["argmax"] = arg;
  emit(out);
  return 0;
}

int run_terminal(const Options& o) {
  if (o.n != 4) throw std::domain_error("terminal supports --n 4 only");
  const std::vector<double> kappas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  const auto rows = expertlab::terminal_probe(parse_x4(o), kappas, quad_config(o));
  if (o.format == "csv") {
    std::printf("kappa,gap\n");
    for (const auto& [k, gap] : rows) std::printf("%.10g,%.10g\n", k, gap);
    return 0;
  }
  json out = echo_inputs(o, false);
  out["verb"] = "terminal";
  json jr = json::array();
  for (const auto& [k, gap] : rows) jr.push_back({{"kappa", num(k)}, {"gap", num(gap)}});
  out["gaps"] = jr;
  emit(out);
  return 0;
}

int run_laplace(const Options& o) {
  if (o.n != 4) throw std::domain_error("laplace supports --n 4 only");
  // --T carries the transform rate lambda for this verb
  const auto lb = expertlab::laplace_bridge(parse_x4(o), o.T, 0.0, quad_config(o));
  json out = echo_inputs(o, false);
  out["verb"] = "laplace";
  out["lambda"] = o.T;
  out["lhs"] = num(lb.lhs);
  out["rhs"] = num(lb.rhs);
  out["abs_diff"] = num(std::abs(lb.lhs - lb.rhs));
  out["tail_bound"] = num(lb.tail_bound);
  emit(out);
  return 0;
}

int run_ratio(const Options& o) {
  const auto r = expertlab::ratio_check(quad_config(o));
  json out;
  out["verb"] = "ratio";
  out["n4"] = num(r.n4);
  out["n3"] = num(r.n3);
  emit(out);
  return 0;
}

int run_dp(const Options& o) {
  expertlab::DPConfig dcfg;
  if (!o.Ms_str.empty()) {
    const auto Ms = parse_int_list(o.Ms_str);
    const auto rows = expertlab::convergence_table(Ms, o.n, quad_config(o), dcfg);
    if (o.format == "csv") {
      std::printf("M,V,V_lower,V_upper,V_scaled,V_lower_scaled,V_upper_scaled\n");
      for (const auto& r : rows)
        std::printf("%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.M, r.v, r.v_lower, r.v_upper,
                    r.scaled_v, r.scaled_lower, r.scaled_upper);
      return 0;
    }
    json out;
    out["verb"] = "dp";
    out["n"] = o.n;
    json jr = json::array();
    for (const auto& r : rows)
      jr.push_back({{"M", r.M},
                    {"V", num(r.v)},
                    {"V_scaled", num(r.scaled_v)}});
    out["rows"] = jr;
    emit(out);
    return 0;
  }
  const auto table = expertlab::solve_exact(o.M, o.n, dcfg);
  json out;
  out["verb"] = "dp";
  out["n"] = o.n;
  out["M"] = o.M;
  out["value"] = num(table.root());
  out["scaled"] = num(table.root() / std::sqrt(static_cast<double>(o.M)));
  out["nodes"] = table.node_count();
  emit(out);
  return 0;
}

int run_sandwich(const Options& o) {
  if (o.n != 4) throw std::domain_error("sandwich supports --n 4 only");
  std::vector<int> Ms = o.Ms_str.empty() ? std::vector<int>{o.M} : parse_int_list(o.Ms_str);
  const auto rows = expertlab::convergence_table(Ms, 4, quad_config(o), expertlab::DPConfig{});
  if (o.format == "csv") {
    std::printf("M,V,V_lower,V_upper,V_scaled,V_lower_scaled,V_upper_scaled\n");
    for (const auto& r : rows)
      std::printf("%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.M, r.v, r.v_lower, r.v_upper,
                  r.scaled_v, r.scaled_lower, r.scaled_upper);
    return 0;
  }
  json out;
  out["verb"] = "sandwich";
  json jr = json::array();
  for (const auto& r : rows)
    jr.push_back({{"M", r.M},
                  {"V", num(r.v)},
                  {"V_lower", num(r.v_lower)},
                  {"V_upper", num(r.v_upper)},
                  {"V_scaled", num(r.scaled_v)},
                  {"V_lower_scaled", num(r.scaled_lower)},
                  {"V_upper_scaled", num(r.scaled_upper)}});
  out["rows"] = jr;
  emit(out);
  return 0;
}

expertlab::SimConfig sim_config(const Options& o) {
  expertlab::SimConfig cfg;
  cfg.M = o.M;
  cfg.T = o.T;
  cfg.N = o.n;
  cfg.paths = o.paths;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  if (o.player == "probability-matching")
    cfg.player.kind = expertlab::PlayerKind::probability_matching;
  else if (o.player == "uniform")
    cfg.player.kind = expertlab::PlayerKind::uniform;
  else if (o.player == "follow-the-leader")
    cfg.player.kind = expertlab::PlayerKind::follow_the_leader;
  else if (o.player.rfind("multiplicative-weights", 0) == 0) {
    cfg.player.kind = expertlab::PlayerKind::multiplicative_weights;
    const auto open = o.player.find('(');
    if (open != std::string::npos) cfg.player.eta = std::stod(o.player.substr(open + 1));
  } else {
    throw std::domain_error("unknown --player " + o.player);
  }
  if (o.adversary == "comb")
    cfg.adversary.kind = expertlab::AdversaryKind::comb;
  else if (o.adversary == "balanced-comb")
    cfg.adversary.kind = expertlab::AdversaryKind::balanced_comb;
  else if (o.adversary == "uniform-subset")
    cfg.adversary.kind = expertlab::AdversaryKind::uniform_subset;
  else if (o.adversary.rfind("fixed-subset", 0) == 0) {
    cfg.adversary.kind = expertlab::AdversaryKind::fixed_subset;
    const auto open = o.adversary.find('(');
    std::uint32_t mask = 0;
    if (open != std::string::npos) {
      for (int e : parse_int_list(o.adversary.substr(open + 1)))
        mask |= 1u << (e - 1);
    }
    cfg.adversary.fixed_mask = mask;
  } else {
    throw std::domain_error("unknown --adversary " + o.adversary);
  }
  return cfg;
}

int run_simulate(const Options& o) {
  expertlab::SimConfig cfg = sim_config(o);
  if (!o.Ms_str.empty()) {
    const auto rows = expertlab::regret_curve(cfg, parse_int_list(o.Ms_str));
    if (o.format == "csv") {
      std::printf("M,scaled_mean,scaled_stderr\n");
      for (const auto& r : rows) std::printf("%d,%.10g,%.10g\n", r.M, r.scaled_mean, r.scaled_stderr);
      return 0;
    }
    json out;
    out["verb"] = "simulate";
    json jr = json::array();
    for (const auto& r : rows)
      jr.push_back({{"M", r.M},
                    {"scaled_mean", num(r.scaled_mean)},
                    {"scaled_stderr", num(r.scaled_stderr)}});
    out["rows"] = jr;
    emit(out);
    return 0;
  }
  const auto est = expertlab::estimate_regret(cfg);
  json out;
  out["verb"] = "simulate";
  out["n"] = o.n;
  out["M"] = o.M;
  out["player"] = o.player;
  out["adversary"] = o.adversary;
  out["seed"] = o.seed;
  out["paths"] = est.paths;
  out["mean"] = num(est.mean);
  out["stderr"] = num(est.stderr_);
  out["scaled_mean"] = num(est.mean / std::sqrt(static_cast<double>(o.M)));
  out["clamp_count"] = est.clamp_count;
  out["wall_seconds"] = num(est.wall_seconds);
  emit(out);
  return 0;
}

int run_sde(const Options& o) {
  if (o.n != 4) throw std::domain_error("sde supports --n 4 only");
  expertlab::SdeConfig cfg;
  cfg.point = {o.t, o.T, parse_x4(o)};
  cfg.steps = o.steps;
  cfg.paths = o.paths;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  const auto est = expertlab::sde_feynman_kac(cfg);
  json out = echo_inputs(o);
  out["verb"] = "sde";
  out["steps"] = o.steps;
  out["paths"] = est.paths;
  out["seed"] = o.seed;
  out["mean"] = num(est.mean);
  out["stderr"] = num(est.stderr_);
  out["wall_seconds"] = num(est.wall_seconds);
  emit(out);
  return 0;
}

int run_verify(const Options& o, bool smoke) {
  expertlab::AcceptanceOptions acc;
  acc.seed = o.seed == 1 ? 424242 : o.seed;
  acc.smoke = smoke;
  acc.threads = o.threads;
  const auto results = expertlab::run_acceptance(acc);
  json out;
  out["verb"] = "verify";
  out["seed"] = acc.seed;
  out["mode"] = smoke ? "smoke" : "full";
  json checks = json::array();
  for (const auto& r : results)
    checks.push_back({{"criterion", r.criterion},
                      {"name", r.name},
                      {"pass", r.pass},
                      {"observed", num(r.observed)},
                      {"tolerance", num(r.tolerance)},
                      {"note", r.note}});
  out["checks"] = checks;
  const int failures = expertlab::count_failures(results);
  out["failed_criteria"] = failures;
  emit(out);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{
      "expertlab: closed-form values, exact game solvers and Monte Carlo for the"
      " 3/4-expert prediction problem"};
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--n", o.n, "expert count (2, 3 or 4)");
  app.add_option("--t", o.t, "evaluation time");
  app.add_option("--T", o.T, "horizon (transform rate lambda for `laplace`)");
  app.add_option("--x", o.x_str, "state, comma separated");
  app.add_option("--tol", o.tol, "tolerance for residual argmax");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--paths", o.paths, "Monte Carlo paths");
  app.add_option("--steps", o.steps, "Euler-Maruyama steps");
  app.add_option("--M", o.M, "game length");
  app.add_option("--Ms", o.Ms_str, "game lengths, comma separated");
  app.add_option("--player", o.player,
                 "probability-matching | uniform | follow-the-leader | multiplicative-weights(eta)");
  app.add_option("--adversary", o.adversary,
                 "comb | balanced-comb | uniform-subset | fixed-subset(1,3)");
  app.add_option("--format", o.format, "json | csv");
  app.add_option("--quad-nodes", o.quad_nodes, "Gauss-Legendre nodes per panel");
  app.add_option("--quad-rtol", o.quad_rtol, "quadrature relative tolerance");
  app.add_option("--threads", o.threads, "worker cap (default EXPERT_LAB_THREADS or 1)");
  app.add_option("--precision", o.precision, "default | full (hex floats)");

  auto* eval = app.add_subcommand("eval", "evaluate the finite-horizon value");
  auto* grad = app.add_subcommand("grad", "gradient of the value");
  auto* hess = app.add_subcommand("hess", "hessian of the value");
  auto* residual = app.add_subcommand("residual", "per-subset PDE residuals");
  auto* terminal = app.add_subcommand("terminal", "terminal-condition gap probe");
  auto* laplace = app.add_subcommand("laplace", "finite-vs-geometric Laplace bridge");
  auto* ratio = app.add_subcommand("ratio", "finite-vs-geometric value ratios");
  auto* dp = app.add_subcommand("dp", "exact minimax value by backward induction");
  auto* sandwich = app.add_subcommand("sandwich", "lower/exact/upper game values");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo of the repeated game");
  auto* sde = app.add_subcommand("sde", "Euler-Maruyama comb-diffusion estimate");
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  bool smoke = false;
  verify->add_flag("--smoke", smoke, "scaled-down quick pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  g_full_precision = (o.precision == "full");

  try {
    if (eval->parsed()) return run_eval(o);
    if (grad->parsed()) return run_grad(o);
    if (hess->parsed()) return run_hess(o);
    if (residual->parsed()) return run_residual(o);
    if (terminal->parsed()) return run_terminal(o);
    if (laplace->parsed()) return run_laplace(o);
    if (ratio->parsed()) return run_ratio(o);
    if (dp->parsed()) return run_dp(o);
    if (sandwich->parsed()) return run_sandwich(o);
    if (simulate->parsed()) return run_simulate(o);
    if (sde->parsed()) return run_sde(o);
    if (verify->parsed()) return run_verify(o, smoke);
  } catch (const expertlab::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const expertlab::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
