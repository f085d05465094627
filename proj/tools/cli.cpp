#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ogl/adadrops.hpp"
#include "ogl/certificates.hpp"
#include "ogl/data.hpp"
#include "ogl/errors.hpp"
#include "ogl/solvers.hpp"

namespace ogl::cli {

namespace {

using nlohmann::json;

// margin slack for certifying at a numerically optimal point
constexpr double kCertifyTol = 1e-6;

Mask to_mask(const IndexList& ids, Index N) {
  Mask m(static_cast<std::size_t>(N), false);
  for (Index t : ids) m[static_cast<std::size_t>(t)] = true;
  return m;
}

struct Options {
  std::string data;
  std::string groups;
  std::string gen = "sliding";
  Index N = 100;
  Index gs = 10;
  Index os = 0;
  Index depth = 4;
  Index fanout = 2;
  Index features = 50;
  Index tasks = 3;
  Index rows = 0;
  std::optional<double> lambda;
  double lambda_ratio = 10.0;
  std::string solver = "admm";
  std::string adadrops = "off";
  Index growth_cap = 10;
  Index init_size = 10;
  double tol = 1e-8;
  Index max_iters = 50000;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> sigma;
  std::optional<double> tau;
  double admm_tau = 1.0;
};

void add_problem_flags(CLI::App& app, Options& o) {
  auto* data = app.add_option("--data", o.data, "LIBSVM data file");
  app.add_option("--groups", o.groups, "group file ('n N' header, then 'w k i_1 .. i_k')");
  app.add_option("--gen", o.gen, "synthetic generator")
      ->check(CLI::IsMember({"sliding", "tree", "multitask"}))
      ->excludes(data);
  app.add_option("--N", o.N, "number of groups (sliding)")->capture_default_str();
  app.add_option("--gs", o.gs, "group size (sliding)")->capture_default_str();
  app.add_option("--os", o.os, "overlap size (sliding)")->capture_default_str();
  app.add_option("--depth", o.depth, "tree depth (tree)")->capture_default_str();
  app.add_option("--fanout", o.fanout, "tree fanout (tree)")->capture_default_str();
  app.add_option("--features", o.features, "features per task (multitask)")->capture_default_str();
  app.add_option("--tasks", o.tasks, "number of tasks (multitask)")->capture_default_str();
  app.add_option("--rows", o.rows, "rows of A (default round(n/2))");
  auto* lam = app.add_option("--lambda", o.lambda, "regularization parameter");
  app.add_option("--lambda-ratio", o.lambda_ratio, "lambda = lambda_max / R")
      ->capture_default_str()
      ->excludes(lam);
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
}

void add_solver_flags(CLI::App& app, Options& o) {
  app.add_option("--solver", o.solver, "pd, admm or varpro")
      ->check(CLI::IsMember({"pd", "admm", "varpro"}))
      ->capture_default_str();
  app.add_option("--tol", o.tol, "stopping tolerance")->capture_default_str();
  app.add_option("--max-iters", o.max_iters, "iteration limit")->capture_default_str();
  app.add_option("--sigma", o.sigma, "primal-dual primal step");
  app.add_option("--tau", o.tau, "primal-dual dual step");
  app.add_option("--admm-tau", o.admm_tau, "ADMM penalty")->capture_default_str();
}

struct Loaded {
  ProblemData problem;
  GroupCovering covering;
  double lambda_max = 0.0;
  std::string source;
};

double pick_lambda(const Options& o, double lmax) {
  const double lambda = o.lambda.value_or(lmax / o.lambda_ratio);
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  return lambda;
}

Index default_rows(const Options& o, Index n) {
  return o.rows > 0 ? o.rows : std::max<Index>(1, std::llround(static_cast<double>(n) / 2.0));
}

Loaded load(const Options& o) {
  if (!o.data.empty()) {
    if (o.groups.empty()) throw ConfigError("--data requires --groups");
    GroupCovering cov = read_groups_file(o.groups);
    LabeledData d = parse_libsvm_file(o.data, cov.dim());
    if (d.A.cols() != cov.dim()) {
      throw DimensionError("data has " + std::to_string(d.A.cols()) +
                           " features but the groups cover " + std::to_string(cov.dim()));
    }
    DesignMatrix A = DesignMatrix::with_density_switch(d.A);
    const double lmax = lambda_max(A, d.y, LiftingOperator(cov));
    const double lambda = pick_lambda(o, lmax);
    return {ProblemData(std::move(A), std::move(d.y), lambda), std::move(cov), lmax, o.data};
  }
  if (o.gen == "sliding") {
    SyntheticSpec spec;
    spec.num_groups = o.N;
    spec.group_size = o.gs;
    spec.overlap = o.os;
    if (o.rows > 0) spec.rows = o.rows;
    spec.seed = o.seed;
    spec.lambda_ratio = o.lambda_ratio;
    spec.lambda = o.lambda;
    SyntheticInstance inst = gen_sliding(spec);
    return {std::move(inst.problem), std::move(inst.covering), inst.lambda_max, "sliding"};
  }
  if (o.gen == "tree") {
    GroupCovering cov = gen_tree_groups(o.depth, o.fanout);
    const Index m = default_rows(o, cov.dim());
    DesignMatrix A(gaussian_matrix(m, cov.dim(), o.seed, 1));
    Vec y = gaussian_matrix(m, 1, o.seed, 2).col(0);
    const double lmax = lambda_max(A, y, LiftingOperator(cov));
    const double lambda = pick_lambda(o, lmax);
    return {ProblemData(std::move(A), std::move(y), lambda), std::move(cov), lmax, "tree"};
  }
  const Index m = o.rows > 0 ? o.rows : o.features;
  const Mat A = gaussian_matrix(m, o.features, o.seed, 1);
  const Mat Y = gaussian_matrix(m, o.tasks, o.seed, 2);
  MultitaskInstance inst = multitask_to_group(A, Y, 1.0);
  const double lmax = lambda_max(inst.problem.A, inst.problem.y, LiftingOperator(inst.covering));
  inst.problem.lambda = pick_lambda(o, lmax);
  return {std::move(inst.problem), std::move(inst.covering), lmax, "multitask"};
}

SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  c.max_iters = o.max_iters;
  c.stop_tol = o.tol;
  c.pd_sigma = o.sigma;
  c.pd_tau = o.tau;
  c.admm_tau = o.admm_tau;
  c.seed = o.seed;
  return c;
}

json config_echo(const Options& o, const Loaded& d, const std::string& command) {
  json c = {{"command", command},
            {"source", d.source},
            {"solver", o.solver},
            {"adadrops", o.adadrops},
            {"lambda", d.problem.lambda},
            {"lambda_max", d.lambda_max},
            {"tol", o.tol},
            {"max_iters", o.max_iters},
            {"seed", o.seed}};
  if (d.source == "sliding") c["sliding"] = {{"N", o.N}, {"gs", o.gs}, {"os", o.os}};
  if (o.adadrops != "off") c["growth_cap"] = o.growth_cap, c["init_size"] = o.init_size;
  return c;
}

json problem_echo(const Loaded& d, const LiftingOperator& L) {
  return {{"m", d.problem.rows()},
          {"n", d.problem.cols()},
          {"groups", L.num_groups()},
          {"lifted_dim", L.lifted_dim()},
          {"overlapping", !L.covering().is_partition()}};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

struct Outcome {
  Vec x;
  IndexList active;
  bool converged = false;
  Index iterations = 0;
  double residual = 0.0;
  SolverTrace trace;
  std::vector<RoundRecord> rounds;
};

Outcome run_solver(const Options& o, const ProblemData& problem, const LiftingOperator& L) {
  const SolverKind kind = parse_solver_kind(o.solver);
  const SolverConfig config = solver_config(o);
  Outcome out;
  if (o.adadrops == "off") {
    SolveResult r = solve(kind, problem, L, config);
    out.active = reported_support(L, r);
    out.x = std::move(r.x);
    out.converged = r.converged;
    out.iterations = r.iterations;
    out.residual = r.residual;
    out.trace = std::move(r.trace);
    return out;
  }
  AdaDropsConfig ac;
  ac.option = parse_update_option(o.adadrops);
  ac.init_size = o.init_size;
  ac.growth_cap = o.growth_cap;
  ac.inner = config;
  AdaDropsResult r = adadrops_run(problem, L, kind, ac);
  out.active = reported_support(L, r.x);
  out.x = std::move(r.x);
  out.converged = r.converged;
  out.iterations = r.iterations;
  out.residual = r.trace.empty() ? 0.0 : r.trace.back().residual;
  out.trace = std::move(r.trace);
  out.rounds = std::move(r.rounds);
  return out;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded d = load(o);
  const LiftingOperator L(d.covering);
  Outcome r = run_solver(o, d.problem, L);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const IndexList& active = r.active;
  const Index nnz = compute_supports(L, active).kappa();
  const double obj = r.trace.empty() ? objective(d.problem, L, r.x) : r.trace.back().objective;

  json result = {{"converged", r.converged},
                 {"iterations", r.iterations},
                 {"objective", obj},
                 {"residual", r.residual},
                 {"support_size", nnz},
                 {"active_groups", static_cast<Index>(active.size())},
                 {"kappa", r.trace.empty() ? L.dim() : r.trace.back().kappa}};
  if (L.covering().is_partition()) result["kkt"] = kkt_residual(d.problem, L, r.x);

  json report = {{"schema", 1},
                 {"seed", o.seed},
                 {"config", config_echo(o, d, "solve")},
                 {"problem", problem_echo(d, L)},
                 {"result", result},
                 {"wall_seconds", wall}};
  if (!r.rounds.empty()) {
    json rounds = json::array();
    for (const auto& rec : r.rounds) {
      json added = json::array();
      for (Index t : rec.added_groups) added.push_back(t + 1);
      rounds.push_back({{"round", rec.round},
                        {"kappa", rec.kappa},
                        {"added_groups", added},
                        {"option", std::string(to_string(rec.option))},
                        {"inner_iterations", rec.inner_iterations},
                        {"inner_converged", rec.inner_converged},
                        {"objective", rec.objective}});
    }
    report["rounds"] = rounds;
  }
  if (!o.out.empty()) {
    report["trace_path"] = o.out + ".trace.jsonl";
    auto trace = open_output(o.out + ".trace.jsonl");
    write_trace_jsonl(trace, r.trace);
    if (!r.rounds.empty()) {
      report["rounds_path"] = o.out + ".rounds.jsonl";
      auto rounds = open_output(o.out + ".rounds.jsonl");
      write_rounds_jsonl(rounds, r.rounds);
    }
    auto f = open_output(o.out + ".report.json");
    f << report.dump(2) << '\n';
  }
  out << report.dump(2) << '\n';
  return r.converged ? kConverged : kFailure;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const Loaded d = load(o);
  const LiftingOperator L(d.covering);
  Outcome r = run_solver(o, d.problem, L);

  const IndexList& active = r.active;
  const SupportState S = compute_supports(L, active);
  const Vec x = mask_project(r.x, S.x_mask);
  const LassoCertificate beta = lasso_certificate(d.problem, x);
  const OgnCertificate u = ogn_certificate(L, S, beta, x);
  const Vec beta_norm = group_coord_norms(L, beta.beta);
  const Vec ogn_norm = ogn_margins(L, u.u);
  const Mask lasso_zero =
      to_mask(detect_zero_groups_lasso(beta, L, DetectMode::Strict, kCertifyTol), L.num_groups());
  const Mask ogn_zero =
      to_mask(detect_zero_groups_ogn(u, L, DetectMode::Strict, kCertifyTol), L.num_groups());

  std::ofstream file;
  if (!o.out.empty()) file = open_output(o.out + ".csv");
  std::ostream& csv = o.out.empty() ? out : file;
  csv << std::setprecision(12);
  csv << "group,weight,beta_norm,ogn_norm,lasso_zero,ogn_zero\n";
  const Index zeros = L.num_groups() - static_cast<Index>(S.active_groups.size());
  Index by_lasso = 0;
  Index by_ogn = 0;
  for (Index t = 0; t < L.num_groups(); ++t) {
    const bool lz = lasso_zero[static_cast<std::size_t>(t)];
    const bool oz = ogn_zero[static_cast<std::size_t>(t)];
    by_lasso += lz;
    by_ogn += oz;
    csv << t + 1 << ',' << L.covering().weight(t) << ',' << beta_norm[t] << ',' << ogn_norm[t]
        << ',' << lz << ',' << oz << '\n';
  }
  csv << "total,,," << zeros << ',' << by_lasso << ',' << by_ogn << '\n';
  if (!o.out.empty()) {
    out << json({{"schema", 1},
                 {"seed", o.seed},
                 {"csv_path", o.out + ".csv"},
                 {"converged", r.converged},
                 {"true_zero", zeros},
                 {"lasso_detected", by_lasso},
                 {"ogn_detected", by_ogn}})
               .dump(2)
        << '\n';
  }
  return r.converged ? kConverged : kFailure;
}

int cmd_gen(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ConfigError("gen requires --out PREFIX");
  const Loaded d = load(o);
  {
    auto f = open_output(o.out + ".libsvm");
    write_libsvm(f, d.problem.A, d.problem.y);
  }
  {
    auto f = open_output(o.out + ".grp");
    write_groups(f, d.covering);
  }
  out << json({{"schema", 1},
               {"seed", o.seed},
               {"source", d.source},
               {"m", d.problem.rows()},
               {"n", d.problem.cols()},
               {"groups", d.covering.num_groups()},
               {"lambda", d.problem.lambda},
               {"lambda_max", d.lambda_max},
               {"data_path", o.out + ".libsvm"},
               {"groups_path", o.out + ".grp"}})
             .dump(2)
      << '\n';
  return kConverged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Overlapping group LASSO solvers and certificates", "ogl");
  app.require_subcommand(1);

  Options solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem and print the run report");
  add_problem_flags(*solve_cmd, solve_opts);
  add_solver_flags(*solve_cmd, solve_opts);
  solve_cmd->add_option("--adadrops", solve_opts.adadrops, "support growth: off, lasso, ogn")
      ->check(CLI::IsMember({"off", "lasso", "ogn"}))
      ->capture_default_str();
  solve_cmd->add_option("--growth-cap", solve_opts.growth_cap, "groups added per round")
      ->capture_default_str();
  solve_cmd->add_option("--init-size", solve_opts.init_size, "initial groups")->capture_default_str();
  solve_cmd->add_option("--out", solve_opts.out, "write PREFIX.report.json and PREFIX.trace.jsonl");

  Options certify_opts;
  certify_opts.tol = 1e-10;
  certify_opts.max_iters = 200000;
  auto* certify_cmd = app.add_subcommand("certify", "per-group certificate CSV at an accurate solution");
  add_problem_flags(*certify_cmd, certify_opts);
  add_solver_flags(*certify_cmd, certify_opts);
  certify_cmd->add_option("--out", certify_opts.out, "write PREFIX.csv instead of stdout");

  Options gen_opts;
  auto* gen_cmd = app.add_subcommand("gen", "write a generated instance (PREFIX.libsvm, PREFIX.grp)");
  add_problem_flags(*gen_cmd, gen_opts);
  gen_cmd->add_option("--out", gen_opts.out, "output prefix")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kConverged;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kConverged;
  } catch (const CLI::ParseError& e) {
    err << "ogl: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_opts, out);
    if (*certify_cmd) return cmd_certify(certify_opts, out);
    return cmd_gen(gen_opts, out);
  } catch (const ConfigError& e) {
    err << "ogl: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "ogl: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace ogl::cli
