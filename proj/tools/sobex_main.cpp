#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <sobex/sobex.hpp>

namespace {

using sobex::json;

void print_value(double v) { std::printf("%s\n", sobex::render(v).c_str()); }

struct DomainArgs {
  std::string path;
  int resolution = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--domain", path, "domain spec JSON file")->required();
    cmd->add_option("--resolution", resolution, "nodes per unit length (h = 1/n)")
        ->required();
  }
  sobex::DomainSpec load() const { return sobex::load_domain(path); }
};

struct SolverArgs {
  double tol = 1e-9;
  long max_iters = 50000;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "relative energy tolerance");
    cmd->add_option("--max-iters", max_iters, "iteration cap per stage");
  }
  sobex::SolveConfig config(double p, double q = 2.0) const {
    sobex::SolveConfig cfg;
    cfg.p = p;
    cfg.q = q;
    cfg.tol_rel_energy = tol;
    cfg.max_iters = max_iters;
    return cfg;
  }
};

json solver_json(const sobex::SolveConfig& cfg) {
  return json{{"p", cfg.p},
              {"q", cfg.q},
              {"tol_rel_energy", cfg.tol_rel_energy},
              {"max_iters", cfg.max_iters}};
}

json domain_config(const DomainArgs& d, const sobex::DomainSpec& spec) {
  return json{{"domain", sobex::domain_to_json(spec)},
              {"resolution", d.resolution}};
}

void emit_manifest(const std::string& subcommand, json config,
                   std::vector<std::string> outputs, const std::string& anchor,
                   int threads) {
  config["threads"] = threads;
  sobex::RunManifest man{subcommand, std::move(config), std::move(outputs)};
  sobex::write_manifest(man, anchor + ".manifest.json");
}

void write_report_files(const sobex::ScalarField& field, const json& report,
                        const std::string& out) {
  sobex::export_field_csv(field, out);
  std::ofstream rep(out + ".report.json");
  if (!rep) throw sobex::IoError("cannot open output file: " + out + ".report.json");
  rep << report.dump(2) << '\n';
  if (!rep.flush()) throw sobex::IoError("write failed: " + out + ".report.json");
}

int source_node_or_distance_argmax(const sobex::DomainSpec& spec,
                                   const sobex::GridPtr& grid,
                                   std::optional<double> sx,
                                   std::optional<double> sy) {
  if (sx && sy) {
    const int node = grid->nearest_node({*sx, *sy});
    if (!grid->mask[node])
      throw sobex::BadNode("source point does not map to an interior node");
    return node;
  }
  return sobex::distance_field(spec, grid).argmax;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sobex: best Sobolev constants, p-Laplace point sources, and "
               "infinity-harmonic fields on 2-D domains"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "cap on internal parallelism")
      ->check(CLI::PositiveNumber);

  // ----- closed-form -----
  auto* cf = app.add_subcommand("closed-form", "evaluate closed formulas");
  cf->require_subcommand(1);
  struct {
    double t = 0, p = 0, r = 0, rho = 0, area = 0, inradius = 0;
    int n = 2;
  } cfa;
  {
    auto* c = cf->add_subcommand("gamma", "gamma function");
    c->add_option("--t", cfa.t)->required();
    c->callback([&] { print_value(sobex::gamma_fn(cfa.t)); });
  }
  {
    auto* c = cf->add_subcommand("unit-ball-volume", "volume of the unit n-ball");
    c->add_option("--n", cfa.n)->required();
    c->callback([&] { print_value(sobex::unit_ball_volume(cfa.n)); });
  }
  {
    auto* c = cf->add_subcommand("sobolev-constant",
                                 "critical embedding constant, 1 < p < n");
    c->add_option("--n", cfa.n)->required();
    c->add_option("--p", cfa.p)->required();
    c->callback([&] { print_value(sobex::sobolev_constant(cfa.n, cfa.p)); });
  }
  {
    auto* c = cf->add_subcommand("lambda-ball", "sup-norm constant on a ball");
    c->add_option("--n", cfa.n)->required();
    c->add_option("--p", cfa.p)->required();
    c->add_option("--r", cfa.r)->required();
    c->callback([&] { print_value(sobex::lambda_ball(cfa.n, cfa.p, cfa.r)); });
  }
  {
    auto* c = cf->add_subcommand("ball-profile", "extremal profile value");
    c->add_option("--n", cfa.n)->required();
    c->add_option("--p", cfa.p)->required();
    c->add_option("--r", cfa.r)->required();
    c->add_option("--rho", cfa.rho, "radial coordinate in [0, r]")->required();
    c->callback(
        [&] { print_value(sobex::ball_profile(cfa.n, cfa.p, cfa.r, cfa.rho)); });
  }
  {
    auto* c = cf->add_subcommand("talenti-lower", "measure-only lower bound");
    c->add_option("--n", cfa.n)->required();
    c->add_option("--p", cfa.p)->required();
    c->add_option("--area", cfa.area)->required();
    c->callback([&] { print_value(sobex::talenti_lower(cfa.n, cfa.p, cfa.area)); });
  }
  {
    auto* c = cf->add_subcommand("inradius-upper", "inscribed-ball upper bound");
    c->add_option("--n", cfa.n)->required();
    c->add_option("--p", cfa.p)->required();
    c->add_option("--inradius", cfa.inradius)->required();
    c->callback(
        [&] { print_value(sobex::inradius_upper(cfa.n, cfa.p, cfa.inradius)); });
  }
  {
    auto* c = cf->add_subcommand("p-to-n-limit", "limit constant as p -> n+");
    c->add_option("--n", cfa.n)->required();
    c->callback([&] { print_value(sobex::p_to_n_limit_constant(cfa.n)); });
  }
  {
    auto* c = cf->add_subcommand("renwei", "conformal-exponent growth constant");
    c->add_option("--n", cfa.n)->required();
    c->callback([&] { print_value(sobex::renwei_constant(cfa.n)); });
  }

  // ----- distance -----
  auto* dist_cmd = app.add_subcommand("distance", "distance-to-boundary field");
  DomainArgs dist_dom;
  dist_dom.attach(dist_cmd);
  std::string dist_out;
  dist_cmd->add_option("--out", dist_out, "CSV output path")->required();
  dist_cmd->callback([&] {
    const auto spec = dist_dom.load();
    const auto grid = sobex::rasterize(spec, dist_dom.resolution);
    const auto res = sobex::distance_field(spec, grid);
    sobex::export_field_csv(res.rho, dist_out);
    emit_manifest("distance", domain_config(dist_dom, spec), {dist_out},
                  dist_out, threads);
    std::printf("sup_norm %s\n", sobex::render(res.sup_norm).c_str());
    const sobex::Point am = grid->point(res.argmax);
    std::printf("argmax %s %s\n", sobex::render(am.x).c_str(),
                sobex::render(am.y).c_str());
    std::printf("exact_formula %d\n", res.used_exact_formula ? 1 : 0);
  });

  // ----- ridge -----
  auto* ridge_cmd = app.add_subcommand("ridge", "ridge nodes with witnesses");
  DomainArgs ridge_dom;
  ridge_dom.attach(ridge_cmd);
  std::string ridge_out;
  double eps_near = 0.0, delta_sep = 0.0;
  ridge_cmd->add_option("--out", ridge_out, "CSV output path")->required();
  ridge_cmd->add_option("--eps-near", eps_near,
                        "near-minimal band width (default 2h)");
  ridge_cmd->add_option("--delta-sep", delta_sep,
                        "witness separation threshold (default 5h)");
  ridge_cmd->callback([&] {
    const auto spec = ridge_dom.load();
    const auto grid = sobex::rasterize(spec, ridge_dom.resolution);
    const double eps = eps_near > 0.0 ? eps_near : 2.0 * grid->h;
    const double sep = delta_sep > 0.0 ? delta_sep : 5.0 * grid->h;
    const auto ridge = sobex::ridge_set(spec, grid, eps, sep);
    sobex::export_ridge_csv(ridge, *grid, ridge_out);
    json cfg = domain_config(ridge_dom, spec);
    cfg["eps_near"] = eps;
    cfg["delta_sep"] = sep;
    emit_manifest("ridge", cfg, {ridge_out}, ridge_out, threads);
    std::printf("ridge_nodes %zu\n", ridge.nodes.size());
  });

  // ----- lambda-q -----
  auto* lq_cmd = app.add_subcommand("lambda-q", "best L^q embedding constant");
  DomainArgs lq_dom;
  lq_dom.attach(lq_cmd);
  SolverArgs lq_solver;
  lq_solver.attach(lq_cmd);
  double lq_p = 4.0, lq_q = 2.0;
  std::string lq_out;
  lq_cmd->add_option("--p", lq_p)->required();
  lq_cmd->add_option("--q", lq_q)->required();
  lq_cmd->add_option("--out", lq_out, "field CSV path")->required();
  lq_cmd->callback([&] {
    const auto spec = lq_dom.load();
    const auto grid = sobex::rasterize(spec, lq_dom.resolution);
    const auto cfg = lq_solver.config(lq_p, lq_q);
    const auto rep = sobex::solve_lambda_q(grid, cfg);
    write_report_files(rep.field, sobex::report_to_json(rep), lq_out);
    json mc = domain_config(lq_dom, spec);
    mc["solver"] = solver_json(cfg);
    emit_manifest("lambda-q", mc, {lq_out, lq_out + ".report.json"}, lq_out,
                  threads);
    print_value(rep.value);
  });

  // ----- extremal -----
  auto* ext_cmd = app.add_subcommand("extremal", "sup-norm constant and extremal");
  DomainArgs ext_dom;
  ext_dom.attach(ext_cmd);
  SolverArgs ext_solver;
  ext_solver.attach(ext_cmd);
  double ext_p = 4.0;
  std::string ext_out;
  ext_cmd->add_option("--p", ext_p)->required();
  ext_cmd->add_option("--out", ext_out, "field CSV path")->required();
  ext_cmd->callback([&] {
    const auto spec = ext_dom.load();
    const auto grid = sobex::rasterize(spec, ext_dom.resolution);
    const auto cfg = ext_solver.config(ext_p);
    const auto rep = sobex::solve_extremal(grid, ext_p, cfg);
    write_report_files(rep.field, sobex::report_to_json(rep), ext_out);
    json mc = domain_config(ext_dom, spec);
    mc["solver"] = solver_json(cfg);
    emit_manifest("extremal", mc, {ext_out, ext_out + ".report.json"}, ext_out,
                  threads);
    print_value(rep.value);
  });

  // ----- dirac -----
  auto* dir_cmd = app.add_subcommand("dirac", "point-source p-Laplace solve");
  DomainArgs dir_dom;
  dir_dom.attach(dir_cmd);
  SolverArgs dir_solver;
  dir_solver.attach(dir_cmd);
  double dir_p = 4.0;
  std::optional<double> dir_sx, dir_sy;
  std::string dir_out;
  dir_cmd->add_option("--p", dir_p)->required();
  dir_cmd->add_option("--source-x", dir_sx, "source x (default: distance argmax)");
  dir_cmd->add_option("--source-y", dir_sy, "source y");
  dir_cmd->add_option("--out", dir_out, "field CSV path")->required();
  dir_cmd->callback([&] {
    const auto spec = dir_dom.load();
    const auto grid = sobex::rasterize(spec, dir_dom.resolution);
    const int y = source_node_or_distance_argmax(spec, grid, dir_sx, dir_sy);
    const auto cfg = dir_solver.config(dir_p);
    const auto rep = sobex::dirac_solve(grid, dir_p, y, cfg);
    write_report_files(rep.field, sobex::report_to_json(rep), dir_out);
    json mc = domain_config(dir_dom, spec);
    mc["solver"] = solver_json(cfg);
    const sobex::Point sp = grid->point(y);
    mc["source"] = {sp.x, sp.y};
    emit_manifest("dirac", mc, {dir_out, dir_out + ".report.json"}, dir_out,
                  threads);
    print_value(rep.value);
  });

  // ----- infinity -----
  auto* inf_cmd = app.add_subcommand("infinity", "punctured-domain infinity-harmonic solve");
  DomainArgs inf_dom;
  inf_dom.attach(inf_cmd);
  std::optional<double> inf_px, inf_py;
  double inf_tol = 1e-8;
  long inf_sweeps = 100000;
  std::string inf_out;
  inf_cmd->add_option("--puncture-x", inf_px, "puncture x (default: distance argmax)");
  inf_cmd->add_option("--puncture-y", inf_py, "puncture y");
  inf_cmd->add_option("--tol", inf_tol, "max-update stopping tolerance");
  inf_cmd->add_option("--max-sweeps", inf_sweeps);
  inf_cmd->add_option("--out", inf_out, "field CSV path")->required();
  inf_cmd->callback([&] {
    const auto spec = inf_dom.load();
    const auto grid = sobex::rasterize(spec, inf_dom.resolution);
    const int xs = source_node_or_distance_argmax(spec, grid, inf_px, inf_py);
    const auto rep = sobex::inf_solve({grid, xs}, inf_tol, inf_sweeps);
    write_report_files(rep.field, sobex::inf_report_to_json(rep, xs), inf_out);
    json mc = domain_config(inf_dom, spec);
    mc["tol"] = inf_tol;
    mc["max_sweeps"] = inf_sweeps;
    const sobex::Point pp = grid->point(xs);
    mc["puncture"] = {pp.x, pp.y};
    emit_manifest("infinity", mc, {inf_out, inf_out + ".report.json"}, inf_out,
                  threads);
    std::printf("lipschitz_estimate %s\n",
                sobex::render(rep.lipschitz_estimate).c_str());
  });

  // ----- study-q -----
  auto* sq_cmd = app.add_subcommand("study-q", "q-sweep toward the sup-norm constant");
  DomainArgs sq_dom;
  sq_dom.attach(sq_cmd);
  SolverArgs sq_solver;
  sq_solver.attach(sq_cmd);
  double sq_p = 4.0;
  std::vector<double> sq_qs;
  std::string sq_out;
  sq_cmd->add_option("--p", sq_p)->required();
  sq_cmd->add_option("--q-list", sq_qs, "increasing q values")
      ->required()
      ->delimiter(',');
  sq_cmd->add_option("--out", sq_out, "CSV output path")->required();
  sq_cmd->callback([&] {
    const auto spec = sq_dom.load();
    const auto grid = sobex::rasterize(spec, sq_dom.resolution);
    sobex::StudyConfig cfg;
    cfg.solver = sq_solver.config(sq_p);
    const auto rep = sobex::study_q(grid, sq_p, sq_qs, cfg);
    sobex::export_study_csv(rep, sq_out);
    std::ofstream js(sq_out + ".report.json");
    if (!js) throw sobex::IoError("cannot open output file: " + sq_out + ".report.json");
    js << sobex::study_to_json(rep).dump(2) << '\n';
    if (!js.flush()) throw sobex::IoError("write failed: " + sq_out + ".report.json");
    json mc = domain_config(sq_dom, spec);
    mc["p"] = sq_p;
    mc["q_list"] = sq_qs;
    mc["solver"] = solver_json(cfg.solver);
    emit_manifest("study-q", mc, {sq_out, sq_out + ".report.json"}, sq_out,
                  threads);
    std::printf("monotone %d\nwithin_target %d\ntarget %s\n", rep.monotone ? 1 : 0,
                rep.within_target ? 1 : 0, sobex::render(rep.target).c_str());
  });

  // ----- study-p -----
  auto* sp_cmd = app.add_subcommand("study-p", "p-sweep toward 1/sup(rho)");
  DomainArgs sp_dom;
  sp_dom.attach(sp_cmd);
  SolverArgs sp_solver;
  sp_solver.attach(sp_cmd);
  std::vector<double> sp_ps;
  std::string sp_out;
  sp_cmd->add_option("--p-list", sp_ps, "increasing p values, each > 2, max 50")
      ->required()
      ->delimiter(',');
  sp_cmd->add_option("--out", sp_out, "CSV output path")->required();
  sp_cmd->callback([&] {
    const auto spec = sp_dom.load();
    const auto grid = sobex::rasterize(spec, sp_dom.resolution);
    sobex::StudyConfig cfg;
    cfg.solver = sp_solver.config(sp_ps.empty() ? 4.0 : sp_ps.front());
    const auto rep = sobex::study_p(grid, sp_ps, cfg);
    sobex::export_study_csv(rep, sp_out);
    std::ofstream js(sp_out + ".report.json");
    if (!js) throw sobex::IoError("cannot open output file: " + sp_out + ".report.json");
    js << sobex::study_to_json(rep).dump(2) << '\n';
    if (!js.flush()) throw sobex::IoError("write failed: " + sp_out + ".report.json");
    json mc = domain_config(sp_dom, spec);
    mc["p_list"] = sp_ps;
    mc["solver"] = solver_json(cfg.solver);
    emit_manifest("study-p", mc, {sp_out, sp_out + ".report.json"}, sp_out,
                  threads);
    std::printf("monotone %d\nwithin_target %d\n", rep.monotone ? 1 : 0,
                rep.within_target ? 1 : 0);
    if (rep.extrapolated_limit)
      std::printf("extrapolated_limit %s\n",
                  sobex::render(*rep.extrapolated_limit).c_str());
  });

  // ----- annulus-multiplicity -----
  auto* am_cmd = app.add_subcommand(
      "annulus-multiplicity", "distinct punctured-annulus solutions by angle");
  double am_a = 1.0, am_b = 2.0, am_tol = 1e-8;
  int am_n = 0;
  long am_sweeps = 100000;
  std::vector<double> am_angles;
  std::string am_prefix;
  am_cmd->add_option("--a", am_a, "inner radius")->required();
  am_cmd->add_option("--b", am_b, "outer radius")->required();
  am_cmd->add_option("--resolution", am_n)->required();
  am_cmd->add_option("--angles", am_angles, "midcircle puncture angles")
      ->required()
      ->delimiter(',');
  am_cmd->add_option("--tol", am_tol);
  am_cmd->add_option("--max-sweeps", am_sweeps);
  am_cmd->add_option("--out-prefix", am_prefix)->required();
  am_cmd->callback([&] {
    const auto res =
        sobex::annulus_multiplicity(am_a, am_b, am_n, am_angles, am_tol, am_sweeps);
    std::vector<std::string> outputs;
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
      const std::string path = am_prefix + "_" + std::to_string(k) + ".csv";
      sobex::export_field_csv(res.reports[k].field, path);
      outputs.push_back(path);
    }
    json summary;
    summary["pairwise_sup"] = res.pairwise_sup;
    json reps = json::array();
    for (std::size_t k = 0; k < res.reports.size(); ++k)
      reps.push_back(sobex::inf_report_to_json(res.reports[k], res.punctures[k]));
    summary["reports"] = std::move(reps);
    const std::string spath = am_prefix + "_summary.json";
    std::ofstream js(spath);
    if (!js) throw sobex::IoError("cannot open output file: " + spath);
    js << summary.dump(2) << '\n';
    if (!js.flush()) throw sobex::IoError("write failed: " + spath);
    outputs.push_back(spath);
    json mc{{"a", am_a}, {"b", am_b},       {"resolution", am_n},
            {"angles", am_angles}, {"tol", am_tol}, {"max_sweeps", am_sweeps}};
    emit_manifest("annulus-multiplicity", mc, outputs, am_prefix, threads);
    for (std::size_t i = 0; i < res.pairwise_sup.size(); ++i)
      for (std::size_t j = i + 1; j < res.pairwise_sup.size(); ++j)
        std::printf("sup_distance %zu %zu %s\n", i, j,
                    sobex::render(res.pairwise_sup[i][j]).c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const sobex::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const sobex::NoConvergence& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const sobex::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
