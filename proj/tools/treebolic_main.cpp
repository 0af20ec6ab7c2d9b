// Experiment harness for the treebolic-space toolkit. Every subcommand reads
// a JSON config, runs its verification and writes a JSON summary plus a CSV
// table under --out. Exit codes: 0 pass, 2 statistical-check failure,
// 1 configuration/runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treebolic/experiments.hpp"
#include "treebolic/io.hpp"

using namespace treebolic;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir = "out";
  std::string format = "json";
};

struct LoadedConfig {
  json raw;
  Params params;
  SimConfig sim;
  int replicas = 8;
  long n = 100000;
  Thresholds thresholds;
};

LoadedConfig load_config(const CommonOpts& opts) {
  LoadedConfig lc;
  lc.raw = json::parse(read_file(opts.config_path));
  lc.params = params_from_json(lc.raw.at("params"));
  const json sim = lc.raw.contains("sim") ? lc.raw.at("sim") : json::object();
  lc.sim = sim_config_from_json(sim, lc.params);
  if (sim.contains("replicas")) lc.replicas = sim.at("replicas").get<int>();
  if (lc.replicas < 1 || lc.replicas > 64) throw std::invalid_argument("config: replicas must be in [1, 64]");
  if (lc.raw.contains("n")) lc.n = lc.raw.at("n").get<long>();
  if (opts.seed_override) lc.sim.seed = *opts.seed_override;
  if (lc.raw.contains("thresholds")) {
    const json& th = lc.raw.at("thresholds");
    if (th.contains("sigma")) lc.thresholds.sigma = th.at("sigma").get<double>();
    if (th.contains("chi2_p")) lc.thresholds.chi2_p = th.at("chi2_p").get<double>();
    if (th.contains("r2")) lc.thresholds.r2 = th.at("r2").get<double>();
  }
  return lc;
}

void emit(const CommonOpts& opts, const LoadedConfig& lc, const std::string& name, const json& report,
          const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::filesystem::create_directories(opts.out_dir);
  json summary{{"meta",
                {{"config_hash", config_hash(lc.raw)},
                 {"seed", lc.sim.seed},
                 {"replicas", lc.replicas},
                 {"tool", "treebolic"}}},
               {"report", report}};
  write_file(opts.out_dir + "/" + name + "_summary.json", summary.dump(2) + "\n");
  const std::string meta = metadata_header(lc.raw, lc.sim.seed, lc.replicas);
  const std::string csv = csv_table(meta, header, rows);
  write_file(opts.out_dir + "/" + name + "_table.csv", csv);
  if (opts.format == "csv")
    std::cout << csv;
  else
    std::cout << summary.dump(2) << "\n";
}

std::string fmt(double v) { return format_double(v); }

int cmd_embedded_chain(const CommonOpts& opts) {
  const LoadedConfig lc = load_config(opts);
  Tree tree(lc.params.p);
  const EmbeddedChainReport rep = run_embedded_chain(tree, lc.params, lc.sim, lc.n, lc.replicas, lc.thresholds);
  json jr{{"n", rep.n},
          {"p_up", rep.p_up},
          {"target", rep.target},
          {"sigma", rep.sigma},
          {"z", rep.z},
          {"down_freq", rep.down_freq},
          {"down_target", rep.down_target},
          {"child_counts", rep.child_counts},
          {"chi2", rep.chi2},
          {"chi2_pvalue", rep.chi2_pvalue},
          {"mean_tau", rep.mean_tau},
          {"pass", rep.pass}};
  std::vector<std::vector<std::string>> rows{
      {"p_up", fmt(rep.p_up), fmt(rep.target), fmt(rep.sigma), fmt(rep.z), rep.pass_up ? "pass" : "fail"},
      {"down_freq", fmt(rep.down_freq), fmt(rep.down_target), fmt(rep.sigma), fmt(rep.down_z),
       rep.pass_children && rep.pass_up ? "pass" : "fail"},
      {"chi2_pvalue", fmt(rep.chi2_pvalue), ">" + fmt(lc.thresholds.chi2_p), "", "",
       rep.pass_children ? "pass" : "fail"}};
  emit(opts, lc, "embedded_chain", jr, {"quantity", "estimate", "target", "sigma", "z", "verdict"}, rows);
  return rep.pass ? 0 : 2;
}

int cmd_drift(const CommonOpts& opts) {
  const LoadedConfig lc = load_config(opts);
  Tree tree(lc.params.p);
  const DriftReport rep = run_drift(tree, lc.params, lc.sim, lc.n, lc.replicas, lc.thresholds);
  json jr{{"n", rep.n},        {"ell_hat", rep.ell_hat},
          {"stderr", rep.se},  {"mean_y", rep.mean_y},
          {"mean_tau", rep.mean_tau}, {"expected_sign", rep.expected_sign},
          {"verdict", rep.verdict},   {"pass", rep.pass}};
  std::vector<std::vector<std::string>> rows{
      {"ell_hat", fmt(rep.ell_hat), fmt(rep.se), std::to_string(rep.expected_sign), rep.verdict,
       rep.pass ? "pass" : "fail"}};
  emit(opts, lc, "drift", jr, {"quantity", "estimate", "stderr", "expected_sign", "verdict", "result"}, rows);
  return rep.pass ? 0 : 2;
}

int cmd_harmonicity(const CommonOpts& opts) {
  const LoadedConfig lc = load_config(opts);
  Tree tree(lc.params.p);
  std::vector<BoundaryParam> kernels;
  if (lc.raw.contains("kernels"))
    for (const auto& jk : lc.raw.at("kernels")) kernels.push_back(boundary_param_from_json(tree, jk));
  if (kernels.empty()) throw std::invalid_argument("config: harmonicity needs a kernels list");
  const HarmonicityReport rep = run_harmonicity(tree, lc.params, lc.sim, kernels, lc.n, lc.replicas, lc.thresholds);
  json jrows = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : rep.rows) {
    jrows.push_back(json{{"kernel", row.label},
                         {"minimal", row.minimal},
                         {"value_at_origin", row.value_at_origin},
                         {"mc_mean", row.mc_mean},
                         {"residual", row.residual},
                         {"stderr", row.se},
                         {"pass", row.pass}});
    rows.push_back({row.label, row.minimal ? "yes" : "no", fmt(row.value_at_origin), fmt(row.mc_mean),
                    fmt(row.residual), fmt(row.se), row.pass ? "pass" : "fail"});
  }
  json jr{{"kernels", jrows},
          {"tree_kernel_max_residual", rep.tree_kernel_max_residual},
          {"pass_tree_kernel", rep.pass_tree_kernel},
          {"pass", rep.pass}};
  rows.push_back({"tree-kernel-residual", "", "", "", fmt(rep.tree_kernel_max_residual), "<1e-12",
                  rep.pass_tree_kernel ? "pass" : "fail"});
  emit(opts, lc, "harmonicity", jr, {"kernel", "minimal", "value_at_origin", "mc_mean", "residual", "stderr", "verdict"},
       rows);
  return rep.pass ? 0 : 2;
}

int cmd_dirichlet_compare(const CommonOpts& opts) {
  const LoadedConfig lc = load_config(opts);
  Tree tree(lc.params.p);
  const json grid = lc.raw.contains("grid") ? lc.raw.at("grid") : json::object();
  const double r = grid.value("r", 3.0);
  const int nx = grid.value("nx", 96);
  const int nu = grid.value("nu", 16);
  const int levels = grid.value("levels", 3);
  BoundaryParam kernel = BoundaryParam::real(0.0);
  if (lc.raw.contains("kernel")) kernel = boundary_param_from_json(tree, lc.raw.at("kernel"));
  std::vector<HtPoint> probes;
  if (lc.raw.contains("probes"))
    for (const auto& jp : lc.raw.at("probes")) probes.push_back(ht_point_from_json(tree, lc.params, jp));
  if (probes.empty()) {
    const double hq = 0.5 * lc.params.log_q;
    probes.push_back(make_ht_point(tree, lc.params, 0.0, -hq, TreePoint{tree.root(), -0.5}));
    probes.push_back(make_ht_point(tree, lc.params, r / 2, -hq, TreePoint{tree.root(), -0.5}));
    probes.push_back(make_ht_point(tree, lc.params, -r / 2, -hq, TreePoint{tree.root(), -0.5}));
    probes.push_back(make_ht_point(tree, lc.params, 0.0, hq, TreePoint{tree.child(tree.root(), 0), 0.5}));
    if (lc.params.p > 1)
      probes.push_back(make_ht_point(tree, lc.params, r / 2, hq, TreePoint{tree.child(tree.root(), 1), 0.5}));
  }
  const DirichletCompareReport rep = run_dirichlet_compare(tree, lc.params, lc.sim, kernel, r, nx, nu, levels, probes,
                                                           lc.n, lc.replicas, lc.thresholds);
  json jlev = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& lvl : rep.levels) {
    jlev.push_back(json{{"nx", lvl.nx}, {"nu", lvl.nu}, {"h", lvl.h}, {"sup_err", lvl.sup_err}});
    rows.push_back({"level", std::to_string(lvl.nx), std::to_string(lvl.nu), fmt(lvl.h), fmt(lvl.sup_err), ""});
  }
  json jprobes = json::array();
  for (const auto& pr : rep.probes) {
    jprobes.push_back(json{{"x", pr.x},
                           {"u", pr.u},
                           {"fd", pr.fd},
                           {"mc", pr.mc},
                           {"mc_stderr", pr.mc_se},
                           {"gap", pr.gap},
                           {"tol", pr.tol},
                           {"pass", pr.pass}});
    rows.push_back({"probe", fmt(pr.x), fmt(pr.u), fmt(pr.fd), fmt(pr.mc), pr.pass ? "pass" : "fail"});
  }
  json jr{{"levels", jlev},
          {"ratios", rep.ratios},
          {"probes", jprobes},
          {"poisson_mass", {{"coarse", rep.mass_coarse}, {"fine", rep.mass_fine}, {"pass", rep.mass_pass}}},
          {"max_principle", rep.max_principle},
          {"kernel_positive", rep.kernel_positive},
          {"corners", "dirichlet"},
          {"pass", rep.pass}};
  rows.push_back({"poisson_mass", fmt(rep.mass_coarse), fmt(rep.mass_fine), "", "", rep.mass_pass ? "pass" : "fail"});
  rows.push_back({"max_principle", "", "", "", "", rep.max_principle ? "pass" : "fail"});
  emit(opts, lc, "dirichlet_compare", jr, {"row", "a", "b", "c", "d", "verdict"}, rows);
  return rep.pass ? 0 : 2;
}

int cmd_exit_tails(const CommonOpts& opts, const std::string& dump_exits) {
  const LoadedConfig lc = load_config(opts);
  Tree tree(lc.params.p);
  std::vector<double> r_list{2, 3, 4, 5, 6};
  if (lc.raw.contains("r_list")) r_list = lc.raw.at("r_list").get<std::vector<double>>();
  const ExitTailsReport rep = run_exit_tails(tree, lc.params, lc.sim, r_list, lc.n, lc.replicas, lc.thresholds);
  json jr{{"r", rep.r_values},         {"masses", rep.masses}, {"vertical_counts", rep.vertical_counts},
          {"n_per_r", rep.n_per_r},    {"slope", rep.slope},   {"r2", rep.r2},
          {"rho_hat", rep.rho_hat},    {"monotone", rep.monotone}, {"pass", rep.pass}};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < rep.r_values.size(); ++i)
    rows.push_back({fmt(rep.r_values[i]), std::to_string(rep.vertical_counts[i]), fmt(rep.masses[i])});
  rows.push_back({"fit", "slope=" + fmt(rep.slope), "r2=" + fmt(rep.r2) + " rho=" + fmt(rep.rho_hat)});
  emit(opts, lc, "exit_tails", jr, {"r", "vertical_count", "mass"}, rows);

  if (!dump_exits.empty()) {
    // Stream a reference batch of exit samples for the smallest r.
    std::filesystem::create_directories(opts.out_dir);
    std::string out = metadata_header(lc.raw, lc.sim.seed, 1);
    SimConfig rc = lc.sim;
    rc.replica = 0;
    const StripDomain dom = star_domain(tree, tree.root(), r_list.front());
    CounterRng rng(rc.seed, 0);
    const HtPoint z0 = origin_point(tree);
    const long n_dump = std::min<long>(lc.n, 2000);
    for (long i = 0; i < n_dump; ++i) {
      PathState st{z0, 0.0, 0, rng};
      const ExitSample e = sample_exit(tree, lc.params, rc, dom, st);
      rng = st.rng;
      out += exit_sample_line(tree, e) + "\n";
    }
    write_file(opts.out_dir + "/" + dump_exits, out);
  }
  return rep.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treebolic: simulation and verification toolkit for Brownian motion on treebolic space"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string dump_exits;
  std::uint64_t seed_val = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_val, "override the config seed")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", opts.out_dir, "output directory (default: out)");
    sub->add_option("--format", opts.format, "primary emission: json|csv")->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* c1 = app.add_subcommand("embedded-chain", "up/down law and child uniformity of the embedded chain");
  add_common(c1);
  CLI::App* c2 = app.add_subcommand("drift", "vertical drift rate and Liouville verdict");
  add_common(c2);
  CLI::App* c3 = app.add_subcommand("harmonicity", "mean-value residuals of the harmonic kernels");
  add_common(c3);
  CLI::App* c4 = app.add_subcommand("dirichlet-compare", "finite differences vs Monte Carlo vs analytic kernels");
  add_common(c4);
  CLI::App* c5 = app.add_subcommand("exit-tails", "vertical exit mass decay in the truncation radius");
  add_common(c5);
  c5->add_option("--dump-exits", dump_exits, "also stream exit samples to this file (JSON lines)");

  CLI11_PARSE(app, argc, argv);
  if (seed_set) opts.seed_override = seed_val;

  try {
    if (c1->parsed()) return cmd_embedded_chain(opts);
    if (c2->parsed()) return cmd_drift(opts);
    if (c3->parsed()) return cmd_harmonicity(opts);
    if (c4->parsed()) return cmd_dirichlet_compare(opts);
    if (c5->parsed()) return cmd_exit_tails(opts, dump_exits);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
