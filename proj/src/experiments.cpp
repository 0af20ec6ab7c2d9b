#include "treebolic/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "treebolic/stats.hpp"

namespace treebolic {

void for_each_replica(int replicas, const std::function<void(int)>& fn) {
  if (replicas <= 1) {
    fn(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) pool.emplace_back([&fn, r] { fn(r); });
  for (auto& th : pool) th.join();
}

namespace {

long replica_share(long n, int replicas, int r) {
  const long base = n / replicas;
  return base + (r < n % replicas ? 1 : 0);
}

}  // namespace

EmbeddedChainReport run_embedded_chain(Tree& t, const Params& prm, SimConfig cfg, long n, int replicas,
                                       const Thresholds& th) {
  struct Slot {
    long long up = 0, down = 0;
    std::vector<long long> child;
    RunningStat tau;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(replicas));
  for (auto& s : slots) s.child.assign(static_cast<std::size_t>(prm.p), 0);

  for_each_replica(replicas, [&](int r) {
    SimConfig rc = cfg;
    rc.replica = r;
    const long n_r = replica_share(n, replicas, r);
    Slot& slot = slots[static_cast<std::size_t>(r)];
    CounterRng rng(rc.seed, static_cast<std::uint64_t>(r));
    for (long i = 0; i < n_r; ++i) {
      PathState st{HtPoint{0.0, 0.0, vertex_point(t, t.root())}, 0.0, 0, rng};
      const EmbeddedStep es = embedded_step(t, prm, rc, st);
      rng = st.rng;
      if (es.delta_level > 0) {
        slot.up += 1;
        slot.child[static_cast<std::size_t>(*es.child_index)] += 1;
      } else {
        slot.down += 1;
      }
      slot.tau.add(es.duration);
    }
  });

  EmbeddedChainReport rep;
  rep.child_counts.assign(static_cast<std::size_t>(prm.p), 0);
  long long up = 0, down = 0;
  RunningStat tau;
  for (const auto& s : slots) {
    up += s.up;
    down += s.down;
    for (int c = 0; c < prm.p; ++c) rep.child_counts[static_cast<std::size_t>(c)] += s.child[static_cast<std::size_t>(c)];
    tau.merge(s.tau);
  }
  rep.n = up + down;
  rep.target = prm.a / (1.0 + prm.a);
  rep.down_target = 1.0 / (1.0 + prm.a);
  rep.p_up = static_cast<double>(up) / static_cast<double>(rep.n);
  rep.down_freq = static_cast<double>(down) / static_cast<double>(rep.n);
  rep.sigma = std::sqrt(rep.target * (1.0 - rep.target) / static_cast<double>(rep.n));
  rep.z = (rep.p_up - rep.target) / rep.sigma;
  rep.down_z = (rep.down_freq - rep.down_target) / rep.sigma;
  rep.mean_tau = tau.mean;
  rep.se_tau = tau.stderr_mean();
  rep.pass_up = std::abs(rep.z) <= th.sigma;
  if (prm.p > 1 && up > 0) {
    const double expect = static_cast<double>(up) / prm.p;
    double chi2 = 0;
    for (const long long c : rep.child_counts) {
      const double d = static_cast<double>(c) - expect;
      chi2 += d * d / expect;
    }
    rep.chi2 = chi2;
    rep.chi2_pvalue = chi_square_pvalue(chi2, prm.p - 1);
    rep.pass_children = rep.chi2_pvalue > th.chi2_p;
  } else {
    rep.chi2 = 0;
    rep.chi2_pvalue = 1.0;
    rep.pass_children = true;
  }
  rep.pass = rep.pass_up && rep.pass_children;
  return rep;
}

DriftReport run_drift(Tree& t, const Params& prm, SimConfig cfg, long n, int replicas, const Thresholds& th) {
  std::vector<DriftAccum> slots(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, [&](int r) {
    SimConfig rc = cfg;
    rc.replica = r;
    slots[static_cast<std::size_t>(r)] = drift_accumulate(t, prm, rc, replica_share(n, replicas, r));
  });
  DriftAccum acc;
  for (const auto& s : slots) acc.merge(s);
  const DriftEstimate est = finalize_drift(acc, prm);

  DriftReport rep;
  rep.n = est.n;
  rep.ell_hat = est.ell_hat;
  rep.se = est.se;
  rep.mean_y = est.mean_y;
  rep.mean_tau = est.mean_tau;
  const LiouvilleVerdict lv = liouville_predicate(prm);
  rep.expected_sign = lv.ell_sign;
  rep.weak_liouville = lv.weak_liouville;
  rep.verdict = lv.weak_liouville ? "weak Liouville: yes" : "weak Liouville: no";
  if (lv.weak_liouville) {
    rep.pass = std::abs(rep.ell_hat) <= th.sigma * rep.se;
  } else {
    const bool sign_ok = (rep.ell_hat > 0) == (lv.ell_sign > 0);
    rep.pass = sign_ok && std::abs(rep.ell_hat) > th.sigma * rep.se;
  }
  return rep;
}

HarmonicityReport run_harmonicity(Tree& t, const Params& prm, SimConfig cfg, const std::vector<BoundaryParam>& kernels,
                                  long n, int replicas, const Thresholds& th) {
  HarmonicityReport rep;
  const HtPoint z0 = origin_point(t);
  for (const BoundaryParam& bp : kernels) {
    const HtFunction h = ht_kernel_function(t, bp, prm);
    std::vector<RunningStat> slots(static_cast<std::size_t>(replicas));
    for_each_replica(replicas, [&](int r) {
      SimConfig rc = cfg;
      rc.replica = r;
      const long n_r = replica_share(n, replicas, r);
      const StripDomain dom = star_domain(t, t.root());
      CounterRng rng(rc.seed, static_cast<std::uint64_t>(r));
      RunningStat& acc = slots[static_cast<std::size_t>(r)];
      for (long i = 0; i < n_r; ++i) {
        PathState st{z0, 0.0, 0, rng};
        const ExitSample e = sample_exit(t, prm, rc, dom, st);
        rng = st.rng;
        acc.add(h(e.exit_point));
      }
    });
    RunningStat acc;
    for (const auto& s : slots) acc.merge(s);
    KernelResidualRow row;
    row.label = bp.label();
    row.minimal = is_minimal_parameter(bp, prm);
    row.value_at_origin = h(z0);
    row.mc_mean = acc.mean;
    row.residual = acc.mean - row.value_at_origin;
    row.se = acc.stderr_mean();
    row.pass = row.se > 0 ? std::abs(row.residual) <= th.sigma * row.se : row.residual == 0.0;
    rep.rows.push_back(row);
  }

  // Discrete harmonicity of the tree Martin kernels by direct summation.
  double max_res = 0;
  CounterRng rng(cfg.seed ^ 0x5bd1e995u, 977);
  const TreeWalkLaw law = TreeWalkLaw::from(prm);
  for (int trial = 0; trial < 100; ++trial) {
    NodeId v = t.root();
    const int moves = rng.uniform_int(6);
    for (int m = 0; m < moves; ++m) {
      if (rng.uniform() < 0.4)
        v = t.parent(v);
      else
        v = t.child(v, rng.uniform_int(prm.p));
    }
    BoundaryParam bp = BoundaryParam::varpi();
    if (rng.uniform() < 0.8) {
      std::vector<int> word;
      const int len = 4 + rng.uniform_int(5);
      for (int k = 0; k < len; ++k) word.push_back(rng.uniform_int(prm.p));
      bp = BoundaryParam::tree_end(TreeEnd::upper(t.root(), word));
    }
    const double kv = martin_kernel_tree(t, v, bp, prm);
    double sum = law.down_prob * martin_kernel_tree(t, t.parent(v), bp, prm);
    for (int c = 0; c < prm.p; ++c) sum += law.up_prob_per_child * martin_kernel_tree(t, t.child(v, c), bp, prm);
    max_res = std::max(max_res, std::abs(kv - sum));
  }
  rep.tree_kernel_max_residual = max_res;
  rep.pass_tree_kernel = max_res < 1e-12;
  rep.pass = rep.pass_tree_kernel;
  for (const auto& row : rep.rows) rep.pass = rep.pass && row.pass;
  return rep;
}

DirichletCompareReport run_dirichlet_compare(Tree& t, const Params& prm, SimConfig cfg, const BoundaryParam& kernel,
                                             double r, int nx, int nu, int levels,
                                             const std::vector<HtPoint>& probes, long n_mc, int replicas,
                                             const Thresholds& th) {
  DirichletCompareReport rep;
  const HtFunction h = ht_kernel_function(t, kernel, prm);
  std::vector<NodeId> star{t.parent(t.root()), t.root()};
  for (int c = 0; c < prm.p; ++c) star.push_back(t.child(t.root(), c));

  std::vector<DiscreteSolution> sols;
  for (int lv = 0; lv < levels; ++lv) {
    const int nxl = nx << lv, nul = nu << lv;
    const StripGrid grid = StripGrid::build(t, prm, star, r, nxl, nul);
    DiscreteSolution sol = solve_dirichlet(grid, prm, h);
    double sup = 0;
    for (int s = 0; s < static_cast<int>(grid.strips.size()); ++s)
      for (int j = 0; j <= grid.nu; ++j)
        for (int i = 0; i <= grid.nx; ++i) {
          if (grid.is_dirichlet(s, i, j)) continue;
          sup = std::max(sup, std::abs(sol.at(s, i, j) - h(grid.point_of(s, i, j))));
        }
    rep.levels.push_back({nxl, nul, std::max(grid.hx, grid.hu), sup});
    sols.push_back(std::move(sol));
  }
  rep.refinement_pass = true;
  for (std::size_t lv = 1; lv < rep.levels.size(); ++lv) {
    const double ratio = rep.levels[lv - 1].sup_err / rep.levels[lv].sup_err;
    rep.ratios.push_back(ratio);
    if (!(ratio >= 3.0 && ratio <= 5.0)) rep.refinement_pass = false;
  }

  // Probe comparison: finest FD level against Monte Carlo.
  const DiscreteSolution& fine = sols.back();
  const DiscreteSolution& prev = sols[sols.size() - 2];
  rep.probes_pass = true;
  for (const HtPoint& probe : probes) {
    DirichletCompareReport::Probe row;
    row.x = probe.x;
    row.u = probe.u;
    row.strip = "";
    row.fd = fine.interpolate(t, probe);
    const double fd_prev = prev.interpolate(t, probe);
    // Richardson error estimate for a second-order scheme, with a floor.
    const double fd_err = 2.0 * std::abs(row.fd - fd_prev) / 3.0 + 1e-8;
    std::vector<RunningStat> slots(static_cast<std::size_t>(replicas));
    for_each_replica(replicas, [&](int rr) {
      SimConfig rc = cfg;
      rc.replica = rr;
      const StripDomain dom = star_domain(t, t.root(), r);
      CounterRng rng(rc.seed, static_cast<std::uint64_t>(rr));
      RunningStat& acc = slots[static_cast<std::size_t>(rr)];
      const long n_r = replica_share(n_mc, replicas, rr);
      for (long i = 0; i < n_r; ++i) {
        PathState st{probe, 0.0, 0, rng};
        const ExitSample e = sample_exit(t, prm, rc, dom, st);
        rng = st.rng;
        acc.add(h(e.exit_point));
      }
    });
    RunningStat acc;
    for (const auto& s : slots) acc.merge(s);
    row.mc = acc.mean;
    row.mc_se = acc.stderr_mean();
    row.gap = std::abs(row.mc - row.fd);
    row.tol = std::max(th.sigma * row.mc_se, fd_err);
    row.pass = row.gap <= row.tol;
    rep.probes_pass = rep.probes_pass && row.pass;
    rep.probes.push_back(row);
  }

  // Discrete Poisson mass at two levels; source near the middle of the
  // lower strip at x = 0.
  {
    const StripGrid g1 = StripGrid::build(t, prm, star, r, nx, nu);
    const StripGrid g2 = StripGrid::build(t, prm, star, r, nx * 2, nu * 2);
    const GreenColumn c1 = discrete_green_column(g1, prm, 0, g1.nx / 2, g1.nu / 2);
    const GreenColumn c2 = discrete_green_column(g2, prm, 0, g2.nx / 2, g2.nu / 2);
    rep.mass_coarse = c1.mass;
    rep.mass_fine = c2.mass;
    const double h1 = std::max(g1.hx, g1.hu), h2 = std::max(g2.hx, g2.hu);
    rep.mass_pass = std::abs(c1.mass - 1.0) <= 1.0 * h1 && std::abs(c2.mass - 1.0) <= 1.0 * h2 &&
                    std::abs(c2.mass - 1.0) < std::abs(c1.mass - 1.0);
    rep.kernel_positive = true;
    for (std::size_t l = 0; l < c2.line_density.size(); ++l) {
      if (c2.line_density[l].empty()) continue;
      for (int i = 1; i < g2.nx; ++i)
        if (!(c2.line_density[l][static_cast<std::size_t>(i)] > 0)) rep.kernel_positive = false;
    }
  }
  rep.max_principle = max_principle_holds(fine, prm, h, 1e-10);
  rep.pass = rep.refinement_pass && rep.probes_pass && rep.mass_pass && rep.max_principle && rep.kernel_positive;
  return rep;
}

ExitTailsReport run_exit_tails(Tree& t, const Params& prm, SimConfig cfg, const std::vector<double>& r_list, long n,
                               int replicas, const Thresholds& th) {
  ExitTailsReport rep;
  rep.n_per_r = n;
  rep.r_values = r_list;
  for (const double r : r_list) {
    std::vector<long long> slots(static_cast<std::size_t>(replicas), 0);
    for_each_replica(replicas, [&](int rr) {
      SimConfig rc = cfg;
      rc.replica = rr;
      const StripDomain dom = star_domain(t, t.root(), r);
      CounterRng rng(rc.seed + static_cast<std::uint64_t>(r * 1000), static_cast<std::uint64_t>(rr));
      const long n_r = replica_share(n, replicas, rr);
      long long vert = 0;
      const HtPoint z0{0.0, 0.0, vertex_point(t, t.root())};
      for (long i = 0; i < n_r; ++i) {
        PathState st{z0, 0.0, 0, rng};
        const ExitSample e = sample_exit(t, prm, rc, dom, st);
        rng = st.rng;
        if (e.side == Side::vertical) vert += 1;
      }
      slots[static_cast<std::size_t>(rr)] = vert;
    });
    long long vert = 0;
    for (const long long v : slots) vert += v;
    rep.vertical_counts.push_back(vert);
    rep.masses.push_back(static_cast<double>(vert) / static_cast<double>(n));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.masses.size(); ++i)
    if (!(rep.masses[i] < rep.masses[i - 1])) rep.monotone = false;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.masses.size(); ++i) {
    if (rep.masses[i] <= 0) continue;
    xs.push_back(rep.r_values[i]);
    ys.push_back(std::log(rep.masses[i]));
  }
  if (xs.size() >= 2) {
    const LinFit fit = linear_fit(xs, ys);
    rep.slope = fit.slope;
    rep.r2 = fit.r2;
    rep.rho_hat = std::exp(fit.slope);
  }
  rep.pass = rep.monotone && rep.r2 > th.r2 && rep.rho_hat > 0 && rep.rho_hat < 1 && rep.slope < 0;
  return rep;
}

}  // namespace treebolic
