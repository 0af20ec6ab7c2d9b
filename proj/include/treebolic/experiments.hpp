#pragma once

#include <string>
#include <vector>

#include "treebolic/fdsolver.hpp"
#include "treebolic/kernels.hpp"
#include "treebolic/params.hpp"
#include "treebolic/simulate.hpp"

namespace treebolic {

/// Statistical pass thresholds. Config-overridable; defaults are the
/// acceptance values.
struct Thresholds {
  double sigma = 3.0;
  double chi2_p = 0.001;
  double r2 = 0.9;
};

/// Runs fn(replica) on one thread per replica and joins. Results must be
/// written to per-replica slots and merged afterwards in replica order.
void for_each_replica(int replicas, const std::function<void(int)>& fn);

struct EmbeddedChainReport {
  long long n = 0;
  double p_up = 0, target = 0, sigma = 0, z = 0;
  double down_freq = 0, down_target = 0, down_z = 0;
  std::vector<long long> child_counts;
  double chi2 = 0, chi2_pvalue = 1;
  double mean_tau = 0, se_tau = 0;
  bool pass_up = false, pass_children = false, pass = false;
};

EmbeddedChainReport run_embedded_chain(Tree& t, const Params& prm, SimConfig cfg, long n, int replicas,
                                       const Thresholds& th);

struct DriftReport {
  long long n = 0;
  double ell_hat = 0, se = 0;
  double mean_y = 0, mean_tau = 0;
  int expected_sign = 0;
  bool weak_liouville = false;
  std::string verdict;
  bool pass = false;
};

DriftReport run_drift(Tree& t, const Params& prm, SimConfig cfg, long n, int replicas, const Thresholds& th);

struct KernelResidualRow {
  std::string label;
  bool minimal = true;
  double value_at_origin = 0;
  double mc_mean = 0;
  double residual = 0;
  double se = 0;
  bool pass = false;
};

struct HarmonicityReport {
  std::vector<KernelResidualRow> rows;
  double tree_kernel_max_residual = 0;
  bool pass_tree_kernel = false;
  bool pass = false;
};

HarmonicityReport run_harmonicity(Tree& t, const Params& prm, SimConfig cfg, const std::vector<BoundaryParam>& kernels,
                                  long n, int replicas, const Thresholds& th);

struct DirichletCompareReport {
  struct Level {
    int nx = 0, nu = 0;
    double h = 0;
    double sup_err = 0;
  };
  struct Probe {
    double x = 0, u = 0;
    std::string strip;
    double fd = 0, mc = 0, mc_se = 0, gap = 0, tol = 0;
    bool pass = false;
  };
  std::vector<Level> levels;
  std::vector<double> ratios;
  std::vector<Probe> probes;
  double mass_coarse = 0, mass_fine = 0;
  bool mass_pass = false;
  bool max_principle = false;
  bool kernel_positive = false;
  bool refinement_pass = false;
  bool probes_pass = false;
  bool pass = false;
};

/// Cross-validation on the star Omega_{o,r}: FD against the analytic kernel
/// over grid refinements, FD against Monte Carlo at probe points, discrete
/// Poisson mass at two levels, and a maximum-principle check.
DirichletCompareReport run_dirichlet_compare(Tree& t, const Params& prm, SimConfig cfg, const BoundaryParam& kernel,
                                             double r, int nx, int nu, int levels,
                                             const std::vector<HtPoint>& probes, long n_mc, int replicas,
                                             const Thresholds& th);

struct ExitTailsReport {
  std::vector<double> r_values;
  std::vector<double> masses;
  std::vector<long long> vertical_counts;
  long long n_per_r = 0;
  double slope = 0, r2 = 0, rho_hat = 0;
  bool monotone = false;
  bool pass = false;
};

ExitTailsReport run_exit_tails(Tree& t, const Params& prm, SimConfig cfg, const std::vector<double>& r_list, long n,
                               int replicas, const Thresholds& th);

}  // namespace treebolic
