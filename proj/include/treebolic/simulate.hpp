#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "treebolic/geometry.hpp"
#include "treebolic/params.hpp"
#include "treebolic/rng.hpp"
#include "treebolic/tree.hpp"

namespace treebolic {

/// Simulation configuration. Defaults keep at least ~10 Euler steps across
/// a strip in the vertical diffusion scale; the shipped default is much
/// finer so that interface discretization bias stays below the statistical
/// resolution of the verification runs.
struct SimConfig {
  double dt = 1e-4;
  double line_tol = 1e-9;
  long max_steps = 8'000'000;  // per sampled path / embedded step
  std::uint64_t seed = 1;
  int replica = 0;
  int max_halvings = 40;

  static SimConfig defaults(const Params& prm) {
    SimConfig cfg;
    cfg.dt = prm.log_q * prm.log_q / 3200.0;
    return cfg;
  }
};

struct step_budget_exhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mutable state of one sampled trajectory. The tree coordinate is kept in
/// lockstep with u: a vertex-form tree point means the path sits on that
/// bifurcation line, otherwise it is inside the strip below w.upper.
struct PathState {
  HtPoint point;
  double time = 0.0;
  long steps = 0;
  CounterRng rng;
};

PathState line_start(Tree& t, const Params& prm, NodeId v, double x, CounterRng rng);

bool on_line(const Tree& t, const PathState& st);

enum class Side { horizontal, vertical };

struct ExitSample {
  HtPoint exit_point;
  double exit_time = 0.0;
  NodeId hit_line = kNoNode;  // the v of L_v for horizontal exits
  Side side = Side::horizontal;
};

struct EmbeddedStep {
  int delta_level = 0;  // +-1
  std::optional<int> child_index;
  double duration = 0.0;
  double exit_x = 0.0;
};

struct StripChoice {
  int direction = 0;     // +1 up, -1 down
  int child_index = -1;  // set when direction = +1
};

/// One Euler-Maruyama attempt of length cfg.dt strictly inside a strip, in
/// (x, u) coordinates of the generator e^(2u) dxx + duu + (alpha-1) du.
/// A move crossing a bounding line is localized on the step segment by time
/// bisection (up to cfg.max_halvings) and the state is clamped onto the
/// line. Returns the line vertex hit, or kNoNode.
NodeId step_interior(Tree& t, const Params& prm, const SimConfig& cfg, PathState& st);

/// Skew resolution on a bifurcation line L_v: the next excursion goes up
/// with probability beta*p/(1 + beta*p) (child uniform), down otherwise.
/// The committed strip is entered by one displacement of magnitude
/// |N| sqrt(2 dt) plus the signed drift correction; a non-positive adjusted
/// magnitude leaves the state on the line (null excursion).
StripChoice resolve_line(Tree& t, const Params& prm, const SimConfig& cfg, PathState& st);

/// Runs from a line start until the path first reaches an adjacent line
/// (level +-1), returning direction, child choice, duration and exit
/// abscissa. The state is left on the line reached.
EmbeddedStep embedded_step(Tree& t, const Params& prm, const SimConfig& cfg, PathState& st);

/// Union-of-strips domain over a full finite subtree, optionally truncated
/// at |x| < r. Lines of interior vertices re-resolve; lines of boundary
/// vertices are horizontal exits; |x| = r is the vertical exit.
struct StripDomain {
  std::unordered_set<NodeId> verts;
  std::unordered_set<NodeId> interior;
  double r = std::numeric_limits<double>::infinity();
};

StripDomain star_domain(Tree& t, NodeId center, double r = std::numeric_limits<double>::infinity());
StripDomain subtree_domain(Tree& t, const std::vector<NodeId>& verts,
                           double r = std::numeric_limits<double>::infinity());

/// Simulates until the first boundary hit. Corner hits resolve to the
/// vertical side; overshoots are clamped to x = +-r.
ExitSample sample_exit(Tree& t, const Params& prm, const SimConfig& cfg, const StripDomain& dom, PathState& st);

/// Exit from the rectangle Omega_{v,r} (the star at v truncated at |x| < r).
ExitSample sample_exit_rect(Tree& t, const Params& prm, const SimConfig& cfg, const HtPoint& start, NodeId v,
                            double r, CounterRng& rng);

/// Exit from the strip union over a full subtree.
ExitSample sample_exit_star_union(Tree& t, const Params& prm, const SimConfig& cfg, const HtPoint& start,
                                  const std::vector<NodeId>& subtree, CounterRng& rng,
                                  double r = std::numeric_limits<double>::infinity());

/// Raw sums over embedded steps, mergeable across replicas.
struct DriftAccum {
  long long n = 0;
  double sum_y = 0, sum_yy = 0;
  double sum_t = 0, sum_tt = 0;
  double sum_yt = 0;

  void add(double y, double tau) {
    n += 1;
    sum_y += y;
    sum_yy += y * y;
    sum_t += tau;
    sum_tt += tau * tau;
    sum_yt += y * tau;
  }
  void merge(const DriftAccum& o) {
    n += o.n;
    sum_y += o.sum_y;
    sum_yy += o.sum_yy;
    sum_t += o.sum_t;
    sum_tt += o.sum_tt;
    sum_yt += o.sum_yt;
  }
};

struct DriftEstimate {
  double ell_hat = 0;
  double se = 0;
  double mean_y = 0, se_y = 0;
  double mean_tau = 0, se_tau = 0;
  long long n = 0;
};

/// Accumulates n embedded steps; increments are i.i.d., so each step is
/// sampled from a fresh start on the root line.
DriftAccum drift_accumulate(Tree& t, const Params& prm, const SimConfig& cfg, long n_steps);

/// ln q * mean(Y) / mean(tau) with a delta-method standard error.
DriftEstimate finalize_drift(const DriftAccum& acc, const Params& prm);

DriftEstimate estimate_drift(Tree& t, const Params& prm, const SimConfig& cfg, long n_steps);

struct McEstimate {
  double mean = 0;
  double se = 0;
  long long n = 0;
};

/// Monte Carlo mean of f over the exit distribution from the domain.
McEstimate dirichlet_mc(Tree& t, const Params& prm, const SimConfig& cfg, const HtPoint& start,
                        const StripDomain& dom, const std::function<double(const HtPoint&)>& f, long n);

/// Monte Carlo residual E[h(X_tau(1))] - h(z) for a start z on the line L_v
/// (exit from the full star at v).
McEstimate mu_harmonic_residual(Tree& t, const Params& prm, const SimConfig& cfg,
                                const std::function<double(const HtPoint&)>& h, const HtPoint& z, NodeId v, long n);

}  // namespace treebolic
