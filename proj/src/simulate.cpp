#include "treebolic/simulate.hpp"

#include <cmath>
#include <utility>

#include "treebolic/stats.hpp"

namespace treebolic {

PathState line_start(Tree& t, const Params& prm, NodeId v, double x, CounterRng rng) {
  PathState st;
  st.point = HtPoint{x, t.height(v) * prm.log_q, vertex_point(t, v)};
  st.rng = rng;
  return st;
}

bool on_line(const Tree& t, const PathState& st) { return is_vertex(t, st.point.w); }

namespace {

void budget_check(const SimConfig& cfg, PathState& st) {
  if (st.steps >= cfg.max_steps) throw step_budget_exhausted("simulate: step budget exhausted");
  st.steps += 1;
}

}  // namespace

NodeId step_interior(Tree& t, const Params& prm, const SimConfig& cfg, PathState& st) {
  if (on_line(t, st)) throw std::logic_error("step_interior: state is on a bifurcation line");
  budget_check(cfg, st);
  const NodeId up = st.point.w.upper;
  const int hv = t.height(up);
  const double u_hi = hv * prm.log_q;
  const double u_lo = (hv - 1) * prm.log_q;
  const double h = cfg.dt;
  const double n1 = st.rng.normal();
  const double n2 = st.rng.normal();
  const double du = (prm.alpha - 1.0) * h + std::sqrt(2.0 * h) * n2;
  const double dx = std::sqrt(2.0 * h) * std::exp(st.point.u) * n1;
  const double u1 = st.point.u + du;
  if (u1 > u_lo && u1 < u_hi) {
    st.point.x += dx;
    st.point.u = u1;
    st.point.w.offset = u1 / prm.log_q;
    st.time += h;
    return kNoNode;
  }
  // Crossing proposed: localize the crossing on the step segment by time
  // bisection, then clamp onto the line.
  const double target = du > 0 ? u_hi : u_lo;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < cfg.max_halvings; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double um = st.point.u + du * mid;
    if (std::abs(um - target) <= cfg.line_tol) {
      lo = hi = mid;
      break;
    }
    if ((du > 0) == (um < target))
      lo = mid;
    else
      hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const NodeId hit = du > 0 ? up : t.parent(up);
  st.point.x += dx * theta;
  st.point.u = t.height(hit) * prm.log_q;
  st.point.w = vertex_point(t, hit);
  st.time += h * theta;
  return hit;
}

StripChoice resolve_line(Tree& t, const Params& prm, const SimConfig& cfg, PathState& st) {
  if (!on_line(t, st)) throw std::logic_error("resolve_line: state is not on a bifurcation line");
  budget_check(cfg, st);
  const NodeId v = st.point.w.upper;
  const double bp = prm.beta * prm.p;
  const double p_up = bp / (1.0 + bp);
  StripChoice choice;
  choice.direction = st.rng.uniform() <= p_up ? +1 : -1;
  NodeId strip_upper = v;
  if (choice.direction > 0) {
    choice.child_index = st.rng.uniform_int(prm.p);
    strip_upper = t.child(v, choice.child_index);
  }
  const double h = cfg.dt;
  const double n1 = st.rng.normal();
  const double n2 = st.rng.normal();
  const double u_line = t.height(v) * prm.log_q;
  double m = std::abs(n2) * std::sqrt(2.0 * h) + choice.direction * (prm.alpha - 1.0) * h;
  st.time += h;
  if (m <= 0.0) return choice;  // excursion failed to leave the line
  // Far-line overshoot would need |N| ~ sqrt(strips per step); cap anyway.
  if (m >= prm.log_q) m = prm.log_q - cfg.line_tol;
  st.point.u = u_line + choice.direction * m;
  st.point.x += std::sqrt(2.0 * h) * std::exp(u_line) * n1;
  st.point.w = TreePoint{strip_upper, st.point.u / prm.log_q};
  return choice;
}

EmbeddedStep embedded_step(Tree& t, const Params& prm, const SimConfig& cfg, PathState& st) {
  if (!on_line(t, st)) throw std::logic_error("embedded_step: state is not on a bifurcation line");
  const int h0 = t.height(st.point.w.upper);
  const double t0 = st.time;
  for (;;) {
    const StripChoice choice = resolve_line(t, prm, cfg, st);
    if (on_line(t, st)) continue;
    NodeId hit = kNoNode;
    while (hit == kNoNode) hit = step_interior(t, prm, cfg, st);
    const int dh = t.height(hit) - h0;
    if (dh == 0) continue;  // back at the starting level
    EmbeddedStep out;
    out.delta_level = dh;
    if (dh > 0) out.child_index = choice.child_index;
    out.duration = st.time - t0;
    out.exit_x = st.point.x;
    return out;
  }
}

StripDomain star_domain(Tree& t, NodeId center, double r) {
  StripDomain dom;
  dom.r = r;
  dom.verts.insert(t.parent(center));
  dom.verts.insert(center);
  for (int i = 0; i < t.branching(); ++i) dom.verts.insert(t.child(center, i));
  dom.interior.insert(center);
  return dom;
}

StripDomain subtree_domain(Tree& t, const std::vector<NodeId>& verts, double r) {
  StripDomain dom;
  dom.r = r;
  validate_full_subtree(t, verts, &dom.interior);
  dom.verts.insert(verts.begin(), verts.end());
  return dom;
}

namespace {

std::optional<ExitSample> vertical_exit(const StripDomain& dom, PathState& st) {
  if (std::abs(st.point.x) >= dom.r) {
    st.point.x = std::copysign(dom.r, st.point.x);
    return ExitSample{st.point, st.time, kNoNode, Side::vertical};
  }
  return std::nullopt;
}

void validate_start(Tree& t, const StripDomain& dom, const PathState& st) {
  if (std::abs(st.point.x) >= dom.r) throw std::invalid_argument("sample_exit: start outside |x| < r");
  if (on_line(t, st)) {
    if (!dom.interior.count(st.point.w.upper))
      throw std::invalid_argument("sample_exit: start line is not interior to the domain");
  } else {
    const NodeId up = st.point.w.upper;
    if (!dom.verts.count(up) || !dom.verts.count(t.parent(up)))
      throw std::invalid_argument("sample_exit: start strip is not inside the domain");
  }
}

}  // namespace

ExitSample sample_exit(Tree& t, const Params& prm, const SimConfig& cfg, const StripDomain& dom, PathState& st) {
  validate_start(t, dom, st);
  for (;;) {
    if (on_line(t, st)) {
      const NodeId v = st.point.w.upper;
      if (!dom.interior.count(v)) return ExitSample{st.point, st.time, v, Side::horizontal};
      resolve_line(t, prm, cfg, st);
      if (auto e = vertical_exit(dom, st)) return *e;
    } else {
      step_interior(t, prm, cfg, st);
      // Corner hits resolve to the vertical side.
      if (auto e = vertical_exit(dom, st)) return *e;
    }
  }
}

ExitSample sample_exit_rect(Tree& t, const Params& prm, const SimConfig& cfg, const HtPoint& start, NodeId v,
                            double r, CounterRng& rng) {
  const StripDomain dom = star_domain(t, v, r);
  PathState st{start, 0.0, 0, rng};
  const ExitSample e = sample_exit(t, prm, cfg, dom, st);
  rng = st.rng;
  return e;
}

ExitSample sample_exit_star_union(Tree& t, const Params& prm, const SimConfig& cfg, const HtPoint& start,
                                  const std::vector<NodeId>& subtree, CounterRng& rng, double r) {
  const StripDomain dom = subtree_domain(t, subtree, r);
  PathState st{start, 0.0, 0, rng};
  const ExitSample e = sample_exit(t, prm, cfg, dom, st);
  rng = st.rng;
  return e;
}

DriftAccum drift_accumulate(Tree& t, const Params& prm, const SimConfig& cfg, long n_steps) {
  DriftAccum acc;
  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(cfg.replica));
  const NodeId o = t.root();
  for (long i = 0; i < n_steps; ++i) {
    PathState st{HtPoint{0.0, 0.0, vertex_point(t, o)}, 0.0, 0, rng};
    const EmbeddedStep es = embedded_step(t, prm, cfg, st);
    rng = st.rng;
    acc.add(static_cast<double>(es.delta_level), es.duration);
  }
  return acc;
}

DriftEstimate finalize_drift(const DriftAccum& acc, const Params& prm) {
  DriftEstimate est;
  est.n = acc.n;
  if (acc.n < 2) return est;
  const double n = static_cast<double>(acc.n);
  est.mean_y = acc.sum_y / n;
  est.mean_tau = acc.sum_t / n;
  const double var_y = (acc.sum_yy - n * est.mean_y * est.mean_y) / (n - 1.0);
  const double var_t = (acc.sum_tt - n * est.mean_tau * est.mean_tau) / (n - 1.0);
  const double cov = (acc.sum_yt - n * est.mean_y * est.mean_tau) / (n - 1.0);
  est.se_y = std::sqrt(std::max(0.0, var_y) / n);
  est.se_tau = std::sqrt(std::max(0.0, var_t) / n);
  est.ell_hat = prm.log_q * est.mean_y / est.mean_tau;
  // Delta method for g(Y, T) = ln q * Y / T.
  const double gy = prm.log_q / est.mean_tau;
  const double gt = -prm.log_q * est.mean_y / (est.mean_tau * est.mean_tau);
  const double var = (gy * gy * var_y + gt * gt * var_t + 2.0 * gy * gt * cov) / n;
  est.se = std::sqrt(std::max(0.0, var));
  return est;
}

DriftEstimate estimate_drift(Tree& t, const Params& prm, const SimConfig& cfg, long n_steps) {
  if (n_steps < 1000) throw std::invalid_argument("estimate_drift: need at least 1e3 embedded steps");
  return finalize_drift(drift_accumulate(t, prm, cfg, n_steps), prm);
}

McEstimate dirichlet_mc(Tree& t, const Params& prm, const SimConfig& cfg, const HtPoint& start,
                        const StripDomain& dom, const std::function<double(const HtPoint&)>& f, long n) {
  RunningStat acc;
  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(cfg.replica));
  for (long i = 0; i < n; ++i) {
    PathState st{start, 0.0, 0, rng};
    const ExitSample e = sample_exit(t, prm, cfg, dom, st);
    rng = st.rng;
    acc.add(f(e.exit_point));
  }
  return McEstimate{acc.mean, acc.stderr_mean(), acc.n};
}

McEstimate mu_harmonic_residual(Tree& t, const Params& prm, const SimConfig& cfg,
                                const std::function<double(const HtPoint&)>& h, const HtPoint& z, NodeId v, long n) {
  const StripDomain dom = star_domain(t, v);
  const McEstimate mc = dirichlet_mc(t, prm, cfg, z, dom, h, n);
  return McEstimate{mc.mean - h(z), mc.se, mc.n};
}

}  // namespace treebolic
