#include "treebolic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace treebolic {

double hyperbolic_distance(const PlanePoint& z1, const PlanePoint& z2) {
  if (!(z1.y > 0.0) || !(z2.y > 0.0)) throw std::domain_error("hyperbolic_distance: heights must be positive");
  const double dx = z1.x - z2.x;
  const double dy = z1.y - z2.y;
  const double arg = 1.0 + (dx * dx + dy * dy) / (2.0 * z1.y * z2.y);
  return std::acosh(std::max(1.0, arg));
}

HtPoint make_ht_point(Tree& t, const Params& prm, double x, double u, TreePoint w) {
  w = canonicalize(t, w);
  const double off = u / prm.log_q;
  if (std::abs(off - w.offset) > 1e-12 * std::max(1.0, std::abs(w.offset)))
    throw std::domain_error("ht point: u / ln q does not match the tree offset");
  return HtPoint{x, u, w};
}

HtPoint origin_point(Tree& t) { return HtPoint{0.0, 0.0, vertex_point(t, t.root())}; }

bool on_common_chain(Tree& t, TreePoint a, TreePoint b) {
  a = canonicalize(t, a);
  b = canonicalize(t, b);
  if (a.upper == b.upper) return true;
  if (a.offset > b.offset) std::swap(a, b);
  const int ha = t.height(a.upper);
  NodeId anc = b.upper;
  while (t.height(anc) > ha) anc = t.parent(anc);
  return anc == a.upper;
}

namespace {

// Golden-section minimization on [lo, hi]; the bracket is narrowed to width
// tol and the best objective value is returned.
template <typename F>
double golden_min(F&& f, double lo, double hi, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

}  // namespace

double ht_distance(Tree& t, const Params& prm, const HtPoint& p1, const HtPoint& p2) {
  const PlanePoint z1{p1.x, std::exp(p1.u)};
  const PlanePoint z2{p2.x, std::exp(p2.u)};
  TreePoint w1 = canonicalize(t, p1.w);
  TreePoint w2 = canonicalize(t, p2.w);
  if (on_common_chain(t, w1, w2)) return hyperbolic_distance(z1, z2);

  const NodeId c = t.confluent(base_vertex(t, w1), base_vertex(t, w2));
  const double yc = std::exp(prm.log_q * t.height(c));
  auto through_line = [&](double s) {
    const PlanePoint m{s, yc};
    return hyperbolic_distance(z1, m) + hyperbolic_distance(m, z2);
  };
  const double lo = std::min(p1.x, p2.x) - 1.0;
  const double hi = std::max(p1.x, p2.x) + 1.0;
  // Coarse scan to locate the basin, then golden section inside it.
  constexpr int kScan = 64;
  int best = 0;
  double bestv = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double s = lo + (hi - lo) * i / kScan;
    const double v = through_line(s);
    if (v < bestv) {
      bestv = v;
      best = i;
    }
  }
  const double a = lo + (hi - lo) * std::max(0, best - 1) / kScan;
  const double b = lo + (hi - lo) * std::min(kScan, best + 1) / kScan;
  return golden_min(through_line, a, b, 1e-10);
}

double phi_density(Tree& t, const Params& prm, const HtPoint& z) {
  // Canonical vertex form puts a line point at the top of the strip below
  // it, so the strip's upper vertex is always w.upper.
  const TreePoint w = canonicalize(t, z.w);
  const int hv = t.height(w.upper);
  return std::pow(prm.beta, hv) * std::exp(prm.alpha * z.u);
}

HtPoint horizontal_translate(const HtPoint& z, double b) { return HtPoint{z.x + b, z.u, z.w}; }

}  // namespace treebolic
