#include "treebolic/kernels.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace treebolic {

namespace {

// Signed integer power. Exact squaring for moderate exponents; log-space
// beyond +-600 to avoid overflow.
double pow_si(double base, long n) {
  if (n == 0) return 1.0;
  if (n > 600 || n < -600) return std::exp(static_cast<double>(n) * std::log(base));
  const bool neg = n < 0;
  unsigned long e = static_cast<unsigned long>(neg ? -n : n);
  double acc = 1.0, b = base;
  while (e) {
    if (e & 1ul) acc *= b;
    b *= b;
    e >>= 1;
  }
  return neg ? 1.0 / acc : acc;
}

}  // namespace

std::string BoundaryParam::label() const {
  switch (kind) {
    case Kind::varpi:
      return "varpi";
    case Kind::tree_end: {
      std::ostringstream os;
      os << "end:";
      for (std::size_t i = 0; i < end->word().size(); ++i) {
        if (i) os << '.';
        os << end->word()[i];
      }
      return os.str();
    }
    case Kind::real: {
      std::ostringstream os;
      os << "zeta=" << zeta;
      return os.str();
    }
    case Kind::infinity:
      return "infinity";
    case Kind::one:
      return "one";
  }
  return "?";
}

double rw_transition(Tree& t, NodeId v, NodeId u, const Params& prm) {
  const TreeWalkLaw law = TreeWalkLaw::from(prm);
  const int hv = t.height(v), hu = t.height(u);
  if (hu == hv - 1 && t.parent(v) == u) return law.down_prob;
  if (hu == hv + 1 && t.parent(u) == v) return law.up_prob_per_child;
  return 0.0;
}

double lambda_interp(double s, const Params& prm) {
  if (s < -1e-12 || s > 1.0 + 1e-12) throw std::domain_error("lambda_interp: s must lie in [0, 1]");
  s = std::min(1.0, std::max(0.0, s));
  if (std::abs(prm.alpha - 1.0) < 1e-9) return s;
  const double c = (prm.alpha - 1.0) * prm.log_q;
  return std::expm1(c * s) / std::expm1(c);
}

double lambda_interp_derivative(double s, const Params& prm) {
  if (std::abs(prm.alpha - 1.0) < 1e-9) return 1.0;
  const double c = (prm.alpha - 1.0) * prm.log_q;
  return c * std::exp(c * s) / std::expm1(c);
}

double extend_tree_harmonic(Tree& t, const std::function<double(NodeId)>& f, TreePoint w, const Params& prm) {
  w = canonicalize(t, w);
  const double s = static_cast<double>(t.height(w.upper)) - w.offset;
  if (s == 0.0) return f(w.upper);
  const double lam = lambda_interp(s, prm);
  return lam * f(t.parent(w.upper)) + (1.0 - lam) * f(w.upper);
}

double martin_kernel_tree(Tree& t, NodeId v, const BoundaryParam& xi, const Params& prm) {
  const MartinConstants mc = MartinConstants::from(prm);
  const int hv = t.height(v);
  switch (xi.kind) {
    case BoundaryParam::Kind::varpi:
      return pow_si(mc.b, -hv);
    case BoundaryParam::Kind::tree_end: {
      const NodeId cv = confluent_with_end(t, v, *xi.end);
      const NodeId co = confluent_with_end(t, t.root(), *xi.end);
      return pow_si(mc.b, -hv) * pow_si(mc.c, t.height(co) - t.height(cv));
    }
    default:
      throw std::invalid_argument("martin_kernel_tree: parameter is not a tree end");
  }
}

double martin_kernel_tree_point(Tree& t, const TreePoint& w, const BoundaryParam& xi, const Params& prm) {
  return extend_tree_harmonic(
      t, [&](NodeId v) { return martin_kernel_tree(t, v, xi, prm); }, w, prm);
}

double poisson_kernel_half_plane(double x, double y, const BoundaryParam& zeta, double alpha) {
  if (!(y > 0.0)) throw std::domain_error("poisson_kernel: y must be positive");
  const double e_inf = std::max(1.0 - alpha, 0.0);
  switch (zeta.kind) {
    case BoundaryParam::Kind::infinity:
      return std::pow(y, e_inf);
    case BoundaryParam::Kind::real: {
      const double z = zeta.zeta;
      const double e = std::max(0.5 * alpha, 1.0 - 0.5 * alpha);
      const double dx = z - x;
      return std::pow(y, e_inf) * std::pow((z * z + 1.0) / (dx * dx + y * y), e);
    }
    default:
      throw std::invalid_argument("poisson_kernel: parameter is not a half-plane boundary point");
  }
}

double minimal_harmonic_ht(Tree& t, const HtPoint& z, const BoundaryParam& xi, const Params& prm) {
  if (std::abs(prm.beta * prm.p - 1.0) > 1e-12)
    throw std::domain_error("minimal_harmonic_ht: requires beta * p = 1");
  switch (xi.kind) {
    case BoundaryParam::Kind::one:
      if (std::abs(prm.alpha - 1.0) > 1e-12)
        throw std::domain_error("minimal_harmonic_ht: constant kernel requires alpha = 1");
      return 1.0;
    case BoundaryParam::Kind::real:
    case BoundaryParam::Kind::infinity:
      return poisson_kernel_half_plane(z.x, std::exp(z.u), xi, prm.alpha);
    case BoundaryParam::Kind::varpi:
    case BoundaryParam::Kind::tree_end:
      return martin_kernel_tree_point(t, z.w, xi, prm);
  }
  throw std::invalid_argument("minimal_harmonic_ht: bad parameter");
}

bool is_minimal_parameter(const BoundaryParam& xi, const Params& prm) {
  switch (xi.kind) {
    case BoundaryParam::Kind::tree_end:
    case BoundaryParam::Kind::real:
      return true;
    case BoundaryParam::Kind::one:
      return std::abs(prm.alpha - 1.0) <= 1e-12;
    default:
      return false;
  }
}

HtFunction ht_kernel_function(Tree& t, const BoundaryParam& xi, const Params& prm) {
  Tree* tp = &t;
  return [tp, xi, prm](const HtPoint& z) { return minimal_harmonic_ht(*tp, z, xi, prm); };
}

HtFunction decompose_sum(std::function<double(double, double)> h_plane, std::function<double(const TreePoint&)> h_tree) {
  return [h_plane = std::move(h_plane), h_tree = std::move(h_tree)](const HtPoint& z) {
    double s = 0.0;
    if (h_plane) s += h_plane(z.x, std::exp(z.u));
    if (h_tree) s += h_tree(z.w);
    return s;
  };
}

LiouvilleVerdict liouville_predicate(const Params& prm) {
  const double d = prm.a - 1.0;
  if (std::abs(d) <= 1e-12) return LiouvilleVerdict{true, 0};
  return LiouvilleVerdict{false, d > 0 ? 1 : -1};
}

}  // namespace treebolic
